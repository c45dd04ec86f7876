#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace hrdair;
using namespace testing_support;

namespace {

/// A network small enough that a full trial takes a fraction of a second.
SystemConfig quick_config() {
  SystemConfig cfg;
  cfg.agents = 6;
  cfg.ris_elements = 16;
  cfg.active_elements = 2;
  cfg.total_bits = 15;
  cfg.max_block_bits = 5;
  cfg.rounds = 8;
  cfg.max_outer_iters = 5;
  cfg.finalize();
  return cfg;
}

std::string csv_of(const std::vector<TrialResult>& rows) {
  std::ostringstream os;
  write_csv(os, rows, true);
  return os.str();
}

}  // namespace

TEST(Features, NoiselessLocalCopies) {
  const auto g = generate_task_gmm(6, 3, 1.0, 1.0, 1);
  CounterRng rng(1);
  const auto fs = generate_features(g, 5, 0.0, rng);
  for (int k = 0; k < 5; ++k) EXPECT_EQ((fs.local.col(k) - fs.global).norm(), 0.0);
  EXPECT_GE(fs.label, 0);
  EXPECT_LT(fs.label, 3);
}

TEST(Features, LocalMeanConvergesToGlobal) {
  const auto g = generate_task_gmm(3, 2, 1.0, 1.0, 2);
  CounterRng rng(2);
  const int K = 10000;
  const double s2 = 0.5;
  const auto fs = generate_features(g, K, s2, rng);
  const VectorXd mean = fs.local.rowwise().mean();
  for (int w = 0; w < 3; ++w) EXPECT_NEAR(mean(w), fs.global(w), 3 * std::sqrt(s2 / K));
}

TEST(Correlation, Modes) {
  EXPECT_EQ(uniform_correlation(4, 0.0), MatrixXd::Identity(4, 4));
  EXPECT_EQ(uniform_correlation(4, 1.0), MatrixXd::Ones(4, 4));
  EXPECT_THROW(uniform_correlation(4, 1.2), ParameterError);
  CounterRng rng(3);
  VectorXd f(7);
  for (int w = 0; w < 7; ++w) f(w) = rng.normal();
  const MatrixXd same = f.replicate(1, 5);
  const auto u = estimate_correlation(CorrelationMode::kFeatures, 5, 0.0, &same);
  EXPECT_NEAR((u - MatrixXd::Ones(5, 5)).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  EXPECT_THROW(estimate_correlation(CorrelationMode::kFeatures, 5, 0.0, nullptr), ParameterError);
  MatrixXd noisy = same;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy(i) += rng.normal();
  EXPECT_TRUE(is_valid_correlation(feature_correlation(noisy)));
}

TEST(AggregationMse, Examples) {
  std::vector<VectorXd> x = {VectorXd::Constant(3, 2.0), VectorXd::Constant(2, -1.0)};
  EXPECT_EQ(normalized_aggregation_mse(x, x), kExactAggregationDb);
  std::vector<VectorXd> zero = {VectorXd::Zero(3), VectorXd::Zero(2)};
  EXPECT_NEAR(normalized_aggregation_mse(zero, x), 0.0, 1e-12);
  std::vector<VectorXd> off = {x[0] * 1.1, x[1] * 1.1};
  EXPECT_NEAR(normalized_aggregation_mse(off, x), -20.0, 1e-9);
  EXPECT_THROW(normalized_aggregation_mse(x, zero), ParameterError);
}

TEST(Metrics, RankStatistics) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {10, 20, 25, 100}, c = {4, 3, 2, 1};
  EXPECT_NEAR(spearman(a, b), 1.0, 1e-12);
  EXPECT_NEAR(spearman(a, c), -1.0, 1e-12);
  EXPECT_NEAR(pearson(a, a), 1.0, 1e-12);
  const auto r = ranks({5, 1, 5, 2});
  EXPECT_EQ(r, (std::vector<double>{3.5, 1, 3.5, 2}));
  MeanAccumulator m;
  for (double v : {1.0, 2.0, 3.0}) m.add(v);
  EXPECT_DOUBLE_EQ(m.mean(), 2.0);
  EXPECT_NEAR(m.se(), 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(Obda, SignRuleAndUnanimousVotes) {
  EXPECT_EQ(sign_bit(0.0), 1.0);
  EXPECT_EQ(sign_bit(-0.0), 1.0);
  EXPECT_EQ(sign_bit(-1e-300), -1.0);
  // even K with an exact tie on one dimension
  EXPECT_EQ(sign_bit(1.0 + 1.0 - 1.0 - 1.0), 1.0);

  CounterRng rng(4);
  const int K = 4, W = 9;
  const auto ch = unit_channels(K, 3, 0, rng);
  const HybridRisState none(0, 0);
  const VectorXcd b = complex_normal_vector(rng, 3);
  const VectorXcd nu = aligned_gains(ch, none, b).cwiseInverse();
  VectorXd f(W);
  for (int w = 0; w < W; ++w) f(w) = rng.normal();
  MatrixXcd sig(W, K);
  for (int k = 0; k < K; ++k)
    for (int w = 0; w < W; ++w) sig(w, k) = sign_bit(f(w));
  const VectorXcd y = simulate_uplink(sig, nu, ch, none, b, {}, rng);
  for (int w = 0; w < W; ++w) EXPECT_EQ(sign_bit(y(w).real()), sign_bit(f(w)));
}

TEST(Obda, AbsMeanMatchesSampling) {
  const auto g = generate_task_gmm(3, 4, 1.0, 0.7, 5);
  CounterRng rng(5);
  const int n = 200000;
  VectorXd acc = VectorXd::Zero(3), acc2 = VectorXd::Zero(3);
  for (int i = 0; i < n; ++i) {
    const VectorXd a = g.sample(rng).first.cwiseAbs();
    acc += a;
    acc2 += a.cwiseAbs2();
  }
  const VectorXd m = mixture_abs_mean(g.means(), g.cov_diag());
  for (int w = 0; w < 3; ++w) {
    const double mean = acc(w) / n, se = std::sqrt((acc2(w) / n - mean * mean) / n);
    EXPECT_NEAR(m(w), mean, 3 * se);
  }
}

TEST(Truncation, MaskAndInversion) {
  VectorXcd g(5);
  g << 1.0, cd(0, 0.2), 3.0, -0.5, 2.0;
  auto m = truncation_mask(g, 0);
  EXPECT_EQ(std::count(m.begin(), m.end(), 1), 5);
  m = truncation_mask(g, 40);
  EXPECT_EQ(m, (std::vector<char>{1, 0, 1, 0, 1}));
  m = truncation_mask(g, 100);
  EXPECT_EQ(std::count(m.begin(), m.end(), 1), 0);

  auto cfg = small_config(5, 4, 0, 0);
  cfg.md_truncation_pct = 0;
  CounterRng rng(6);
  const auto ch = unit_channels(5, 4, 0, rng);
  const auto d = design_truncated_inversion(ch, cfg, std::sqrt(cfg.max_coeff_sq()), cfg.signal_scale());
  EXPECT_EQ(d.active_count(), 5);
  const VectorXcd gains = ch.ae.transpose() * d.b;
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(std::abs(d.nu(k) * gains(k) - 1.0), 0.0, 1e-12);
    EXPECT_LE(std::norm(d.nu(k)), cfg.max_coeff_sq() * (1 + 1e-12));
  }

  cfg.md_truncation_pct = 100;
  const auto off = design_truncated_inversion(ch, cfg, std::sqrt(cfg.max_coeff_sq()), cfg.signal_scale());
  EXPECT_EQ(off.active_count(), 0);
  EXPECT_EQ(off.nu.norm(), 0.0);
  // nothing is transmitted, so detection sees pure noise and returns a near-zero aggregate
  const CodebookPair& cb = *CodebookLibrary::global().get(4, 16, 3, 1);
  const VectorXcd y = simulate_uplink(MatrixXcd::Ones(16, 5), off.nu, ch, HybridRisState(0, 0), off.b,
                                      {0, cfg.en_noise_w}, rng);
  EXPECT_LT(detect_aggregate(y, cb.p, 5).norm(), 1e-3);
}

TEST(Baselines, UniformBits) {
  EXPECT_EQ(uniform_bits(40, 5), VectorXi::Constant(5, 8));
  VectorXi b(3);
  b << 4, 3, 3;
  EXPECT_EQ(uniform_bits(10, 3), b);
}

TEST(Trial, DeterministicAcrossRuns) {
  const auto cfg = quick_config();
  const std::vector<Scheme> all(kAllSchemes.begin(), kAllSchemes.end());
  const auto a = run_trials(cfg, all, 17), b = run_trials(cfg, all, 17);
  EXPECT_EQ(csv_of(a), csv_of(b));
  const auto c = run_trials(cfg, all, 18);
  EXPECT_NE(csv_of(a), csv_of(c));
}

TEST(Trial, SchemeSpecificFields) {
  const auto cfg = quick_config();
  const std::vector<Scheme> all(kAllSchemes.begin(), kAllSchemes.end());
  const auto rows = run_trials(cfg, all, 21);
  for (const auto& r : rows) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
    EXPECT_GE(r.h_mc, -3 * r.h_mc_se);
    EXPECT_LE(r.h_mc, std::log(double(cfg.classes)) + 3 * r.h_mc_se + 1e-12);
    switch (r.scheme) {
      case Scheme::kIdeal:
        EXPECT_FALSE(r.agg_mse_db.has_value());
        break;
      case Scheme::kPfa:
        EXPECT_EQ(*r.agg_mse_db, kExactAggregationDb);
        EXPECT_EQ(r.bits.sum(), cfg.total_bits);
        break;
      case Scheme::kJqapb:
      case Scheme::kFullPower:
        EXPECT_TRUE(r.outer_iters.has_value());
        EXPECT_EQ(r.bits.sum(), cfg.total_bits);
        [[fallthrough]];
      default:
        ASSERT_TRUE(r.agg_mse_db.has_value());
        EXPECT_TRUE(std::isfinite(*r.agg_mse_db));
    }
  }
  // jqapb and pfa share one design
  EXPECT_EQ(rows[0].bits, rows[4].bits);
  EXPECT_EQ(*rows[0].g, *rows[4].g);
}

TEST(Trial, IdealAccuracyIsClassifierOnExactMean) {
  const auto cfg = quick_config();
  const auto r = run_trial(cfg, Scheme::kIdeal, 33);
  const auto ctx = make_trial_context(cfg, 33);
  int hits = 0;
  for (int i = 0; i < cfg.rounds; ++i) {
    CounterRng f = ctx.rng.substream(Stream::kFeatures, static_cast<std::uint64_t>(i));
    const auto fs = generate_features(*ctx.gmm, cfg.agents, cfg.feature_noise_var, f);
    hits += classify(fs.local.rowwise().mean(), *ctx.gmm, cfg.feature_noise_var) == fs.label;
  }
  EXPECT_DOUBLE_EQ(r.accuracy, double(hits) / cfg.rounds);
}

TEST(Trial, FullPowerDesignIsAlignedAtFullPower) {
  const auto cfg = quick_config();
  const auto ctx = make_trial_context(cfg, 41);
  const auto d = design_scheme(ctx, Scheme::kFullPower);
  const VectorXcd g = aligned_gains(d.channels, d.ris, d.b);
  for (int k = 0; k < cfg.agents; ++k) {
    EXPECT_NEAR(std::abs(d.nu(k)), std::sqrt(cfg.max_coeff_sq()), 1e-12 * std::abs(d.nu(k)));
    EXPECT_NEAR(std::arg(d.nu(k) * g(k)), 0.0, 1e-9);
  }
  const auto md = design_scheme(ctx, Scheme::kMdAirComp), ob = design_scheme(ctx, Scheme::kObda);
  EXPECT_EQ((md.nu - ob.nu).norm(), 0.0);
  EXPECT_EQ((md.b - ob.b).norm(), 0.0);
  EXPECT_EQ(md.bits, uniform_bits(cfg.total_bits, cfg.blocks()));
}

TEST(Trial, FeatureCorrelationMode) {
  auto cfg = quick_config();
  cfg.correlation_mode = 2;
  cfg.finalize();
  const auto ctx = make_trial_context(cfg, 5);
  EXPECT_TRUE(is_valid_correlation(ctx.u));
  EXPECT_LT(ctx.u.minCoeff(), 1.0);
  const auto r = run_trial(cfg, Scheme::kJqapb, 5);
  EXPECT_FALSE(r.epsilon.has_value());
}

TEST(Csv, ColumnsAndEmptyOptionals) {
  const auto cfg = quick_config();
  const auto rows = run_trials(cfg, {Scheme::kIdeal, Scheme::kPfa}, 3);
  std::istringstream in(csv_of(rows));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# ", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line,
            "scheme,trial,seed,K,B,J,pA_dbm,N,Na,epsilon,G,h_low,h_mc,h_mc_se,accuracy,agg_mse_db,outer_iters,wall_ms,"
            "sigmaF2");
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 2u);
  auto field = [](const std::string& l, int i) {
    std::stringstream ss(l);
    std::string f;
    for (int j = 0; j <= i; ++j) std::getline(ss, f, ',');
    return f;
  };
  EXPECT_EQ(field(lines[0], 0), "ideal");
  EXPECT_EQ(field(lines[0], 15), "");  // agg_mse_db absent
  EXPECT_EQ(field(lines[1], 15), "-120");
  EXPECT_EQ(field(lines[1], 17), "");  // wall_ms omitted
  EXPECT_EQ(field(lines[1], 3), "6");
}

TEST(Sweep, ParsingAndKeys) {
  const auto s = parse_sweep("K=8, 16,24");
  EXPECT_EQ(s.key, "K");
  EXPECT_EQ(s.values, (std::vector<std::string>{"8", "16", "24"}));
  EXPECT_TRUE(parse_sweep("").key.empty());
  EXPECT_THROW(parse_sweep("K"), ConfigError);
  EXPECT_THROW(parse_sweep("K=8,,16"), ConfigError);
  EXPECT_THROW(apply_sweep_value(quick_config(), "M", "8"), ConfigError);
  EXPECT_THROW(apply_sweep_value(quick_config(), "K", "zero"), ConfigError);
  EXPECT_EQ(apply_sweep_value(quick_config(), "N", "32").active_elements, 4);
  EXPECT_DOUBLE_EQ(apply_sweep_value(quick_config(), "epsilon", "0.25").correlation_eps, 0.25);
  EXPECT_NEAR(apply_sweep_value(quick_config(), "pA_dbm", "10").agent_power_w, 0.01, 1e-15);
}

TEST(Sweep, RowOrderAndReproducibility) {
  auto cfg = quick_config();
  cfg.rounds = 3;
  const auto spec = parse_sweep("K=4,6");
  const auto rows = run_sweep(cfg, {Scheme::kIdeal, Scheme::kJqapb}, 2, 9, spec);
  ASSERT_EQ(rows.size(), 8u);
  const int order[8][3] = {{0, 4, 0}, {0, 4, 1}, {0, 6, 0}, {0, 6, 1}, {1, 4, 0}, {1, 4, 1}, {1, 6, 0}, {1, 6, 1}};
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(rows[i].scheme, order[i][0] ? Scheme::kJqapb : Scheme::kIdeal);
    EXPECT_EQ(rows[i].config.agents, order[i][1]);
    EXPECT_EQ(rows[i].trial, order[i][2]);
    EXPECT_EQ(rows[i].seed, trial_seed(9, order[i][2]));
  }
  const auto one = run_sweep(cfg, {Scheme::kJqapb}, 1, 9, parse_sweep("K=6"));
  EXPECT_EQ(csv_of({one[0]}), csv_of({rows[6]}));
}

#ifdef HRDAIR_SIMULATE_PATH
namespace {

int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string file = testing::TempDir() + "cli_out.txt";
  const std::string cmd = std::string(HRDAIR_SIMULATE_PATH) + " " + args + " > " + file + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  if (out) {
    std::ifstream f(file);
    *out = std::string(std::istreambuf_iterator<char>(f), {});
  }
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const std::string cfg = testing::TempDir() + "quick.cfg";
  {
    std::ofstream f(cfg);
    f << "K = 4\nN = 8\nNa = 1\nB = 10\nmax_block_bits = 4\nrounds = 2\nmax_outer_iters = 3\n";
  }
  std::string out;
  EXPECT_EQ(run_cli("--config " + cfg + " --scheme jqapb,ideal --trials 1 --omit-timing", &out), 0);
  EXPECT_NE(out.find("scheme,trial,seed"), std::string::npos);
  EXPECT_NE(out.find("jqapb,0,"), std::string::npos);
  std::string again;
  run_cli("--config " + cfg + " --scheme jqapb,ideal --trials 1 --omit-timing", &again);
  EXPECT_EQ(out, again);

  EXPECT_EQ(run_cli("--config " + cfg + " --sweep M=4,8"), 2);
  EXPECT_EQ(run_cli("--config " + cfg + " --scheme nope"), 2);
  EXPECT_EQ(run_cli("--config " + cfg + " --correlation-eps 1.5"), 2);
  EXPECT_EQ(run_cli("--config /nonexistent/file.cfg"), 2);
  const std::string bad = testing::TempDir() + "bad.cfg";
  {
    std::ofstream f(bad);
    f << "N = 8\nNa = 8\nsigmaR2_dbm = 20\n";  // amplification noise alone exceeds P_R
  }
  EXPECT_EQ(run_cli("--config " + bad), 2);
}
#endif
