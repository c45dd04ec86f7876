#pragma once

#include "hrdair/codec/aggregate.hpp"
#include "hrdair/codec/blocks.hpp"
#include "hrdair/codec/codebook.hpp"
#include "hrdair/codec/detection.hpp"
#include "hrdair/harness/baselines.hpp"
#include "hrdair/harness/correlation.hpp"
#include "hrdair/harness/features.hpp"
#include "hrdair/harness/metrics.hpp"
#include "hrdair/harness/schemes.hpp"
#include "hrdair/opt/jqapb.hpp"
#include "hrdair/theory/classifier.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hrdair {

struct TrialResult {
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::kJqapb;
  int trial = 0;
  SystemConfig config;
  std::optional<double> epsilon;  // uniform-correlation eps, absent for feature-based correlation
  std::optional<double> g;
  std::optional<double> h_low;
  double h_mc = 0.0;
  double h_mc_se = 0.0;
  double accuracy = 0.0;
  std::optional<double> agg_mse_db;
  std::optional<int> outer_iters;
  double wall_ms = 0.0;
  VectorXi bits;  // per-block allocation (empty for obda / ideal)
};

/// Everything a scheme decides before inference rounds start.
struct TransceiverDesign {
  ChannelSet channels;
  HybridRisState ris;
  VectorXcd nu;
  VectorXcd b;
  VectorXi bits;
  std::vector<char> active;  // agents that transmit
  LloydInit codebook_init = LloydInit::kRandomSamples;
  std::optional<double> g;
  std::optional<double> h_low;
  std::optional<int> outer_iters;
  double design_ms = 0.0;

  int active_count() const { return static_cast<int>(std::count(active.begin(), active.end(), 1)); }
};

namespace detail {

inline TransceiverDesign design_from_state(const ChannelSet& ch, const OptimizationState& s, const Problem& p) {
  TransceiverDesign d;
  d.channels = ch;
  d.ris = s.ris;
  d.nu = s.nu;
  d.b = s.b;
  d.bits = s.integer_bits();
  d.active.assign(ch.agents(), 1);
  const SurrogateReport rep = state_surrogate(p, s);
  d.g = rep.g;
  d.h_low = rep.h_low;
  d.outer_iters = s.outer_iters;
  return d;
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Per-trial inputs shared by all schemes.
struct TrialContext {
  SystemConfig cfg;
  std::uint64_t seed = 0;
  std::shared_ptr<const GmmModel> gmm;
  ChannelSet channels;
  CorrelationMatrix u;
  CounterRng rng;
};

inline std::shared_ptr<const GmmModel> task_gmm(const SystemConfig& cfg) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double, double, std::uint64_t>, std::shared_ptr<const GmmModel>> cache;
  const auto key = std::make_tuple(cfg.feature_dim, cfg.classes, cfg.mean_scale, cfg.class_variance, cfg.task_seed);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_shared<GmmModel>(generate_task_gmm(cfg))).first;
  return it->second;
}

inline TrialContext make_trial_context(const SystemConfig& cfg, std::uint64_t seed) {
  TrialContext c{cfg, seed, task_gmm(cfg), {}, {}, CounterRng(seed)};
  CounterRng chan = c.rng.substream(Stream::kChannels);
  c.channels = generate_channels(cfg, chan);
  if (cfg.correlation_mode == 1) {
    c.u = uniform_correlation(cfg.agents, cfg.correlation_eps);
  } else {
    // pilot observation of the local features, independent of the inference rounds
    CounterRng pilot = c.rng.substream(Stream::kFeatures, ~std::uint64_t{0});
    const FeatureSample fs = generate_features(*c.gmm, cfg.agents, cfg.feature_noise_var, pilot);
    c.u = feature_correlation(fs.local);
  }
  return c;
}

inline TransceiverDesign design_scheme(const TrialContext& ctx, Scheme scheme) {
  const auto t0 = std::chrono::steady_clock::now();
  const SystemConfig& cfg = ctx.cfg;
  TransceiverDesign d;
  switch (scheme) {
    case Scheme::kJqapb:
    case Scheme::kPfa:
    case Scheme::kFullPower: {
      const Problem p{cfg, ctx.channels, *ctx.gmm, ctx.u};
      CounterRng init = ctx.rng.substream(Stream::kInit);
      JqapbOptions opt;
      if (scheme == Scheme::kFullPower) opt.coefficients = CoefficientPolicy::kFullPower;
      d = detail::design_from_state(ctx.channels, run_jqapb(p, init, opt), p);
      break;
    }
    case Scheme::kMdAirComp:
    case Scheme::kObda: {
      d.channels = without_ris(ctx.channels);
      d.ris = HybridRisState(0, 0);
      // OBDA reuses the MD-AirComp coefficients and beamformer unchanged
      const TruncatedInversionDesign ti =
          design_truncated_inversion(d.channels, cfg, std::sqrt(cfg.max_coeff_sq()), cfg.signal_scale());
      d.nu = ti.nu;
      d.b = ti.b;
      d.active = ti.active;
      if (scheme == Scheme::kMdAirComp) {
        d.bits = uniform_bits(cfg.total_bits, cfg.blocks());
        d.codebook_init = LloydInit::kPlusPlus;
        const CorrelationMatrix eye = CorrelationMatrix::Identity(cfg.agents, cfg.agents);
        const Problem p{cfg, d.channels, *ctx.gmm, eye};
        OptimizationState s;
        s.nu = d.nu;
        s.b = d.b;
        s.ris = d.ris;
        s.bits = d.bits.cast<double>();
        const SurrogateReport rep = state_surrogate(p, s);
        d.g = rep.g;
        d.h_low = rep.h_low;
      }
      break;
    }
    case Scheme::kIdeal: {
      const SurrogateReport rep = surrogate_g(*ctx.gmm, VectorXd::Zero(cfg.feature_dim));
      d.g = rep.g;
      d.h_low = rep.h_low;
      break;
    }
  }
  d.design_ms = detail::ms_since(t0);
  return d;
}

struct InferenceMetrics {
  double accuracy = 0.0;
  double h_mc = 0.0;
  double h_mc_se = 0.0;
  std::optional<double> agg_mse_db;
};

/// Runs cfg.rounds inference rounds of `scheme` with the given design. Rounds draw features and
/// noise from sub-streams indexed by round, so every scheme sees the same samples for a seed.
inline InferenceMetrics run_inference(const TrialContext& ctx, Scheme scheme, const TransceiverDesign& d) {
  const SystemConfig& cfg = ctx.cfg;
  const GmmModel& gmm = *ctx.gmm;
  const int K = cfg.agents, T = cfg.blocks(), D = cfg.block_length, J = cfg.sequence_length;
  const VectorXd post_cov = gmm.cov_diag().array() + cfg.feature_noise_var;
  const UplinkNoise noise{cfg.ris_noise_w, cfg.en_noise_w};
  SwompOptions sw;
  sw.threshold = cfg.swomp_threshold;
  sw.max_stages = cfg.swomp_max_stages;

  const bool digital = scheme != Scheme::kIdeal && scheme != Scheme::kObda;
  std::vector<std::shared_ptr<const CodebookPair>> books;
  std::map<int, MatrixXd> stacked;
  if (digital) {
    for (int t = 0; t < T; ++t) {
      books.push_back(CodebookLibrary::global().get(D, J, d.bits(t), cfg.codebook_seed, d.codebook_init));
      if (scheme != Scheme::kPfa && !stacked.count(d.bits(t))) stacked.emplace(d.bits(t), stack_real(books.back()->p));
    }
  }
  std::vector<const MatrixXd*> qs;
  for (const auto& b : books) qs.push_back(&b->q);

  const int senders = d.active.empty() ? K : d.active_count();
  const VectorXd abs_mean = scheme == Scheme::kObda ? mixture_abs_mean(gmm.means(), gmm.cov_diag()) : VectorXd();

  MeanAccumulator acc, ent;
  double mse_num = 0.0, mse_den = 0.0;
  for (int r = 0; r < cfg.rounds; ++r) {
    CounterRng frng = ctx.rng.substream(Stream::kFeatures, static_cast<std::uint64_t>(r));
    const FeatureSample fs = generate_features(gmm, K, cfg.feature_noise_var, frng);
    VectorXd f_hat;

    if (scheme == Scheme::kIdeal) {
      f_hat = fs.local.rowwise().mean();
    } else if (scheme == Scheme::kObda) {
      MatrixXcd sig(cfg.feature_dim, K);
      VectorXd truth = VectorXd::Zero(cfg.feature_dim);
      for (int k = 0; k < K; ++k)
        for (int w = 0; w < cfg.feature_dim; ++w) {
          const double s = sign_bit(fs.local(w, k));
          sig(w, k) = s;
          if (d.active[k]) truth(w) += s;
        }
      CounterRng nrng = ctx.rng.substream(Stream::kNoise, static_cast<std::uint64_t>(r) * (T + 1));
      const VectorXcd y = simulate_uplink(sig, d.nu, d.channels, d.ris, d.b, noise, nrng);
      f_hat.resize(cfg.feature_dim);
      for (int w = 0; w < cfg.feature_dim; ++w) f_hat(w) = abs_mean(w) * sign_bit(y(w).real());
      mse_num += (y.real() - truth).squaredNorm();
      mse_den += truth.squaredNorm();
    } else {
      std::vector<VectorXd> xs(T);
      for (int t = 0; t < T; ++t) {
        const CodebookPair& cb = *books[t];
        MatrixXd units(D, K);
        VectorXd norms(K);
        for (int k = 0; k < K; ++k) {
          const BlockDecomposition bd = decompose_block(fs.local.col(k).segment(t * D, D));
          norms(k) = bd.norm;
          units.col(k) = bd.unit;
        }
        const std::vector<Eigen::Index> idx = quantize_blocks(units, cb.q);
        VectorXd x = VectorXd::Zero(cb.size());
        MatrixXcd sig(J, K);
        for (int k = 0; k < K; ++k) {
          const bool on = d.active.empty() || d.active[k];
          sig.col(k) = on ? encode_block(norms(k), idx[k], cb.p) : VectorXcd::Zero(J);
          if (on) x(idx[k]) += norms(k);
        }
        if (scheme == Scheme::kPfa) {
          xs[t] = x;
          continue;
        }
        CounterRng nrng = ctx.rng.substream(Stream::kNoise, static_cast<std::uint64_t>(r) * (T + 1) + t);
        const VectorXcd y = simulate_uplink(sig, d.nu, d.channels, d.ris, d.b, noise, nrng);
        xs[t] = detect_aggregate_stacked(stack_real(y), stacked.at(cb.bits), senders, sw);
        mse_num += (xs[t] - x).squaredNorm();
        mse_den += x.squaredNorm();
      }
      f_hat = reconstruct_global(xs, qs, std::max(senders, 1));
    }

    acc.add(classify(f_hat, gmm, cfg.feature_noise_var) == fs.label ? 1.0 : 0.0);
    ent.add(shannon_entropy(class_posterior(f_hat, gmm.means(), post_cov)));
  }

  InferenceMetrics m;
  m.accuracy = acc.mean();
  m.h_mc = ent.mean();
  m.h_mc_se = ent.se();
  if (scheme == Scheme::kPfa) m.agg_mse_db = kExactAggregationDb;
  else if (scheme != Scheme::kIdeal && mse_den > 0)
    m.agg_mse_db = mse_num > 0 ? std::max(kExactAggregationDb, 10.0 * std::log10(mse_num / mse_den)) : kExactAggregationDb;
  return m;
}

/// Runs several schemes on one seed; the joint-optimizer design is shared between jqapb and pfa.
inline std::vector<TrialResult> run_trials(const SystemConfig& cfg, const std::vector<Scheme>& schemes,
                                           std::uint64_t seed, int trial_index = 0) {
  const TrialContext ctx = make_trial_context(cfg, seed);
  std::optional<TransceiverDesign> shared;
  std::vector<TrialResult> out;
  for (Scheme s : schemes) {
    const auto t0 = std::chrono::steady_clock::now();
    TransceiverDesign d;
    double design_ms = 0.0;
    if (uses_jqapb_design(s)) {
      if (!shared) shared = design_scheme(ctx, Scheme::kJqapb);
      d = *shared;
      design_ms = shared->design_ms;
    } else {
      d = design_scheme(ctx, s);
    }
    const InferenceMetrics m = run_inference(ctx, s, d);
    TrialResult r;
    r.seed = seed;
    r.scheme = s;
    r.trial = trial_index;
    r.config = cfg;
    if (cfg.correlation_mode == 1) r.epsilon = cfg.correlation_eps;
    r.g = d.g;
    r.h_low = d.h_low;
    r.h_mc = m.h_mc;
    r.h_mc_se = m.h_mc_se;
    r.accuracy = m.accuracy;
    r.agg_mse_db = m.agg_mse_db;
    r.outer_iters = d.outer_iters;
    r.bits = d.bits;
    r.wall_ms = design_ms + detail::ms_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

inline TrialResult run_trial(const SystemConfig& cfg, Scheme scheme, std::uint64_t seed) {
  return run_trials(cfg, {scheme}, seed).front();
}

}  // namespace hrdair
