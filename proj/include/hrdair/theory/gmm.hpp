#pragma once

#include "hrdair/model/config.hpp"
#include "hrdair/rng.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace hrdair {

/// rho_w = sum_{l<l'} (mu_lw - mu_l'w)^2 / (L(L-1)); means are the columns of a W x L matrix.
inline VectorXd importance_indicators(const MatrixXd& means) {
  const Eigen::Index L = means.cols();
  if (L < 2) throw ParameterError("importance indicators need at least two classes");
  // sum over pairs of squared differences = L * sum_l mu_l^2 - (sum_l mu_l)^2
  const VectorXd s1 = means.rowwise().sum();
  const VectorXd s2 = means.array().square().rowwise().sum();
  VectorXd rho = (static_cast<double>(L) * s2.array() - s1.array().square()).matrix();
  rho = rho.cwiseMax(0.0) / static_cast<double>(L * (L - 1));
  return rho;
}

/// Equal-weight Gaussian mixture with shared diagonal covariance.
class GmmModel {
 public:
  GmmModel() = default;
  GmmModel(MatrixXd means, VectorXd cov_diag) : means_(std::move(means)), cov_(std::move(cov_diag)) {
    require(means_.rows() == cov_.size() && means_.cols() >= 1, "means must be W x L with W = cov length");
    for (Eigen::Index w = 0; w < cov_.size(); ++w) require(cov_(w) > 0, "covariance entries must be positive");
    rho_ = means_.cols() >= 2 ? importance_indicators(means_) : VectorXd::Zero(cov_.size());
  }

  int dim() const { return static_cast<int>(means_.rows()); }
  int classes() const { return static_cast<int>(means_.cols()); }
  const MatrixXd& means() const { return means_; }
  VectorXd mean(int l) const { return means_.col(l); }
  const VectorXd& cov_diag() const { return cov_; }
  const VectorXd& rho() const { return rho_; }

  /// Draws (feature, label).
  std::pair<VectorXd, int> sample(CounterRng& rng) const {
    const int l = std::min(classes() - 1, static_cast<int>(rng.uniform() * classes()));
    VectorXd f(dim());
    for (int w = 0; w < dim(); ++w) f(w) = means_(w, l) + std::sqrt(cov_(w)) * rng.normal();
    return {f, l};
  }

 private:
  MatrixXd means_;
  VectorXd cov_;
  VectorXd rho_;
};

/// Synthetic task: mean entries i.i.d. N(0, mean_scale^2), covariance class_var * I.
inline GmmModel generate_task_gmm(int W, int L, double mean_scale, double class_var, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).substream(Stream::kTask);
  MatrixXd mu(W, L);
  for (int l = 0; l < L; ++l)
    for (int w = 0; w < W; ++w) mu(w, l) = mean_scale * rng.normal();
  return GmmModel(mu, VectorXd::Constant(W, class_var));
}

inline GmmModel generate_task_gmm(const SystemConfig& cfg) {
  return generate_task_gmm(cfg.feature_dim, cfg.classes, cfg.mean_scale, cfg.class_variance, cfg.task_seed);
}

inline nlohmann::json gmm_to_json(const GmmModel& g) {
  nlohmann::json j;
  j["W"] = g.dim();
  j["L"] = g.classes();
  j["cov_diag"] = std::vector<double>(g.cov_diag().data(), g.cov_diag().data() + g.dim());
  auto& means = j["means"] = nlohmann::json::array();
  for (int l = 0; l < g.classes(); ++l) {
    const VectorXd m = g.mean(l);
    means.push_back(std::vector<double>(m.data(), m.data() + m.size()));
  }
  return j;
}

inline GmmModel gmm_from_json(const nlohmann::json& j) {
  try {
    const int W = j.at("W").get<int>(), L = j.at("L").get<int>();
    const auto cov = j.at("cov_diag").get<std::vector<double>>();
    const auto& means = j.at("means");
    if (static_cast<int>(cov.size()) != W || static_cast<int>(means.size()) != L)
      throw ParameterError("GMM file dimensions are inconsistent");
    MatrixXd mu(W, L);
    for (int l = 0; l < L; ++l) {
      const auto m = means.at(l).get<std::vector<double>>();
      if (static_cast<int>(m.size()) != W) throw ParameterError("GMM mean has the wrong length");
      mu.col(l) = Eigen::Map<const VectorXd>(m.data(), W);
    }
    return GmmModel(mu, Eigen::Map<const VectorXd>(cov.data(), W));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed GMM file: ") + e.what());
  }
}

inline void save_gmm(const std::string& path, const GmmModel& g) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write GMM file '" + path + "'");
  out << gmm_to_json(g).dump(1) << '\n';
}

inline GmmModel load_gmm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open GMM file '" + path + "'");
  try {
    return gmm_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(std::string("malformed GMM file: ") + e.what());
  }
}

}  // namespace hrdair
