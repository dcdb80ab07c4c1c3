#include "fasamp/metrics.hpp"

#include "fasamp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fasamp {

namespace {

constexpr double kSingularRcond = 1e-10;

struct Projection {
  CMatrix pinv_right;  // U^H (U U^H)^-1, N_o x L_s
  bool ok = false;
};

Projection right_pseudo_inverse(const CMatrix& U) {
  const CMatrix gram = U * U.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram);
  const RVector ev = eig.eigenvalues();
  Projection p;
  if (ev.size() == 0 || ev.minCoeff() <= kSingularRcond * ev.maxCoeff()) return p;
  p.pinv_right = U.adjoint() * gram.ldlt().solve(CMatrix::Identity(U.rows(), U.rows()));
  p.ok = true;
  return p;
}

// One Monte-Carlo draw of both estimators' squared errors.
std::pair<double, double> ls_trial(const CVector& pilot, const CMatrix& U, const CMatrix& pinv_right, double psi,
                                   double path_variance, Rng& rng) {
  const Eigen::Index G = pilot.size();
  const Eigen::Index N = U.cols();
  Eigen::RowVectorXcd sigma(U.rows());
  for (Eigen::Index l = 0; l < sigma.size(); ++l) sigma(l) = complex_normal(rng, path_variance);
  const Eigen::RowVectorXcd h = sigma * U;
  CMatrix Y = pilot * h;
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index g = 0; g < G; ++g) Y(g, n) += complex_normal(rng, psi);

  const cdouble energy = pilot.squaredNorm();
  const Eigen::RowVectorXcd proj = pilot.adjoint() * Y;
  const Eigen::RowVectorXcd h_ls = proj / energy;
  const Eigen::RowVectorXcd sigma_ls = proj * pinv_right;

  const double m = (h - h_ls).squaredNorm();
  const Eigen::RowVectorXcd ds = sigma - sigma_ls;
  const double m_ang = std::real((ds * U * U.adjoint() * ds.adjoint())(0, 0));
  return {m, m_ang};
}

}  // namespace

double ade(const std::vector<int>& true_set, const std::vector<int>& est_set, int K_a) {
  if (K_a < 1) throw DomainError("ade: K_a must be >= 1");
  const auto common = intersect(true_set, est_set);
  return 1.0 - static_cast<double>(common.size()) / K_a;
}

std::vector<int> top_ka(const RVector& lambda, int K_a) {
  if (K_a < 0 || K_a > lambda.size()) throw DomainError("top_ka: K_a out of range");
  std::vector<int> idx(lambda.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return lambda(a) > lambda(b); });
  idx.resize(K_a);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> intersect(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

NmseConvention parse_nmse_convention(std::string_view name) {
  if (name == "per_user_mean" || name == "per-user-mean") return NmseConvention::per_user_mean;
  if (name == "ratio_of_sums" || name == "ratio-of-sums") return NmseConvention::ratio_of_sums;
  throw ConfigError("unknown NMSE convention '" + std::string(name) + "'");
}

std::optional<double> nmse(const CMatrix& H_true, const CMatrix& H_hat, NmseConvention convention) {
  if (H_true.rows() != H_hat.rows() || H_true.cols() != H_hat.cols()) throw DimensionError("nmse: shape mismatch");
  if (H_true.rows() == 0) return std::nullopt;
  if (convention == NmseConvention::ratio_of_sums) {
    const double e = H_true.squaredNorm();
    if (e == 0.0) return std::nullopt;
    return (H_true - H_hat).squaredNorm() / e;
  }
  double total = 0.0;
  int users = 0;
  for (Eigen::Index k = 0; k < H_true.rows(); ++k) {
    const double e = H_true.row(k).squaredNorm();
    if (e == 0.0) continue;
    total += (H_true.row(k) - H_hat.row(k)).squaredNorm() / e;
    ++users;
  }
  if (users == 0) return std::nullopt;
  return total / users;
}

std::optional<double> variance_mse(const RVector& phi_true, const RVector& phi_hat) {
  if (phi_true.size() != phi_hat.size()) throw DimensionError("variance_mse: size mismatch");
  if (phi_true.size() == 0) return std::nullopt;
  return (phi_true - phi_hat).squaredNorm() / static_cast<double>(phi_true.size());
}

GreedyFloor greedy_floor_mse(double sigma_bar, double psi, double d_max, double exponent) {
  if (sigma_bar < 0.0 || psi < 0.0) throw DomainError("greedy_floor_mse: inputs must be non-negative");
  const double f_min = lsfc(d_max, exponent);
  return {(sigma_bar + psi) * (sigma_bar + psi), (f_min + psi) * (f_min + psi)};
}

CVector equalize(const CVector& pilot, const CMatrix& Y) {
  if (pilot.size() != Y.rows()) throw DimensionError("equalize: pilot length != rows of Y");
  const cdouble energy = pilot.squaredNorm();
  return (pilot.adjoint() * Y).transpose() / energy;
}

RVector greedy_variance_estimator(const CVector& y_tilde, cdouble h_bar, double psi) {
  RVector out(y_tilde.size());
  for (Eigen::Index n = 0; n < y_tilde.size(); ++n) out(n) = std::norm(y_tilde(n) - h_bar) - psi;
  return out;
}

LsMsePair ls_mse_pair(const CVector& pilot, const CMatrix& U, double psi, int trials, std::uint64_t seed,
                      double path_variance) {
  if (trials < 1) throw DomainError("ls_mse_pair: trials must be >= 1");
  const Projection p = right_pseudo_inverse(U);
  if (!p.ok) throw DomainError("ls_mse_pair: U U^H is singular");
  Rng rng(seed);
  LsMsePair out;
  for (int t = 0; t < trials; ++t) {
    const auto [m, ma] = ls_trial(pilot, U, p.pinv_right, psi, path_variance, rng);
    out.M += m;
    out.M_angular += ma;
  }
  out.trials = trials;
  out.M /= trials;
  out.M_angular /= trials;
  out.M_ref = static_cast<double>(U.cols()) * psi;
  out.M_angular_ref = static_cast<double>(U.rows()) * psi;
  return out;
}

LsMsePair ls_mse_pair_random_aoa(const CVector& pilot, const SceneConfig& config, double psi, int trials,
                                 std::uint64_t seed, double path_variance) {
  if (trials < 1) throw DomainError("ls_mse_pair: trials must be >= 1");
  Rng rng(seed);
  const Radians lo = to_radians(Degrees{config.theta_min});
  const Radians hi = to_radians(Degrees{config.theta_max});
  LsMsePair out;
  CMatrix U(config.L_s, config.N_o);
  for (int t = 0; t < trials; ++t) {
    Projection p;
    while (true) {
      for (int l = 0; l < config.L_s; ++l)
        U.row(l) = steering_vector(Radians{uniform(rng, lo.value, hi.value)}, config.N_o, config.antenna_length(),
                                   config.lambda_len)
                       .transpose();
      p = right_pseudo_inverse(U);
      if (p.ok) break;
      ++out.regenerated;
    }
    const auto [m, ma] = ls_trial(pilot, U, p.pinv_right, psi, path_variance, rng);
    out.M += m;
    out.M_angular += ma;
  }
  out.trials = trials;
  out.M /= trials;
  out.M_angular /= trials;
  out.M_ref = static_cast<double>(config.N_o) * psi;
  out.M_angular_ref = static_cast<double>(config.L_s) * psi;
  return out;
}

}  // namespace fasamp
