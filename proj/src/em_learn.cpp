#include "fasamp/em_learn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

// Normalization note. The printed update rules divide by lambda_k K and sum
// over the user index k:
//   lambda_k   = (1/K) sum_n pi_{k,n}
//   mu_{k,n}   = sum_k pi_{k,n} gamma_{k,n} / (lambda_k K)
//   phi_{k,n}  = sum_k pi_{k,n} (|mu_{k,n} - gamma_{k,n}|^2 + nu_{k,n}) / (lambda_k K)
// and the geographic listing writes a per-entry (P1) step. Here every
// hyperparameter is a per-user average over ports n, normalized by sum_n pi,
// and the geographic step uses the port-aggregated closed form.

namespace fasamp {

namespace {

void check_same_shape(const RMatrix& pi, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (pi.rows() != rows || pi.cols() != cols) throw DimensionError(std::string("em update: shape mismatch in ") + what);
}

}  // namespace

GeoBounds::GeoBounds(double lo, double hi) : phi_min(lo), phi_max(hi) {
  if (!(lo > 0.0) || !(lo < hi)) throw DomainError("GeoBounds: need 0 < phi_min < phi_max");
}

RVector em_update_lambda(const RMatrix& pi) {
  if (pi.cols() == 0) throw DimensionError("em_update_lambda: no ports");
  RVector lambda = pi.rowwise().mean();
  return lambda.cwiseMax(0.0).cwiseMin(1.0);
}

CVector em_update_mu(const RMatrix& pi, const CMatrix& gamma) {
  check_same_shape(pi, gamma.rows(), gamma.cols(), "gamma");
  CVector mu(pi.rows());
  for (Eigen::Index k = 0; k < pi.rows(); ++k) {
    const double w = pi.row(k).sum();
    const cdouble num = (pi.row(k).cast<cdouble>().array() * gamma.row(k).array()).sum();
    mu(k) = num / std::max(w, kSupportGuard);
  }
  return mu;
}

RVector em_update_phi_conventional(const RMatrix& pi, const CMatrix& gamma, const RMatrix& nu, const CVector& mu_x) {
  check_same_shape(pi, gamma.rows(), gamma.cols(), "gamma");
  check_same_shape(pi, nu.rows(), nu.cols(), "nu");
  if (mu_x.size() != pi.rows()) throw DimensionError("em_update_phi_conventional: mu_x size");
  RVector phi(pi.rows());
  for (Eigen::Index k = 0; k < pi.rows(); ++k) {
    double num = 0.0;
    for (Eigen::Index n = 0; n < pi.cols(); ++n) num += pi(k, n) * (std::norm(mu_x(k) - gamma(k, n)) + nu(k, n));
    phi(k) = std::max(num / std::max(pi.row(k).sum(), kSupportGuard), kVarianceFloor);
  }
  return phi;
}

RVector em_update_phi_geographic(const RMatrix& pi, const RMatrix& V, const GeoBounds& bounds) {
  check_same_shape(pi, V.rows(), V.cols(), "V");
  RVector phi(pi.rows());
  for (Eigen::Index k = 0; k < pi.rows(); ++k) {
    const double raw = V.row(k).sum() / std::max(pi.row(k).sum(), kSupportGuard);
    if (raw < bounds.phi_min) {
      phi(k) = bounds.phi_min;
    } else if (raw > bounds.phi_max) {
      phi(k) = bounds.phi_max;
    } else {
      phi(k) = raw;
    }
  }
  return phi;
}

GeoBounds geo_bounds_from_config(const SceneConfig& config) {
  return GeoBounds(lsfc(config.d_max, config.lsfc_exponent), lsfc(config.d_ref, config.lsfc_exponent));
}

double distance_from_variance(double phi, double exponent) {
  if (!(phi > 0.0) || exponent == 0.0) throw DomainError("distance_from_variance: need phi > 0, exponent != 0");
  return std::pow(phi, -1.0 / exponent);
}

double em_noise_update_diagnostic(const CMatrix& Y, const CMatrix& mu_r_tilde, const RMatrix& phi_r_tilde) {
  if (Y.rows() != mu_r_tilde.rows() || Y.cols() != mu_r_tilde.cols() || Y.rows() != phi_r_tilde.rows() ||
      Y.cols() != phi_r_tilde.cols())
    throw DimensionError("em_noise_update_diagnostic: shape mismatch");
  return ((Y - mu_r_tilde).cwiseAbs2() + phi_r_tilde).mean();
}

Eigen::Array<bool, Eigen::Dynamic, 1> supported_users(const RMatrix& pi) {
  return pi.rowwise().sum().array() >= kSupportGuard;
}

}  // namespace fasamp
