#pragma once

#include "fasamp/scene.hpp"
#include "fasamp/types.hpp"

namespace fasamp {

/// Clip interval for the geographic variance update: [f(d_max), f(d_ref)].
struct GeoBounds {
  double phi_min = 0.0;
  double phi_max = 0.0;

  GeoBounds() = default;
  /// Throws DomainError unless 0 < phi_min < phi_max.
  GeoBounds(double lo, double hi);
};

// Denominator guard for all sums of support probabilities.
inline constexpr double kSupportGuard = 1e-12;

/// Per-codeword activity: lambda_k = (1/N_o) sum_n pi_{k,n}.
RVector em_update_lambda(const RMatrix& pi);

/// Per-user mean over ports weighted by pi. Users with no support get 0.
CVector em_update_mu(const RMatrix& pi, const CMatrix& gamma);

/// Per-user slab variance: sum_n pi (|mu_k - gamma|^2 + nu) / sum_n pi, floored
/// at kVarianceFloor. mu_x holds the previous per-user means.
RVector em_update_phi_conventional(const RMatrix& pi, const CMatrix& gamma, const RMatrix& nu, const CVector& mu_x);

/// sum_n V / sum_n pi, clipped to [phi_min, phi_max].
RVector em_update_phi_geographic(const RMatrix& pi, const RMatrix& V, const GeoBounds& bounds);

GeoBounds geo_bounds_from_config(const SceneConfig& config);

/// Distance implied by a learned variance, f^-1(phi). Diagnostic only.
double distance_from_variance(double phi, double exponent);

/// What a noise-variance EM step would produce from the output posterior.
/// Reported for diagnostics; the solvers keep psi fixed.
double em_noise_update_diagnostic(const CMatrix& Y, const CMatrix& mu_r_tilde, const RMatrix& phi_r_tilde);

/// Row mask of users whose total support sum_n pi_{k,n} is above kSupportGuard.
Eigen::Array<bool, Eigen::Dynamic, 1> supported_users(const RMatrix& pi);

}  // namespace fasamp
