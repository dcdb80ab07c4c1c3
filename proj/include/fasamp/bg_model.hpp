#pragma once

#include "fasamp/types.hpp"

#include <string_view>

namespace fasamp {

/// Bernoulli-Gaussian hyperparameters for a K x N_o unknown plus the noise
/// variance. lambda is per codeword; mean and variance are per entry.
struct BGPrior {
  RVector lambda;  // K, each in [0, 1]
  CMatrix mu_x;    // K x N_o
  RMatrix phi_x;   // K x N_o, > 0
  double psi = 0.0;

  void validate() const;
};

/// The prior restricted to one entry (k, n).
struct ScalarPrior {
  double lambda = 0.0;
  cdouble mu_x{0.0, 0.0};
  double phi_x = 1.0;
};

/// Posterior of one entry: (1 - pi) delta(x) + pi CN(x; gamma, nu).
struct PosteriorMoments {
  double pi = 0.0;
  cdouble gamma{0.0, 0.0};
  double nu = 0.0;
  cdouble x_tilde{0.0, 0.0};
  double phi_tilde = 0.0;
};

struct GaussianProduct {
  cdouble mean;
  double variance = 0.0;
  double scale = 0.0;  // CN(0; a - b, A + B)
};

struct Moments {
  cdouble mean;
  double variance = 0.0;
};

/// Which closed form to use for the truncated second moment V around mu_x.
enum class VMode {
  /// pi * (nu + |gamma - mu_x|^2), the exact value of the integral over x != 0.
  quadrature_consistent,
  /// |x_tilde - mu_x|^2 - phi_tilde, read literally off the printed derivation.
  as_printed,
};

VMode parse_v_mode(std::string_view name);
std::string_view to_string(VMode mode);

/// log CN(x; mean, var) = -log(pi var) - |x - mean|^2 / var.
double log_complex_normal_pdf(cdouble x, cdouble mean, double var);
double complex_normal_pdf(cdouble x, cdouble mean, double var);

/// CN(x; a, A) CN(x; b, B) = CN(x; mean, variance) * scale.
GaussianProduct gaussian_product(cdouble a, double a_var, cdouble b, double b_var);

/// Scalar MMSE denoiser for a pseudo-measurement CN(mu_hat_x, phi_hat_x) of a
/// Bernoulli-Gaussian entry. The support probability is evaluated as a
/// sigmoid of a log-likelihood ratio; lambda in {0, 1} gives exact limits.
PosteriorMoments denoise(cdouble mu_hat_x, double phi_hat_x, const ScalarPrior& prior);

double posterior_v(const PosteriorMoments& m, cdouble mu_x, VMode mode = VMode::quadrature_consistent);

/// Mean and variance of the prior itself.
Moments prior_moments(const ScalarPrior& prior);

}  // namespace fasamp
