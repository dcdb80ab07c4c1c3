#pragma once

// Numeric-integration reference for the Bernoulli-Gaussian posterior. Nothing
// here calls the closed-form denoiser; the continuous part of the posterior is
// integrated over the complex plane with nested adaptive Gauss-Kronrod rules
// and the point mass at zero is added analytically.

#include "fasamp/bg_model.hpp"
#include "fasamp/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fasamp::oracle {

struct QuadraturePosterior {
  double pi = 0.0;
  cdouble x_tilde;
  double phi_tilde = 0.0;
  double v = 0.0;          // integral over x != 0 of p(x|y) |x - mu_x|^2
  cdouble slab_mean;       // mean of the continuous component alone
  double slab_variance = 0.0;
  double log_slab_mass = 0.0;  // log of the integral of lambda CN(x; mu_x, phi_x) CN(x; mu_hat, phi_hat)
};

QuadraturePosterior integrate_posterior(cdouble mu_hat_x, double phi_hat_x, double lambda, cdouble mu_x,
                                        double phi_x);

/// Moments and mass of CN(x; a, A) CN(x; b, B), by quadrature.
GaussianProduct integrate_gaussian_product(cdouble a, double a_var, cdouble b, double b_var);

struct DeviationRow {
  std::string quantity;
  double max_rel_dev = 0.0;
  double mean_rel_dev = 0.0;
  int samples = 0;
};

/// Compares every closed form of the denoiser against quadrature on random
/// hyperparameter draws (lambda in [1e-4, 1], variance ratios 1e-6..1e6).
std::vector<DeviationRow> run_denoiser_oracle(int draws, std::uint64_t seed);

}  // namespace fasamp::oracle
