#include "fasamp/bg_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fasamp {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

void BGPrior::validate() const {
  if (mu_x.rows() != lambda.size() || phi_x.rows() != lambda.size() || mu_x.cols() != phi_x.cols())
    throw DimensionError("BGPrior: inconsistent shapes");
  if ((lambda.array() < 0.0).any() || (lambda.array() > 1.0).any())
    throw DomainError("BGPrior: lambda outside [0, 1]");
  if ((phi_x.array() <= 0.0).any()) throw DomainError("BGPrior: phi_x must be positive");
  if (!(psi > 0.0)) throw DomainError("BGPrior: psi must be positive");
}

VMode parse_v_mode(std::string_view name) {
  if (name == "quadrature-consistent" || name == "quadrature_consistent") return VMode::quadrature_consistent;
  if (name == "as-printed" || name == "as_printed") return VMode::as_printed;
  throw ConfigError("unknown V mode '" + std::string(name) + "'");
}

std::string_view to_string(VMode mode) {
  return mode == VMode::as_printed ? "as-printed" : "quadrature-consistent";
}

double log_complex_normal_pdf(cdouble x, cdouble mean, double var) {
  return -std::log(std::numbers::pi * var) - std::norm(x - mean) / var;
}

double complex_normal_pdf(cdouble x, cdouble mean, double var) {
  return std::exp(log_complex_normal_pdf(x, mean, var));
}

GaussianProduct gaussian_product(cdouble a, double a_var, cdouble b, double b_var) {
  if (!(a_var > 0.0) || !(b_var > 0.0)) throw DomainError("gaussian_product: variances must be positive");
  const double sum = a_var + b_var;
  GaussianProduct p;
  p.mean = (a * b_var + b * a_var) / sum;
  p.variance = a_var * b_var / sum;
  p.scale = complex_normal_pdf(a - b, {0.0, 0.0}, sum);
  return p;
}

PosteriorMoments denoise(cdouble mu_hat_x, double phi_hat_x, const ScalarPrior& prior) {
  if (!(phi_hat_x > 0.0)) throw DomainError("denoise: phi_hat_x must be positive");
  if (!(prior.phi_x > 0.0)) throw DomainError("denoise: prior variance must be positive");

  PosteriorMoments m;
  const double sum = phi_hat_x + prior.phi_x;
  m.gamma = (mu_hat_x * prior.phi_x + prior.mu_x * phi_hat_x) / sum;
  m.nu = phi_hat_x * prior.phi_x / sum;

  if (prior.lambda <= 0.0) {
    m.pi = 0.0;
  } else if (prior.lambda >= 1.0) {
    m.pi = 1.0;
  } else {
    const double log_active = std::log(prior.lambda) + log_complex_normal_pdf(mu_hat_x, prior.mu_x, sum);
    const double log_inactive = std::log1p(-prior.lambda) + log_complex_normal_pdf(mu_hat_x, {0.0, 0.0}, phi_hat_x);
    m.pi = sigmoid(log_active - log_inactive);
  }

  m.x_tilde = m.pi * m.gamma;
  // pi (nu + |gamma|^2) - |pi gamma|^2, rearranged to stay non-negative.
  m.phi_tilde = m.pi * m.nu + m.pi * (1.0 - m.pi) * std::norm(m.gamma);
  return m;
}

double posterior_v(const PosteriorMoments& m, cdouble mu_x, VMode mode) {
  switch (mode) {
    case VMode::quadrature_consistent:
      return m.pi * (m.nu + std::norm(m.gamma - mu_x));
    case VMode::as_printed:
      return std::norm(m.x_tilde - mu_x) - m.phi_tilde;
  }
  throw ConfigError("posterior_v: unknown mode");
}

Moments prior_moments(const ScalarPrior& prior) {
  Moments out;
  out.mean = prior.lambda * prior.mu_x;
  out.variance = prior.lambda * (prior.phi_x + std::norm(prior.mu_x)) - std::norm(out.mean);
  if (out.variance < 0.0) out.variance = 0.0;
  return out;
}

}  // namespace fasamp
