#include "fasamp/quadrature_oracle.hpp"

#include "fasamp/random.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fasamp::oracle {

namespace {

constexpr double kQuadTol = 1e-11;
constexpr unsigned kMaxDepth = 20;
constexpr double kHalfWidthSigmas = 14.0;

using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;

// Log of the slab integrand lambda CN(x; mu, phi) CN(x; mu_hat, phi_hat),
// written out directly.
struct SlabIntegrand {
  cdouble mu_hat;
  double phi_hat;
  double lambda;
  cdouble mu;
  double phi;

  double log_value(double re, double im) const {
    const cdouble x{re, im};
    return std::log(lambda) - std::log(std::numbers::pi * phi) - std::log(std::numbers::pi * phi_hat) -
           std::norm(x - mu) / phi - std::norm(x - mu_hat) / phi_hat;
  }
};

// Location of the integrand peak along one axis, by Brent minimization of the
// negative log. The peak lies between the two means.
double locate_peak(const SlabIntegrand& f, bool real_axis) {
  const double a = real_axis ? f.mu.real() : f.mu.imag();
  const double b = real_axis ? f.mu_hat.real() : f.mu_hat.imag();
  double lo = std::min(a, b);
  double hi = std::max(a, b);
  if (hi - lo <= 0.0) return lo;
  const double pad = 1e-3 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto neg = [&](double t) {
    return real_axis ? -f.log_value(t, 0.0) : -f.log_value(0.0, t);
  };
  const auto r = boost::math::tools::brent_find_minima(neg, lo, hi, std::numeric_limits<double>::digits);
  return r.first;
}

template <class Fn>
auto integrate_2d(Fn&& fn, double half_re, double half_im) {
  auto inner = [&](double u) {
    auto along = [&](double v) { return fn(u, v); };
    return Rule::integrate(along, -half_im, half_im, kMaxDepth, kQuadTol);
  };
  return Rule::integrate(inner, -half_re, half_re, kMaxDepth, kQuadTol);
}

double relative_deviation(double value, double reference, double scale) {
  const double denom = std::max({std::abs(reference), scale, std::numeric_limits<double>::min()});
  return std::abs(value - reference) / denom;
}

}  // namespace

QuadraturePosterior integrate_posterior(cdouble mu_hat_x, double phi_hat_x, double lambda, cdouble mu_x,
                                        double phi_x) {
  QuadraturePosterior q;
  const double log_spike =
      lambda >= 1.0 ? -std::numeric_limits<double>::infinity()
                    : std::log1p(-lambda) - std::log(std::numbers::pi * phi_hat_x) - std::norm(mu_hat_x) / phi_hat_x;
  if (lambda <= 0.0) {
    q.pi = 0.0;
    return q;
  }

  const SlabIntegrand f{mu_hat_x, phi_hat_x, lambda, mu_x, phi_x};
  const cdouble center{locate_peak(f, true), locate_peak(f, false)};
  const double log_peak = f.log_value(center.real(), center.imag());
  // Integrate in units of s; the product of two Gaussians is narrower than
  // the narrower factor.
  const double s = std::sqrt(std::min(phi_x, phi_hat_x) / 2.0);
  const double half = kHalfWidthSigmas;

  auto w = [&](double a, double b) {
    return std::exp(f.log_value(center.real() + s * a, center.imag() + s * b) - log_peak);
  };
  // Two complex-valued passes carry the four real moments.
  const cdouble zm = integrate_2d([&](double a, double b) { return cdouble{1.0, a} * w(a, b); }, half, half);
  const cdouble ms = integrate_2d([&](double a, double b) { return cdouble{b, a * a + b * b} * w(a, b); }, half, half);
  const double z = zm.real();
  const cdouble m_local = s * cdouble{zm.imag() / z, ms.real() / z};
  const double second_local = s * s * ms.imag() / z;
  const double var_local = second_local - std::norm(m_local);
  const cdouble offset = center - mu_x;
  const double v_local = second_local + 2.0 * std::real(std::conj(offset) * m_local) + std::norm(offset);

  q.log_slab_mass = log_peak + std::log(z * s * s);
  q.slab_mean = center + m_local;
  q.slab_variance = var_local;
  if (lambda >= 1.0) {
    q.pi = 1.0;
  } else {
    const double d = q.log_slab_mass - log_spike;
    q.pi = d >= 0.0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d));
  }
  q.x_tilde = q.pi * q.slab_mean;
  q.phi_tilde = q.pi * q.slab_variance + q.pi * (1.0 - q.pi) * std::norm(q.slab_mean);
  q.v = q.pi * v_local;
  return q;
}

GaussianProduct integrate_gaussian_product(cdouble a, double a_var, cdouble b, double b_var) {
  const QuadraturePosterior q = integrate_posterior(a, a_var, 1.0, b, b_var);
  return {q.slab_mean, q.slab_variance, std::exp(q.log_slab_mass)};
}

std::vector<DeviationRow> run_denoiser_oracle(int draws, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DeviationRow> rows = {{"pi", 0, 0, 0},
                                    {"x_tilde", 0, 0, 0},
                                    {"phi_tilde", 0, 0, 0},
                                    {"V(quadrature-consistent)", 0, 0, 0},
                                    {"V(as-printed)", 0, 0, 0},
                                    {"gaussian_product.mean", 0, 0, 0},
                                    {"gaussian_product.variance", 0, 0, 0},
                                    {"gaussian_product.scale", 0, 0, 0}};
  auto record = [&](std::size_t i, double dev) {
    rows[i].max_rel_dev = std::max(rows[i].max_rel_dev, dev);
    rows[i].mean_rel_dev += dev;
    rows[i].samples += 1;
  };

  for (int t = 0; t < draws; ++t) {
    const double base = std::pow(10.0, uniform(rng, -5.0, 0.0));
    const double lambda = std::pow(10.0, uniform(rng, -4.0, 0.0));
    const double phi = base * std::pow(10.0, uniform(rng, -3.0, 3.0));
    const double phi_hat = base * std::pow(10.0, uniform(rng, -3.0, 3.0));
    const cdouble mu = (t % 3 == 0) ? cdouble{0.0, 0.0} : complex_normal(rng, phi);
    // Pseudo-measurements from either hypothesis so pi covers its whole range.
    const cdouble mu_hat = (t % 2 == 0) ? mu + complex_normal(rng, phi + phi_hat) : complex_normal(rng, phi_hat);

    const PosteriorMoments c = denoise(mu_hat, phi_hat, ScalarPrior{lambda, mu, phi});
    const QuadraturePosterior q = integrate_posterior(mu_hat, phi_hat, lambda, mu, phi);

    record(0, relative_deviation(c.pi, q.pi, 0.0));
    const double x_scale = std::max(std::abs(q.x_tilde), std::sqrt(q.phi_tilde));
    record(1, std::abs(c.x_tilde - q.x_tilde) / std::max(x_scale, std::numeric_limits<double>::min()));
    record(2, relative_deviation(c.phi_tilde, q.phi_tilde, 0.0));
    record(3, relative_deviation(posterior_v(c, mu, VMode::quadrature_consistent), q.v, 0.0));
    record(4, relative_deviation(posterior_v(c, mu, VMode::as_printed), q.v, 0.0));

    const GaussianProduct gp = gaussian_product(mu_hat, phi_hat, mu, phi);
    const GaussianProduct gq = integrate_gaussian_product(mu_hat, phi_hat, mu, phi);
    record(5, std::abs(gp.mean - gq.mean) / std::max(std::abs(gq.mean), std::sqrt(gq.variance)));
    record(6, relative_deviation(gp.variance, gq.variance, 0.0));
    record(7, relative_deviation(gp.scale, gq.scale, 0.0));
  }
  for (auto& r : rows)
    if (r.samples > 0) r.mean_rel_dev /= r.samples;
  return rows;
}

}  // namespace fasamp::oracle
