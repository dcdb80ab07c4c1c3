#include "fasamp/bg_model.hpp"
#include "fasamp/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace fasamp;

TEST_CASE("gaussian product") {
  const GaussianProduct p = gaussian_product(0.0, 1.0, 0.0, 1.0);
  CHECK(std::abs(p.mean) == 0.0);
  CHECK(p.variance == doctest::Approx(0.5));
  CHECK(p.scale == doctest::Approx(complex_normal_pdf(0.0, 0.0, 2.0)));

  const GaussianProduct q = gaussian_product(1.0, 1.0, 0.0, 1.0);
  CHECK(q.mean.real() == doctest::Approx(0.5));
  CHECK(q.variance == doctest::Approx(0.5));

  CHECK_THROWS_AS(gaussian_product(0.0, 0.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(gaussian_product(0.0, 1.0, 0.0, -2.0), DomainError);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const cdouble a = complex_normal(rng, 1.0);
    const cdouble b = complex_normal(rng, 1.0);
    const double A = std::pow(10.0, uniform(rng, -3, 3));
    const double B = std::pow(10.0, uniform(rng, -3, 3));
    const GaussianProduct ab = gaussian_product(a, A, b, B);
    const GaussianProduct ba = gaussian_product(b, B, a, A);
    CHECK(std::abs(ab.mean - ba.mean) <= 1e-12 * (1.0 + std::abs(ab.mean)));
    CHECK(ab.variance == doctest::Approx(ba.variance).epsilon(1e-12));
    CHECK(ab.scale == doctest::Approx(ba.scale).epsilon(1e-12));
  }
}

TEST_CASE("complex normal density") {
  CHECK(complex_normal_pdf(0.0, 0.0, 1.0) == doctest::Approx(1.0 / std::numbers::pi));
  CHECK(log_complex_normal_pdf({1.0, 1.0}, 0.0, 2.0) == doctest::Approx(-std::log(2.0 * std::numbers::pi) - 1.0));
}

TEST_CASE("denoiser limits") {
  const PosteriorMoments off = denoise({0.3, -0.1}, 0.2, {0.0, 0.0, 1.0});
  CHECK(off.pi == 0.0);
  CHECK(std::abs(off.x_tilde) == 0.0);
  CHECK(off.phi_tilde == 0.0);

  const cdouble y{0.7, -0.4};
  const double phi_hat = 0.3;
  const double phi = 1.7;
  const PosteriorMoments on = denoise(y, phi_hat, {1.0, 0.0, phi});
  CHECK(on.pi == 1.0);
  CHECK(std::abs(on.x_tilde - y * phi / (phi + phi_hat)) < 1e-14);
  CHECK(on.phi_tilde == doctest::Approx(phi * phi_hat / (phi + phi_hat)));
}

TEST_CASE("denoiser output ranges across extreme variance ratios") {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const double lambda = (i % 50 == 0) ? 0.0 : (i % 50 == 1) ? 1.0 : uniform(rng, 0.0, 1.0);
    const double phi = std::pow(10.0, uniform(rng, -12, 12));
    const double phi_hat = std::pow(10.0, uniform(rng, -12, 12));
    const cdouble mu = complex_normal(rng, phi);
    const cdouble y = complex_normal(rng, std::max(phi, phi_hat));
    const PosteriorMoments m = denoise(y, phi_hat, {lambda, mu, phi});
    CAPTURE(lambda);
    CAPTURE(phi);
    CAPTURE(phi_hat);
    CHECK(m.pi >= 0.0);
    CHECK(m.pi <= 1.0);
    CHECK(m.nu > 0.0);
    CHECK(m.phi_tilde >= 0.0);
    CHECK(std::isfinite(std::abs(m.x_tilde)));
    CHECK(std::abs(m.x_tilde - m.pi * m.gamma) <= 1e-14 * std::abs(m.gamma));
  }
}

TEST_CASE("denoiser is continuous in the pseudo-measurement") {
  const ScalarPrior prior{0.3, {0.1, 0.05}, 0.8};
  const double phi_hat = 0.4;
  for (double re : {-2.0, -0.3, 0.0, 0.4, 1.5}) {
    const cdouble y{re, 0.2};
    const PosteriorMoments a = denoise(y, phi_hat, prior);
    const PosteriorMoments b = denoise(y + cdouble{1e-6, 0.0}, phi_hat, prior);
    CHECK(std::abs(b.x_tilde - a.x_tilde) < 1e-5);
  }
}

TEST_CASE("posterior V modes") {
  PosteriorMoments m;
  m.pi = 1.0;
  m.gamma = {0.2, 0.1};
  m.nu = 0.05;
  m.x_tilde = m.gamma;
  m.phi_tilde = m.nu;
  CHECK(posterior_v(m, m.gamma, VMode::quadrature_consistent) == doctest::Approx(0.05));

  PosteriorMoments z;
  z.nu = 0.3;
  CHECK(posterior_v(z, {1.0, 0.0}, VMode::quadrature_consistent) == 0.0);

  // The printed form subtracts the variance and can go negative.
  CHECK(posterior_v(m, m.gamma, VMode::as_printed) == doctest::Approx(-0.05));

  CHECK(parse_v_mode("quadrature-consistent") == VMode::quadrature_consistent);
  CHECK(parse_v_mode("as-printed") == VMode::as_printed);
  CHECK_THROWS_AS(parse_v_mode("other"), ConfigError);
  CHECK(to_string(VMode::as_printed) == "as-printed");
}

TEST_CASE("prior moments") {
  const Moments one = prior_moments({1.0, {0.5, -0.5}, 2.0});
  CHECK(std::abs(one.mean - cdouble(0.5, -0.5)) < 1e-15);
  CHECK(one.variance == doctest::Approx(2.0));

  const Moments zero = prior_moments({0.0, {0.5, -0.5}, 2.0});
  CHECK(std::abs(zero.mean) == 0.0);
  CHECK(zero.variance == 0.0);

  const Moments half = prior_moments({0.5, 0.0, 2.0});
  CHECK(std::abs(half.mean) == 0.0);
  CHECK(half.variance == doctest::Approx(1.0));
}

TEST_CASE("prior validation") {
  BGPrior p;
  p.lambda = RVector::Constant(2, 0.5);
  p.mu_x = CMatrix::Zero(2, 3);
  p.phi_x = RMatrix::Constant(2, 3, 1.0);
  p.psi = 0.1;
  CHECK_NOTHROW(p.validate());
  p.lambda(1) = 1.5;
  CHECK_THROWS(p.validate());
  p.lambda(1) = 0.5;
  p.phi_x(0, 0) = 0.0;
  CHECK_THROWS(p.validate());
  p.phi_x(0, 0) = 1.0;
  p.psi = 0.0;
  CHECK_THROWS(p.validate());
}
