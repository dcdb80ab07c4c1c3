#include "fasamp/random.hpp"
#include "fasamp/scene.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fasamp;

namespace {

SceneConfig small_config() {
  SceneConfig c;
  c.K = 60;
  c.K_a = 6;
  c.G = 30;
  c.N_o = 16;
  return c;
}

}  // namespace

TEST_CASE("pilots have unit-norm columns and are reproducible") {
  const auto one = generate_pilots(1, 1, 99);
  CHECK(std::abs(one.A(0, 0)) == doctest::Approx(1.0).epsilon(1e-15));

  const auto a = generate_pilots(200, 1000, 7);
  const auto b = generate_pilots(200, 1000, 7);
  REQUIRE(a.A.rows() == 200);
  REQUIRE(a.A.cols() == 1000);
  for (Eigen::Index k = 0; k < a.A.cols(); ++k) CHECK(std::abs(a.A.col(k).norm() - 1.0) < 1e-12);
  CHECK(a.A == b.A);
  CHECK(generate_pilots(200, 1000, 8).A != a.A);
}

TEST_CASE("lsfc") {
  CHECK(lsfc(20.0, 2.0) == doctest::Approx(2.5e-3).epsilon(1e-14));
  CHECK(lsfc(100.0, 2.0) == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(lsfc(1.0, 3.7) == 1.0);
  CHECK_THROWS_AS(lsfc(0.0, 2.0), DomainError);
  CHECK_THROWS_AS(lsfc(-3.0, 2.0), DomainError);
  double prev = lsfc(1.0, 2.0);
  for (double d = 1.5; d < 200.0; d *= 1.5) {
    const double v = lsfc(d, 2.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("steering vector") {
  const CVector broadside = steering_vector(to_radians(Degrees{90.0}), 4, 31.5, 1.0);
  for (Eigen::Index n = 0; n < 4; ++n) {
    CHECK(broadside(n).real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(broadside(n).imag()) < 1e-13);
  }

  // M = 2 gives W = lambda / 2.
  SceneConfig c;
  c.M = 2;
  const CVector two = steering_vector(to_radians(Degrees{60.0}), 2, c.antenna_length(), c.lambda_len);
  CHECK(std::abs(two(0) - cdouble(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
  CHECK(std::abs(two(1) - cdouble(0.0, -1.0 / std::sqrt(2.0))) < 1e-12);

  CHECK(steering_vector(Radians{1.0}, 1, 10.0, 1.0)(0) == cdouble(1.0, 0.0));

  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const CVector v = steering_vector(Radians{uniform(rng, 0.0, std::numbers::pi)}, 16, 31.5, 1.0);
    CHECK(std::abs(v.squaredNorm() - 1.0) < 1e-12);
    for (Eigen::Index n = 0; n < v.size(); ++n) CHECK(std::abs(std::abs(v(n)) - 0.25) < 1e-12);
  }
}

TEST_CASE("scene config validation") {
  SceneConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.d_ref = 200.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.K_a = c.K + 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.theta_min = c.theta_max;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.L_s = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.K_r = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(SceneConfig{}.antenna_length() == doctest::Approx(31.5));
}

TEST_CASE("sampled scene structure") {
  SceneConfig c = small_config();
  c.seed = 11;
  const ChannelScene s = sample_scene(c);
  REQUIRE(s.active_set.size() == static_cast<std::size_t>(c.K_a));
  CHECK(std::is_sorted(s.active_set.begin(), s.active_set.end()));
  CHECK(std::adjacent_find(s.active_set.begin(), s.active_set.end()) == s.active_set.end());
  for (int k = 0; k < c.K; ++k) {
    const bool active = std::binary_search(s.active_set.begin(), s.active_set.end(), k);
    CHECK((s.X.row(k).squaredNorm() > 0.0) == active);
  }
  for (std::size_t u = 0; u < s.locations.size(); ++u) {
    CHECK(s.locations[u].distance >= c.d_ref);
    CHECK(s.locations[u].distance <= c.d_max);
    const double deg = to_degrees(s.locations[u].theta).value;
    CHECK(deg >= c.theta_min);
    CHECK(deg <= c.theta_max);
    CHECK(s.path_gains[u].squaredNorm() == doctest::Approx(c.N_o).epsilon(1e-12));
    CHECK(s.lsfc[u] == doctest::Approx(lsfc(s.locations[u].distance, c.lsfc_exponent)));
  }
  CHECK(s.psi == doctest::Approx(calibrate_noise(c.snr_db, s.mean_lsfc(), c.G)));

  const ChannelScene again = sample_scene(c);
  CHECK(again.X == s.X);
  CHECK(again.active_set == s.active_set);

  c.K_a = c.K;
  const ChannelScene full = sample_scene(c);
  for (int k = 0; k < c.K; ++k) CHECK(full.X.row(k).squaredNorm() > 0.0);
}

TEST_CASE("small-scale fading energy averages to N_o") {
  for (double K_r : {0.0, 4.0}) {
    SceneConfig c;
    c.K = 10;
    c.K_a = 10;
    c.N_o = 16;
    c.K_r = K_r;
    double sum = 0.0;
    int count = 0;
    for (int t = 0; t < 1000; ++t) {
      c.seed = derive_seed(77, t);
      const ChannelScene s = sample_scene(c);
      for (std::size_t u = 0; u < s.active_set.size(); ++u) {
        sum += s.X.row(s.active_set[u]).squaredNorm() / s.lsfc[u];
        ++count;
      }
    }
    CAPTURE(K_r);
    CHECK(sum / count == doctest::Approx(16.0).epsilon(0.03));
  }
}

TEST_CASE("Rician limit is dominated by the line-of-sight path") {
  SceneConfig c = small_config();
  c.K_r = 1e6;
  c.seed = 4;
  const ChannelScene s = sample_scene(c);
  for (std::size_t u = 0; u < s.active_set.size(); ++u) {
    const CVector row = s.X.row(s.active_set[u]).transpose() / std::sqrt(s.lsfc[u]);
    CHECK(s.aoas[u][0].value == s.locations[u].theta.value);
    CHECK(std::abs(s.path_gains[u](0)) == doctest::Approx(std::sqrt(16.0 * 1e6 / (1e6 + 1.0))));
    const CVector los = s.path_gains[u](0) * steering_vector(s.aoas[u][0], c.N_o, c.antenna_length(), c.lambda_len);
    CHECK((row - los).norm() / row.norm() < 1e-2);
  }
}

TEST_CASE("single-path LOS takes all of the power") {
  SceneConfig c = small_config();
  c.K_r = 3.0;
  c.L_s = 1;
  const ChannelScene s = sample_scene(c);
  for (const CVector& g : s.path_gains) CHECK(std::abs(g(0)) == doctest::Approx(4.0));
}

TEST_CASE("noise calibration") {
  CHECK(calibrate_noise(-10.0, 1e-4, 200) == doctest::Approx(5e-6).epsilon(1e-12));
  CHECK(calibrate_noise(0.0, 1.0, 1) == doctest::Approx(1.0));
  CHECK(calibrate_noise(10.0, 1e-4, 200) == doctest::Approx(5e-8).epsilon(1e-12));
  CHECK_THROWS_AS(calibrate_noise(0.0, 0.0, 10), DomainError);
  CHECK_THROWS_AS(calibrate_noise(0.0, 1.0, 0), DomainError);
}

TEST_CASE("received signal synthesis") {
  const auto A = generate_pilots(40, 10, 1).A;
  CMatrix X = CMatrix::Zero(10, 4);
  X(2, 1) = {0.3, -0.2};
  X(7, 3) = {-1.0, 0.5};
  CHECK(synthesize_received(A, X, 0.0, 3) == A * X);
  CHECK(synthesize_received(A, X, 0.1, 3) == synthesize_received(A, X, 0.1, 3));
  CHECK_THROWS_AS(synthesize_received(A, CMatrix::Zero(9, 4), 0.1, 3), DimensionError);

  const auto A2 = generate_pilots(200, 5, 2).A;
  const CMatrix noise = synthesize_received(A2, CMatrix::Zero(5, 16), 1.0, 9);
  const double var = noise.squaredNorm() / static_cast<double>(noise.size());
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));

  // Orthogonal pilots: the matched filter returns the channel exactly.
  const CMatrix I = CMatrix::Identity(6, 6);
  CMatrix H = CMatrix::Zero(6, 3);
  H.row(4) << cdouble(1, 2), cdouble(-0.5, 0), cdouble(0, 3);
  const CMatrix Y = synthesize_received(I, H, 0.0, 1);
  CHECK((I.adjoint() * Y - H).norm() < 1e-15);
}
