#include "fasamp/scene.hpp"

#include "fasamp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fasamp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid scene config: " + what);
}

// Rescale gains so that sum |g|^2 == power exactly.
void normalize_power(CVector& gains, double power) {
  const double current = gains.squaredNorm();
  if (current > 0.0) gains *= std::sqrt(power / current);
}

}  // namespace

void SceneConfig::validate() const {
  require(d_ref > 0.0 && d_ref < d_max, "need 0 < d_ref < d_max");
  require(theta_min < theta_max, "need theta_min < theta_max");
  require(K >= 1 && K_a >= 1 && K_a <= K, "need 1 <= K_a <= K");
  require(L_s >= 1, "need L_s >= 1");
  require(N_o >= 1, "need N_o >= 1");
  require(G >= 1, "need G >= 1");
  require(M >= 1, "need M >= 1");
  require(K_r >= 0.0, "need K_r >= 0");
  require(lambda_len > 0.0, "need lambda_len > 0");
  require(std::isfinite(snr_db), "snr_db must be finite");
}

double ChannelScene::mean_lsfc() const {
  if (lsfc.empty()) return 0.0;
  return std::accumulate(lsfc.begin(), lsfc.end(), 0.0) / static_cast<double>(lsfc.size());
}

PilotCodebook generate_pilots(int G, int K, std::uint64_t seed) {
  if (G < 1 || K < 1) throw DimensionError("generate_pilots: G and K must be >= 1");
  Rng rng(seed);
  PilotCodebook book{CMatrix(G, K)};
  for (int k = 0; k < K; ++k) {
    for (int g = 0; g < G; ++g) book.A(g, k) = complex_normal(rng, 1.0);
    const double n = book.A.col(k).norm();
    if (n > 0.0) {
      book.A.col(k) /= n;
    } else {
      book.A.col(k).setZero();
      book.A(0, k) = 1.0;
    }
  }
  return book;
}

double lsfc(double d, double exponent) {
  if (!(d > 0.0)) throw DomainError("lsfc: distance must be positive");
  return std::pow(d, -exponent);
}

CVector steering_vector(Radians theta, int N_o, double W, double lambda_len) {
  if (N_o < 1) throw DimensionError("steering_vector: N_o must be >= 1");
  CVector s(N_o);
  if (N_o == 1) {
    s(0) = 1.0;
    return s;
  }
  const double amp = 1.0 / std::sqrt(static_cast<double>(N_o));
  const double step = 2.0 * std::numbers::pi * W * std::cos(theta.value) / ((N_o - 1) * lambda_len);
  for (int n = 0; n < N_o; ++n) s(n) = std::polar(amp, -step * n);
  return s;
}

ChannelScene sample_scene(const SceneConfig& config) {
  config.validate();
  Rng rng(config.seed);

  ChannelScene scene;
  // Partial Fisher-Yates over codeword indices.
  std::vector<int> idx(config.K);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < config.K_a; ++i) {
    std::uniform_int_distribution<int> pick(i, config.K - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  scene.active_set.assign(idx.begin(), idx.begin() + config.K_a);
  std::sort(scene.active_set.begin(), scene.active_set.end());

  const Radians th_lo = to_radians(Degrees{config.theta_min});
  const Radians th_hi = to_radians(Degrees{config.theta_max});
  const double W = config.antenna_length();
  const double omega = static_cast<double>(config.N_o);

  scene.X = CMatrix::Zero(config.K, config.N_o);
  for (int u = 0; u < config.K_a; ++u) {
    UserLocation loc{uniform(rng, config.d_ref, config.d_max), Radians{uniform(rng, th_lo.value, th_hi.value)}};

    std::vector<Radians> aoas(config.L_s);
    CVector gains(config.L_s);
    if (config.K_r == 0.0) {
      for (int l = 0; l < config.L_s; ++l) {
        aoas[l] = Radians{uniform(rng, th_lo.value, th_hi.value)};
        gains(l) = complex_normal(rng, 1.0);
      }
      normalize_power(gains, omega);
    } else {
      const double beta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      aoas[0] = loc.theta;
      if (config.L_s == 1) {
        gains(0) = std::polar(std::sqrt(omega), beta);
      } else {
        gains(0) = std::polar(std::sqrt(config.K_r * omega / (config.K_r + 1.0)), beta);
        CVector nlos(config.L_s - 1);
        for (int l = 1; l < config.L_s; ++l) {
          aoas[l] = Radians{uniform(rng, th_lo.value, th_hi.value)};
          nlos(l - 1) = complex_normal(rng, 1.0);
        }
        normalize_power(nlos, omega / (config.K_r + 1.0));
        gains.tail(config.L_s - 1) = nlos;
      }
    }

    const double fade = lsfc(loc.distance, config.lsfc_exponent);
    CVector s = CVector::Zero(config.N_o);
    for (int l = 0; l < config.L_s; ++l) s += gains(l) * steering_vector(aoas[l], config.N_o, W, config.lambda_len);
    scene.X.row(scene.active_set[u]) = std::sqrt(fade) * s.transpose();

    scene.locations.push_back(loc);
    scene.aoas.push_back(std::move(aoas));
    scene.path_gains.push_back(std::move(gains));
    scene.lsfc.push_back(fade);
  }
  scene.psi = calibrate_noise(config.snr_db, scene.mean_lsfc(), config.G);
  return scene;
}

double calibrate_noise(double snr_db, double mean_lsfc, int G) {
  if (G < 1) throw DomainError("calibrate_noise: G must be >= 1");
  if (!(mean_lsfc > 0.0)) throw DomainError("calibrate_noise: mean_lsfc must be positive");
  return mean_lsfc / (G * std::pow(10.0, snr_db / 10.0));
}

CMatrix synthesize_received(const CMatrix& A, const CMatrix& X, double psi, std::uint64_t seed) {
  if (A.cols() != X.rows()) throw DimensionError("synthesize_received: A.cols() != X.rows()");
  if (psi < 0.0) throw DomainError("synthesize_received: psi must be non-negative");
  CMatrix Y = A * X;
  if (psi == 0.0) return Y;
  Rng rng(seed);
  for (Eigen::Index n = 0; n < Y.cols(); ++n)
    for (Eigen::Index g = 0; g < Y.rows(); ++g) Y(g, n) += complex_normal(rng, psi);
  return Y;
}

}  // namespace fasamp
