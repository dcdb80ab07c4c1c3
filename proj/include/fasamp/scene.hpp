#pragma once

#include "fasamp/types.hpp"

#include <cstdint>
#include <vector>

namespace fasamp {

/// Physical and geometric parameters of one experiment point. Angles are in
/// degrees here and converted to radians on entry to the model code.
struct SceneConfig {
  double d_ref = 20.0;   // meters
  double d_max = 100.0;  // meters
  double theta_min = 30.0;
  double theta_max = 150.0;
  int L_s = 3;
  double K_r = 0.0;
  int M = 64;
  int N_o = 16;
  double lambda_len = 1.0;
  int G = 200;
  int K = 1000;
  int K_a = 10;
  double lsfc_exponent = 2.0;
  double snr_db = -10.0;
  std::uint64_t seed = 1;

  /// Fluid antenna aperture, lambda_len * (M - 1) / 2.
  double antenna_length() const { return lambda_len * (M - 1) / 2.0; }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

struct PilotCodebook {
  CMatrix A;  // G x K, unit-norm columns
};

struct UserLocation {
  double distance = 0.0;
  Radians theta;
};

/// One realized world. Rows of X outside active_set are exactly zero.
struct ChannelScene {
  std::vector<int> active_set;  // sorted, 0-based codeword indices
  std::vector<UserLocation> locations;
  std::vector<std::vector<Radians>> aoas;  // L_s per active user; LOS path first when K_r > 0
  std::vector<CVector> path_gains;         // L_s per active user, before LSFC scaling
  std::vector<double> lsfc;                // per active user
  CMatrix X;                               // K x N_o
  double psi = 0.0;

  double mean_lsfc() const;
};

PilotCodebook generate_pilots(int G, int K, std::uint64_t seed);

/// Large-scale fading d^-exponent. Throws DomainError for d <= 0.
double lsfc(double d, double exponent);

/// Normalized far-field response of N_o uniformly spaced ports over aperture W.
CVector steering_vector(Radians theta, int N_o, double W, double lambda_len);

/// Draws active users, locations, paths and the channel matrix, then sets psi
/// from the configured SNR and the realized mean LSFC.
ChannelScene sample_scene(const SceneConfig& config);

/// psi = mean_lsfc / (G * 10^(snr_db / 10)).
double calibrate_noise(double snr_db, double mean_lsfc, int G);

/// Y = A X + Z with Z ~ CN(0, psi) i.i.d.
CMatrix synthesize_received(const CMatrix& A, const CMatrix& X, double psi, std::uint64_t seed);

}  // namespace fasamp
