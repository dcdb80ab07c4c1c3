#pragma once

#include "fasamp/scene.hpp"
#include "fasamp/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace fasamp {

/// 1 - |true ∩ est| / K_a.
double ade(const std::vector<int>& true_set, const std::vector<int>& est_set, int K_a);

/// Indices of the K_a largest activity likelihoods, ascending. Equal values
/// are ranked by lower index first.
std::vector<int> top_ka(const RVector& lambda, int K_a);

/// Sorted intersection of two index sets.
std::vector<int> intersect(std::vector<int> a, std::vector<int> b);

enum class NmseConvention {
  per_user_mean,  // mean over users of ||h - h_hat||^2 / ||h||^2
  ratio_of_sums,  // sum ||h - h_hat||^2 / sum ||h||^2
};

NmseConvention parse_nmse_convention(std::string_view name);

/// Rows are the correctly detected users. nullopt when there are none.
std::optional<double> nmse(const CMatrix& H_true, const CMatrix& H_hat,
                           NmseConvention convention = NmseConvention::per_user_mean);

/// mean |phi_true - phi_hat|^2; nullopt on empty input.
std::optional<double> variance_mse(const RVector& phi_true, const RVector& phi_hat);

struct GreedyFloor {
  double floor = 0.0;        // (sigma_bar + psi)^2
  double lower_bound = 0.0;  // (f(d_max) + psi)^2
};

GreedyFloor greedy_floor_mse(double sigma_bar, double psi, double d_max, double exponent);

/// Matched-filter equalization y_tilde_n = a^H y_n / (a^H a).
CVector equalize(const CVector& pilot, const CMatrix& Y);

/// Per-port maximum-likelihood variance |y_tilde_n - h_bar|^2 - psi. May be
/// negative; it is returned unclipped.
RVector greedy_variance_estimator(const CVector& y_tilde, cdouble h_bar, double psi);

struct LsMsePair {
  double M = 0.0;          // empirical MSE of plain least squares
  double M_angular = 0.0;  // empirical MSE with known steering rows
  double M_ref = 0.0;      // N_o psi
  double M_angular_ref = 0.0;  // L_s psi
  int trials = 0;
  int regenerated = 0;     // singular U U^H redraws
};

/// Empirical least-squares channel MSE without and with angular knowledge
/// for a single user Y = a (sigma U) + Z, with fixed steering rows U (L_s x N_o).
/// Throws DomainError if U U^H is singular.
LsMsePair ls_mse_pair(const CVector& pilot, const CMatrix& U, double psi, int trials, std::uint64_t seed,
                      double path_variance = 1.0);

/// As above with fresh AoAs drawn for every trial from the scene's angular
/// range; collinear draws are regenerated.
LsMsePair ls_mse_pair_random_aoa(const CVector& pilot, const SceneConfig& config, double psi, int trials,
                                 std::uint64_t seed, double path_variance = 1.0);

}  // namespace fasamp
