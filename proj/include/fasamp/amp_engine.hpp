#pragma once

#include "fasamp/angular.hpp"
#include "fasamp/bg_model.hpp"
#include "fasamp/em_learn.hpp"
#include "fasamp/types.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace fasamp {

/// Iteration-varying quantities of the message-passing recursion. K x N_o
/// fields describe the unknown, G x N_o fields the noise-free output.
struct AmpState {
  CMatrix x_tilde;      // posterior mean
  RMatrix phi_tilde;    // posterior variance
  CMatrix s_hat;        // scaled residual with Onsager correction
  RMatrix phi_r_hat;    // output pseudo-prior variance
  CMatrix mu_r_hat;     // output pseudo-prior mean
  CMatrix mu_r_tilde;   // output posterior mean
  RMatrix phi_r_tilde;  // output posterior variance
  RMatrix phi_s_hat;
  RMatrix phi_x_hat;    // pseudo-measurement variance
  CMatrix mu_x_hat;     // pseudo-measurement
  RMatrix pi;
  CMatrix gamma;
  RMatrix nu;
  int iteration = 0;
};

/// Initial activity level from the noiseless phase-transition curve,
/// (G/K) * max_{a>0} [1 - (2K/G) c(a)] / [1 + a^2 - 2 c(a)] with
/// c(a) = (1 + a^2) Phi(-a) - a N(a; 0, 1), clipped to (0, 1].
double init_lambda(int G, int K);

struct Initialization {
  AmpState state;
  BGPrior prior;
};

Initialization init_state(const CMatrix& Y, const CMatrix& A, double psi);

/// One pass of the output and input steps followed by the scalar denoiser.
/// x_tilde and phi_tilde are blended with the previous values by `damping`.
/// Throws DivergenceError on any non-finite intermediate.
AmpState amp_iterate(const AmpState& state, const CMatrix& Y, const CMatrix& A, const BGPrior& prior,
                     double damping = 1.0, OpCounter* ops = nullptr);

enum class EmVariant { none, conventional, geographic, angular };

EmVariant parse_em_variant(std::string_view name);
std::string_view to_string(EmVariant v);

struct RunOptions {
  EmVariant variant = EmVariant::conventional;
  int T_max = 50;
  double tol = 1e-8;
  double damping = 1.0;
  VMode v_mode = VMode::quadrature_consistent;
  std::optional<GeoBounds> geo;   // required for the geographic variant
  const CMatrix* codebook = nullptr;  // N_o x N_s, required for the angular variant
  int L_s = 3;
  double lambda_thresh = 0.1;
  const CMatrix* truth = nullptr;  // K x N_o; enables the NMSE column of the trace
};

struct RunResult {
  RVector lambda;
  CMatrix x_hat;
  BGPrior prior;
  AmpState state;
  std::vector<TraceEntry> trace;
  bool converged = false;
  OpCounter ops;
};

/// Alternates amp_iterate with the selected hyperparameter update (and the
/// angular refinement for EmVariant::angular) until T_max or until the
/// normalized change of x_tilde drops below tol.
RunResult run(const CMatrix& Y, const CMatrix& A, double psi, const RunOptions& options);

/// Mean over true active rows of ||x_k - x_hat_k||^2 / ||x_k||^2.
double row_nmse(const CMatrix& truth, const CMatrix& estimate);

}  // namespace fasamp
