#pragma once

#include "fasamp/scene.hpp"
#include "fasamp/types.hpp"

#include <vector>

namespace fasamp {

/// Steering responses sampled on a uniform AoA grid; column i is
/// steering_vector(grid[i]).
struct SteeringCodebook {
  CMatrix W;                   // N_o x N_s
  std::vector<Degrees> grid;   // N_s
};

SteeringCodebook build_codebook(Degrees theta_min, Degrees theta_max, int N_s, int N_o, double antenna_length,
                                double lambda_len);
SteeringCodebook build_codebook(const SceneConfig& config, int N_s = 121);

/// Nonzeros of the sparse path-gain vector over the codebook columns.
struct SparseGains {
  std::vector<int> support;
  CVector values;
};

struct RefinedRow {
  CVector row;  // W * sigma
  SparseGains gains;
};

struct OmpOptions {
  /// Stop early once ||residual||^2 <= residual_tol * ||row||^2. 0 disables.
  double residual_tol = 0.0;
  /// Relative rank tolerance of the least-squares factorization.
  double rank_tol = 1e-10;
};

/// Orthogonal matching pursuit of a channel row onto at most L_s codebook
/// columns. Atoms that make the support rank deficient are discarded.
RefinedRow omp_refine(const CVector& row, const CMatrix& W, int L_s, const OmpOptions& options = {},
                      OpCounter* ops = nullptr);

/// Replaces every row k with lambda_k >= lambda_thresh by its OMP projection.
CMatrix refine_candidates(const CMatrix& x_tilde, const RVector& lambda, const CMatrix& W, int L_s,
                          double lambda_thresh, const OmpOptions& options = {}, OpCounter* ops = nullptr);

struct SompResult {
  std::vector<int> support;  // selection order, K_a entries
  CMatrix H;                 // K_a x N_o, row i belongs to support[i]
  bool rank_deficient = false;
};

/// Simultaneous OMP over codebook C with residual projection through the
/// Moore-Penrose inverse of the selected columns; channels by least squares.
SompResult somp(const CMatrix& Y, const CMatrix& C, int K_a, OpCounter* ops = nullptr);

}  // namespace fasamp
