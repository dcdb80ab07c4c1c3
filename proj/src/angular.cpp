#include "fasamp/angular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fasamp {

namespace {

constexpr double kPinvTol = 1e-10;

Eigen::CompleteOrthogonalDecomposition<CMatrix> factor(const CMatrix& Phi, double tol) {
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
  cod.setThreshold(tol);
  cod.compute(Phi);
  return cod;
}

CMatrix gather_columns(const CMatrix& C, const std::vector<int>& cols) {
  CMatrix out(C.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = C.col(cols[i]);
  return out;
}

std::uint64_t qr_cost(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<std::uint64_t>(2 * rows * cols * cols);
}

}  // namespace

SteeringCodebook build_codebook(Degrees theta_min, Degrees theta_max, int N_s, int N_o, double antenna_length,
                                double lambda_len) {
  if (N_s < 1) throw DomainError("build_codebook: N_s must be >= 1");
  SteeringCodebook book;
  book.W.resize(N_o, N_s);
  book.grid.reserve(N_s);
  const double step = N_s > 1 ? (theta_max.value - theta_min.value) / (N_s - 1) : 0.0;
  for (int i = 0; i < N_s; ++i) {
    const Degrees d{theta_min.value + step * i};
    book.grid.push_back(d);
    book.W.col(i) = steering_vector(to_radians(d), N_o, antenna_length, lambda_len);
  }
  return book;
}

SteeringCodebook build_codebook(const SceneConfig& config, int N_s) {
  return build_codebook(Degrees{config.theta_min}, Degrees{config.theta_max}, N_s, config.N_o,
                        config.antenna_length(), config.lambda_len);
}

RefinedRow omp_refine(const CVector& row, const CMatrix& W, int L_s, const OmpOptions& options, OpCounter* ops) {
  if (row.size() != W.rows()) throw DimensionError("omp_refine: row length != codebook rows");
  RefinedRow out;
  out.row = CVector::Zero(row.size());
  const double energy = row.squaredNorm();
  if (energy == 0.0 || L_s <= 0) return out;

  const RVector col_norms = W.colwise().norm().transpose();
  std::vector<char> excluded(W.cols(), 0);
  std::vector<int> support;
  CVector residual = row;
  CVector coeffs;
  std::uint64_t work = 0;

  while (static_cast<int>(support.size()) < L_s) {
    if (options.residual_tol > 0.0 && residual.squaredNorm() <= options.residual_tol * energy) break;
    const RVector corr = (W.adjoint() * residual).cwiseAbs();
    work += static_cast<std::uint64_t>(W.rows() * W.cols());

    int best = -1;
    double best_val = -1.0;
    for (Eigen::Index i = 0; i < W.cols(); ++i) {
      if (excluded[i] || col_norms(i) == 0.0) continue;
      const double v = corr(i) / col_norms(i);
      if (v > best_val) {
        best_val = v;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) break;

    support.push_back(best);
    const CMatrix Phi = gather_columns(W, support);
    const auto cod = factor(Phi, options.rank_tol);
    work += qr_cost(Phi.rows(), Phi.cols());
    if (cod.rank() < static_cast<Eigen::Index>(support.size())) {
      support.pop_back();
      excluded[best] = 1;
      continue;
    }
    excluded[best] = 1;
    coeffs = cod.solve(row);
    residual = row - Phi * coeffs;
    work += static_cast<std::uint64_t>(2 * Phi.rows() * Phi.cols());
  }

  if (ops) ops->refine += work;
  if (support.empty()) return out;
  out.gains.support = support;
  out.gains.values = coeffs;
  out.row = row - residual;
  return out;
}

CMatrix refine_candidates(const CMatrix& x_tilde, const RVector& lambda, const CMatrix& W, int L_s,
                          double lambda_thresh, const OmpOptions& options, OpCounter* ops) {
  if (lambda.size() != x_tilde.rows()) throw DimensionError("refine_candidates: lambda size != rows");
  CMatrix out = x_tilde;
  for (Eigen::Index k = 0; k < x_tilde.rows(); ++k) {
    if (lambda(k) < lambda_thresh) continue;
    const CVector row = x_tilde.row(k).transpose();
    out.row(k) = omp_refine(row, W, L_s, options, ops).row.transpose();
  }
  return out;
}

SompResult somp(const CMatrix& Y, const CMatrix& C, int K_a, OpCounter* ops) {
  if (Y.rows() != C.rows()) throw DimensionError("somp: Y and C row counts differ");
  if (K_a < 1 || K_a > C.cols()) throw DomainError("somp: need 1 <= K_a <= number of codewords");

  SompResult out;
  const RVector col_norms = C.colwise().norm().transpose();
  std::vector<char> chosen(C.cols(), 0);
  CMatrix R = Y;
  std::uint64_t work = 0;

  for (int step = 0; step < K_a; ++step) {
    // ||R^H c_i||_2 for every column at once: rows of C^H R.
    const RVector score = (C.adjoint() * R).rowwise().norm();
    work += static_cast<std::uint64_t>(C.rows() * C.cols() * R.cols());
    int best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < C.cols(); ++i) {
      if (chosen[i]) continue;
      const double v = col_norms(i) > 0.0 ? score(i) / col_norms(i) : 0.0;
      if (v > best_val) {
        best_val = v;
        best = static_cast<int>(i);
      }
    }
    chosen[best] = 1;
    out.support.push_back(best);

    const CMatrix Phi = gather_columns(C, out.support);
    const auto cod = factor(Phi, kPinvTol);
    work += qr_cost(Phi.rows(), Phi.cols());
    if (cod.rank() < Phi.cols()) out.rank_deficient = true;
    R = Y - Phi * cod.solve(Y);
    work += static_cast<std::uint64_t>(2 * Phi.rows() * Phi.cols() * Y.cols());
  }

  const CMatrix Phi = gather_columns(C, out.support);
  out.H = factor(Phi, kPinvTol).solve(Y);
  work += qr_cost(Phi.rows(), Phi.cols()) + static_cast<std::uint64_t>(Phi.rows() * Phi.cols() * Y.cols());
  if (ops) ops->somp += work;
  return out;
}

}  // namespace fasamp
