#pragma once

// Independent test references. Plain loops over std::complex, no Eigen
// algebra and no calls into the library under test.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

namespace ref {

using cd = std::complex<double>;
using Mat = std::vector<std::vector<cd>>;  // row-major
using RMat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, std::vector<cd>(c, cd{})); }
inline RMat rzeros(std::size_t r, std::size_t c) { return RMat(r, std::vector<double>(c, 0.0)); }

// ---------------------------------------------------------------- AMP step

struct Prior {
  std::vector<double> lambda;  // K
  Mat mu;                      // K x N
  RMat phi;                    // K x N
  double psi = 0.0;
};

struct State {
  Mat x;      // K x N
  RMat vx;    // K x N
  Mat s;      // G x N
};

inline double cn_pdf(cd x, cd m, double v) {
  return std::exp(-std::norm(x - m) / v) / (std::numbers::pi * v);
}

// One pass of the message-passing recursion written out entry by entry.
inline State amp_step(const State& in, const Mat& Y, const Mat& A, const Prior& p) {
  const double floor = 1e-12;
  const std::size_t G = A.size();
  const std::size_t K = A[0].size();
  const std::size_t N = Y[0].size();
  State out{zeros(K, N), rzeros(K, N), zeros(G, N)};
  RMat phi_s = rzeros(G, N);

  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t g = 0; g < G; ++g) {
      double vr = 0.0;
      cd ax{};
      for (std::size_t k = 0; k < K; ++k) {
        vr += std::norm(A[g][k]) * in.vx[k][n];
        ax += A[g][k] * in.x[k][n];
      }
      vr = std::max(vr, floor);
      const cd mr = ax - vr * in.s[g][n];
      const cd post_mean = (vr * Y[g][n] + p.psi * mr) / (vr + p.psi);
      const double post_var = vr * p.psi / (vr + p.psi);
      phi_s[g][n] = (vr - post_var) / (vr * vr);
      out.s[g][n] = (post_mean - mr) / vr;
    }
    for (std::size_t k = 0; k < K; ++k) {
      double inv = 0.0;
      cd corr{};
      for (std::size_t g = 0; g < G; ++g) {
        inv += std::norm(A[g][k]) * phi_s[g][n];
        corr += std::conj(A[g][k]) * out.s[g][n];
      }
      const double vx = 1.0 / std::max(inv, floor);
      const cd mx = in.x[k][n] + vx * corr;

      const double l = p.lambda[k];
      const cd mu = p.mu[k][n];
      const double phi = p.phi[k][n];
      const cd gamma = (mx / vx + mu / phi) / (1.0 / vx + 1.0 / phi);
      const double nu = 1.0 / (1.0 / vx + 1.0 / phi);
      const double beta = l * cn_pdf(mx, mu, vx + phi);
      const double zero = (1.0 - l) * cn_pdf(mx, 0.0, vx);
      const double pi = beta / (beta + zero);
      out.x[k][n] = pi * gamma;
      out.vx[k][n] = pi * (nu + std::norm(gamma)) - std::norm(pi * gamma);
    }
  }
  return out;
}

// --------------------------------------------------------- linear algebra

// Least squares min ||y - B c|| via normal equations and Gaussian elimination
// with partial pivoting. B is M x S, column-major list of columns.
inline std::vector<cd> least_squares(const std::vector<std::vector<cd>>& cols, const std::vector<cd>& y) {
  const std::size_t S = cols.size();
  const std::size_t M = y.size();
  Mat gram = zeros(S, S + 1);
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = 0; j < S; ++j)
      for (std::size_t m = 0; m < M; ++m) gram[i][j] += std::conj(cols[i][m]) * cols[j][m];
    for (std::size_t m = 0; m < M; ++m) gram[i][S] += std::conj(cols[i][m]) * y[m];
  }
  for (std::size_t c = 0; c < S; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < S; ++r)
      if (std::abs(gram[r][c]) > std::abs(gram[piv][c])) piv = r;
    std::swap(gram[c], gram[piv]);
    for (std::size_t r = 0; r < S; ++r) {
      if (r == c) continue;
      const cd f = gram[r][c] / gram[c][c];
      for (std::size_t j = c; j <= S; ++j) gram[r][j] -= f * gram[c][j];
    }
  }
  std::vector<cd> out(S);
  for (std::size_t i = 0; i < S; ++i) out[i] = gram[i][S] / gram[i][i];
  return out;
}

inline double residual_energy(const std::vector<std::vector<cd>>& cols, const std::vector<cd>& y) {
  const std::vector<cd> c = least_squares(cols, y);
  double e = 0.0;
  for (std::size_t m = 0; m < y.size(); ++m) {
    cd fit{};
    for (std::size_t i = 0; i < cols.size(); ++i) fit += cols[i][m] * c[i];
    e += std::norm(y[m] - fit);
  }
  return e;
}

// ------------------------------------------------------------- scalar OMP

struct OmpResult {
  std::vector<int> support;
  std::vector<cd> coeffs;
};

// Single measurement vector y against the columns of C (list of columns).
inline OmpResult omp(const std::vector<std::vector<cd>>& C, const std::vector<cd>& y, int steps) {
  OmpResult out;
  std::vector<cd> r = y;
  std::vector<char> used(C.size(), 0);
  for (int s = 0; s < steps; ++s) {
    int best = -1;
    double best_val = -1.0;
    for (std::size_t i = 0; i < C.size(); ++i) {
      if (used[i]) continue;
      cd ip{};
      double nrm = 0.0;
      for (std::size_t m = 0; m < y.size(); ++m) {
        ip += std::conj(C[i][m]) * r[m];
        nrm += std::norm(C[i][m]);
      }
      const double v = std::abs(ip) / std::sqrt(nrm);
      if (v > best_val) {
        best_val = v;
        best = static_cast<int>(i);
      }
    }
    used[best] = 1;
    out.support.push_back(best);
    std::vector<std::vector<cd>> cols;
    for (int j : out.support) cols.push_back(C[j]);
    out.coeffs = least_squares(cols, y);
    for (std::size_t m = 0; m < y.size(); ++m) {
      cd fit{};
      for (std::size_t i = 0; i < cols.size(); ++i) fit += cols[i][m] * out.coeffs[i];
      r[m] = y[m] - fit;
    }
  }
  return out;
}

// ------------------------------------------------------ exhaustive subsets

// Best size-k subset of columns for multi-column data Y (list of columns of
// length M) under least-squares residual energy.
struct SubsetResult {
  std::vector<int> support;  // ascending
  double residual = std::numeric_limits<double>::infinity();
};

inline SubsetResult best_subset(const std::vector<std::vector<cd>>& C, const std::vector<std::vector<cd>>& Ycols,
                                int k) {
  const std::size_t n = C.size();
  const std::size_t M = Ycols.front().size();
  // Residual of a subset S: ||y||^2 - b_S^H (C_S^H C_S)^-1 b_S, from precomputed products.
  Mat gram = zeros(n, n);
  Mat cy = zeros(n, Ycols.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t m = 0; m < M; ++m) gram[i][j] += std::conj(C[i][m]) * C[j][m];
    for (std::size_t c = 0; c < Ycols.size(); ++c)
      for (std::size_t m = 0; m < M; ++m) cy[i][c] += std::conj(C[i][m]) * Ycols[c][m];
  }
  for (const auto& y : Ycols)
    for (cd v : y) total += std::norm(v);

  SubsetResult best;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[i] = i;
  const std::size_t S = idx.size();
  while (true) {
    double explained = 0.0;
    for (std::size_t c = 0; c < Ycols.size(); ++c) {
      Mat aug = zeros(S, S + 1);
      for (std::size_t a = 0; a < S; ++a) {
        for (std::size_t b = 0; b < S; ++b) aug[a][b] = gram[idx[a]][idx[b]];
        aug[a][S] = cy[idx[a]][c];
      }
      for (std::size_t col = 0; col < S; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < S; ++r)
          if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
        std::swap(aug[col], aug[piv]);
        for (std::size_t r = 0; r < S; ++r) {
          if (r == col) continue;
          const cd f = aug[r][col] / aug[col][col];
          for (std::size_t j = col; j <= S; ++j) aug[r][j] -= f * aug[col][j];
        }
      }
      for (std::size_t a = 0; a < S; ++a)
        explained += std::real(std::conj(cy[idx[a]][c]) * (aug[a][S] / aug[a][a]));
    }
    const double e = total - explained;
    if (e < best.residual) {
      best.residual = e;
      best.support = idx;
    }
    int i = k - 1;
    while (i >= 0 && idx[i] == static_cast<int>(n) - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

}  // namespace ref
