#include "fasamp/amp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fasamp {

namespace {

double std_normal_pdf(double a) { return std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi); }
double std_normal_cdf(double a) { return 0.5 * std::erfc(-a / std::numbers::sqrt2); }

// (I1) objective at a > 0 for undersampling ratio G/K.
double lambda_objective(double a, double ratio) {
  const double c = (1.0 + a * a) * std_normal_cdf(-a) - a * std_normal_pdf(a);
  return (1.0 - 2.0 / ratio * c) / (1.0 + a * a - 2.0 * c);
}

void check_finite(const auto& m, int iteration, const char* what) {
  if (!m.allFinite()) throw DivergenceError(iteration, std::string("non-finite ") + what);
}

std::uint64_t count(Eigen::Index a, Eigen::Index b, Eigen::Index c = 1) {
  return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(c);
}

}  // namespace

double init_lambda(int G, int K) {
  if (G < 1 || K < 1) throw DomainError("init_lambda: G and K must be >= 1");
  const double ratio = static_cast<double>(G) / K;
  auto f = [ratio](double a) { return lambda_objective(a, ratio); };

  double best_a = 1e-3;
  double best = f(best_a);
  for (int i = 2; i <= 10000; ++i) {
    const double a = i * 1e-3;
    const double v = f(a);
    if (v > best) {
      best = v;
      best_a = a;
    }
  }
  // Golden-section polish on the bracketing grid cell pair.
  double lo = std::max(best_a - 1e-3, 1e-12);
  double hi = std::min(best_a + 1e-3, 10.0);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-8) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    }
  }
  best = std::max(best, f(0.5 * (lo + hi)));
  const double lambda = ratio * best;
  return std::clamp(lambda, std::numeric_limits<double>::min(), 1.0);
}

Initialization init_state(const CMatrix& Y, const CMatrix& A, double psi) {
  if (Y.rows() != A.rows()) throw DimensionError("init_state: Y and A row counts differ");
  if (!(psi > 0.0)) throw DomainError("init_state: psi must be positive");
  const Eigen::Index G = A.rows();
  const Eigen::Index K = A.cols();
  const Eigen::Index N = Y.cols();

  Initialization init;
  BGPrior& prior = init.prior;
  prior.psi = psi;
  prior.lambda = RVector::Constant(K, init_lambda(static_cast<int>(G), static_cast<int>(K)));
  prior.mu_x = CMatrix::Zero(K, N);

  // Received power minus noise power, per port, over the expected active energy.
  const double denom = (A.cwiseAbs2() * prior.lambda).sum();
  const RVector column_power = Y.cwiseAbs2().colwise().sum().transpose();
  prior.phi_x.resize(K, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const double v = (column_power(n) - static_cast<double>(G) * psi) / denom;
    prior.phi_x.col(n).setConstant(std::max(v, kVarianceFloor));
  }

  AmpState& s = init.state;
  s.x_tilde.resize(K, N);
  s.phi_tilde.resize(K, N);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index n = 0; n < N; ++n) {
      const Moments m = prior_moments({prior.lambda(k), prior.mu_x(k, n), prior.phi_x(k, n)});
      s.x_tilde(k, n) = m.mean;
      s.phi_tilde(k, n) = m.variance;
    }
  }
  s.s_hat = CMatrix::Zero(G, N);
  s.iteration = 0;
  return init;
}

AmpState amp_iterate(const AmpState& state, const CMatrix& Y, const CMatrix& A, const BGPrior& prior, double damping,
                     OpCounter* ops) {
  if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("amp_iterate: damping must lie in (0, 1]");
  const Eigen::Index G = A.rows();
  const Eigen::Index K = A.cols();
  const Eigen::Index N = Y.cols();
  if (Y.rows() != G || state.x_tilde.rows() != K || state.x_tilde.cols() != N || state.s_hat.rows() != G ||
      state.s_hat.cols() != N || prior.phi_x.rows() != K || prior.phi_x.cols() != N)
    throw DimensionError("amp_iterate: non-conforming shapes");

  const double psi = prior.psi;
  const int t = state.iteration + 1;
  const RMatrix A2 = A.cwiseAbs2();

  AmpState next;
  next.iteration = t;

  // (A1)-(A2)
  next.phi_r_hat = (A2 * state.phi_tilde).cwiseMax(kVarianceFloor);
  next.mu_r_hat = A * state.x_tilde - (next.phi_r_hat.cast<cdouble>().cwiseProduct(state.s_hat));
  // Output posterior: mean (A3) and variance (A4) of r given y.
  const RMatrix denom = next.phi_r_hat.array() + psi;
  next.mu_r_tilde = (next.phi_r_hat.cast<cdouble>().cwiseProduct(Y) + psi * next.mu_r_hat)
                        .cwiseQuotient(denom.cast<cdouble>());
  next.phi_r_tilde = next.phi_r_hat.cwiseProduct(denom.cwiseInverse()) * psi;
  // (A5)-(A6)
  next.phi_s_hat = (next.phi_r_hat - next.phi_r_tilde).cwiseQuotient(next.phi_r_hat.cwiseAbs2());
  next.s_hat = (next.mu_r_tilde - next.mu_r_hat).cwiseQuotient(next.phi_r_hat.cast<cdouble>());
  check_finite(next.s_hat, t, "s_hat");
  // (A7)-(A8)
  next.phi_x_hat = (A2.transpose() * next.phi_s_hat).cwiseMax(kVarianceFloor).cwiseInverse();
  next.mu_x_hat =
      state.x_tilde + next.phi_x_hat.cast<cdouble>().cwiseProduct(A.adjoint() * next.s_hat);
  check_finite(next.mu_x_hat, t, "mu_x_hat");
  check_finite(next.phi_x_hat, t, "phi_x_hat");

  // (B1)-(B4), (A9)-(A10)
  next.pi.resize(K, N);
  next.gamma.resize(K, N);
  next.nu.resize(K, N);
  next.x_tilde.resize(K, N);
  next.phi_tilde.resize(K, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const PosteriorMoments m =
          denoise(next.mu_x_hat(k, n), next.phi_x_hat(k, n), {prior.lambda(k), prior.mu_x(k, n), prior.phi_x(k, n)});
      next.pi(k, n) = m.pi;
      next.gamma(k, n) = m.gamma;
      next.nu(k, n) = m.nu;
      next.x_tilde(k, n) = m.x_tilde;
      next.phi_tilde(k, n) = m.phi_tilde;
    }
  }
  if (damping < 1.0) {
    next.x_tilde = damping * next.x_tilde + (1.0 - damping) * state.x_tilde;
    next.phi_tilde = damping * next.phi_tilde + (1.0 - damping) * state.phi_tilde;
  }
  check_finite(next.x_tilde, t, "x_tilde");
  check_finite(next.phi_tilde, t, "phi_tilde");

  if (ops) {
    // Four K x G x N_o products dominate; the rest is elementwise.
    ops->amp_core += 4 * count(G, K, N) + 8 * count(G, N) + 6 * count(K, N);
  }
  return next;
}

EmVariant parse_em_variant(std::string_view name) {
  if (name == "none") return EmVariant::none;
  if (name == "conventional") return EmVariant::conventional;
  if (name == "geographic") return EmVariant::geographic;
  if (name == "angular") return EmVariant::angular;
  throw ConfigError("unknown EM variant '" + std::string(name) + "'");
}

std::string_view to_string(EmVariant v) {
  switch (v) {
    case EmVariant::none:
      return "none";
    case EmVariant::conventional:
      return "conventional";
    case EmVariant::geographic:
      return "geographic";
    case EmVariant::angular:
      return "angular";
  }
  return "?";
}

double row_nmse(const CMatrix& truth, const CMatrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw DimensionError("row_nmse: shape mismatch");
  double total = 0.0;
  int rows = 0;
  for (Eigen::Index k = 0; k < truth.rows(); ++k) {
    const double e = truth.row(k).squaredNorm();
    if (e == 0.0) continue;
    total += (truth.row(k) - estimate.row(k)).squaredNorm() / e;
    ++rows;
  }
  return rows > 0 ? total / rows : std::numeric_limits<double>::quiet_NaN();
}

namespace {

// Writes per-user hyperparameters into the K x N_o prior, skipping users
// without posterior support. The clipped geographic variance is well defined
// for every user, so guard_phi = false writes it unconditionally.
void apply_user_update(BGPrior& prior, const Eigen::Array<bool, Eigen::Dynamic, 1>& supported, const CVector& mu,
                       const RVector& phi, bool guard_phi = true) {
  for (Eigen::Index k = 0; k < prior.mu_x.rows(); ++k) {
    if (!guard_phi || supported(k)) prior.phi_x.row(k).setConstant(phi(k));
    if (supported(k)) prior.mu_x.row(k).setConstant(mu(k));
  }
}

void em_step(const RunOptions& opt, const AmpState& s, BGPrior& prior, OpCounter& ops) {
  const Eigen::Index K = s.pi.rows();
  const Eigen::Index N = s.pi.cols();
  const CVector mu_prev = prior.mu_x.col(0);
  const auto supported = supported_users(s.pi);
  prior.lambda = em_update_lambda(s.pi);
  const CVector mu_next = em_update_mu(s.pi, s.gamma);

  switch (opt.variant) {
    case EmVariant::none:
      return;
    case EmVariant::conventional:
    case EmVariant::angular:
      apply_user_update(prior, supported, mu_next, em_update_phi_conventional(s.pi, s.gamma, s.nu, mu_prev));
      ops.em += 3 * count(K, N);
      return;
    case EmVariant::geographic: {
      RMatrix V(K, N);
      for (Eigen::Index n = 0; n < N; ++n) {
        for (Eigen::Index k = 0; k < K; ++k) {
          PosteriorMoments m;
          m.pi = s.pi(k, n);
          m.gamma = s.gamma(k, n);
          m.nu = s.nu(k, n);
          m.x_tilde = m.pi * m.gamma;
          m.phi_tilde = m.pi * m.nu + m.pi * (1.0 - m.pi) * std::norm(m.gamma);
          V(k, n) = posterior_v(m, mu_prev(k), opt.v_mode);
        }
      }
      apply_user_update(prior, supported, mu_next, em_update_phi_geographic(s.pi, V, *opt.geo), false);
      ops.em += 4 * count(K, N);
      return;
    }
  }
}

double normalized_change(const CMatrix& next, const CMatrix& prev) {
  const double base = prev.squaredNorm();
  const double diff = (next - prev).squaredNorm();
  if (base == 0.0) return diff == 0.0 ? 0.0 : 1.0;
  return diff / base;
}

}  // namespace

RunResult run(const CMatrix& Y, const CMatrix& A, double psi, const RunOptions& options) {
  if (options.T_max < 0) throw DomainError("run: T_max must be >= 0");
  if (options.variant == EmVariant::geographic && !options.geo)
    throw ConfigError("run: geographic variant needs GeoBounds");
  if (options.variant == EmVariant::angular && options.codebook == nullptr)
    throw ConfigError("run: angular variant needs a steering codebook");
  if (options.truth && (options.truth->rows() != A.cols() || options.truth->cols() != Y.cols()))
    throw DimensionError("run: truth must be K x N_o");

  Initialization init = init_state(Y, A, psi);
  RunResult result;
  result.prior = std::move(init.prior);
  AmpState state = std::move(init.state);

  for (int t = 1; t <= options.T_max; ++t) {
    AmpState next;
    try {
      next = amp_iterate(state, Y, A, result.prior, options.damping, &result.ops);
      em_step(options, next, result.prior, result.ops);
      if (options.variant == EmVariant::angular) {
        next.x_tilde = refine_candidates(next.x_tilde, result.prior.lambda, *options.codebook, options.L_s,
                                         options.lambda_thresh, {}, &result.ops);
      }
      if (!next.x_tilde.allFinite() || !result.prior.phi_x.allFinite())
        throw DivergenceError(t, "non-finite after hyperparameter update");
    } catch (DivergenceError& e) {
      e.set_trace(result.trace);
      throw;
    }

    TraceEntry entry;
    entry.iteration = t;
    entry.residual = normalized_change(next.x_tilde, state.x_tilde);
    entry.nmse = options.truth ? row_nmse(*options.truth, next.x_tilde) : std::numeric_limits<double>::quiet_NaN();
    result.trace.push_back(entry);
    state = std::move(next);
    if (entry.residual < options.tol) {
      result.converged = true;
      break;
    }
  }

  result.lambda = result.prior.lambda;
  result.x_hat = state.x_tilde;
  result.state = std::move(state);
  return result;
}

}  // namespace fasamp
