#include "fasamp/harness.hpp"

#include "fasamp/angular.hpp"
#include "fasamp/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef FASAMP_VERSION
#define FASAMP_VERSION "0.0.0"
#endif

namespace fasamp {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void reject_unknown(const json& section, const std::set<std::string>& allowed, const std::string& where) {
  if (!section.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : section.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& section, const char* key, T& into) {
  if (!section.contains(key)) return;
  try {
    into = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "em_amp_conventional") return Algorithm::em_amp_conventional;
  if (name == "proposed_geo") return Algorithm::proposed_geo;
  if (name == "proposed_angular") return Algorithm::proposed_angular;
  if (name == "somp_ls") return Algorithm::somp_ls;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::em_amp_conventional:
      return "em_amp_conventional";
    case Algorithm::proposed_geo:
      return "proposed_geo";
    case Algorithm::proposed_angular:
      return "proposed_angular";
    case Algorithm::somp_ls:
      return "somp_ls";
  }
  return "?";
}

std::string version_string() { return FASAMP_VERSION; }

void ExperimentConfig::validate() const {
  scene.validate();
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  if (algorithms.empty()) throw ConfigError("experiment.algorithms must not be empty");
  if (solver.T_max < 0) throw ConfigError("solver.T_max must be >= 0");
  if (!(solver.damping > 0.0 && solver.damping <= 1.0)) throw ConfigError("solver.damping must lie in (0, 1]");
  if (solver.lambda_thresh < 0.0) throw ConfigError("solver.lambda_thresh must be >= 0");
  if (solver.N_s < 1) throw ConfigError("solver.N_s must be >= 1");
  if (threads < 0) throw ConfigError("experiment.threads must be >= 0");
}

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, {"scene", "solver", "experiment"}, "config");
  ExperimentConfig cfg;
  if (doc.contains("scene")) {
    const json& s = doc.at("scene");
    reject_unknown(s,
                   {"d_ref", "d_max", "theta_min", "theta_max", "L_s", "K_r", "M", "N_o", "lambda_len", "G", "K",
                    "K_a", "lsfc_exponent", "snr_db", "seed"},
                   "scene");
    SceneConfig& c = cfg.scene;
    read(s, "d_ref", c.d_ref);
    read(s, "d_max", c.d_max);
    read(s, "theta_min", c.theta_min);
    read(s, "theta_max", c.theta_max);
    read(s, "L_s", c.L_s);
    read(s, "K_r", c.K_r);
    read(s, "M", c.M);
    read(s, "N_o", c.N_o);
    read(s, "lambda_len", c.lambda_len);
    read(s, "G", c.G);
    read(s, "K", c.K);
    read(s, "K_a", c.K_a);
    read(s, "lsfc_exponent", c.lsfc_exponent);
    read(s, "snr_db", c.snr_db);
    read(s, "seed", c.seed);
  }
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s, {"T_max", "tol", "damping", "lambda_thresh", "N_s", "v_mode", "nmse_convention"}, "solver");
    read(s, "T_max", cfg.solver.T_max);
    read(s, "tol", cfg.solver.tol);
    read(s, "damping", cfg.solver.damping);
    read(s, "lambda_thresh", cfg.solver.lambda_thresh);
    read(s, "N_s", cfg.solver.N_s);
    if (s.contains("v_mode")) cfg.solver.v_mode = parse_v_mode(s.at("v_mode").get<std::string>());
    if (s.contains("nmse_convention"))
      cfg.solver.nmse_convention = parse_nmse_convention(s.at("nmse_convention").get<std::string>());
  }
  if (doc.contains("experiment")) {
    const json& e = doc.at("experiment");
    reject_unknown(e, {"trials", "algorithms", "sweep", "threads", "record_wall_time"}, "experiment");
    read(e, "trials", cfg.trials);
    read(e, "threads", cfg.threads);
    read(e, "record_wall_time", cfg.record_wall_time);
    if (e.contains("algorithms")) {
      cfg.algorithms.clear();
      for (const auto& a : e.at("algorithms")) cfg.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (e.contains("sweep")) {
      const json& sw = e.at("sweep");
      reject_unknown(sw, {"axis", "values"}, "experiment.sweep");
      read(sw, "axis", cfg.sweep.axis);
      read(sw, "values", cfg.sweep.values);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  const SceneConfig& c = cfg.scene;
  json algs = json::array();
  for (Algorithm a : cfg.algorithms) algs.push_back(std::string(to_string(a)));
  return {
      {"scene",
       {{"d_ref", c.d_ref},
        {"d_max", c.d_max},
        {"theta_min", c.theta_min},
        {"theta_max", c.theta_max},
        {"L_s", c.L_s},
        {"K_r", c.K_r},
        {"M", c.M},
        {"N_o", c.N_o},
        {"lambda_len", c.lambda_len},
        {"G", c.G},
        {"K", c.K},
        {"K_a", c.K_a},
        {"lsfc_exponent", c.lsfc_exponent},
        {"snr_db", c.snr_db},
        {"seed", c.seed}}},
      {"solver",
       {{"T_max", cfg.solver.T_max},
        {"tol", cfg.solver.tol},
        {"damping", cfg.solver.damping},
        {"lambda_thresh", cfg.solver.lambda_thresh},
        {"N_s", cfg.solver.N_s},
        {"v_mode", std::string(to_string(cfg.solver.v_mode))},
        {"nmse_convention",
         cfg.solver.nmse_convention == NmseConvention::per_user_mean ? "per_user_mean" : "ratio_of_sums"}}},
      {"experiment",
       {{"trials", cfg.trials},
        {"algorithms", algs},
        {"sweep", {{"axis", cfg.sweep.axis}, {"values", cfg.sweep.values}}},
        {"threads", cfg.threads},
        {"record_wall_time", cfg.record_wall_time}}},
  };
}

void apply_axis(SceneConfig& s, std::string_view axis, double v) {
  auto as_int = [&](const char* name) {
    if (v != std::floor(v)) throw ConfigError(std::string("axis ") + name + " needs integer values");
    return static_cast<int>(v);
  };
  if (axis == "snr_db") s.snr_db = v;
  else if (axis == "N_o") s.N_o = as_int("N_o");
  else if (axis == "G") s.G = as_int("G");
  else if (axis == "K") s.K = as_int("K");
  else if (axis == "K_a") s.K_a = as_int("K_a");
  else if (axis == "K_r") s.K_r = v;
  else if (axis == "L_s") s.L_s = as_int("L_s");
  else if (axis == "M") s.M = as_int("M");
  else if (axis == "d_ref") s.d_ref = v;
  else if (axis == "d_max") s.d_max = v;
  else throw ConfigError("unsupported sweep axis '" + std::string(axis) + "'");
}

TrialInput make_trial(const SceneConfig& config, std::uint64_t trial_seed) {
  TrialInput t;
  t.scene_config = config;
  t.scene_config.seed = derive_seed(trial_seed, 1);
  t.scene = sample_scene(t.scene_config);
  t.A = generate_pilots(config.G, config.K, derive_seed(trial_seed, 2)).A;
  t.Y = synthesize_received(t.A, t.scene.X, t.scene.psi, derive_seed(trial_seed, 3));
  return t;
}

DetectionResult run_algorithm(Algorithm algorithm, const TrialInput& trial, const SolverConfig& solver,
                              OpCounter* ops) {
  const SceneConfig& sc = trial.scene_config;
  DetectionResult out;

  if (algorithm == Algorithm::somp_ls) {
    const SompResult r = somp(trial.Y, trial.A, sc.K_a, ops);
    out.lambda = RVector::Zero(sc.K);
    out.X_hat = CMatrix::Zero(sc.K, sc.N_o);
    out.phi_hat = RVector::Constant(sc.K, kNaN);
    for (std::size_t i = 0; i < r.support.size(); ++i) {
      const int k = r.support[i];
      out.lambda(k) = 1.0;
      out.X_hat.row(k) = r.H.row(static_cast<Eigen::Index>(i));
      const CVector h = r.H.row(static_cast<Eigen::Index>(i)).transpose();
      out.phi_hat(k) = greedy_variance_estimator(h, {0.0, 0.0}, trial.scene.psi).mean();
    }
    out.estimated_set = r.support;
    std::sort(out.estimated_set.begin(), out.estimated_set.end());
    return out;
  }

  RunOptions opt;
  opt.T_max = solver.T_max;
  opt.tol = solver.tol;
  opt.damping = solver.damping;
  opt.v_mode = solver.v_mode;
  opt.L_s = sc.L_s;
  opt.lambda_thresh = solver.lambda_thresh;
  opt.truth = &trial.scene.X;
  SteeringCodebook book;
  switch (algorithm) {
    case Algorithm::em_amp_conventional:
      opt.variant = EmVariant::conventional;
      break;
    case Algorithm::proposed_geo:
      opt.variant = EmVariant::geographic;
      opt.geo = geo_bounds_from_config(sc);
      break;
    case Algorithm::proposed_angular:
      opt.variant = EmVariant::angular;
      book = build_codebook(sc, solver.N_s);
      opt.codebook = &book.W;
      break;
    case Algorithm::somp_ls:
      break;
  }
  RunResult r = run(trial.Y, trial.A, trial.scene.psi, opt);
  if (ops) {
    ops->amp_core += r.ops.amp_core;
    ops->em += r.ops.em;
    ops->refine += r.ops.refine;
  }
  out.lambda = r.lambda;
  out.estimated_set = top_ka(r.lambda, sc.K_a);
  out.X_hat = std::move(r.x_hat);
  out.trace = std::move(r.trace);
  out.phi_hat = r.prior.phi_x.col(0);
  return out;
}

TrialMetrics evaluate(const DetectionResult& result, const TrialInput& trial, const SolverConfig& solver) {
  const ChannelScene& scene = trial.scene;
  const int K_a = trial.scene_config.K_a;
  TrialMetrics m;
  m.ade = ade(scene.active_set, result.estimated_set, K_a);
  const std::vector<int> hit = intersect(scene.active_set, result.estimated_set);

  CMatrix h_true(static_cast<Eigen::Index>(hit.size()), scene.X.cols());
  CMatrix h_hat(h_true.rows(), h_true.cols());
  RVector phi_true(h_true.rows());
  RVector phi_hat(h_true.rows());
  for (std::size_t i = 0; i < hit.size(); ++i) {
    const int k = hit[i];
    const auto pos = std::lower_bound(scene.active_set.begin(), scene.active_set.end(), k) - scene.active_set.begin();
    h_true.row(static_cast<Eigen::Index>(i)) = scene.X.row(k);
    h_hat.row(static_cast<Eigen::Index>(i)) = result.X_hat.row(k);
    phi_true(static_cast<Eigen::Index>(i)) = scene.lsfc[static_cast<std::size_t>(pos)];
    phi_hat(static_cast<Eigen::Index>(i)) = result.phi_hat(k);
  }
  m.nmse = nmse(h_true, h_hat, solver.nmse_convention);
  m.varmse = variance_mse(phi_true, phi_hat);

  m.iterations = result.trace.empty() ? K_a : static_cast<int>(result.trace.size());
  for (const TraceEntry& e : result.trace) m.trace_nmse.push_back(e.nmse);

  m.phi_lo = std::numeric_limits<double>::infinity();
  m.phi_hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < result.phi_hat.size(); ++k) {
    const double v = result.phi_hat(k);
    if (!std::isfinite(v)) continue;
    m.phi_lo = std::min(m.phi_lo, v);
    m.phi_hi = std::max(m.phi_hi, v);
  }
  return m;
}

namespace {

struct TrialRecord {
  std::vector<TrialMetrics> per_algorithm;
  std::vector<double> elapsed_ms;
};

TrialRecord run_one(const ExperimentConfig& cfg, const SceneConfig& point, std::uint64_t seed) {
  TrialRecord rec;
  const TrialInput trial = make_trial(point, seed);
  for (Algorithm a : cfg.algorithms) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialMetrics m;
    try {
      m = evaluate(run_algorithm(a, trial, cfg.solver), trial, cfg.solver);
    } catch (const DivergenceError&) {
      m = TrialMetrics{};
      m.diverged = true;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.per_algorithm.push_back(std::move(m));
    rec.elapsed_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return rec;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, const SceneConfig& point, std::size_t axis_index) {
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  workers = std::clamp(workers, 1u, static_cast<unsigned>(cfg.trials));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      try {
        records[static_cast<std::size_t>(t)] =
            run_one(cfg, point, derive_seed(cfg.scene.seed, axis_index, static_cast<std::uint64_t>(t)));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

PointSummary summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records, std::size_t a,
                       double axis_value) {
  PointSummary s;
  s.axis_value = axis_value;
  s.algorithm = cfg.algorithms[a];
  s.phi_lo = std::numeric_limits<double>::infinity();
  s.phi_hi = -std::numeric_limits<double>::infinity();
  const int T = cfg.solver.T_max;
  std::vector<double> trace_sum(static_cast<std::size_t>(T), 0.0);
  int nmse_n = 0;
  int varmse_n = 0;
  int trace_n = 0;
  for (const TrialRecord& rec : records) {
    const TrialMetrics& m = rec.per_algorithm[a];
    s.wall_ms += rec.elapsed_ms[a];
    if (m.diverged) {
      ++s.trials_diverged;
      continue;
    }
    ++s.trials_ok;
    s.ade_mean += m.ade;
    s.iters_mean += m.iterations;
    if (m.nmse) {
      s.nmse_mean += *m.nmse;
      ++nmse_n;
    }
    if (m.varmse) {
      s.varmse_mean += *m.varmse;
      ++varmse_n;
    }
    if (std::isfinite(m.phi_lo)) s.phi_lo = std::min(s.phi_lo, m.phi_lo);
    if (std::isfinite(m.phi_hi)) s.phi_hi = std::max(s.phi_hi, m.phi_hi);
    if (!m.trace_nmse.empty() && T > 0) {
      ++trace_n;
      for (int t = 0; t < T; ++t) {
        const std::size_t i = std::min(static_cast<std::size_t>(t), m.trace_nmse.size() - 1);
        trace_sum[static_cast<std::size_t>(t)] += m.trace_nmse[i];
      }
    }
  }
  if (s.trials_ok > 0) {
    s.ade_mean /= s.trials_ok;
    s.iters_mean /= s.trials_ok;
  } else {
    s.ade_mean = s.iters_mean = kNaN;
  }
  s.nmse_mean = nmse_n > 0 ? s.nmse_mean / nmse_n : kNaN;
  s.varmse_mean = varmse_n > 0 ? s.varmse_mean / varmse_n : kNaN;
  if (trace_n > 0) {
    s.mean_trace_nmse.resize(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) s.mean_trace_nmse[static_cast<std::size_t>(t)] = trace_sum[static_cast<std::size_t>(t)] / trace_n;
  }
  if (!std::isfinite(s.phi_lo)) s.phi_lo = s.phi_hi = kNaN;
  if (!cfg.record_wall_time) s.wall_ms = 0.0;
  return s;
}

}  // namespace

ExperimentReport run_sweep(const ExperimentConfig& config, const std::string& axis, const std::vector<double>& values) {
  config.validate();
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  ExperimentReport report;
  report.axis = axis;
  report.values = values;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SceneConfig point = config.scene;
    if (axis != "none") apply_axis(point, axis, values[i]);
    point.validate();
    const auto records = run_trials(config, point, i);
    for (std::size_t a = 0; a < config.algorithms.size(); ++a)
      report.rows.push_back(summarize(config, records, a, values[i]));
  }
  report.metadata = {
      {"version", version_string()},
      {"config", to_json(config)},
      {"axis", axis},
      {"values", values},
      {"master_seed", config.scene.seed},
      {"seed_scheme", "trial seed = derive_seed(master_seed, axis_index, trial_index); scene/pilot/noise streams = "
                      "derive_seed(trial_seed, 1/2/3)"},
  };
  return report;
}

ExperimentReport run_point(const ExperimentConfig& config) {
  return run_sweep(config, "none", {config.scene.snr_db});
}

void write_csv(const ExperimentReport& report, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const PointSummary& r : report.rows) {
    out << format_number(r.axis_value) << ',' << to_string(r.algorithm) << ',' << format_number(r.ade_mean) << ','
        << format_number(r.nmse_mean) << ',' << format_number(r.varmse_mean) << ',' << format_number(r.iters_mean)
        << ',' << r.trials_ok << ',' << r.trials_diverged << ',' << format_number(r.wall_ms) << '\n';
  }
}

namespace {

void write_chart(const ExperimentReport& report, const std::string& metric, bool log_y,
                 const std::filesystem::path& file) {
  constexpr double kW = 640, kH = 420, kL = 70, kR = 170, kT = 30, kB = 50;
  auto value_of = [&](const PointSummary& r) {
    if (metric == "ade") return r.ade_mean;
    if (metric == "nmse") return r.nmse_mean;
    return r.varmse_mean;
  };
  double x_lo = *std::min_element(report.values.begin(), report.values.end());
  double x_hi = *std::max_element(report.values.begin(), report.values.end());
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -y_lo;
  for (const PointSummary& r : report.rows) {
    double v = value_of(r);
    if (!std::isfinite(v) || (log_y && v <= 0.0)) continue;
    if (log_y) v = std::log10(v);
    y_lo = std::min(y_lo, v);
    y_hi = std::max(y_hi, v);
  }
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;

  auto px = [&](double x) { return kL + (x - x_lo) / (x_hi - x_lo) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - y_lo) / (y_hi - y_lo) * (kH - kT - kB); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  std::ofstream svg(file);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (kW - kR + kL) / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << report.axis
      << "</text>\n";
  svg << "<text x=\"15\" y=\"" << kT - 10 << "\">" << (log_y ? "log10 " : "") << metric << "</text>\n";
  for (double x : report.values)
    svg << "<text x=\"" << px(x) << "\" y=\"" << kH - kB + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
        << format_number(x) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = y_lo + (y_hi - y_lo) * i / 4.0;
    svg << "<text x=\"" << kL - 6 << "\" y=\"" << py(y) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
        << format_number(std::round(y * 1000.0) / 1000.0) << "</text>\n";
  }

  std::vector<Algorithm> algs;
  for (const PointSummary& r : report.rows)
    if (std::find(algs.begin(), algs.end(), r.algorithm) == algs.end()) algs.push_back(r.algorithm);
  for (std::size_t a = 0; a < algs.size(); ++a) {
    const char* color = colors[a % 5];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const PointSummary& r : report.rows) {
      if (r.algorithm != algs[a]) continue;
      double v = value_of(r);
      if (!std::isfinite(v) || (log_y && v <= 0.0)) continue;
      if (log_y) v = std::log10(v);
      svg << px(r.axis_value) << ',' << py(v) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kW - kR + 10 << "\" y=\"" << kT + 20 * (a + 1) << "\" fill=\"" << color
        << "\" font-size=\"12\">" << to_string(algs[a]) << "</text>\n";
  }
  svg << "</svg>\n";
}

}  // namespace

std::vector<std::filesystem::path> write_plots(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  for (const auto& [metric, log_y] : {std::pair{"ade", false}, std::pair{"nmse", true}, std::pair{"varmse", true}}) {
    const auto file = dir / (std::string(metric) + ".svg");
    write_chart(report, metric, log_y, file);
    files.push_back(file);
  }
  return files;
}

}  // namespace fasamp
