#pragma once

#include "fasamp/amp_engine.hpp"
#include "fasamp/bg_model.hpp"
#include "fasamp/metrics.hpp"
#include "fasamp/scene.hpp"

#include <nlohmann/json.hpp>

#include <optional>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fasamp {

enum class Algorithm { em_amp_conventional, proposed_geo, proposed_angular, somp_ls };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm a);

struct SolverConfig {
  int T_max = 50;
  double tol = 1e-8;
  double damping = 1.0;
  double lambda_thresh = 0.1;
  int N_s = 121;
  VMode v_mode = VMode::quadrature_consistent;
  NmseConvention nmse_convention = NmseConvention::per_user_mean;
};

struct SweepSpec {
  std::string axis = "snr_db";
  std::vector<double> values;
};

struct ExperimentConfig {
  SceneConfig scene;
  SolverConfig solver;
  int trials = 10;
  std::vector<Algorithm> algorithms = {Algorithm::em_amp_conventional, Algorithm::proposed_geo,
                                       Algorithm::proposed_angular, Algorithm::somp_ls};
  SweepSpec sweep;
  int threads = 0;               // 0: hardware concurrency
  bool record_wall_time = true;  // false writes wall_ms = 0 for byte-stable output

  void validate() const;
};

/// Parses the configuration document. Top-level sections: "scene" (system
/// parameters, keyed by their symbol names), "solver", "experiment". Unknown
/// keys raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Sets one scene parameter by name (the sweep axis).
void apply_axis(SceneConfig& scene, std::string_view axis, double value);

/// Output of one algorithm on one realization.
struct DetectionResult {
  RVector lambda;
  std::vector<int> estimated_set;  // K_a indices, ascending
  CMatrix X_hat;
  std::vector<TraceEntry> trace;
  RVector phi_hat;  // per-user learned slab variance (K), or per detected user for greedy
};

/// Everything an algorithm needs for one trial.
struct TrialInput {
  SceneConfig scene_config;
  ChannelScene scene;
  CMatrix A;
  CMatrix Y;
};

TrialInput make_trial(const SceneConfig& config, std::uint64_t trial_seed);

DetectionResult run_algorithm(Algorithm algorithm, const TrialInput& trial, const SolverConfig& solver,
                              OpCounter* ops = nullptr);

struct TrialMetrics {
  bool diverged = false;
  double ade = 0.0;
  std::optional<double> nmse;
  std::optional<double> varmse;
  int iterations = 0;
  std::vector<double> trace_nmse;
  double phi_lo = 0.0;
  double phi_hi = 0.0;
};

TrialMetrics evaluate(const DetectionResult& result, const TrialInput& trial, const SolverConfig& solver);

/// Aggregate of one algorithm at one sweep value.
struct PointSummary {
  double axis_value = 0.0;
  Algorithm algorithm = Algorithm::em_amp_conventional;
  double ade_mean = 0.0;
  double nmse_mean = 0.0;
  double varmse_mean = 0.0;
  double iters_mean = 0.0;
  int trials_ok = 0;
  int trials_diverged = 0;
  double wall_ms = 0.0;
  std::vector<double> mean_trace_nmse;  // length T_max, finished runs held at their last value
  double phi_lo = 0.0;                  // extremes of learned per-user variances over all trials
  double phi_hi = 0.0;
};

struct ExperimentReport {
  std::string axis;
  std::vector<double> values;
  std::vector<PointSummary> rows;
  nlohmann::json metadata;
};

/// Runs every algorithm on identical realizations for every axis value.
/// Trial t at axis index i uses seed derive_seed(scene.seed, i, t).
ExperimentReport run_sweep(const ExperimentConfig& config, const std::string& axis, const std::vector<double>& values);

/// Single point: the configured scene without an axis change.
ExperimentReport run_point(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader =
    "axis_value,algorithm,ade_mean,nmse_mean,varmse_mean,iters_mean,trials_ok,trials_diverged,wall_ms";

void write_csv(const ExperimentReport& report, std::ostream& out);

/// One SVG line chart per metric (ade, nmse, varmse) into dir.
std::vector<std::filesystem::path> write_plots(const ExperimentReport& report, const std::filesystem::path& dir);

std::string version_string();

}  // namespace fasamp
