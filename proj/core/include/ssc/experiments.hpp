#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssc/kmeans.hpp"
#include "ssc/metrics.hpp"
#include "ssc/types.hpp"

namespace ssc {

/// Which ground-truth family a sweep draws from: "low_rank", "imbalanced"
/// (uses delta), "aggregatable" or "lumpable".
struct GeneratorSpec {
  std::string name = "low_rank";
  double delta = 1.0;
};

enum class InitialMode { Stationary, Fixed };

struct SweepConfig {
  std::string figure = "sweep";
  GeneratorSpec generator;
  std::vector<int> p_values;
  int r = 3;
  std::vector<double> k_values;
  int trials = 20;
  std::uint64_t base_seed = 0;
  InitialMode initial = InitialMode::Stationary;
  StateIndex fixed_state = 0;
  bool subspaces = false;  ///< also record sinTheta losses for U_F, V_F, U_P, V_P
  KMeansConfig kmeans;
  int threads = 0;  ///< 0 picks the hardware concurrency
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
SweepConfig parse_sweep_config(std::string_view json_text);
void validate_sweep_config(const SweepConfig& config);

/// round(k p r log^2 p)
std::size_t trajectory_length(double k, int p, int r);

struct SweepRecord {
  int p = 0;
  double k = 0.0;
  std::size_t n = 0;
  int trial = 0;
  std::uint64_t seed = 0;  ///< trajectory seed
  std::string estimator;   ///< empty for a failed trial
  LossReport loss;
  bool failed = false;
  std::string error;
  double wall_seconds = 0.0;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepRecord> records;  ///< ordered by (p, k, trial, estimator)
  bool degraded = false;             ///< some cell lost more than 10% of its trials
};

SweepResult run_sweep(const SweepConfig& config);

/// Named LossReport field: l1_total, avg_row_tv, max_row_tv, sin_theta_spectral,
/// sin_theta_frobenius or misclassification. Throws ParameterError otherwise.
double loss_field(const LossReport& loss, std::string_view field);
inline constexpr std::string_view kLossFields[] = {"l1_total",           "avg_row_tv",
                                                   "max_row_tv",         "sin_theta_spectral",
                                                   "sin_theta_frobenius", "misclassification"};

struct CellSummary {
  int p = 0;
  double k = 0.0;
  std::size_t n = 0;
  std::string estimator;
  std::string field;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Mean and standard error of every recorded loss per (p, k, estimator, field).
std::vector<CellSummary> summarize(const SweepResult& result);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< root-mean-square residual in log space
  std::size_t points = 0;
};

/// Least-squares fit of log(loss) against log(n). Needs at least 4 distinct n.
RateFit fit_rate(std::span<const double> n, std::span<const double> loss);
/// Fit over the cell means of one estimator and field at a fixed p.
RateFit fit_rate(const SweepResult& result, std::string_view estimator, std::string_view field,
                 int p);

/// Long format, one loss per row; no timing columns, so reruns are byte-identical.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_timings_csv(std::ostream& out, const SweepResult& result);
/// Config echo, per-cell means and standard errors, and rate fits.
void write_summary_json(std::ostream& out, const SweepResult& result);

}  // namespace ssc
