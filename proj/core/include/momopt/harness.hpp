#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "momopt/problems.hpp"
#include "momopt/samplers.hpp"
#include "momopt/tournament.hpp"

namespace momopt {

/// Thrown for unwritable output paths and other I/O failures; the CLI maps
/// it to exit code 3 (config errors raise std::invalid_argument, exit 2).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Method { saa, mom_tournament, mom_scalar };
const char* to_string(Method m);
Method method_from_string(const std::string& name);

/// A full experiment description: problem, scenario distribution, methods,
/// and the (N, r) grid swept with M trials per cell.
struct ExperimentConfig {
  std::string problem_kind;  // mean_estimation | linear_regression |
                             // ridge_regression | quadratic | portfolio
  DistributionSpec distribution;
  FeasibleSet feasible_set = FeasibleSet::all_of_space();
  Loss loss = Loss::exponential();  // portfolio only
  Eigen::VectorXd prices;           // portfolio only

  std::vector<Method> methods;
  std::vector<Eigen::Index> N_grid;
  std::vector<double> r_grid;
  int trials = 1;
  std::uint64_t seed = 0;

  std::string out_path;
  std::string format = "csv";  // csv | json

  double theta = 0.1;
  std::optional<double> sigma2_override;
  std::optional<double> c_H_override;
  double split_fraction = 0.5;
  int pool_blocks = 2;
  int threads = 1;
  int eval_sample_factor = 10;

  /// "none" keeps emitted artifacts byte-deterministic (runtime_ms = 0);
  /// "wall" records measured times and gives up byte-identity.
  std::string timing = "none";

  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TrialResult {
  Method method = Method::saa;
  Eigen::Index N = 0;
  double r = 0.0;
  int trial_index = 0;
  double estimation_error = 0.0;  // ||x_hat - x*|| in the configured norm
  double prediction_gap = 0.0;    // f(x_hat) - f(x*)
  double gap_std_error = 0.0;     // 0 when the gap is exact
  double wall_ms = 0.0;
  bool winners_fallback = false;
  bool champions_fallback = false;
  bool errored = false;
  std::string error;
};

struct CellAggregate {
  Method method = Method::saa;
  Eigen::Index N = 0;
  double r = 0.0;
  int trials = 0;
  double fail_freq = 0.0;  // frequency of {estimation_error >= r}
  double fail_ci_lo = 0.0, fail_ci_hi = 0.0;  // Wilson 99%
  double median_err = 0.0, q90_err = 0.0;
  double median_gap = 0.0, median_gap_se = 0.0;
  long long runtime_ms = 0;
};

struct ResultTable {
  std::vector<CellAggregate> cells;        // grid order: method, N, r
  std::vector<TrialResult> trial_results;  // same order, trials innermost
};

/// Run every (method, N, r) cell for `trials` seeded trials. Per-trial
/// seeds are pre-derived from the root seed, so results do not depend on
/// the worker count. Per-trial failures are recorded on the row, never
/// aborting the sweep.
ResultTable run_experiment(const ExperimentConfig& config);

/// Write the aggregate table. CSV column order is fixed:
///   method,N,r,trials,fail_freq,fail_ci_lo,fail_ci_hi,median_err,
///   q90_err,median_gap,runtime_ms
/// JSON mirrors the columns (plus the gap standard error) under a
/// schema_version field. Throws IoError on unwritable paths.
void emit(const ResultTable& table, const std::string& format,
          const std::string& path);

/// The emitted bytes, exposed for determinism checks.
std::string render(const ResultTable& table, const std::string& format);

}  // namespace momopt
