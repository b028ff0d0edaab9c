#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kcurv {

/// One scripted check. The verdict is a pure function of the three numbers:
///
///   pass  <=>  |value - target| <= tolerance
///
/// so a reader can re-derive every pass flag from the serialized record.
/// Tolerances are absolute; relative checks resolve them against the target
/// before the row is built. One-sided bounds are encoded through their
/// violation part (min(slack, 0) against target 0), which folds them into
/// the same rule.
struct CheckRow {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;  // free-form context, never consulted by the verdict
};

[[nodiscard]] CheckRow make_check(std::string name, double value,
                                  double target, double tolerance,
                                  std::string note = "");

/// Auxiliary numbers with no verdict attached: alternative coefficients
/// reported for comparison, error budgets, convergence history.
struct InfoRow {
  std::string name;
  double value = 0.0;
  std::string note;
};

/// Resolved run configuration, echoed verbatim into every report so a run
/// is reproducible from its own output. String fields keep the user's
/// spelling ("auto" stays "auto"); resolved values land in info rows.
struct RunConfig {
  std::string command;
  int n = 1;
  int k = 1;
  double levi_scale = 2.0;
  double frame_sign = 1.0;
  int grid_level = -1;  // -1 = command-specific default
  std::string field;
  std::string catalog;
  std::string direction;
  std::string lambda = "auto";
  std::uint64_t seed = 1;
  int samples = 100;
  double tol = 0.0;  // 0 = per-check defaults
  std::string format = "json";
  int workers = 0;
  bool strict = false;
  bool allow_large_n = false;
  std::string matrix;
  std::string matrix_file;
};

/// Single-document run report. Two runs with the same config produce
/// byte-identical renderings except for wall_time_ms.
struct RunReport {
  int schema_version = 1;
  RunConfig config;
  std::vector<CheckRow> checks;
  std::vector<InfoRow> info;
  // optional per-point table (residual sweeps); empty columns = no table
  std::vector<std::string> table_columns;
  std::vector<std::vector<double>> table_rows;
  std::string summary;
  double wall_time_ms = 0.0;

  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] std::string to_csv() const;
  /// dispatch on "json" / "csv"; validation_error otherwise
  [[nodiscard]] std::string render(const std::string& format) const;
};

}  // namespace kcurv
