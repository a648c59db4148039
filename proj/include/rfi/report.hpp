#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rfi/builders.hpp"
#include "rfi/props.hpp"

namespace rfi::report {

struct PlanConfig {
  int nodes_per_axis = 64;
  int steps = 256;
  double epsilon_cap = 1.0;
  double h_fd = 1e-5;
  double sharpness = 2.0;
};

struct SweepConfig {
  std::vector<int> nodes_per_axis;
  std::vector<int> steps;
};

/// What a row is expected to show; vanish and persist are breakdown-only.
enum class Expectation {
  /// rel_error <= tolerance (the formula holds).
  agree,
  /// abs_error <= tolerance (discrepancy vanishes, flat control).
  vanish,
  /// abs_error >= gap_threshold (discrepancy persists, curved case).
  persist,
  /// The row must be refused with OrderTooHigh (p = 3 through verify).
  refuse,
};

struct ExperimentConfig {
  std::string id;
  builders::BuilderSpec manifold;
  builders::BuilderSpec op;
  builders::BuilderSpec section;
  std::vector<Vec> base_points;
  PlanConfig plan;
  SweepConfig sweeps;
  std::optional<double> tolerance;
  Expectation expect = Expectation::agree;
};

struct RunConfig {
  std::vector<ExperimentConfig> experiments;
  double tolerance = 1e-6;
  double gap_threshold = 1e-2;
  std::uint64_t seed = 1;
  bool inject_fault = false;
};

/// Parses the JSON experiment config. Throws ConfigError carrying the dotted
/// path of the offending field (e.g. "experiments[1].plan.N").
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct ReportRow {
  std::string experiment;
  std::size_t x_index = 0;
  Vec x;
  int nodes_per_axis = 0;
  int steps = 0;
  /// "ok" or the error message of a failed row.
  std::string status = "ok";
  std::vector<Complex> inverted;
  std::vector<Complex> direct;
  double abs_error = 0.0;
  double rel_error = 0.0;
  /// Breakdown rows: direct minus its symmetrization, from stencil derivatives.
  std::optional<double> expected_gap;
  double wall_time_ms = 0.0;
  bool violation = false;
};

/// max_k |inverted_k - direct_k|.
double row_abs_error(const std::vector<Complex>& inverted, const std::vector<Complex>& direct);
/// abs_error / max_k |direct_k|, or abs_error when the direct value is zero.
double row_rel_error(double abs_error, const std::vector<Complex>& direct);

std::vector<ReportRow> run_verify(const RunConfig& cfg);
std::vector<ReportRow> run_convergence(const RunConfig& cfg);
std::vector<ReportRow> run_breakdown_demo(const RunConfig& cfg);
props::PropertySummary run_property_suite(const RunConfig& cfg);

/// Sorted by (experiment order, x index, N, steps).
void sort_rows(std::vector<ReportRow>& rows, const RunConfig& cfg);

/// RFC 4180 CSV, doubles printed with %.17g, complex fibers flattened as
/// re/im column pairs.
void write_rows_csv(std::ostream& os, const std::vector<ReportRow>& rows);
void write_timings_csv(std::ostream& os, const std::vector<ReportRow>& rows);

/// Observed convergence: for consecutive sweep values, the error ratio and the
/// order log(e_i / e_{i+1}) / log(v_{i+1} / v_i).
struct OrderEstimate {
  std::string experiment;
  std::size_t x_index = 0;
  std::string knob;  // "N" or "steps"
  int from = 0;
  int to = 0;
  double ratio = 0.0;
  double order = 0.0;
};
std::vector<OrderEstimate> convergence_orders(const std::vector<ReportRow>& rows, const RunConfig& cfg);

std::string rows_summary_json(const std::string& command, const std::vector<ReportRow>& rows,
                              const std::vector<OrderEstimate>& orders);
std::string property_summary_json(const props::PropertySummary& summary);

/// RFC 4180 records, header included.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
/// Recomputes abs_error from the value columns of every ok row; returns the
/// number of rows whose stored abs_error differs.
std::size_t check_csv_consistency(const std::string& text);

/// Formats a double with %.17g.
std::string format_double(double v);

}  // namespace rfi::report
