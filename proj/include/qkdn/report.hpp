#pragma once

#include <string>
#include <vector>

#include "qkdn/metrics.hpp"
#include "qkdn/network.hpp"
#include "qkdn/runner.hpp"

namespace qkdn {

/// Schema version stamped into every CSV header comment.
inline constexpr int kCsvSchema = 1;

/// Rows = key rates, columns = the four network metrics followed by the
/// per-node minimum and maximum of each. Absent values are empty cells.
std::string sweep_csv(const ScenarioSweep& sweep);
/// One row per run with its metrics and accounting totals.
std::string runs_csv(const Experiment& ex);
/// Cut-offs per scenario and metric, plus the mean sweep values.
std::string summary_json(const Experiment& ex);
std::string summary_text(const Experiment& ex);

/// Long form: scenario,kps,metric,value.
std::string figure_csv(const Experiment& ex);
/// gnuplot data for one metric: one index block per scenario.
std::string figure_dat(const Experiment& ex, Metric m);

std::string links_csv(const RunResult& r);
std::string sessions_csv(const RunResult& r);
std::string generation_csv(const RunResult& r);
std::string kms_trace_csv(const RunResult& r);

/// A measured quantity against its accepted interval.
struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double reference = 0.0;  ///< published reference value shown for comparison

  bool pass() const { return value >= lo && value <= hi; }
};

/// The Padua comparison: packet counts, consumed, generated and relayed keys
/// and setup time. Expects the single 1<->6 session of padua_config().
std::vector<Check> padua_checks(const RunResult& r);
std::string padua_report(const RunResult& r, std::uint64_t seed);

/// Writes the run artifacts of an experiment below `dir`: the effective
/// config, runs.csv, one sweep CSV per scenario, summary.json/.txt and, for
/// results that kept detail, per-run link/session/trace CSVs.
void write_experiment(const Experiment& ex, const std::string& dir);
/// figure.csv plus one figure_<metric>.dat per metric.
void write_figure(const Experiment& ex, const std::string& dir);

}  // namespace qkdn
