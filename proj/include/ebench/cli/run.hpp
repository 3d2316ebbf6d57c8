#pragma once
// Benchmark execution and reporting for the ebench CLI.

#include <iosfwd>
#include <string>
#include <vector>

#include "ebench/cli/config.hpp"

namespace ebench::cli {

enum class Verdict { violated, satisfied, inconclusive };
const char* verdict_name(Verdict v);

/// Margins within this distance of zero are never turned into a verdict.
inline constexpr double kVerdictFloor = 1e-12;

/// violated iff margin < -err, satisfied iff margin > err, err floored at
/// kVerdictFloor.
Verdict classify(double margin, double error_estimate);

/// One ReportRecord as JSON: config, results, provenance, verdict.
json run_cv(const RunConfig& cfg);
json run_dv(const RunConfig& cfg);
json run_convert(const RunConfig& cfg);

struct SweepRow {
  int index = 0;
  std::string parameter;
  double parameter_value = 0.0;
  Mode mode = Mode::cv;
  std::string channel;
  double margin = 0.0;
  double raw_margin = 0.0;
  double value = 0.0;  // F_avg / P_s for cv, the normalized sum for dv
  double threshold = 0.0;
  double P_s = 0.0;
  double error_estimate = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

/// The config a sweep step runs with.
RunConfig sweep_step_config(const RunConfig& cfg, int index);

/// Steps run in parallel; rows come back in index order.
std::vector<SweepRow> run_sweep(const RunConfig& cfg);

inline constexpr const char* kSweepColumns =
    "index,parameter,parameter_value,mode,channel,margin,raw_margin,value,threshold,P_s,error_estimate,verdict";

std::string csv_field(const std::string& s);
std::string sweep_csv(const std::vector<SweepRow>& rows);
json sweep_json(const RunConfig& cfg, const std::vector<SweepRow>& rows);

struct SelftestCase {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<SelftestCase> run_selftest(const RunConfig& cfg);

/// Runs cfg and writes the report to cfg.output (or `out`). Returns the exit
/// status: 0 success, 1 selftest failures, 2 configuration errors, 3 numerical
/// failures.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace ebench::cli
