#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sbm::cli {

/// Exit statuses.
enum Status : int { kOk = 0, kVerdictFailed = 1, kInvalidInput = 2, kRuntimeError = 3 };

struct RunRequest {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<int> lanes;
  std::optional<std::string> out;
};

struct RunOutcome {
  int status = kOk;
  std::filesystem::path dir;  // empty when validation failed
};

/// Output root: config output.dir, else $SBM_OUTPUT_ROOT, else ./runs.
inline constexpr const char* kOutputRootEnv = "SBM_OUTPUT_ROOT";

RunOutcome run_command(const RunRequest& req, std::ostream& log, std::ostream& err);

struct ReportRow {
  std::string run;
  std::string experiment;
  std::string overall;  // pass | fail | inconclusive | error | missing | corrupt
  std::string numbers;
  std::string verdicts;
  std::string problem;
};

struct ReportTable {
  std::vector<ReportRow> rows;
  std::size_t figures = 0;
};

/// Reads dir/summary.json and every dir/*/summary.json (the report's own
/// output directory excluded). Missing or corrupt summaries become rows.
ReportTable collect_report(const std::filesystem::path& dir);

/// Prints the table, writes dir/report/{table.txt,table.csv,figures/*.csv}.
int report_command(const std::filesystem::path& dir, std::ostream& log, std::ostream& err);

std::string format_table(const ReportTable& t);

}  // namespace sbm::cli
