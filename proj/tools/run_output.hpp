#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbm/fatou.hpp"
#include "sbm/pathsim.hpp"

namespace sbm::cli {

inline constexpr int kSummarySchemaVersion = 1;

/// Locale-free CSV text with full double precision.
class CsvText {
 public:
  CsvText();
  std::ostream& os() { return out_; }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

/// Collects what one run produces. Files are written as they are added, so a
/// failing run still leaves its earlier artifacts behind.
class RunOutput {
 public:
  explicit RunOutput(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  void write_file(const std::string& name, const std::string& content);
  /// A CSV that `report` should copy into its figure bundle.
  void write_figure(const std::string& name, const std::string& content);

  void verdict(const std::string& name, Verdict v);
  void verdict(const std::string& name, bool pass) { verdict(name, pass ? Verdict::pass : Verdict::fail); }
  /// Headline numbers shown by `report`.
  void key_number(const std::string& name, double v);
  void add_counts(const PathCounts& c);

  nlohmann::ordered_json& results() { return results_; }
  const nlohmann::ordered_json& verdicts() const { return verdicts_; }
  Verdict overall() const;
  const PathCounts& counts() const { return counts_; }

  /// Assembles summary.json. `status` is "complete" or "error".
  nlohmann::ordered_json summary(const std::string& experiment, const nlohmann::ordered_json& inputs,
                                 const nlohmann::ordered_json& sources, const std::vector<std::string>& unused,
                                 double wall_seconds, const std::string& status, const std::string& error) const;

 private:
  std::filesystem::path dir_;
  nlohmann::ordered_json results_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json verdicts_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json key_numbers_ = nlohmann::ordered_json::object();
  std::vector<std::string> files_;
  nlohmann::ordered_json figures_ = nlohmann::ordered_json::array();
  PathCounts counts_;
  bool have_counts_ = false;
};

/// JSON number, or null for NaN/inf.
nlohmann::ordered_json num(double v);
nlohmann::ordered_json vec_json(const Vec3& v, int dim);
nlohmann::ordered_json counts_json(const PathCounts& c);
nlohmann::ordered_json estimate_json(const Estimate& e);

/// root/name, or root/name-YYYYmmdd-HHMMSS[-k] when that exists. Created.
std::filesystem::path fresh_run_dir(const std::filesystem::path& root, const std::string& name);

void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& j);

}  // namespace sbm::cli
