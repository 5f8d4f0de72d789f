#include "run_output.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <locale>

#include "sbm/error.hpp"

namespace sbm::cli {

namespace fs = std::filesystem;

CsvText::CsvText() {
  out_.imbue(std::locale::classic());
  out_.precision(17);
}

RunOutput::RunOutput(fs::path dir) : dir_(std::move(dir)) {}

void RunOutput::write_file(const std::string& name, const std::string& content) {
  std::ofstream out(dir_ / name, std::ios::binary);
  out << content;
  if (!out) throw NumericError("cannot write " + (dir_ / name).string());
  files_.push_back(name);
}

void RunOutput::write_figure(const std::string& name, const std::string& content) {
  write_file(name, content);
  figures_.push_back(name);
}

void RunOutput::verdict(const std::string& name, Verdict v) { verdicts_[name] = to_string(v); }

void RunOutput::key_number(const std::string& name, double v) { key_numbers_[name] = num(v); }

void RunOutput::add_counts(const PathCounts& c) {
  counts_ += c;
  have_counts_ = true;
}

Verdict RunOutput::overall() const {
  bool any_pass = false;
  for (const auto& [k, v] : verdicts_.items()) {
    if (v == "fail") return Verdict::fail;
    if (v == "pass") any_pass = true;
  }
  return any_pass ? Verdict::pass : Verdict::inconclusive;
}

nlohmann::ordered_json RunOutput::summary(const std::string& experiment, const nlohmann::ordered_json& inputs,
                                          const nlohmann::ordered_json& sources,
                                          const std::vector<std::string>& unused, double wall_seconds,
                                          const std::string& status, const std::string& error) const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["experiment"] = experiment;
  j["status"] = status;
  j["partial"] = status != "complete";
  if (!error.empty()) j["error"] = error;
  j["inputs"] = inputs;
  j["input_sources"] = sources;
  j["unused_keys"] = unused;
  j["results"] = results_;
  j["verdicts"] = verdicts_;
  j["overall"] = status == "complete" ? to_string(overall()) : "error";
  j["key_numbers"] = key_numbers_;
  j["paths"] = have_counts_ ? counts_.total : 0;
  j["censored_fraction"] = have_counts_ ? counts_.censored_fraction() : 0.0;
  j["censor_warning"] = have_counts_ && counts_.censor_warning();
  j["wall_time_s"] = wall_seconds;
  j["files"] = files_;
  j["figures"] = figures_;
  return j;
}

nlohmann::ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::ordered_json vec_json(const Vec3& v, int dim) {
  auto a = nlohmann::ordered_json::array({v.x, v.y});
  if (dim == 3) a.push_back(v.z);
  return a;
}

nlohmann::ordered_json counts_json(const PathCounts& c) {
  return {{"total", c.total},
          {"boundary", c.boundary},
          {"jump", c.jump},
          {"censored", c.censored},
          {"censored_fraction", c.censored_fraction()}};
}

nlohmann::ordered_json estimate_json(const Estimate& e) { return {{"value", num(e.value)}, {"stderr", num(e.stderr)}}; }

fs::path fresh_run_dir(const fs::path& root, const std::string& name) {
  fs::create_directories(root);
  fs::path dir = root / name;
  if (fs::create_directory(dir)) return dir;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  const std::string base = name + "-" + stamp;
  dir = root / base;
  for (int k = 2; !fs::create_directory(dir); ++k) dir = root / (base + "-" + std::to_string(k));
  return dir;
}

void write_json(const fs::path& file, const nlohmann::ordered_json& j) {
  std::ofstream out(file, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw NumericError("cannot write " + file.string());
}

}  // namespace sbm::cli
