#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "config.hpp"
#include "experiments.hpp"
#include "run_output.hpp"
#include "sbm/error.hpp"

namespace sbm::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

RunOutcome run_command(const RunRequest& req, std::ostream& log, std::ostream& err) {
  RunOutcome outcome;
  std::optional<Config> cfg;
  std::string name;
  Job job;
  try {
    cfg = Config::load(req.config);
    if (req.seed) cfg->set_flag("seed", std::to_string(*req.seed), "--seed");
    if (req.lanes) cfg->set_flag("lanes", std::to_string(*req.lanes), "--lanes");
    if (req.out) cfg->set_flag("output.dir", *req.out, "--out");
    name = cfg->text("experiment");
    job = plan_experiment(name, *cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    outcome.status = kInvalidInput;
    return outcome;
  }

  fs::path root = cfg->text("output.dir");
  if (root.empty()) {
    const char* env = std::getenv(kOutputRootEnv);
    root = env && *env ? fs::path(env) : fs::path("runs");
  }
  std::string dir_name = cfg->text("output.name");
  if (dir_name.empty()) dir_name = name;
  try {
    outcome.dir = fresh_run_dir(root, dir_name);
  } catch (const fs::filesystem_error& e) {
    err << "cannot create run directory under " << root << ": " << e.what() << '\n';
    outcome.status = kInvalidInput;
    return outcome;
  }

  RunOutput out(outcome.dir);
  const auto t0 = std::chrono::steady_clock::now();
  std::string status = "complete", error;
  try {
    job(out);
  } catch (const std::exception& e) {
    status = "error";
    error = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json summary = out.summary(name, cfg->echo(), cfg->sources(), cfg->unused(), wall, status, error);
  write_json(outcome.dir / "summary.json", summary);

  log << name << " -> " << outcome.dir.string() << '\n';
  for (const auto& [k, v] : out.verdicts().items()) log << "  " << k << ": " << v.get<std::string>() << '\n';
  for (const auto& k : cfg->unused()) log << "  note: key '" << k << "' is not used by " << name << '\n';
  if (status != "complete") {
    err << "runtime error (partial artifacts in " << outcome.dir.string() << "): " << error << '\n';
    outcome.status = kRuntimeError;
    return outcome;
  }
  if (out.counts().censor_warning()) log << "  warning: censored fraction " << out.counts().censored_fraction() << '\n';
  log << "  overall: " << to_string(out.overall()) << " (" << std::fixed << std::setprecision(1) << wall << " s)\n";
  log.unsetf(std::ios::fixed);
  outcome.status = out.overall() == Verdict::fail ? kVerdictFailed : kOk;
  return outcome;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kReportDir = "report";

std::string short_number(const json& v) {
  if (v.is_null()) return "null";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(4) << v.get<double>();
  return s.str();
}

ReportRow read_row(const fs::path& run_dir, const std::string& label) {
  ReportRow row;
  row.run = label;
  const fs::path file = run_dir / "summary.json";
  if (!fs::exists(file)) {
    row.overall = "missing";
    row.problem = "no summary.json";
    return row;
  }
  json j;
  try {
    std::ifstream in(file);
    j = json::parse(in);
    if (!j.is_object() || !j.contains("schema_version") || !j.contains("experiment") || !j.contains("verdicts"))
      throw std::runtime_error("not a run summary");
    row.experiment = j.at("experiment").get<std::string>();
    row.overall = j.value("overall", std::string("?"));
    std::string nums;
    const json numbers = j.value("key_numbers", json::object());
    for (const auto& [k, v] : numbers.items()) {
      if (!nums.empty()) nums += ' ';
      nums += k + "=" + short_number(v);
    }
    row.numbers = nums;
    std::size_t pass = 0, total = 0;
    std::string failing;
    for (const auto& [k, v] : j.at("verdicts").items()) {
      ++total;
      const std::string s = v.get<std::string>();
      if (s == "pass") ++pass;
      if (s == "fail") failing += (failing.empty() ? "" : ",") + k;
    }
    row.verdicts = std::to_string(pass) + "/" + std::to_string(total) + " pass";
    if (!failing.empty()) row.verdicts += " (fail: " + failing + ")";
    if (j.contains("error")) row.problem = j.at("error").get<std::string>();
  } catch (const std::exception& e) {
    row = ReportRow{};
    row.run = label;
    row.overall = "corrupt";
    row.problem = e.what();
  }
  return row;
}

}  // namespace

ReportTable collect_report(const fs::path& dir) {
  ReportTable t;
  if (fs::exists(dir / "summary.json")) t.rows.push_back(read_row(dir, "."));
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && e.path().filename() != kReportDir) subdirs.push_back(e.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& p : subdirs) t.rows.push_back(read_row(p, p.filename().string()));
  return t;
}

std::string format_table(const ReportTable& t) {
  const std::vector<std::string> head{"run", "experiment", "overall", "verdicts", "key numbers"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : t.rows) {
    cells.push_back({r.run, r.experiment.empty() ? "-" : r.experiment, r.overall,
                     r.verdicts.empty() ? "-" : r.verdicts,
                     r.problem.empty() ? r.numbers : (r.numbers.empty() ? "" : r.numbers + " ") + "[" + r.problem + "]"});
  }
  std::vector<std::size_t> w(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    w[c] = head[c].size();
    for (const auto& row : cells) w[c] = std::max(w[c], row[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(w[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  };
  line(head);
  std::vector<std::string> rule;
  for (auto n : w) rule.push_back(std::string(n, '-'));
  line(rule);
  for (const auto& row : cells) line(row);
  out << "rows: " << t.rows.size() << '\n';
  return out.str();
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

int report_command(const fs::path& dir, std::ostream& log, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    err << "report: " << dir.string() << " is not a directory\n";
    return kInvalidInput;
  }
  ReportTable t = collect_report(dir);
  if (!t.rows.empty()) {
    const fs::path out = dir / kReportDir;
    fs::create_directories(out / "figures");
    for (const auto& r : t.rows) {
      if (r.overall == "missing" || r.overall == "corrupt") continue;
      const fs::path run = r.run == "." ? dir : dir / r.run;
      std::ifstream in(run / "summary.json");
      const json j = json::parse(in, nullptr, false);
      if (j.is_discarded()) continue;
      const json figures = j.value("figures", json::array());
      for (const auto& f : figures) {
        const std::string name = f.get<std::string>();
        std::error_code ec;
        fs::copy_file(run / name, out / "figures" / ((r.run == "." ? std::string("run") : r.run) + "__" + name),
                      fs::copy_options::overwrite_existing, ec);
        if (!ec) ++t.figures;
      }
    }
    std::ofstream(out / "table.txt") << format_table(t);
    std::ofstream csv(out / "table.csv");
    csv << "run,experiment,overall,verdicts,key_numbers,problem\n";
    for (const auto& r : t.rows) {
      csv << csv_field(r.run) << ',' << csv_field(r.experiment) << ',' << csv_field(r.overall) << ','
          << csv_field(r.verdicts) << ',' << csv_field(r.numbers) << ',' << csv_field(r.problem) << '\n';
    }
  }
  log << format_table(t);
  if (t.figures) log << "figures: " << t.figures << " csv files in " << (dir / kReportDir / "figures").string() << '\n';
  return kOk;
}

}  // namespace sbm::cli
