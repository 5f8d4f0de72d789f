#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>

#include "sbm/error.hpp"

namespace sbm::cli {

namespace {

// clang-format off
constexpr DefaultEntry kDefaults[] = {
    {"experiment", "", "exit-stats | green | boundary-density | levy-system | fatou | relative-fatou | maximal | g-bound | locality | representation | counterexample | harnack | condition-check (required)"},
    {"seed", "1", "master seed"},
    {"lanes", "1", "worker threads; results do not depend on it"},
    {"n", "100000", "paths per estimate (per trace point for fatou runs)"},
    {"output.dir", "", "output root; empty uses $SBM_OUTPUT_ROOT, then ./runs"},
    {"output.name", "", "run directory name; empty uses the experiment name"},

    {"domain.kind", "ball", "ball | annulus | perturbed_disk"},
    {"domain.dim", "2", "2 or 3 (perturbed_disk is 2-d only)"},
    {"domain.center", "0,0,0", "ball center"},
    {"domain.radius", "1", "ball radius"},
    {"domain.inner_radius", "0.5", "annulus inner radius (outer radius 1)"},
    {"domain.eps", "0.02", "perturbed disk amplitude, eps*k^2 <= 0.1"},
    {"domain.wavenumber", "2", "perturbed disk wavenumber k"},

    {"process.family", "stable_mixture", "stable_mixture | mixed_stable | relativistic | geometric_stable | brownian_only"},
    {"process.alpha", "1", "alpha in (0, 2)"},
    {"process.beta", "0.5", "second index of mixed_stable, beta < alpha"},
    {"process.mass", "1", "relativistic mass M > 0"},

    {"path.h", "0.001", "base time step"},
    {"path.eps_b", "0", "boundary tolerance; 0 means 1e-4*diam"},
    {"path.delta_cut", "0", "small-jump cutoff; 0 means 1e-2*diam"},
    {"path.t_max", "0", "censoring horizon; 0 means 50*E[tau] from a pilot run"},
    {"path.refine", "16", "step shrink factor near the boundary"},

    {"x", "0.5,0", "start point"},
    {"mesh.cells", "64", "boundary mesh cells"},

    {"exit.points", "0,0", "start points separated by ';'"},
    {"exit.increasing", "false", "also require F to increase along the points beyond 3 pooled stderr"},
    {"exit.F_min", "0", "required F at the last point (0 disables)"},

    {"green.grid", "40", "grid cells per axis"},
    {"green.subsamples", "8", "sub-samples per axis for cell volumes"},
    {"green.spread_max", "20", "bound on max/min of G/g_D over resolved cells"},

    {"density.outlier_sigma", "3", "per-cell z-score bound against the classical kernel (Brownian, ball)"},
    {"density.max_outliers", "0", "cells allowed beyond outlier_sigma"},
    {"density.spread_max", "25", "bound on the envelope ratio spread"},

    {"levy.center", "0,0", "center of the exterior shell"},
    {"levy.r_lo", "1.2", "inner radius of the shell"},
    {"levy.r_hi", "2", "outer radius of the shell (inf allowed)"},
    {"levy.sigma_max", "3", "bound on |MC - quadrature| in combined stderr"},

    {"fatou.points", "4", "boundary points (evenly spaced mesh cells)"},
    {"fatou.data", "hemisphere,affine", "boundary data: hemisphere | affine | constant"},
    {"fatou.beta", "2", "Stolz cone aperture"},
    {"fatou.depth", "8", "trace points per cone"},
    {"fatou.mode", "zigzag", "radial | zigzag"},
    {"fatou.tolerance", "0.05", "limit tolerance (plus 3 stderr)"},

    {"maximal.t", "2", "cone parameter t"},
    {"maximal.cells", "8", "mesh cells for the exhaustive sweep"},
    {"maximal.atoms", "3", "max atoms per measure"},
    {"maximal.weights", "1,2,3", "atom weights"},
    {"maximal.grid", "0.25", "spacing of the x grid"},
    {"maximal.z_angles", "0.39269908169872414,0.3", "boundary points z by polar angle"},

    {"gbound.cells", "65536", "mesh cells"},
    {"gbound.angle", "0.7", "polar angle of the radial approach"},
    {"gbound.delta0", "0.5", "first depth; depths halve"},
    {"gbound.count", "10", "number of depths"},
    {"gbound.ratio_max", "50", "bound on max/min"},

    {"locality.angle", "0", "polar angle of z"},
    {"locality.r", "0.5", "radius of the ball around z"},
    {"locality.delta0", "0.1", "first depth; depths halve"},
    {"locality.count", "4", "number of depths"},
    {"locality.slope_min", "0.8", "required log-log slope"},

    {"representation.center", "0,0", "center of the exterior shell"},
    {"representation.r_lo", "1.2", "inner radius of the shell"},
    {"representation.r_hi", "2", "outer radius of the shell (inf allowed)"},
    {"representation.points", "0.3,0;-0.2,0.6", "start points separated by ';'"},
    {"representation.ball_fraction", "0.5", "intermediate ball radius / depth"},

    {"counterexample.k_max", "6", "number of arc families"},
    {"counterexample.base", "65536", "base frequency"},
    {"counterexample.gamma", "0.5", "tangential exponent"},
    {"counterexample.angles", "32", "number of angles"},
    {"counterexample.angle_offset", "0.37", "angles are 2*pi*(i + offset)/angles"},
    {"counterexample.depths", "64", "depths per curve"},
    {"counterexample.mode", "surrogate_quadrature", "surrogate_quadrature | monte_carlo"},
    {"counterexample.radial_max", "0.05", "radial oscillation bound"},
    {"counterexample.tangential_min", "0.3", "tangential oscillation floor"},
    {"counterexample.tangential_share", "0.9", "share of angles that must oscillate"},
    {"counterexample.mc_min_delta", "0.001", "smallest depth in monte_carlo mode"},
    {"lemma.lambdas", "0.125,0.0625,0.03125,0.015625,0.0078125", "arc half-widths"},
    {"lemma.eps", "0.5,0.25,0.1,0.05,0.01", "epsilons"},
    {"lemma.j_max", "10", "depths 2^-j, j = 0..j_max"},

    {"harnack.x0", "0,0", "ball center"},
    {"harnack.r", "0.5", "ball radius"},
    {"harnack.pairs", "8", "random point pairs"},
    {"harnack.threshold", "0.7", "data g(w) = 1{w_x > threshold}"},
    {"harnack.ratio_max", "10", "bound on the largest pairwise ratio"},

    {"condition.K", "10", "upper end of the grid"},
    {"condition.grid", "200", "grid size"},
};
// clang-format on

const DefaultEntry* find_default(std::string_view key) {
  for (const auto& d : kDefaults)
    if (d.key == key) return &d;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_key(std::string_view k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_';
  });
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s == "inf" || s == "+inf") {
    v = std::numeric_limits<double>::infinity();
    return true;
  }
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end;
}

}  // namespace

std::span<const DefaultEntry> default_table() { return kDefaults; }

std::string render_defaults() {
  std::ostringstream out;
  out << "# sbm default configuration; every key the runner accepts.\n"
         "# Format: key = value, '#' starts a comment.\n";
  std::string section = "-";
  for (const auto& d : kDefaults) {
    const auto dot = d.key.find('.');
    const std::string sec = dot == std::string_view::npos ? "" : std::string(d.key.substr(0, dot));
    if (sec != section) {
      out << '\n';
      section = sec;
    }
    out << "# " << d.doc << '\n' << d.key << " =" << (d.value.empty() ? "" : " ") << d.value << '\n';
  }
  return out.str();
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  c.source_ = source;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = source + ":" + std::to_string(number);
    std::string body = line.substr(0, line.find('#'));
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(where + ": malformed key '" + key + "'");
    if (!find_default(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (c.entries_.count(key)) {
      throw ConfigError(where + ": duplicate key '" + key + "' (first set at " + c.entries_[key].origin + ")");
    }
    c.entries_[key] = {value, where};
  }
  return c;
}

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open config file");
  return parse(in, file.filename().string());
}

void Config::set_flag(const std::string& key, const std::string& value, const std::string& flag) {
  if (!find_default(key)) throw ConfigError(flag + ": unknown key '" + key + "'");
  entries_[key] = {value, flag};
}

std::string Config::raw(const std::string& key) const {
  read_[key] = true;
  if (auto it = entries_.find(key); it != entries_.end()) return it->second.value;
  const DefaultEntry* d = find_default(key);
  if (!d) throw std::logic_error("config key missing from the default table: " + key);
  return std::string(d->value);
}

std::string Config::origin(const std::string& key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second.origin;
  return "default";
}

void Config::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(origin(key) + ": " + key + ": " + message);
}

std::string Config::text(const std::string& key) const { return raw(key); }

double Config::real(const std::string& key) const {
  double v = 0.0;
  if (!parse_double(raw(key), v)) fail(key, "expected a number, got '" + raw(key) + "'");
  if (std::isnan(v)) fail(key, "NaN is not allowed");
  return v;
}

long Config::integer(const std::string& key) const {
  const std::string s = raw(key);
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t Config::count(const std::string& key) const {
  const std::string s = raw(key);
  // accept 1e6-style counts
  double v = 0.0;
  if (!parse_double(s, v) || !(v >= 1.0) || v > 9.0e15 || v != std::floor(v)) {
    fail(key, "expected a positive integer, got '" + s + "'");
  }
  return static_cast<std::uint64_t>(v);
}

bool Config::boolean(const std::string& key) const {
  const std::string s = raw(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(key, "expected true or false, got '" + s + "'");
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : split(raw(key), ',')) {
    double v = 0.0;
    if (!parse_double(part, v) || std::isnan(v)) fail(key, "expected a comma-separated list of numbers");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

std::vector<std::string> Config::words(const std::string& key) const {
  auto out = split(raw(key), ',');
  if (out.empty()) fail(key, "empty list");
  for (const auto& w : out)
    if (w.empty()) fail(key, "empty list item");
  return out;
}

namespace {

bool to_point(const std::string& s, Vec3& p) {
  const auto parts = split(s, ',');
  if (parts.size() < 2 || parts.size() > 3) return false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    double v = 0.0;
    if (!parse_double(parts[i], v) || !std::isfinite(v)) return false;
    p[i] = v;
  }
  return true;
}

}  // namespace

Vec3 Config::point(const std::string& key) const {
  Vec3 p{};
  if (!to_point(raw(key), p)) fail(key, "expected a point 'x,y' or 'x,y,z', got '" + raw(key) + "'");
  return p;
}

std::vector<Vec3> Config::points(const std::string& key) const {
  std::vector<Vec3> out;
  for (const auto& part : split(raw(key), ';')) {
    Vec3 p{};
    if (!to_point(part, p)) fail(key, "expected points 'x,y;x,y', got '" + raw(key) + "'");
    out.push_back(p);
  }
  if (out.empty()) fail(key, "empty point list");
  return out;
}

nlohmann::ordered_json Config::echo() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& d : kDefaults) {
    const std::string key(d.key);
    if (read_.count(key)) j[key] = raw(key);
  }
  return j;
}

nlohmann::ordered_json Config::sources() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& d : kDefaults) {
    const std::string key(d.key);
    if (read_.count(key)) j[key] = origin(key);
  }
  return j;
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

std::map<std::string, std::string> Config::entries() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, e] : entries_) out[k] = e.value;
  return out;
}

}  // namespace sbm::cli
