#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sbm/vec.hpp"

namespace sbm::cli {

struct DefaultEntry {
  std::string_view key;
  std::string_view value;
  std::string_view doc;
};

/// Every key the runner understands, with its default. config/defaults.conf
/// mirrors this table.
std::span<const DefaultEntry> default_table();

/// The default table rendered as a config file (what `sbm defaults` prints).
std::string render_defaults();

/// Flat `key = value` configuration with dotted section names. Keys not in the
/// default table are rejected; reads are recorded so the summary can echo
/// exactly the parameters an experiment used and where each came from.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source);
  static Config load(const std::filesystem::path& file);

  /// Command-line override (--seed, --lanes, --out).
  void set_flag(const std::string& key, const std::string& value, const std::string& flag);

  bool explicitly_set(const std::string& key) const { return entries_.count(key) > 0; }

  std::string text(const std::string& key) const;
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;
  /// "x,y" or "x,y,z".
  Vec3 point(const std::string& key) const;
  /// Points separated by ';'.
  std::vector<Vec3> points(const std::string& key) const;

  /// Throws ConfigError naming the key's origin ("run.conf:12", "default", "--seed").
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  std::string origin(const std::string& key) const;

  /// {key: value} for every key read so far, and {key: origin}.
  nlohmann::ordered_json echo() const;
  nlohmann::ordered_json sources() const;
  /// Keys given in the file but never read by the experiment.
  std::vector<std::string> unused() const;

  /// Explicit entries only (used to compare defaults.conf with the table).
  std::map<std::string, std::string> entries() const;

 private:
  struct Entry {
    std::string value;
    std::string origin;
  };
  std::string raw(const std::string& key) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
  mutable std::map<std::string, bool> read_;
};

}  // namespace sbm::cli
