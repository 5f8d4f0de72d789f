#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "sbm/vec.hpp"

namespace sbm {

/// Mergeable (Σx, Σx², n) accumulator; merging is plain addition.
struct RunningSum {
  double sum = 0.0;
  double sumsq = 0.0;
  std::uint64_t count = 0;

  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++count;
  }
  RunningSum& operator+=(const RunningSum& o) {
    sum += o.sum;
    sumsq += o.sumsq;
    count += o.count;
    return *this;
  }
  double mean() const { return count ? sum / double(count) : std::numeric_limits<double>::quiet_NaN(); }
  /// Unbiased sample variance.
  double variance() const {
    if (count < 2) return std::numeric_limits<double>::infinity();
    const double n = double(count);
    return std::max(0.0, (sumsq - sum * sum / n) / (n - 1.0));
  }
  double stderr_of_mean() const { return std::sqrt(variance() / double(count)); }
};

/// Point estimate with one-sigma error.
struct Estimate {
  double value = 0.0;
  double stderr = 0.0;
};

/// Combined error of a difference of independent estimates.
inline double combined_error(const Estimate& a, const Estimate& b) { return std::hypot(a.stderr, b.stderr); }

/// Per-cell Monte-Carlo density estimates: cell i holds Σ_paths c_i and Σ c_i²
/// of the per-path contribution c_i; the value is mean(c_i) / measure_i.
/// Cells never hit report stderr = ∞.
class KernelGrid {
 public:
  KernelGrid() = default;
  KernelGrid(std::vector<Vec3> centers, std::vector<double> measures);

  std::size_t size() const { return centers_.size(); }
  const Vec3& center(std::size_t i) const { return centers_[i]; }
  double measure(std::size_t i) const { return measures_[i]; }
  std::uint64_t paths() const { return paths_; }

  /// Record one path's contributions (cell, amount); cells may repeat.
  void add_path(const std::vector<std::pair<std::size_t, double>>& contributions);
  /// Record one path that contributed nothing.
  void add_empty_path() { ++paths_; }
  /// Record `count` paths with a single unit hit in cell i each.
  void add_hits(std::size_t i, std::uint64_t count);

  void merge(const KernelGrid& o);

  double value(std::size_t i) const;
  double stderr(std::size_t i) const;
  /// Mean per-path contribution (before dividing by the measure).
  double mass(std::size_t i) const { return paths_ ? sums_[i] / double(paths_) : 0.0; }
  double total_mass() const;
  double total_mass_stderr() const { return std::sqrt(total_var_.variance() / double(paths_)); }
  bool empty_cell(std::size_t i) const { return sums_[i] == 0.0; }

  /// CSV with columns cell_id,center_x,center_y,center_z,value,stderr,n.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<Vec3> centers_;
  std::vector<double> measures_;
  std::vector<double> sums_;
  std::vector<double> sumsqs_;
  RunningSum total_var_;  // per-path total contribution
  std::uint64_t paths_ = 0;
  // scratch for folding repeated cells within one path
  std::vector<double> scratch_;
  std::vector<std::size_t> touched_;
};

}  // namespace sbm
