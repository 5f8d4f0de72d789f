#include "sbm/estimators.hpp"

#include <ostream>

#include "sbm/error.hpp"

namespace sbm {

KernelGrid::KernelGrid(std::vector<Vec3> centers, std::vector<double> measures)
    : centers_(std::move(centers)), measures_(std::move(measures)) {
  if (centers_.size() != measures_.size()) throw ConfigError("KernelGrid: centers/measures size mismatch");
  sums_.assign(centers_.size(), 0.0);
  sumsqs_.assign(centers_.size(), 0.0);
}

void KernelGrid::add_path(const std::vector<std::pair<std::size_t, double>>& contributions) {
  if (scratch_.size() != sums_.size()) scratch_.assign(sums_.size(), 0.0);
  double total = 0.0;
  for (const auto& [i, v] : contributions) {
    if (scratch_[i] == 0.0) touched_.push_back(i);
    scratch_[i] += v;
    total += v;
  }
  for (std::size_t i : touched_) {
    sums_[i] += scratch_[i];
    sumsqs_[i] += scratch_[i] * scratch_[i];
    scratch_[i] = 0.0;
  }
  touched_.clear();
  total_var_.add(total);
  ++paths_;
}

void KernelGrid::add_hits(std::size_t i, std::uint64_t count) {
  sums_[i] += double(count);
  sumsqs_[i] += double(count);
  for (std::uint64_t k = 0; k < count; ++k) total_var_.add(1.0);
  paths_ += count;
}

void KernelGrid::merge(const KernelGrid& o) {
  if (sums_.empty() && centers_.empty()) {
    *this = o;
    return;
  }
  if (o.size() != size()) throw ConfigError("KernelGrid: merging grids of different layout");
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    sums_[i] += o.sums_[i];
    sumsqs_[i] += o.sumsqs_[i];
  }
  total_var_ += o.total_var_;
  paths_ += o.paths_;
}

double KernelGrid::value(std::size_t i) const { return mass(i) / measures_[i]; }

double KernelGrid::stderr(std::size_t i) const {
  if (sums_[i] == 0.0 || paths_ < 2) return std::numeric_limits<double>::infinity();
  const double n = double(paths_);
  const double var = std::max(0.0, (sumsqs_[i] - sums_[i] * sums_[i] / n) / (n - 1.0));
  return std::sqrt(var / n) / measures_[i];
}

double KernelGrid::total_mass() const {
  double s = 0.0;
  for (double v : sums_) s += v;
  return paths_ ? s / double(paths_) : 0.0;
}

void KernelGrid::write_csv(std::ostream& out) const {
  out << "cell_id,center_x,center_y,center_z,value,stderr,n\n";
  out.precision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    out << i << ',' << centers_[i].x << ',' << centers_[i].y << ',' << centers_[i].z << ',' << value(i) << ','
        << stderr(i) << ',' << paths_ << '\n';
  }
}

}  // namespace sbm
