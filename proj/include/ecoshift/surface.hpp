#ifndef ECOSHIFT_SURFACE_HPP
#define ECOSHIFT_SURFACE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecoshift/types.hpp"

namespace ecoshift {

/// Runtime T(c,g) of one application over a cap grid, possibly partially
/// observed. Entries with known(i,j) == false carry no runtime.
class PerformanceSurface {
 public:
  PerformanceSurface(CapGrid grid, std::vector<double> runtime_s,
                     std::vector<std::uint8_t> known_mask)
      : grid_(std::move(grid)),
        runtime_s_(std::move(runtime_s)),
        known_(std::move(known_mask)) {
    if (runtime_s_.size() != grid_.num_points() || known_.size() != grid_.num_points())
      throw InvalidParamsError("surface dimensions do not match grid");
    for (std::size_t i = 0; i < runtime_s_.size(); ++i)
      if (known_[i] && !(runtime_s_[i] > 0.0))
        throw InvalidParamsError("known runtimes must be strictly positive");
  }

  /// Fully-known surface.
  PerformanceSurface(CapGrid grid, std::vector<double> runtime_s)
      : PerformanceSurface(
            std::move(grid), std::move(runtime_s),
            std::vector<std::uint8_t>(grid.num_points(), std::uint8_t{1})) {}

  const CapGrid& grid() const { return grid_; }
  const std::vector<double>& runtimes() const { return runtime_s_; }
  const std::vector<std::uint8_t>& known_mask() const { return known_; }

  bool is_known(const CapPair& p) const {
    return grid_.contains(p) && known_[grid_.index_of(p)] != 0;
  }

  /// Runtime at an on-grid point, or nullopt when unobserved.
  /// Throws OffGridError for points outside the grid.
  std::optional<double> runtime_at(const CapPair& p) const {
    std::size_t idx = grid_.index_of(p);
    if (!known_[idx]) return std::nullopt;
    return runtime_s_[idx];
  }

  std::size_t num_known() const {
    std::size_t n = 0;
    for (auto k : known_) n += k != 0;
    return n;
  }

 private:
  CapGrid grid_;
  std::vector<double> runtime_s_;
  std::vector<std::uint8_t> known_;
};

enum class SensitivityClass { Cpu, Gpu, Both, Insensitive };

inline std::string to_string(SensitivityClass c) {
  switch (c) {
    case SensitivityClass::Cpu: return "cpu";
    case SensitivityClass::Gpu: return "gpu";
    case SensitivityClass::Both: return "both";
    case SensitivityClass::Insensitive: return "insensitive";
  }
  throw InvalidParamsError("bad sensitivity class");
}

inline SensitivityClass sensitivity_class_from_string(const std::string& s) {
  if (s == "cpu") return SensitivityClass::Cpu;
  if (s == "gpu") return SensitivityClass::Gpu;
  if (s == "both") return SensitivityClass::Both;
  if (s == "insensitive") return SensitivityClass::Insensitive;
  throw InputError("unknown sensitivity class: " + s);
}

/// One receiver application: baseline caps plus its performance surface.
/// sensitivity_class is descriptive metadata only.
struct Application {
  std::string id;
  CapPair baseline;
  PerformanceSurface surface;
  SensitivityClass sensitivity_class = SensitivityClass::Insensitive;

  Application(std::string id_, CapPair baseline_, PerformanceSurface surface_,
              SensitivityClass cls = SensitivityClass::Insensitive)
      : id(std::move(id_)),
        baseline(baseline_),
        surface(std::move(surface_)),
        sensitivity_class(cls) {
    if (!surface.grid().contains(baseline))
      throw OffGridError("baseline of app '" + id + "' not on grid");
    if (!surface.is_known(baseline))
      throw UnknownRuntimeError("baseline runtime of app '" + id + "' unknown");
  }

  double baseline_runtime() const { return *surface.runtime_at(baseline); }
};

namespace detail {

inline double runtime_checked(const Application& app, const CapPair& target) {
  if (target.cpu_w < app.baseline.cpu_w || target.gpu_w < app.baseline.gpu_w)
    throw DowngradeError("target caps below baseline for app '" + app.id + "'");
  auto t = app.surface.runtime_at(target);  // throws OffGridError
  if (!t)
    throw UnknownRuntimeError("runtime unknown at (" + std::to_string(target.cpu_w) +
                              "," + std::to_string(target.gpu_w) + ") for app '" +
                              app.id + "'");
  return *t;
}

}  // namespace detail

/// Relative runtime reduction (T(baseline) - T(target)) / T(baseline).
/// Negative when the target runs slower than baseline.
inline double relative_improvement(const Application& app, const CapPair& target) {
  double t_base = app.baseline_runtime();
  double t_tgt = detail::runtime_checked(app, target);
  return (t_base - t_tgt) / t_base;
}

/// Baseline-relative speedup T(baseline) / T(target).
inline double normalized_performance(const Application& app, const CapPair& target) {
  return app.baseline_runtime() / detail::runtime_checked(app, target);
}

}  // namespace ecoshift

#endif  // ECOSHIFT_SURFACE_HPP
