#ifndef ECOSHIFT_TYPES_HPP
#define ECOSHIFT_TYPES_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecoshift {

/// Base class for all library errors. CLI maps subtypes to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : Error {
  using Error::Error;
};
struct OffGridError : Error {
  using Error::Error;
};
struct UnknownRuntimeError : Error {
  using Error::Error;
};
struct DowngradeError : Error {
  using Error::Error;
};
struct EmptyGridError : Error {
  using Error::Error;
};
struct DuplicateAppError : Error {
  using Error::Error;
};
struct TooLargeError : Error {
  using Error::Error;
};
struct AppSetMismatchError : Error {
  using Error::Error;
};
struct GridMismatchError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};
struct InvalidParamsError : Error {
  using Error::Error;
};

/// A CPU/GPU power-cap pair in integer watts.
struct CapPair {
  int cpu_w = 0;
  int gpu_w = 0;

  auto operator<=>(const CapPair&) const = default;

  /// Component-wise >= (the monotonic upgrade relation).
  bool dominates(const CapPair& other) const {
    return cpu_w >= other.cpu_w && gpu_w >= other.gpu_w;
  }
};

/// Discrete cap grid: strictly increasing positive watt levels per component.
class CapGrid {
 public:
  CapGrid(std::vector<int> cpu_levels, std::vector<int> gpu_levels)
      : cpu_levels_(std::move(cpu_levels)), gpu_levels_(std::move(gpu_levels)) {
    validate_axis(cpu_levels_, "cpu_levels");
    validate_axis(gpu_levels_, "gpu_levels");
  }

  const std::vector<int>& cpu_levels() const { return cpu_levels_; }
  const std::vector<int>& gpu_levels() const { return gpu_levels_; }

  std::size_t num_cpu() const { return cpu_levels_.size(); }
  std::size_t num_gpu() const { return gpu_levels_.size(); }
  std::size_t num_points() const { return num_cpu() * num_gpu(); }

  std::optional<std::size_t> cpu_index(int w) const { return find(cpu_levels_, w); }
  std::optional<std::size_t> gpu_index(int w) const { return find(gpu_levels_, w); }

  bool contains(const CapPair& p) const {
    return cpu_index(p.cpu_w).has_value() && gpu_index(p.gpu_w).has_value();
  }

  /// Flat row-major index of a grid point; throws OffGridError.
  std::size_t index_of(const CapPair& p) const {
    auto ci = cpu_index(p.cpu_w);
    auto gi = gpu_index(p.gpu_w);
    if (!ci || !gi)
      throw OffGridError("cap pair (" + std::to_string(p.cpu_w) + "," +
                         std::to_string(p.gpu_w) + ") not on grid");
    return *ci * num_gpu() + *gi;
  }

  CapPair point(std::size_t cpu_idx, std::size_t gpu_idx) const {
    return CapPair{cpu_levels_.at(cpu_idx), gpu_levels_.at(gpu_idx)};
  }

  CapPair point(std::size_t flat) const {
    return point(flat / num_gpu(), flat % num_gpu());
  }

  bool operator==(const CapGrid& other) const {
    return cpu_levels_ == other.cpu_levels_ && gpu_levels_ == other.gpu_levels_;
  }

 private:
  static void validate_axis(const std::vector<int>& levels, const char* name) {
    if (levels.empty()) throw InvalidParamsError(std::string(name) + " is empty");
    int prev = 0;
    for (int w : levels) {
      if (w <= prev)
        throw InvalidParamsError(std::string(name) +
                                 " must be strictly increasing and positive");
      prev = w;
    }
  }

  static std::optional<std::size_t> find(const std::vector<int>& levels, int w) {
    auto it = std::lower_bound(levels.begin(), levels.end(), w);
    if (it == levels.end() || *it != w) return std::nullopt;
    return static_cast<std::size_t>(it - levels.begin());
  }

  std::vector<int> cpu_levels_;
  std::vector<int> gpu_levels_;
};

/// Largest level <= w, if any.
inline std::optional<int> floor_level(const std::vector<int>& levels, int w) {
  auto it = std::upper_bound(levels.begin(), levels.end(), w);
  if (it == levels.begin()) return std::nullopt;
  return *(it - 1);
}

}  // namespace ecoshift

#endif  // ECOSHIFT_TYPES_HPP
