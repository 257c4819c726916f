#ifndef ECOSHIFT_SYNTHETIC_HPP
#define ECOSHIFT_SYNTHETIC_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ecoshift/surface.hpp"
#include "ecoshift/types.hpp"

namespace ecoshift {

/// Saturating concave speedup response along one cap axis: 1 at the lowest
/// grid level, approaching 1 + max_speedup at the saturation cap, flat above.
struct AxisResponse {
  double max_speedup = 0.0;  // >= 0
  double curvature = 0.01;   // > 0, larger = saturates sooner
  int saturation_w = 0;      // within grid range
};

struct SyntheticSurfaceParams {
  SensitivityClass cls = SensitivityClass::Insensitive;
  AxisResponse cpu;
  AxisResponse gpu;
  double noise_sd = 0.0;           // lognormal sd on runtime
  double baseline_runtime_s = 100.0;
};

inline double axis_speedup(const AxisResponse& r, int w, int lowest_level_w) {
  if (r.max_speedup == 0.0) return 1.0;
  int x = std::min(w, r.saturation_w);
  double span = static_cast<double>(r.saturation_w - lowest_level_w);
  double norm = 1.0 - std::exp(-r.curvature * span);
  double rise = 1.0 - std::exp(-r.curvature * static_cast<double>(x - lowest_level_w));
  return 1.0 + r.max_speedup * rise / norm;
}

namespace detail {

inline void validate_axis_response(const AxisResponse& r, const CapGrid& grid,
                                   const std::vector<int>& levels) {
  if (r.max_speedup < 0.0) throw InvalidParamsError("max_speedup must be >= 0");
  if (r.max_speedup == 0.0) return;
  if (!(r.curvature > 0.0)) throw InvalidParamsError("curvature must be positive");
  if (r.saturation_w <= levels.front() || r.saturation_w > levels.back())
    throw InvalidParamsError("saturation cap outside grid range");
  (void)grid;
}

}  // namespace detail

/// T(c,g) = T0 / (s_cpu(c) * s_gpu(g)) * exp(noise_sd * z), z ~ N(0,1) drawn
/// per grid point in row-major order from a seeded generator.
inline PerformanceSurface generate_surface(const SyntheticSurfaceParams& params,
                                           const CapPair& baseline,
                                           const CapGrid& grid, std::uint32_t seed) {
  detail::validate_axis_response(params.cpu, grid, grid.cpu_levels());
  detail::validate_axis_response(params.gpu, grid, grid.gpu_levels());
  if (!(params.baseline_runtime_s > 0.0))
    throw InvalidParamsError("baseline runtime must be positive");
  if (params.noise_sd < 0.0) throw InvalidParamsError("noise_sd must be >= 0");
  if (!grid.contains(baseline)) throw OffGridError("baseline not on grid");

  int cpu_low = grid.cpu_levels().front();
  int gpu_low = grid.gpu_levels().front();
  // Anchor T0 so the noiseless runtime at the baseline equals
  // baseline_runtime_s regardless of where the baseline sits.
  double base_speed = axis_speedup(params.cpu, baseline.cpu_w, cpu_low) *
                      axis_speedup(params.gpu, baseline.gpu_w, gpu_low);
  double t0 = params.baseline_runtime_s * base_speed;

  std::mt19937 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> runtimes(grid.num_points());
  for (std::size_t ci = 0; ci < grid.num_cpu(); ++ci) {
    double sc = axis_speedup(params.cpu, grid.cpu_levels()[ci], cpu_low);
    for (std::size_t gi = 0; gi < grid.num_gpu(); ++gi) {
      double sg = axis_speedup(params.gpu, grid.gpu_levels()[gi], gpu_low);
      double noise = params.noise_sd > 0.0 ? std::exp(params.noise_sd * z(rng)) : 1.0;
      runtimes[ci * grid.num_gpu() + gi] = t0 / (sc * sg) * noise;
    }
  }
  return PerformanceSurface(grid, std::move(runtimes));
}

/// Solve (max_speedup, curvature) so that, starting from caps w0 with
/// speedup 1, raising the cap to w1 cuts runtime by gain1 (fraction) and
/// raising it further to w2 cuts the w1 runtime by another gain2. Saturation
/// is placed at w2.
inline AxisResponse fit_axis_anchors(int w0, int w1, double gain1, int w2,
                                     double gain2) {
  if (!(w0 < w1 && w1 < w2))
    throw InvalidParamsError("anchor caps must be increasing");
  if (!(gain1 > 0.0 && gain1 < 1.0 && gain2 >= 0.0 && gain2 < 1.0))
    throw InvalidParamsError("anchor gains must lie in [0,1)");

  // Speedups implied by the runtime reductions.
  double s1 = 1.0 / (1.0 - gain1);
  double s2 = s1 / (1.0 - gain2);
  double a = s2 - 1.0;            // max_speedup, reached at w2
  double target = (s1 - 1.0) / a; // (1-e^{-k(w1-w0)}) / (1-e^{-k(w2-w0)})

  double frac1 = static_cast<double>(w1 - w0) / static_cast<double>(w2 - w0);
  if (target <= frac1)
    throw InvalidParamsError("anchors are not concave; no saturating fit");

  auto ratio = [&](double k) {
    return (1.0 - std::exp(-k * (w1 - w0))) / (1.0 - std::exp(-k * (w2 - w0)));
  };
  double lo = 1e-9, hi = 1.0;
  while (ratio(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (ratio(mid) < target ? lo : hi) = mid;
  }
  return AxisResponse{a, 0.5 * (lo + hi), w2};
}

/// Class presets with randomized magnitudes, for scenario generation.
/// Sensitive axes get a substantial saturating response; insensitive axes a
/// marginal one.
inline SyntheticSurfaceParams random_params_for_class(SensitivityClass cls,
                                                      const CapGrid& grid,
                                                      std::mt19937& rng) {
  std::uniform_real_distribution<double> strong(0.15, 0.40);
  std::uniform_real_distribution<double> weak(0.0, 0.03);
  std::uniform_real_distribution<double> curve(0.005, 0.02);
  std::uniform_real_distribution<double> t0(50.0, 200.0);

  auto axis = [&](bool sensitive, const std::vector<int>& levels) {
    AxisResponse r;
    r.max_speedup = sensitive ? strong(rng) : weak(rng);
    r.curvature = curve(rng);
    r.saturation_w = levels.back();
    return r;
  };
  SyntheticSurfaceParams p;
  p.cls = cls;
  bool cpu_sensitive = cls == SensitivityClass::Cpu || cls == SensitivityClass::Both;
  bool gpu_sensitive = cls == SensitivityClass::Gpu || cls == SensitivityClass::Both;
  p.cpu = axis(cpu_sensitive, grid.cpu_levels());
  p.gpu = axis(gpu_sensitive, grid.gpu_levels());
  if (cls == SensitivityClass::Insensitive) {
    p.cpu.max_speedup = weak(rng);
    p.gpu.max_speedup = weak(rng);
  }
  p.baseline_runtime_s = t0(rng);
  return p;
}

}  // namespace ecoshift

#endif  // ECOSHIFT_SYNTHETIC_HPP
