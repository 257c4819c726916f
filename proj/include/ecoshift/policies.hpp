#ifndef ECOSHIFT_POLICIES_HPP
#define ECOSHIFT_POLICIES_HPP

#include <span>
#include <string>
#include <vector>

#include "ecoshift/allocate.hpp"
#include "ecoshift/surface.hpp"
#include "ecoshift/types.hpp"

namespace ecoshift {

/// Per-component extra-power demand, inferred upstream (e.g. from uncapped
/// draw minus the current cap).
struct DemandSignal {
  std::string app_id;
  int cpu_demand_w = 0;
  int gpu_demand_w = 0;
};

namespace detail {

/// Improvement at caps, with each component floored to the nearest grid level
/// that still dominates the baseline. Policies that grant power at 1 W
/// resolution can land between measured grid levels; the enforced/measured
/// point is the grid level at or below the grant.
inline double improvement_floored(const Application& app, CapPair caps) {
  const CapGrid& grid = app.surface.grid();
  auto c = floor_level(grid.cpu_levels(), caps.cpu_w);
  auto g = floor_level(grid.gpu_levels(), caps.gpu_w);
  CapPair eval{c && *c >= app.baseline.cpu_w ? *c : app.baseline.cpu_w,
               g && *g >= app.baseline.gpu_w ? *g : app.baseline.gpu_w};
  return relative_improvement(app, eval);
}

}  // namespace detail

/// DPS-style fixed-share policy: each receiver gets floor(B/N) watts, split
/// evenly between CPU and GPU, with each component rounded down to the
/// nearest grid level that is still >= baseline. Leftover watts stay
/// unassigned.
inline AllocationResult fair_share_allocate(std::span<const Application> apps,
                                            int budget_w, const CapGrid& grid) {
  if (budget_w < 0) throw InvalidParamsError("budget must be non-negative");
  AllocationResult result;
  if (apps.empty()) return result;

  int share = budget_w / static_cast<int>(apps.size());
  int per_component = share / 2;
  for (const auto& app : apps) {
    auto c = floor_level(grid.cpu_levels(), app.baseline.cpu_w + per_component);
    auto g = floor_level(grid.gpu_levels(), app.baseline.gpu_w + per_component);
    CapPair caps{c && *c >= app.baseline.cpu_w ? *c : app.baseline.cpu_w,
                 g && *g >= app.baseline.gpu_w ? *g : app.baseline.gpu_w};
    int extra = (caps.cpu_w - app.baseline.cpu_w) + (caps.gpu_w - app.baseline.gpu_w);
    result.apps.push_back(
        AppAllocation{app.id, caps, extra, relative_improvement(app, caps)});
  }
  detail::finalize(result);
  return result;
}

/// MixedAdaptive-style policy: each component receives B scaled by its share
/// of the total demand, rounded down to whole watts and capped at the demand
/// itself. Grants are at 1 W resolution; the reported improvement is
/// evaluated at the grid level at or below the granted cap. Zero total
/// demand leaves every app at baseline.
inline AllocationResult demand_proportional_allocate(
    std::span<const Application> apps, std::span<const DemandSignal> demands,
    int budget_w) {
  if (budget_w < 0) throw InvalidParamsError("budget must be non-negative");

  AllocationResult result;
  long long total_demand = 0;
  std::vector<const DemandSignal*> by_app;
  by_app.reserve(apps.size());
  for (const auto& app : apps) {
    const DemandSignal* found = nullptr;
    for (const auto& d : demands)
      if (d.app_id == app.id) {
        found = &d;
        break;
      }
    if (!found)
      throw AppSetMismatchError("no demand signal for app '" + app.id + "'");
    if (found->cpu_demand_w < 0 || found->gpu_demand_w < 0)
      throw InvalidParamsError("demands must be non-negative");
    by_app.push_back(found);
    total_demand += found->cpu_demand_w + found->gpu_demand_w;
  }

  for (std::size_t i = 0; i < apps.size(); ++i) {
    const Application& app = apps[i];
    const DemandSignal& d = *by_app[i];
    auto grant = [&](int demand) {
      if (total_demand == 0) return 0;
      long long g = static_cast<long long>(budget_w) * demand / total_demand;
      return static_cast<int>(std::min<long long>(g, demand));
    };
    int gc = grant(d.cpu_demand_w);
    int gg = grant(d.gpu_demand_w);
    CapPair caps{app.baseline.cpu_w + gc, app.baseline.gpu_w + gg};
    result.apps.push_back(AppAllocation{app.id, caps, gc + gg,
                                        detail::improvement_floored(app, caps)});
  }
  detail::finalize(result);
  return result;
}

/// Everything stays at baseline; the comparison reference point.
inline AllocationResult no_distribution_allocate(std::span<const Application> apps) {
  AllocationResult result;
  for (const auto& app : apps)
    result.apps.push_back(AppAllocation{app.id, app.baseline, 0, 0.0});
  detail::finalize(result);
  return result;
}

}  // namespace ecoshift

#endif  // ECOSHIFT_POLICIES_HPP
