// Shared fixtures: the two-application case-study surfaces and random
// instance generators used by the unit and acceptance suites.
#ifndef ECOSHIFT_TESTS_FIXTURES_HPP
#define ECOSHIFT_TESTS_FIXTURES_HPP

#include <random>
#include <vector>

#include "ecoshift/options.hpp"
#include "ecoshift/surface.hpp"
#include "ecoshift/types.hpp"

namespace fixtures {

using namespace ecoshift;

// Grid carrying every cap pair from the two-app case study, including the
// 1 W-resolution demand-proportional points.
inline CapGrid case_study_grid() {
  return CapGrid({300, 329, 350, 354, 400}, {200, 221, 250, 294, 300});
}

inline PerformanceSurface sparse_surface(
    const CapGrid& grid, const std::vector<std::pair<CapPair, double>>& entries) {
  std::vector<double> runtimes(grid.num_points(), 0.0);
  std::vector<std::uint8_t> known(grid.num_points(), 0);
  for (const auto& [caps, t] : entries) {
    std::size_t idx = grid.index_of(caps);
    runtimes[idx] = t;
    known[idx] = 1;
  }
  return PerformanceSurface(grid, std::move(runtimes), std::move(known));
}

// CPU-leaning app: +8.81% at (350,250), +9.29% at (354,221), +18.35% at
// (400,200), from a 100 s baseline.
inline Application make_cfd() {
  CapGrid grid = case_study_grid();
  return Application("cfd", CapPair{300, 200},
                     sparse_surface(grid, {{{300, 200}, 100.0},
                                           {{350, 250}, 91.19},
                                           {{354, 221}, 90.71},
                                           {{400, 200}, 81.65}}),
                     SensitivityClass::Cpu);
}

// GPU-leaning app: +15.57% at (300,300), +17.03% at (329,294), +9.61% at
// (350,250).
inline Application make_raytracing() {
  CapGrid grid = case_study_grid();
  return Application("raytracing", CapPair{300, 200},
                     sparse_surface(grid, {{{300, 200}, 100.0},
                                           {{300, 300}, 84.43},
                                           {{329, 294}, 82.97},
                                           {{350, 250}, 90.39}}),
                     SensitivityClass::Gpu);
}

// Fully known random surface with runtimes in roughly [40, 250] s.
inline PerformanceSurface random_surface(const CapGrid& grid, std::mt19937& rng) {
  std::uniform_real_distribution<double> log_t(3.7, 5.5);
  std::vector<double> runtimes(grid.num_points());
  for (auto& t : runtimes) t = std::exp(log_t(rng));
  return PerformanceSurface(grid, std::move(runtimes));
}

// Random MCKP instance: option tables built from random surfaces on a small
// grid, so DP, brute force, and hand enumeration all see the same inputs.
inline std::vector<OptionTable> random_tables(std::mt19937& rng, int n_apps,
                                              int budget_w) {
  CapGrid grid({100, 150, 200, 250}, {100, 150, 200, 250});
  std::vector<OptionTable> tables;
  std::uniform_int_distribution<std::size_t> base_idx(0, 2);
  for (int i = 0; i < n_apps; ++i) {
    CapPair baseline = grid.point(base_idx(rng), base_idx(rng));
    Application app("app" + std::to_string(i), baseline, random_surface(grid, rng));
    tables.push_back(build_option_table(app, budget_w, grid));
  }
  return tables;
}

}  // namespace fixtures

#endif  // ECOSHIFT_TESTS_FIXTURES_HPP
