#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ecoshift/options.hpp"
#include "fixtures.hpp"

using namespace ecoshift;
using Catch::Approx;

TEST_CASE("single-point grid yields only the baseline entry") {
  CapGrid grid({300}, {200});
  Application app("solo", CapPair{300, 200}, PerformanceSurface(grid, {100.0}));
  OptionTable table = build_option_table(app, 500, grid);
  REQUIRE(table.entries.size() == 1);
  CHECK(table.entries.at(0).improvement == 0.0);
  CHECK(table.entries.at(0).caps == CapPair{300, 200});
}

TEST_CASE("case-study option table keeps the best option per exact cost") {
  OptionTable table = build_option_table(fixtures::make_cfd(), 200,
                                         fixtures::case_study_grid());
  REQUIRE(table.entries.size() == 3);
  CHECK(table.entries.at(0).improvement == 0.0);
  CHECK(table.entries.at(75).improvement == Approx(0.0929).margin(1e-12));
  CHECK(table.entries.at(75).caps == CapPair{354, 221});
  // Two candidates cost exactly 100 W; the 18.35% one wins.
  CHECK(table.entries.at(100).improvement == Approx(0.1835).margin(1e-12));
  CHECK(table.entries.at(100).caps == CapPair{400, 200});
}

TEST_CASE("harmful upgrades are pruned down to the baseline entry") {
  CapGrid grid({300, 350}, {200, 250});
  PerformanceSurface surface(grid, {100.0, 101.0, 102.0, 103.0});
  Application app("worse", CapPair{300, 200}, surface);
  OptionTable table = build_option_table(app, 500, grid);
  REQUIRE(table.entries.size() == 1);
  CHECK(table.entries.at(0).caps == CapPair{300, 200});
}

TEST_CASE("unknown runtimes are skipped, not errors") {
  CapGrid grid({300, 350}, {200});
  PerformanceSurface surface(grid, {100.0, 0.0}, {1, 0});
  Application app("partial", CapPair{300, 200}, surface);
  OptionTable table = build_option_table(app, 500, grid);
  CHECK(table.entries.size() == 1);
}

TEST_CASE("empty dominating set is an error") {
  Application cfd = fixtures::make_cfd();
  CapGrid low_grid({100, 200}, {100, 150});
  CHECK_THROWS_AS(build_option_table(cfd, 500, low_grid), EmptyGridError);
}

TEST_CASE("improvement curve is the prefix max of the table") {
  OptionTable table = build_option_table(fixtures::make_cfd(), 200,
                                         fixtures::case_study_grid());
  ImprovementCurve curve = improvement_curve(table, 200);
  REQUIRE(curve.values.size() == 201);
  CHECK(curve.at(0) == 0.0);
  CHECK(curve.at(74) == 0.0);
  CHECK(curve.at(75) == Approx(0.0929));
  CHECK(curve.at(99) == Approx(0.0929));
  CHECK(curve.at(100) == Approx(0.1835));
  CHECK(curve.at(200) == Approx(0.1835));
}

TEST_CASE("curve of a baseline-only table is identically zero") {
  OptionTable table{"flat", {{0, Option{0.0, CapPair{300, 200}}}}};
  ImprovementCurve curve = improvement_curve(table, 50);
  for (double v : curve.values) CHECK(v == 0.0);
}

TEST_CASE("options costing more than the budget never enter the curve") {
  OptionTable table{"pricey",
                    {{0, Option{0.0, CapPair{300, 200}}},
                     {10, Option{0.05, CapPair{310, 200}}}}};
  ImprovementCurve curve = improvement_curve(table, 5);
  for (double v : curve.values) CHECK(v == 0.0);
}

// Oracle equivalence of the compression step: F(b) must equal the raw
// maximum over all feasible cap pairs with cost <= b.
TEST_CASE("curve equals brute-force max over raw cap pairs") {
  std::mt19937 rng(11);
  CapGrid grid({100, 150, 200, 250}, {100, 150, 200, 250});
  for (int trial = 0; trial < 30; ++trial) {
    CapPair baseline = grid.point(rng() % 2, rng() % 2);
    Application app("a", baseline, fixtures::random_surface(grid, rng));
    int budget = static_cast<int>(rng() % 300);
    OptionTable table = build_option_table(app, budget, grid);
    ImprovementCurve curve = improvement_curve(table, budget);
    for (int b = 0; b <= budget; b += 7) {
      double best = 0.0;
      for (int c : grid.cpu_levels()) {
        for (int g : grid.gpu_levels()) {
          if (c < baseline.cpu_w || g < baseline.gpu_w) continue;
          int e = (c - baseline.cpu_w) + (g - baseline.gpu_w);
          if (e > b) continue;
          best = std::max(best, relative_improvement(app, CapPair{c, g}));
        }
      }
      CHECK(curve.at(b) == Approx(best).margin(1e-12));
    }
  }
}

TEST_CASE("table size is bounded by budget and dominating grid points") {
  std::mt19937 rng(13);
  CapGrid grid({100, 150, 200, 250}, {100, 150, 200, 250});
  for (int trial = 0; trial < 30; ++trial) {
    CapPair baseline = grid.point(rng() % 3, rng() % 3);
    Application app("a", baseline, fixtures::random_surface(grid, rng));
    int budget = static_cast<int>(rng() % 300);
    OptionTable table = build_option_table(app, budget, grid);
    std::size_t dominating = 0;
    for (int c : grid.cpu_levels())
      for (int g : grid.gpu_levels())
        dominating += (c >= baseline.cpu_w && g >= baseline.gpu_w);
    CHECK(table.entries.size() <=
          std::min<std::size_t>(static_cast<std::size_t>(budget) + 1, dominating));
  }
}
