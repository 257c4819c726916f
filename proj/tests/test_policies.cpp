#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ecoshift/allocate.hpp"
#include "ecoshift/policies.hpp"
#include "fixtures.hpp"

using namespace ecoshift;
using Catch::Approx;

TEST_CASE("fair share reproduces the case-study (350,250) split") {
  std::vector<Application> apps{fixtures::make_cfd(), fixtures::make_raytracing()};
  AllocationResult r = fair_share_allocate(apps, 200, fixtures::case_study_grid());
  REQUIRE(r.apps.size() == 2);
  CHECK(r.apps[0].caps == CapPair{350, 250});
  CHECK(r.apps[1].caps == CapPair{350, 250});
  CHECK(r.avg_improvement == Approx(0.0921).margin(1e-12));
  CHECK(r.total_power_used_w <= 200);
}

TEST_CASE("fair share with zero budget stays at baseline") {
  std::vector<Application> apps{fixtures::make_cfd()};
  AllocationResult r = fair_share_allocate(apps, 0, fixtures::case_study_grid());
  CHECK(r.apps[0].caps == apps[0].baseline);
  CHECK(r.total_improvement == 0.0);
}

TEST_CASE("fair share rounding below one grid step grants nothing") {
  CapGrid grid({300, 350, 400}, {200, 250, 300});
  PerformanceSurface surface(grid, std::vector<double>(9, 100.0));
  std::vector<Application> apps;
  for (int i = 0; i < 3; ++i)
    apps.emplace_back("app" + std::to_string(i), CapPair{300, 200}, surface);
  // floor(100/3) = 33 W per app, 16 W per component: below the 50 W step.
  AllocationResult r = fair_share_allocate(apps, 100, grid);
  for (const auto& a : r.apps) CHECK(a.caps == CapPair{300, 200});
  CHECK(r.total_power_used_w == 0);
}

TEST_CASE("demand-proportional reproduces the case-study caps") {
  std::vector<Application> apps{fixtures::make_cfd(), fixtures::make_raytracing()};
  std::vector<DemandSignal> demands{{"cfd", 54, 21}, {"raytracing", 29, 94}};
  AllocationResult r = demand_proportional_allocate(apps, demands, 200);
  REQUIRE(r.apps.size() == 2);
  CHECK(r.apps[0].caps == CapPair{354, 221});
  CHECK(r.apps[1].caps == CapPair{329, 294});
  CHECK(r.avg_improvement == Approx(0.1316).margin(1e-12));
  CHECK(r.total_power_used_w <= 200);
}

TEST_CASE("a single demanding app receives min(budget, demand)") {
  std::vector<Application> apps{fixtures::make_cfd()};
  SECTION("demand below budget") {
    std::vector<DemandSignal> demands{{"cfd", 54, 21}};
    AllocationResult r = demand_proportional_allocate(apps, demands, 200);
    CHECK(r.apps[0].caps == CapPair{354, 221});
    CHECK(r.apps[0].extra_power_w == 75);
  }
  SECTION("demand above budget") {
    std::vector<DemandSignal> demands{{"cfd", 500, 0}};
    AllocationResult r = demand_proportional_allocate(apps, demands, 100);
    CHECK(r.apps[0].caps == CapPair{400, 200});
    CHECK(r.apps[0].extra_power_w == 100);
  }
}

TEST_CASE("equal demands with a divisible budget yield equal grants") {
  CapGrid grid({300, 325, 350}, {200, 225, 250});
  PerformanceSurface surface(grid, {100, 99, 98, 97, 96, 95, 94, 93, 92});
  std::vector<Application> apps{Application("a", {300, 200}, surface),
                                Application("b", {300, 200}, surface)};
  std::vector<DemandSignal> demands{{"a", 25, 25}, {"b", 25, 25}};
  AllocationResult r = demand_proportional_allocate(apps, demands, 100);
  CHECK(r.apps[0].caps == CapPair{325, 225});
  CHECK(r.apps[1].caps == CapPair{325, 225});
}

TEST_CASE("zero total demand leaves every app at baseline") {
  std::vector<Application> apps{fixtures::make_cfd(), fixtures::make_raytracing()};
  std::vector<DemandSignal> demands{{"cfd", 0, 0}, {"raytracing", 0, 0}};
  AllocationResult r = demand_proportional_allocate(apps, demands, 200);
  for (const auto& a : r.apps) CHECK(a.extra_power_w == 0);
}

TEST_CASE("missing demand signals are a mismatch error") {
  std::vector<Application> apps{fixtures::make_cfd(), fixtures::make_raytracing()};
  std::vector<DemandSignal> demands{{"cfd", 10, 10}};
  CHECK_THROWS_AS(demand_proportional_allocate(apps, demands, 200),
                  AppSetMismatchError);
}

TEST_CASE("all policies respect budget and the upgrade model") {
  std::mt19937 rng(29);
  CapGrid grid({100, 150, 200, 250}, {100, 150, 200, 250});
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Application> apps;
    std::vector<DemandSignal> demands;
    int n = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      CapPair baseline = grid.point(rng() % 2, rng() % 2);
      apps.emplace_back("app" + std::to_string(i), baseline,
                        fixtures::random_surface(grid, rng));
      demands.push_back(DemandSignal{"app" + std::to_string(i),
                                     static_cast<int>(rng() % 150),
                                     static_cast<int>(rng() % 150)});
    }
    int budget = static_cast<int>(rng() % 400);
    for (const AllocationResult& r :
         {fair_share_allocate(apps, budget, grid),
          demand_proportional_allocate(apps, demands, budget)}) {
      CHECK(r.total_power_used_w <= budget);
      for (std::size_t i = 0; i < r.apps.size(); ++i)
        CHECK(r.apps[i].caps.dominates(apps[i].baseline));
    }
  }
}

TEST_CASE("dp dominates both heuristics under perfect information") {
  std::mt19937 rng(31);
  CapGrid grid({100, 150, 200, 250}, {100, 150, 200, 250});
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Application> apps;
    std::vector<DemandSignal> demands;
    int n = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      CapPair baseline = grid.point(rng() % 2, rng() % 2);
      apps.emplace_back("app" + std::to_string(i), baseline,
                        fixtures::random_surface(grid, rng));
      demands.push_back(DemandSignal{"app" + std::to_string(i),
                                     static_cast<int>(rng() % 150),
                                     static_cast<int>(rng() % 150)});
    }
    int budget = static_cast<int>(rng() % 400);
    std::vector<OptionTable> tables;
    for (const auto& app : apps) tables.push_back(build_option_table(app, budget, grid));
    double dp = dp_allocate(tables, budget).avg_improvement;
    CHECK(dp >= fair_share_allocate(apps, budget, grid).avg_improvement - 1e-12);
    CHECK(dp >=
          demand_proportional_allocate(apps, demands, budget).avg_improvement - 1e-12);
  }
}
