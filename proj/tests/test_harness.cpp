#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "ecoshift/harness.hpp"
#include "ecoshift/metrics.hpp"
#include "fixtures.hpp"

using namespace ecoshift;
using Catch::Approx;

namespace {

ScenarioSpec case_study_scenario() {
  ScenarioSpec s{"case-study", {}, 200, fixtures::case_study_grid(), 1, 1};

  Application cfd = fixtures::make_cfd();
  ReceiverSpec r1{"cfd", SensitivityClass::Cpu, cfd.baseline, {cfd.surface, {}},
                  CapPair{354, 221}};
  Application ray = fixtures::make_raytracing();
  ReceiverSpec r2{"raytracing", SensitivityClass::Gpu, ray.baseline,
                  {ray.surface, {}}, CapPair{329, 294}};
  s.receivers = {r1, r2};
  return s;
}

}  // namespace

TEST_CASE("jain index matches hand-computed values") {
  std::vector<double> equal{0.2, 0.2, 0.2};
  CHECK(jain_index(equal) == Approx(1.0));
  std::vector<double> one_hot{0.3, 0.0, 0.0};
  CHECK(jain_index(one_hot) == Approx(1.0 / 3.0));
  std::vector<double> two{0.1, 0.2};
  CHECK(jain_index(two) == Approx(0.9));
  std::vector<double> zeros{0.0, 0.0};
  CHECK(jain_index(zeros) == 1.0);
  CHECK_THROWS_AS(jain_index(std::vector<double>{}), InvalidParamsError);
}

TEST_CASE("jain index is scale-invariant") {
  std::vector<double> xs{0.05, 0.11, 0.02, 0.4};
  double base = jain_index(xs);
  for (auto& x : xs) x *= 7.5;
  CHECK(jain_index(xs) == Approx(base).margin(1e-12));
}

TEST_CASE("t-interval matches the df=4 quantile") {
  std::vector<double> samples{1, 2, 3, 4, 5};
  ConfidenceInterval ci = mean_confidence_interval(samples, 0.98);
  CHECK(ci.mean == Approx(3.0));
  double half = 3.746947 * std::sqrt(2.5) / std::sqrt(5.0);
  CHECK(ci.hi - ci.mean == Approx(half).margin(1e-4));
  CHECK(ci.mean - ci.lo == Approx(half).margin(1e-4));

  ConfidenceInterval single = mean_confidence_interval(std::vector<double>{0.4});
  CHECK(single.lo == 0.4);
  CHECK(single.hi == 0.4);
}

TEST_CASE("case-study scenario reproduces the published comparison") {
  ComparisonReport report = run_comparison(case_study_scenario());
  CHECK(report.outcome("no-distribution").avg_ci.mean == Approx(0.0).margin(1e-12));
  CHECK(report.outcome("fair-share").avg_ci.mean == Approx(0.0921).margin(1e-12));
  CHECK(report.outcome("demand-proportional").avg_ci.mean ==
        Approx(0.1316).margin(1e-12));
  CHECK(report.outcome("ecoshift").avg_ci.mean == Approx(0.1696).margin(1e-12));

  const PolicyOutcome& eco = report.outcome("ecoshift");
  CHECK(eco.last_allocation.apps[0].caps == CapPair{400, 200});
  CHECK(eco.last_allocation.apps[1].caps == CapPair{300, 300});
  CHECK(eco.mean_app_improvement.at("cfd") == Approx(0.1835).margin(1e-12));
}

TEST_CASE("an all-insensitive scenario yields no improvement anywhere") {
  CapGrid grid({100, 200, 300}, {100, 200, 300});
  ScenarioSpec s{"flat", {}, 400, grid, 3, 5};
  for (int i = 0; i < 3; ++i) {
    ReceiverSpec r;
    r.id = "flat" + std::to_string(i);
    r.baseline = CapPair{100, 100};
    SyntheticSurfaceParams p;  // both axes flat, no noise
    r.source.synthetic = p;
    s.receivers.push_back(r);
  }
  ComparisonReport report = run_comparison(s);
  for (const auto& o : report.outcomes) {
    CHECK(o.avg_ci.mean == Approx(0.0).margin(1e-12));
    CHECK(o.mean_jain == 1.0);
  }
}

TEST_CASE("dp policy dominates the heuristics under perfect information") {
  CapGrid grid({100, 150, 200, 250, 300}, {100, 150, 200, 250, 300});
  for (std::uint32_t seed : {11u, 12u, 13u}) {
    ScenarioSpec s = random_mixed_scenario(grid, 6, 300, seed, 2);
    ComparisonReport report = run_comparison(s);
    double eco = report.outcome("ecoshift").avg_ci.mean;
    CHECK(eco >= report.outcome("fair-share").avg_ci.mean - 1e-9);
    CHECK(eco >= report.outcome("demand-proportional").avg_ci.mean - 1e-9);
    CHECK(eco >= report.outcome("no-distribution").avg_ci.mean - 1e-9);
  }
}

TEST_CASE("run_comparison is deterministic in the scenario seed") {
  CapGrid grid({100, 150, 200, 250}, {100, 150, 200, 250});
  ScenarioSpec s = random_mixed_scenario(grid, 4, 200, 21, 3, 0.05);
  ComparisonReport a = run_comparison(s);
  ComparisonReport b = run_comparison(s);
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    CHECK(a.outcomes[i].repeat_avg_improvements ==
          b.outcomes[i].repeat_avg_improvements);
    CHECK(a.outcomes[i].mean_jain == b.outcomes[i].mean_jain);
  }
}

TEST_CASE("ecoshift mean improvement is non-decreasing in the budget") {
  CapGrid grid({100, 150, 200, 250}, {100, 150, 200, 250});
  double prev = -1.0;
  for (int budget : {0, 100, 200, 300, 450}) {
    ScenarioSpec s = random_mixed_scenario(grid, 5, budget, 77, 1);
    s.budget_w = budget;
    double mean = run_comparison(s).outcome("ecoshift").avg_ci.mean;
    CHECK(mean >= prev - 1e-12);
    prev = mean;
  }
}

TEST_CASE("gap study runs end to end and is thread-count invariant") {
  GapStudyConfig cfg;
  cfg.app_sets = 2;
  cfg.cap_settings = 2;
  cfg.budget_levels = 2;
  cfg.apps_per_scenario = 3;
  cfg.grid = CapGrid({100, 150, 200, 250}, {100, 150, 200, 250});
  cfg.training_apps = 12;
  cfg.seed = 31;

  GapStudyResult serial = gap_study(cfg);
  REQUIRE(serial.rows.size() == 8);
  REQUIRE(serial.sorted_gaps.size() == 8);
  for (const auto& r : serial.rows) {
    CHECK(r.gap_pp >= -1e-9);
    CHECK(r.oracle_avg >= r.dp_true_avg - 1e-12);
    CHECK(r.mean_accuracy > 0.5);
  }
  CHECK(serial.median_pp <= serial.p90_pp + 1e-12);
  CHECK(serial.frac_le_1 <= serial.frac_le_2);
  CHECK(serial.frac_le_2 <= serial.frac_le_3);

  cfg.jobs = 3;
  GapStudyResult parallel = gap_study(cfg);
  REQUIRE(parallel.rows.size() == serial.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(parallel.rows[i].gap_pp == serial.rows[i].gap_pp);
    CHECK(parallel.rows[i].dp_true_avg == serial.rows[i].dp_true_avg);
    CHECK(parallel.rows[i].oracle_avg == serial.rows[i].oracle_avg);
  }
  CHECK(parallel.mean_pp == serial.mean_pp);
}

TEST_CASE("scenario validation catches broken specs") {
  ScenarioSpec s = case_study_scenario();
  SECTION("negative budget") {
    s.budget_w = -1;
    CHECK_THROWS_AS(run_comparison(s), InvalidParamsError);
  }
  SECTION("zero repeats") {
    s.repeats = 0;
    CHECK_THROWS_AS(run_comparison(s), InvalidParamsError);
  }
  SECTION("off-grid baseline") {
    s.receivers[0].baseline = CapPair{301, 200};
    CHECK_THROWS_AS(run_comparison(s), OffGridError);
  }
  SECTION("missing source") {
    s.receivers[0].source = {};
    CHECK_THROWS_AS(run_comparison(s), InvalidParamsError);
  }
}
