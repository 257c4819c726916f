#ifndef ECOSHIFT_HARNESS_HPP
#define ECOSHIFT_HARNESS_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ecoshift/allocate.hpp"
#include "ecoshift/completion.hpp"
#include "ecoshift/metrics.hpp"
#include "ecoshift/oracle.hpp"
#include "ecoshift/policies.hpp"
#include "ecoshift/synthetic.hpp"
#include "ecoshift/types.hpp"

namespace ecoshift {

namespace detail {

/// splitmix64-style seed derivation, so every (scenario, repeat, app) draw is
/// independent and reproducible.
inline std::uint32_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t x = base ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xbf58476d1ce4e5b9ULL) ^
                    (c * 0x94d049bb133111ebULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<std::uint32_t>(x);
}

}  // namespace detail

/// Where a receiver's true surface comes from: a concrete (file-loaded)
/// surface, or a synthetic generator re-seeded per repeat.
struct SurfaceSource {
  std::optional<PerformanceSurface> surface;
  std::optional<SyntheticSurfaceParams> synthetic;
};

struct ReceiverSpec {
  std::string id;
  SensitivityClass cls = SensitivityClass::Insensitive;
  CapPair baseline;
  SurfaceSource source;
  std::optional<CapPair> uncapped_draw;  // for demand inference
};

struct ScenarioSpec {
  std::string name;
  std::vector<ReceiverSpec> receivers;
  int budget_w = 0;
  CapGrid grid;
  int repeats = 1;
  std::uint32_t seed = 0;

  void validate() const {
    if (budget_w < 0) throw InvalidParamsError("budget must be non-negative");
    if (repeats < 1) throw InvalidParamsError("repeats must be >= 1");
    for (const auto& r : receivers) {
      if (!grid.contains(r.baseline))
        throw OffGridError("baseline of receiver '" + r.id + "' not on grid");
      if (!r.source.surface && !r.source.synthetic)
        throw InvalidParamsError("receiver '" + r.id + "' has no surface source");
    }
  }
};

/// Optional prediction stage for the DP policy. With a model, decisions are
/// made on fold-in predictions from the default sampling plan; noise_sd adds
/// lognormal error at non-sampled points (the knob used to match a target
/// accuracy band). Without either, the DP sees the true surfaces.
struct PredictorConfig {
  const CompletionModel* model = nullptr;
  double noise_sd = 0.0;
};

struct PolicyOutcome {
  std::string policy;
  std::vector<double> repeat_avg_improvements;  // fractions, one per repeat
  ConfidenceInterval avg_ci;                    // 98% t-interval over repeats
  double mean_jain = 0.0;
  std::map<std::string, double> mean_app_improvement;
  AllocationResult last_allocation;  // from the final repeat
};

struct ComparisonReport {
  std::string scenario;
  std::vector<PolicyOutcome> outcomes;

  const PolicyOutcome& outcome(const std::string& policy) const {
    for (const auto& o : outcomes)
      if (o.policy == policy) return o;
    throw InvalidParamsError("no such policy in report: " + policy);
  }
};

namespace detail {

inline Application realize_receiver(const ReceiverSpec& r, const CapGrid& grid,
                                    std::uint32_t seed) {
  if (r.source.surface)
    return Application(r.id, r.baseline, *r.source.surface, r.cls);
  return Application(r.id, r.baseline,
                     generate_surface(*r.source.synthetic, r.baseline, grid, seed),
                     r.cls);
}

/// Re-score an allocation against ground truth, mirroring re-running each app
/// individually under its assigned caps.
inline AllocationResult evaluate_on_true(const AllocationResult& alloc,
                                         std::span<const Application> apps) {
  AllocationResult out = alloc;
  for (auto& a : out.apps) {
    const Application* app = nullptr;
    for (const auto& candidate : apps)
      if (candidate.id == a.app_id) {
        app = &candidate;
        break;
      }
    if (!app) throw AppSetMismatchError("allocation references unknown app " + a.app_id);
    a.predicted_improvement = improvement_floored(*app, a.caps);
  }
  finalize(out);
  return out;
}

inline PerformanceSurface apply_predictor(const Application& app,
                                          const PredictorConfig& pred,
                                          const CapGrid& grid, std::uint32_t seed) {
  std::vector<std::size_t> sampled;
  PerformanceSurface predicted = app.surface;
  if (pred.model) {
    SamplingPlan plan = default_sampling_plan(grid, app.baseline);
    std::vector<std::pair<CapPair, double>> samples;
    for (const auto& p : plan.probes) {
      auto t = app.surface.runtime_at(p);
      if (t) samples.emplace_back(p, *t);
    }
    predicted = predict_surface(*pred.model, samples, grid);
    for (const auto& [caps, t] : samples) sampled.push_back(grid.index_of(caps));
  } else {
    sampled.push_back(grid.index_of(app.baseline));  // baseline is measured
  }
  if (pred.noise_sd > 0.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> runtimes = predicted.runtimes();
    std::vector<std::uint8_t> mask = predicted.known_mask();
    for (std::size_t j = 0; j < runtimes.size(); ++j) {
      double noise = std::exp(pred.noise_sd * z(rng));  // draw even when skipped
      if (!mask[j]) continue;
      if (std::find(sampled.begin(), sampled.end(), j) != sampled.end()) continue;
      runtimes[j] *= noise;
    }
    predicted = PerformanceSurface(grid, std::move(runtimes), std::move(mask));
  }
  return predicted;
}

inline std::vector<DemandSignal> derive_demands(const ScenarioSpec& scenario) {
  std::vector<DemandSignal> demands;
  for (const auto& r : scenario.receivers) {
    // Missing uncapped draw means the app would use whatever it is given:
    // demand up to the top of the grid.
    CapPair uncapped = r.uncapped_draw.value_or(CapPair{
        scenario.grid.cpu_levels().back(), scenario.grid.gpu_levels().back()});
    demands.push_back(DemandSignal{
        r.id, std::max(0, uncapped.cpu_w - r.baseline.cpu_w),
        std::max(0, uncapped.gpu_w - r.baseline.gpu_w)});
  }
  return demands;
}

}  // namespace detail

inline constexpr const char* kPolicyNames[] = {"no-distribution", "fair-share",
                                               "demand-proportional", "ecoshift"};

/// Run every policy over the scenario's repeats. Policy decisions use
/// predicted surfaces when a predictor is configured; reported improvements
/// always come from the true surfaces at the assigned caps.
inline ComparisonReport run_comparison(const ScenarioSpec& scenario,
                                       const PredictorConfig& pred = {}) {
  scenario.validate();
  ComparisonReport report;
  report.scenario = scenario.name;

  std::map<std::string, PolicyOutcome> outcomes;
  std::map<std::string, std::vector<double>> jains;
  std::map<std::string, std::map<std::string, double>> app_sums;

  std::vector<DemandSignal> demands = detail::derive_demands(scenario);

  for (int rep = 0; rep < scenario.repeats; ++rep) {
    std::vector<Application> apps;
    for (std::size_t i = 0; i < scenario.receivers.size(); ++i)
      apps.push_back(detail::realize_receiver(
          scenario.receivers[i], scenario.grid,
          detail::derive_seed(scenario.seed, 1, static_cast<std::uint64_t>(rep), i)));

    std::vector<Application> decision_apps;
    for (std::size_t i = 0; i < apps.size(); ++i) {
      PerformanceSurface s = detail::apply_predictor(
          apps[i], pred, scenario.grid,
          detail::derive_seed(scenario.seed, 2, static_cast<std::uint64_t>(rep), i));
      decision_apps.push_back(
          Application(apps[i].id, apps[i].baseline, std::move(s),
                      apps[i].sensitivity_class));
    }

    std::vector<OptionTable> tables;
    for (const auto& app : decision_apps)
      tables.push_back(build_option_table(app, scenario.budget_w, scenario.grid));

    std::map<std::string, AllocationResult> allocations;
    allocations["no-distribution"] = no_distribution_allocate(apps);
    allocations["fair-share"] =
        fair_share_allocate(apps, scenario.budget_w, scenario.grid);
    allocations["demand-proportional"] =
        demand_proportional_allocate(apps, demands, scenario.budget_w);
    allocations["ecoshift"] = dp_allocate(tables, scenario.budget_w);

    for (const auto& [name, alloc] : allocations) {
      AllocationResult truth = detail::evaluate_on_true(alloc, apps);
      auto& outcome = outcomes[name];
      outcome.policy = name;
      outcome.repeat_avg_improvements.push_back(truth.avg_improvement);
      std::vector<double> per_app;
      for (const auto& a : truth.apps) {
        per_app.push_back(a.predicted_improvement);
        app_sums[name][a.app_id] += a.predicted_improvement;
      }
      jains[name].push_back(per_app.empty() ? 1.0 : jain_index(per_app));
      if (rep == scenario.repeats - 1) outcome.last_allocation = truth;
    }
  }

  for (const char* name : kPolicyNames) {
    PolicyOutcome& o = outcomes[name];
    o.avg_ci = mean_confidence_interval(o.repeat_avg_improvements, 0.98);
    double js = 0.0;
    for (double j : jains[name]) js += j;
    o.mean_jain = js / static_cast<double>(jains[name].size());
    for (const auto& [id, sum] : app_sums[name])
      o.mean_app_improvement[id] = sum / static_cast<double>(scenario.repeats);
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

/// A seeded mixed-class scenario over synthetic receivers, used by the policy
/// studies.
inline ScenarioSpec random_mixed_scenario(const CapGrid& grid, int n_apps, int budget_w,
                                          std::uint32_t seed, int repeats = 1,
                                          double noise_sd = 0.0) {
  std::mt19937 rng(seed);
  static constexpr SensitivityClass kClasses[] = {
      SensitivityClass::Cpu, SensitivityClass::Gpu, SensitivityClass::Both,
      SensitivityClass::Insensitive};
  std::uniform_int_distribution<int> cls_pick(0, 3);
  std::uniform_int_distribution<std::size_t> cpu_base(0, grid.num_cpu() / 2);
  std::uniform_int_distribution<std::size_t> gpu_base(0, grid.num_gpu() / 2);

  ScenarioSpec scenario{"mixed-" + std::to_string(seed), {}, budget_w, grid, repeats,
                        seed};
  for (int i = 0; i < n_apps; ++i) {
    ReceiverSpec r;
    r.id = "app" + std::to_string(i);
    r.cls = kClasses[cls_pick(rng)];
    r.baseline = CapPair{grid.cpu_levels()[cpu_base(rng)], grid.gpu_levels()[gpu_base(rng)]};
    SyntheticSurfaceParams params = random_params_for_class(r.cls, grid, rng);
    params.noise_sd = noise_sd;
    r.source.synthetic = params;
    std::uniform_int_distribution<int> draw_cpu(r.baseline.cpu_w, grid.cpu_levels().back());
    std::uniform_int_distribution<int> draw_gpu(r.baseline.gpu_w, grid.gpu_levels().back());
    r.uncapped_draw = CapPair{draw_cpu(rng), draw_gpu(rng)};
    scenario.receivers.push_back(std::move(r));
  }
  return scenario;
}

struct GapStudyConfig {
  int app_sets = 5;
  int cap_settings = 5;
  int budget_levels = 4;
  int apps_per_scenario = 10;
  CapGrid grid{{100, 150, 200, 250, 300, 350, 400, 450, 500},
               {100, 150, 200, 250, 300, 350, 400, 450, 500}};
  std::vector<CapPair> baselines;  // defaults derived from cap_settings
  std::vector<int> budgets;        // defaults derived from budget_levels
  double pred_noise_sd = 0.065;  // calibrated to ~93 % mean accuracy
  int training_apps = 30;
  CompletionHyperparams hp;
  std::uint32_t seed = 1;
  int jobs = 1;
  double oracle_limit = kDefaultOracleLimit;
};

struct GapStudyRow {
  int app_set = 0;
  CapPair baseline;
  int budget_w = 0;
  double dp_true_avg = 0.0;   // fraction
  double oracle_avg = 0.0;    // fraction
  double gap_pp = 0.0;
  double mean_accuracy = 0.0;
};

struct GapStudyResult {
  std::vector<GapStudyRow> rows;     // in configuration order
  std::vector<double> sorted_gaps;   // percentage points, ascending
  double median_pp = 0.0;
  double mean_pp = 0.0;
  double p90_pp = 0.0;
  double frac_le_1 = 0.0;
  double frac_le_2 = 0.0;
  double frac_le_3 = 0.0;
  double mean_accuracy = 0.0;
};

namespace detail {

inline std::vector<CapPair> default_gap_baselines(const GapStudyConfig& cfg) {
  if (!cfg.baselines.empty()) return cfg.baselines;
  std::vector<CapPair> out;
  const auto& cl = cfg.grid.cpu_levels();
  const auto& gl = cfg.grid.gpu_levels();
  for (int i = 0; i < cfg.cap_settings; ++i) {
    std::size_t ci = std::min<std::size_t>(i, cl.size() - 1);
    std::size_t gi = std::min<std::size_t>(i, gl.size() - 1);
    out.push_back(CapPair{cl[ci], gl[gi]});
  }
  return out;
}

inline std::vector<int> default_gap_budgets(const GapStudyConfig& cfg) {
  if (!cfg.budgets.empty()) return cfg.budgets;
  std::vector<int> out;
  int step = cfg.grid.cpu_levels().size() > 1
                 ? cfg.grid.cpu_levels()[1] - cfg.grid.cpu_levels()[0]
                 : 50;
  for (int i = 0; i < cfg.budget_levels; ++i) out.push_back(step * (2 + i));
  return out;
}

}  // namespace detail

/// The prediction-plus-allocation suboptimality study: trains a completion
/// model on a synthetic population, predicts each scenario app from its
/// sampling plan (plus calibrated noise), lets the DP decide on predictions,
/// and measures the percentage-point gap to the brute-force oracle on the
/// true surfaces.
inline GapStudyResult gap_study(const GapStudyConfig& cfg) {
  if (cfg.app_sets < 1 || cfg.cap_settings < 1 || cfg.budget_levels < 1 ||
      cfg.apps_per_scenario < 1)
    throw InvalidParamsError("gap study dimensions must be positive");
  std::vector<CapPair> baselines = detail::default_gap_baselines(cfg);
  std::vector<int> budgets = detail::default_gap_budgets(cfg);

  // Training population for the predictor: fully observed synthetic surfaces.
  std::mt19937 train_rng(detail::derive_seed(cfg.seed, 100));
  static constexpr SensitivityClass kClasses[] = {
      SensitivityClass::Cpu, SensitivityClass::Gpu, SensitivityClass::Both,
      SensitivityClass::Insensitive};
  CapPair train_base{cfg.grid.cpu_levels().front(), cfg.grid.gpu_levels().front()};
  std::vector<PerformanceSurface> training;
  for (int i = 0; i < cfg.training_apps; ++i) {
    SyntheticSurfaceParams p =
        random_params_for_class(kClasses[i % 4], cfg.grid, train_rng);
    training.push_back(generate_surface(p, train_base, cfg.grid,
                                        detail::derive_seed(cfg.seed, 101, i)));
  }
  CompletionHyperparams hp = cfg.hp;
  hp.seed = detail::derive_seed(cfg.seed, 102);
  CompletionModel model = fit(training, hp);

  // Draw each app set once; it is reused across cap settings and budgets.
  std::vector<std::vector<SyntheticSurfaceParams>> sets(cfg.app_sets);
  for (int s = 0; s < cfg.app_sets; ++s) {
    std::mt19937 rng(detail::derive_seed(cfg.seed, 200, s));
    for (int i = 0; i < cfg.apps_per_scenario; ++i)
      sets[s].push_back(
          random_params_for_class(kClasses[rng() % 4], cfg.grid, rng));
  }

  struct Job {
    int set, cap, bud;
  };
  std::vector<Job> jobs_list;
  for (int s = 0; s < cfg.app_sets; ++s)
    for (int c = 0; c < static_cast<int>(baselines.size()); ++c)
      for (int b = 0; b < static_cast<int>(budgets.size()); ++b)
        jobs_list.push_back({s, c, b});

  std::vector<GapStudyRow> rows(jobs_list.size());
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run_job = [&](std::size_t idx) {
    const Job& job = jobs_list[idx];
    CapPair baseline = baselines[static_cast<std::size_t>(job.cap)];
    int budget = budgets[static_cast<std::size_t>(job.bud)];

    std::vector<Application> true_apps, pred_apps;
    double acc_sum = 0.0;
    for (int i = 0; i < cfg.apps_per_scenario; ++i) {
      std::string id = "app" + std::to_string(i);
      PerformanceSurface truth = generate_surface(
          sets[job.set][static_cast<std::size_t>(i)], baseline, cfg.grid,
          detail::derive_seed(cfg.seed, 300, job.set, (job.cap << 8) | i));
      Application app(id, baseline, truth);
      PredictorConfig pred{&model, cfg.pred_noise_sd};
      PerformanceSurface predicted = detail::apply_predictor(
          app, pred, cfg.grid,
          detail::derive_seed(cfg.seed, 301, job.set,
                              (static_cast<std::uint64_t>(job.cap) << 16) |
                                  (static_cast<std::uint64_t>(job.bud) << 8) | i));
      acc_sum += prediction_accuracy(truth, predicted, baseline);
      pred_apps.push_back(Application(id, baseline, std::move(predicted)));
      true_apps.push_back(std::move(app));
    }

    std::vector<OptionTable> pred_tables, true_tables;
    for (const auto& a : pred_apps)
      pred_tables.push_back(build_option_table(a, budget, cfg.grid));
    for (const auto& a : true_apps)
      true_tables.push_back(build_option_table(a, budget, cfg.grid));

    AllocationResult dp = dp_allocate(pred_tables, budget);
    AllocationResult dp_true = detail::evaluate_on_true(dp, true_apps);
    AllocationResult oracle =
        brute_force_allocate(true_tables, budget, cfg.oracle_limit);

    GapStudyRow row;
    row.app_set = job.set;
    row.baseline = baseline;
    row.budget_w = budget;
    row.dp_true_avg = dp_true.avg_improvement;
    row.oracle_avg = oracle.avg_improvement;
    row.gap_pp = oracle_gap(dp_true, oracle);
    row.mean_accuracy = acc_sum / static_cast<double>(cfg.apps_per_scenario);
    rows[idx] = row;
  };

  int n_threads = std::max(1, cfg.jobs);
  if (n_threads == 1) {
    for (std::size_t i = 0; i < jobs_list.size(); ++i) run_job(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < jobs_list.size();
             i += static_cast<std::size_t>(n_threads)) {
          try {
            run_job(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  GapStudyResult result;
  result.rows = std::move(rows);
  for (const auto& r : result.rows) {
    result.sorted_gaps.push_back(r.gap_pp);
    result.mean_pp += r.gap_pp;
    result.mean_accuracy += r.mean_accuracy;
  }
  std::sort(result.sorted_gaps.begin(), result.sorted_gaps.end());
  double n = static_cast<double>(result.sorted_gaps.size());
  result.mean_pp /= n;
  result.mean_accuracy /= n;
  auto quantile = [&](double q) {
    double pos = q * (n - 1.0);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min<std::size_t>(lo + 1, result.sorted_gaps.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return result.sorted_gaps[lo] * (1.0 - frac) + result.sorted_gaps[hi] * frac;
  };
  result.median_pp = quantile(0.5);
  result.p90_pp = quantile(0.9);
  auto frac_le = [&](double x) {
    std::size_t c = 0;
    for (double g : result.sorted_gaps) c += g <= x;
    return static_cast<double>(c) / n;
  };
  result.frac_le_1 = frac_le(1.0);
  result.frac_le_2 = frac_le(2.0);
  result.frac_le_3 = frac_le(3.0);
  return result;
}

}  // namespace ecoshift

#endif  // ECOSHIFT_HARNESS_HPP
