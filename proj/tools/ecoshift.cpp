// Command-line front end for the reclaimed-power distribution pipeline:
// synthetic surface generation, single allocations, policy comparisons,
// gap-to-oracle studies, and predictor fitting.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecoshift/io.hpp"

namespace fs = std::filesystem;
using namespace ecoshift;

namespace {

// Exit codes: 0 success, 1 input error, 2 oracle too large, 3 internal.
constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitTooLarge = 2;
constexpr int kExitInternal = 3;

CapGrid make_uniform_grid(int min_w, int max_w, int step_w) {
  if (step_w <= 0 || min_w <= 0 || max_w < min_w)
    throw InputError("grid requires 0 < min <= max and step > 0");
  std::vector<int> levels;
  for (int w = min_w; w <= max_w; w += step_w) levels.push_back(w);
  return CapGrid(levels, levels);
}

const CapGrid& common_grid(const std::vector<ApplicationRecord>& records) {
  if (records.empty()) throw InputError("surface file holds no applications");
  const CapGrid& grid = records.front().app.surface.grid();
  for (const auto& r : records)
    if (!(r.app.surface.grid() == grid))
      throw GridMismatchError("applications must share one cap grid");
  return grid;
}

std::vector<DemandSignal> demands_from_records(
    const std::vector<ApplicationRecord>& records) {
  std::vector<DemandSignal> demands;
  for (const auto& r : records) {
    const CapGrid& grid = r.app.surface.grid();
    CapPair uncapped = r.uncapped_draw.value_or(
        CapPair{grid.cpu_levels().back(), grid.gpu_levels().back()});
    demands.push_back(DemandSignal{r.app.id,
                                   std::max(0, uncapped.cpu_w - r.app.baseline.cpu_w),
                                   std::max(0, uncapped.gpu_w - r.app.baseline.gpu_w)});
  }
  return demands;
}

int cmd_generate(const std::string& cls_name, const std::string& id, int base_cpu,
                 int base_gpu, int grid_min, int grid_max, int grid_step,
                 double cpu_speedup, double gpu_speedup, double cpu_curv,
                 double gpu_curv, double noise, double runtime, unsigned seed,
                 const std::string& out) {
  SensitivityClass cls = sensitivity_class_from_string(cls_name);
  CapGrid grid = make_uniform_grid(grid_min, grid_max, grid_step);

  bool cpu_sensitive = cls == SensitivityClass::Cpu || cls == SensitivityClass::Both;
  bool gpu_sensitive = cls == SensitivityClass::Gpu || cls == SensitivityClass::Both;
  SyntheticSurfaceParams params;
  params.cls = cls;
  params.cpu = AxisResponse{cpu_speedup >= 0 ? cpu_speedup : (cpu_sensitive ? 0.25 : 0.01),
                            cpu_curv, grid.cpu_levels().back()};
  params.gpu = AxisResponse{gpu_speedup >= 0 ? gpu_speedup : (gpu_sensitive ? 0.25 : 0.01),
                            gpu_curv, grid.gpu_levels().back()};
  params.noise_sd = noise;
  params.baseline_runtime_s = runtime;

  CapPair baseline{base_cpu, base_gpu};
  PerformanceSurface surface = generate_surface(params, baseline, grid, seed);
  std::vector<ApplicationRecord> records;
  records.push_back({Application(id, baseline, std::move(surface), cls), std::nullopt});
  save_applications(out, records);
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

int cmd_allocate(const std::string& surfaces_path, int budget, const std::string& policy,
                 const std::string& out, double oracle_limit) {
  auto records = load_applications(surfaces_path);
  const CapGrid& grid = common_grid(records);
  std::vector<Application> apps;
  for (const auto& r : records) apps.push_back(r.app);

  AllocationResult result;
  if (policy == "ecoshift" || policy == "oracle") {
    std::vector<OptionTable> tables;
    for (const auto& app : apps) tables.push_back(build_option_table(app, budget, grid));
    result = policy == "ecoshift" ? dp_allocate(tables, budget)
                                  : brute_force_allocate(tables, budget, oracle_limit);
  } else if (policy == "fair-share") {
    result = fair_share_allocate(apps, budget, grid);
  } else if (policy == "demand-proportional") {
    result = demand_proportional_allocate(apps, demands_from_records(records), budget);
  } else {
    throw InputError("unknown policy: " + policy);
  }

  json doc = allocation_to_json(result);
  doc["policy"] = policy;
  doc["budget_w"] = budget;
  io_detail::write_file(out, doc.dump(2) + "\n");
  std::cout << policy << ": avg improvement "
            << result.avg_improvement * 100.0 << " % using "
            << result.total_power_used_w << " W\n";
  return kExitOk;
}

int cmd_fit_predictor(const std::string& surfaces_path, const std::string& out,
                      int latent_dim, double l2, int epochs, unsigned seed) {
  auto records = load_applications(surfaces_path);
  common_grid(records);
  std::vector<PerformanceSurface> surfaces;
  for (const auto& r : records) surfaces.push_back(r.app.surface);
  CompletionHyperparams hp;
  hp.latent_dim = latent_dim;
  hp.l2 = l2;
  hp.max_epochs = epochs;
  hp.seed = seed;
  CompletionModel model = fit(surfaces, hp);
  save_model(out, model);
  std::cout << "fitted " << surfaces.size() << " surfaces, final loss "
            << model.loss_history.back() << ", wrote " << out << "\n";
  return kExitOk;
}

int cmd_compare(const std::string& scenario_path, const std::string& out_dir,
                const std::string& model_path, double pred_noise, int seed_override) {
  ScenarioSpec scenario = load_scenario(scenario_path);
  if (seed_override >= 0) scenario.seed = static_cast<std::uint32_t>(seed_override);

  std::optional<CompletionModel> model;
  PredictorConfig pred;
  if (!model_path.empty()) {
    model = load_model(model_path);
    pred.model = &*model;
  }
  pred.noise_sd = pred_noise;

  ComparisonReport report = run_comparison(scenario, pred);
  fs::create_directories(out_dir);
  io_detail::write_file((fs::path(out_dir) / "report.csv").string(),
                        comparison_report_csv(report));
  io_detail::write_file((fs::path(out_dir) / "report.json").string(),
                        comparison_report_json(report).dump(2) + "\n");
  for (const auto& o : report.outcomes)
    std::cout << o.policy << ": " << o.avg_ci.mean * 100.0 << " %\n";
  return kExitOk;
}

int cmd_gap_study(int sets, int cap_settings, int budget_levels, int apps,
                  double pred_noise, unsigned seed, int jobs, int grid_min,
                  int grid_max, int grid_step, const std::vector<int>& budgets,
                  int latent_dim, int training_apps, double oracle_limit,
                  const std::string& out_dir) {
  GapStudyConfig cfg;
  cfg.app_sets = sets;
  cfg.cap_settings = cap_settings;
  cfg.budget_levels = budget_levels;
  cfg.apps_per_scenario = apps;
  cfg.grid = make_uniform_grid(grid_min, grid_max, grid_step);
  cfg.budgets = budgets;
  cfg.pred_noise_sd = pred_noise;
  cfg.seed = seed;
  cfg.jobs = jobs;
  cfg.hp.latent_dim = latent_dim;
  cfg.training_apps = training_apps;
  cfg.oracle_limit = oracle_limit;

  GapStudyResult result = gap_study(cfg);
  fs::create_directories(out_dir);
  io_detail::write_file((fs::path(out_dir) / "gap_cdf.csv").string(),
                        gap_cdf_csv(result));
  io_detail::write_file((fs::path(out_dir) / "gap_summary.json").string(),
                        gap_summary_json(result).dump(2) + "\n");
  std::cout << result.sorted_gaps.size() << " configurations: median "
            << result.median_pp << " pp, mean " << result.mean_pp << " pp, "
            << result.frac_le_3 * 100.0 << " % below 3 pp (mean accuracy "
            << result.mean_accuracy * 100.0 << " %)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"EcoShift reclaimed-power distribution toolkit"};
  cli.require_subcommand(1);

  // generate
  auto* gen = cli.add_subcommand("generate", "Write a synthetic application surface");
  std::string gen_class = "cpu", gen_id = "app0", gen_out = "surface.json";
  int gen_bcpu = 300, gen_bgpu = 200, gen_min = 100, gen_max = 500, gen_step = 50;
  double gen_cs = -1, gen_gs = -1, gen_cc = 0.01, gen_gc = 0.01, gen_noise = 0.0,
         gen_runtime = 100.0;
  unsigned gen_seed = 0;
  gen->add_option("--class", gen_class, "sensitivity class: cpu|gpu|both|insensitive");
  gen->add_option("--id", gen_id, "application id");
  gen->add_option("--baseline-cpu", gen_bcpu, "baseline CPU cap (W)");
  gen->add_option("--baseline-gpu", gen_bgpu, "baseline GPU cap (W)");
  gen->add_option("--grid-min", gen_min, "lowest grid level (W)");
  gen->add_option("--grid-max", gen_max, "highest grid level (W)");
  gen->add_option("--grid-step", gen_step, "grid step (W)");
  gen->add_option("--cpu-max-speedup", gen_cs, "CPU axis max speedup (default per class)");
  gen->add_option("--gpu-max-speedup", gen_gs, "GPU axis max speedup (default per class)");
  gen->add_option("--cpu-curvature", gen_cc, "CPU axis curvature");
  gen->add_option("--gpu-curvature", gen_gc, "GPU axis curvature");
  gen->add_option("--noise", gen_noise, "lognormal runtime noise sd");
  gen->add_option("--runtime", gen_runtime, "baseline runtime (s)");
  gen->add_option("--seed", gen_seed, "noise seed");
  gen->add_option("--out", gen_out, "output surface file");

  // allocate
  auto* alloc = cli.add_subcommand("allocate", "Allocate a reclaimed budget once");
  std::string al_surfaces, al_policy = "ecoshift", al_out = "allocation.json";
  int al_budget = 0;
  double al_limit = kDefaultOracleLimit;
  alloc->add_option("--surfaces", al_surfaces, "surface file")->required();
  alloc->add_option("--budget", al_budget, "reclaimed budget (W)")->required();
  alloc->add_option("--policy", al_policy,
                    "ecoshift|fair-share|demand-proportional|oracle");
  alloc->add_option("--oracle-limit", al_limit, "oracle combination limit");
  alloc->add_option("--out", al_out, "output report file");

  // fit-predictor
  auto* fitp = cli.add_subcommand("fit-predictor", "Fit the completion model");
  std::string fp_surfaces, fp_out = "model.json";
  int fp_dim = 8, fp_epochs = 2000;
  double fp_l2 = 1e-3;
  unsigned fp_seed = 42;
  fitp->add_option("--surfaces", fp_surfaces, "training surface file")->required();
  fitp->add_option("--out", fp_out, "model checkpoint file");
  fitp->add_option("--latent-dim", fp_dim, "latent dimension");
  fitp->add_option("--l2", fp_l2, "factor l2 penalty");
  fitp->add_option("--epochs", fp_epochs, "max epochs");
  fitp->add_option("--seed", fp_seed, "init seed");

  // compare
  auto* cmp = cli.add_subcommand("compare", "Run all policies over a scenario");
  std::string cp_scenario, cp_out = "compare-out", cp_model;
  double cp_noise = 0.0;
  int cp_seed = -1;
  cmp->add_option("--scenario", cp_scenario, "scenario config file")->required();
  cmp->add_option("--out", cp_out, "output directory");
  cmp->add_option("--model", cp_model, "completion model checkpoint (optional)");
  cmp->add_option("--pred-noise", cp_noise, "prediction noise sd");
  cmp->add_option("--seed", cp_seed, "override scenario seed");

  // gap-study
  auto* gap = cli.add_subcommand("gap-study", "Gap-to-oracle study");
  int gs_sets = 5, gs_caps = 5, gs_buds = 4, gs_apps = 10, gs_jobs = 1;
  int gs_min = 100, gs_max = 500, gs_step = 50, gs_dim = 8, gs_train = 30;
  double gs_noise = 0.065, gs_limit = kDefaultOracleLimit;
  unsigned gs_seed = 1;
  std::vector<int> gs_budgets;
  std::string gs_out = "gap-out";
  gap->add_option("--sets", gs_sets, "application set draws");
  gap->add_option("--cap-settings", gs_caps, "initial cap settings");
  gap->add_option("--budget-levels", gs_buds, "budget levels");
  gap->add_option("--apps", gs_apps, "apps per scenario");
  gap->add_option("--budgets", gs_budgets, "explicit budget list (W)");
  gap->add_option("--pred-noise", gs_noise, "prediction noise sd");
  gap->add_option("--seed", gs_seed, "study seed");
  gap->add_option("--jobs", gs_jobs, "worker threads");
  gap->add_option("--grid-min", gs_min, "lowest grid level (W)");
  gap->add_option("--grid-max", gs_max, "highest grid level (W)");
  gap->add_option("--grid-step", gs_step, "grid step (W)");
  gap->add_option("--latent-dim", gs_dim, "predictor latent dimension");
  gap->add_option("--training-apps", gs_train, "predictor training population");
  gap->add_option("--oracle-limit", gs_limit, "oracle combination limit");
  gap->add_option("--out", gs_out, "output directory");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = cli.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (gen->parsed())
      return cmd_generate(gen_class, gen_id, gen_bcpu, gen_bgpu, gen_min, gen_max,
                          gen_step, gen_cs, gen_gs, gen_cc, gen_gc, gen_noise,
                          gen_runtime, gen_seed, gen_out);
    if (alloc->parsed())
      return cmd_allocate(al_surfaces, al_budget, al_policy, al_out, al_limit);
    if (fitp->parsed())
      return cmd_fit_predictor(fp_surfaces, fp_out, fp_dim, fp_l2, fp_epochs, fp_seed);
    if (cmp->parsed())
      return cmd_compare(cp_scenario, cp_out, cp_model, cp_noise, cp_seed);
    if (gap->parsed())
      return cmd_gap_study(gs_sets, gs_caps, gs_buds, gs_apps, gs_noise, gs_seed,
                           gs_jobs, gs_min, gs_max, gs_step, gs_budgets, gs_dim,
                           gs_train, gs_limit, gs_out);
  } catch (const TooLargeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTooLarge;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInput;
}
