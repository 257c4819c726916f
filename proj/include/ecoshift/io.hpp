#ifndef ECOSHIFT_IO_HPP
#define ECOSHIFT_IO_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecoshift/allocate.hpp"
#include "ecoshift/completion.hpp"
#include "ecoshift/harness.hpp"
#include "ecoshift/surface.hpp"
#include "ecoshift/synthetic.hpp"
#include "ecoshift/types.hpp"

namespace ecoshift {

using json = nlohmann::json;

/// An application record as stored on disk: the surface document plus the
/// optional demand-inference field.
struct ApplicationRecord {
  Application app;
  std::optional<CapPair> uncapped_draw;
};

namespace io_detail {

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in " + path + ": " + e.what());
  }
  return doc;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write file: " + path);
  out << content;
  if (!out) throw InputError("write failed: " + path);
}

template <typename T>
T require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("missing field: ") + key);
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace io_detail

inline json surface_to_json(const std::string& id, const CapPair& baseline,
                            const PerformanceSurface& surface,
                            SensitivityClass cls,
                            std::optional<CapPair> uncapped = std::nullopt) {
  const CapGrid& grid = surface.grid();
  json runtime = json::array();
  for (std::size_t ci = 0; ci < grid.num_cpu(); ++ci) {
    json row = json::array();
    for (std::size_t gi = 0; gi < grid.num_gpu(); ++gi) {
      std::size_t idx = ci * grid.num_gpu() + gi;
      if (surface.known_mask()[idx])
        row.push_back(surface.runtimes()[idx]);
      else
        row.push_back(nullptr);
    }
    runtime.push_back(std::move(row));
  }
  json doc{{"id", id},
           {"baseline_cpu_w", baseline.cpu_w},
           {"baseline_gpu_w", baseline.gpu_w},
           {"cpu_levels", grid.cpu_levels()},
           {"gpu_levels", grid.gpu_levels()},
           {"runtime_s", std::move(runtime)},
           {"sensitivity_class", to_string(cls)}};
  if (uncapped) {
    doc["uncapped_cpu_w"] = uncapped->cpu_w;
    doc["uncapped_gpu_w"] = uncapped->gpu_w;
  }
  return doc;
}

inline ApplicationRecord application_from_json(const json& doc) {
  auto id = io_detail::require<std::string>(doc, "id");
  CapPair baseline{io_detail::require<int>(doc, "baseline_cpu_w"),
                   io_detail::require<int>(doc, "baseline_gpu_w")};
  CapGrid grid(io_detail::require<std::vector<int>>(doc, "cpu_levels"),
               io_detail::require<std::vector<int>>(doc, "gpu_levels"));
  const json& matrix = doc.contains("runtime_s") ? doc.at("runtime_s") : json();
  if (!matrix.is_array() || matrix.size() != grid.num_cpu())
    throw InputError("runtime_s must be a " + std::to_string(grid.num_cpu()) +
                     "-row matrix for app '" + id + "'");
  std::vector<double> runtimes(grid.num_points(), 0.0);
  std::vector<std::uint8_t> known(grid.num_points(), 0);
  for (std::size_t ci = 0; ci < grid.num_cpu(); ++ci) {
    const json& row = matrix.at(ci);
    if (!row.is_array() || row.size() != grid.num_gpu())
      throw InputError("runtime_s row has wrong width for app '" + id + "'");
    for (std::size_t gi = 0; gi < grid.num_gpu(); ++gi) {
      const json& cell = row.at(gi);
      if (cell.is_null()) continue;
      if (!cell.is_number())
        throw InputError("runtime_s entries must be numbers or null");
      std::size_t idx = ci * grid.num_gpu() + gi;
      runtimes[idx] = cell.get<double>();
      known[idx] = 1;
    }
  }
  SensitivityClass cls = SensitivityClass::Insensitive;
  if (doc.contains("sensitivity_class"))
    cls = sensitivity_class_from_string(doc.at("sensitivity_class").get<std::string>());

  ApplicationRecord rec{
      Application(id, baseline,
                  PerformanceSurface(std::move(grid), std::move(runtimes),
                                     std::move(known)),
                  cls),
      std::nullopt};
  if (doc.contains("uncapped_cpu_w") || doc.contains("uncapped_gpu_w"))
    rec.uncapped_draw = CapPair{io_detail::require<int>(doc, "uncapped_cpu_w"),
                                io_detail::require<int>(doc, "uncapped_gpu_w")};
  return rec;
}

/// Surface files hold a JSON array of application documents.
inline std::vector<ApplicationRecord> load_applications(const std::string& path) {
  json doc = io_detail::load_json_file(path);
  if (!doc.is_array()) throw InputError("surface file must be a JSON array: " + path);
  std::vector<ApplicationRecord> records;
  for (const auto& entry : doc) {
    try {
      records.push_back(application_from_json(entry));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw InputError(std::string("bad application document: ") + e.what());
    }
  }
  return records;
}

inline void save_applications(const std::string& path,
                              const std::vector<ApplicationRecord>& records) {
  json doc = json::array();
  for (const auto& r : records)
    doc.push_back(surface_to_json(r.app.id, r.app.baseline, r.app.surface,
                                  r.app.sensitivity_class, r.uncapped_draw));
  io_detail::write_file(path, doc.dump(2) + "\n");
}

inline json allocation_to_json(const AllocationResult& result) {
  json apps = json::array();
  for (const auto& a : result.apps)
    apps.push_back({{"app_id", a.app_id},
                    {"cpu_w", a.caps.cpu_w},
                    {"gpu_w", a.caps.gpu_w},
                    {"extra_power_w", a.extra_power_w},
                    {"improvement", a.predicted_improvement}});
  return json{{"apps", std::move(apps)},
              {"total_power_used_w", result.total_power_used_w},
              {"total_improvement", result.total_improvement},
              {"avg_improvement", result.avg_improvement},
              {"avg_improvement_pct", result.avg_improvement * 100.0}};
}

inline json synthetic_params_to_json(const SyntheticSurfaceParams& p) {
  return json{{"class", to_string(p.cls)},
              {"cpu", {{"max_speedup", p.cpu.max_speedup},
                       {"curvature", p.cpu.curvature},
                       {"saturation_w", p.cpu.saturation_w}}},
              {"gpu", {{"max_speedup", p.gpu.max_speedup},
                       {"curvature", p.gpu.curvature},
                       {"saturation_w", p.gpu.saturation_w}}},
              {"noise_sd", p.noise_sd},
              {"baseline_runtime_s", p.baseline_runtime_s}};
}

inline SyntheticSurfaceParams synthetic_params_from_json(const json& doc) {
  SyntheticSurfaceParams p;
  p.cls = sensitivity_class_from_string(io_detail::require<std::string>(doc, "class"));
  auto axis = [&](const char* key) {
    const json& a = doc.at(key);
    return AxisResponse{io_detail::require<double>(a, "max_speedup"),
                        io_detail::require<double>(a, "curvature"),
                        io_detail::require<int>(a, "saturation_w")};
  };
  if (!doc.contains("cpu") || !doc.contains("gpu"))
    throw InputError("synthetic params need cpu and gpu axes");
  p.cpu = axis("cpu");
  p.gpu = axis("gpu");
  if (doc.contains("noise_sd")) p.noise_sd = doc.at("noise_sd").get<double>();
  if (doc.contains("baseline_runtime_s"))
    p.baseline_runtime_s = doc.at("baseline_runtime_s").get<double>();
  return p;
}

/// Scenario config mirroring ScenarioSpec. Receivers reference either a
/// surface file (by app id) or synthetic generator parameters.
inline ScenarioSpec load_scenario(const std::string& path) {
  json doc = io_detail::load_json_file(path);
  ScenarioSpec scenario{
      doc.value("name", std::string("scenario")),
      {},
      io_detail::require<int>(doc, "budget_w"),
      CapGrid(io_detail::require<std::vector<int>>(doc.at("grid"), "cpu_levels"),
              io_detail::require<std::vector<int>>(doc.at("grid"), "gpu_levels")),
      doc.value("repeats", 1),
      doc.value("seed", 0u)};

  if (!doc.contains("receivers") || !doc.at("receivers").is_array())
    throw InputError("scenario needs a receivers array");
  for (const auto& rj : doc.at("receivers")) {
    ReceiverSpec r;
    r.id = io_detail::require<std::string>(rj, "id");
    if (rj.contains("class"))
      r.cls = sensitivity_class_from_string(rj.at("class").get<std::string>());
    r.baseline = CapPair{io_detail::require<int>(rj, "baseline_cpu_w"),
                         io_detail::require<int>(rj, "baseline_gpu_w")};
    const json& src = rj.contains("source") ? rj.at("source") : json();
    std::string type = io_detail::require<std::string>(src, "type");
    if (type == "file") {
      auto records = load_applications(io_detail::require<std::string>(src, "path"));
      bool found = false;
      for (auto& rec : records)
        if (rec.app.id == r.id) {
          r.source.surface = rec.app.surface;
          if (!rj.contains("uncapped_cpu_w")) r.uncapped_draw = rec.uncapped_draw;
          found = true;
          break;
        }
      if (!found)
        throw InputError("app '" + r.id + "' not found in referenced surface file");
    } else if (type == "synthetic") {
      r.source.synthetic = synthetic_params_from_json(src);
    } else {
      throw InputError("unknown source type: " + type);
    }
    if (rj.contains("uncapped_cpu_w") || rj.contains("uncapped_gpu_w"))
      r.uncapped_draw = CapPair{io_detail::require<int>(rj, "uncapped_cpu_w"),
                                io_detail::require<int>(rj, "uncapped_gpu_w")};
    scenario.receivers.push_back(std::move(r));
  }
  scenario.validate();
  return scenario;
}

inline std::string comparison_report_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "scenario,policy,mean_avg_improvement_pct,ci98_lo_pct,ci98_hi_pct,jain_mean\n";
  for (const auto& o : report.outcomes) {
    out << report.scenario << ',' << o.policy << ','
        << o.avg_ci.mean * 100.0 << ',' << o.avg_ci.lo * 100.0 << ','
        << o.avg_ci.hi * 100.0 << ',' << o.mean_jain << '\n';
  }
  return out.str();
}

inline json comparison_report_json(const ComparisonReport& report) {
  json outcomes = json::array();
  for (const auto& o : report.outcomes) {
    json per_app = json::object();
    for (const auto& [id, imp] : o.mean_app_improvement) per_app[id] = imp;
    outcomes.push_back({{"policy", o.policy},
                        {"mean_avg_improvement_pct", o.avg_ci.mean * 100.0},
                        {"ci98_lo_pct", o.avg_ci.lo * 100.0},
                        {"ci98_hi_pct", o.avg_ci.hi * 100.0},
                        {"jain_mean", o.mean_jain},
                        {"mean_app_improvement", std::move(per_app)},
                        {"last_allocation", allocation_to_json(o.last_allocation)}});
  }
  return json{{"scenario", report.scenario}, {"outcomes", std::move(outcomes)}};
}

inline std::string gap_cdf_csv(const GapStudyResult& result) {
  std::ostringstream out;
  out << "gap_pp,cumulative_fraction\n";
  double n = static_cast<double>(result.sorted_gaps.size());
  for (std::size_t i = 0; i < result.sorted_gaps.size(); ++i)
    out << result.sorted_gaps[i] << ',' << static_cast<double>(i + 1) / n << '\n';
  return out.str();
}

inline json gap_summary_json(const GapStudyResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"app_set", r.app_set},
                    {"baseline_cpu_w", r.baseline.cpu_w},
                    {"baseline_gpu_w", r.baseline.gpu_w},
                    {"budget_w", r.budget_w},
                    {"dp_true_avg_pct", r.dp_true_avg * 100.0},
                    {"oracle_avg_pct", r.oracle_avg * 100.0},
                    {"gap_pp", r.gap_pp},
                    {"mean_accuracy", r.mean_accuracy}});
  return json{{"median_pp", result.median_pp},
              {"mean_pp", result.mean_pp},
              {"p90_pp", result.p90_pp},
              {"frac_lt_1pp", result.frac_le_1},
              {"frac_lt_2pp", result.frac_le_2},
              {"frac_lt_3pp", result.frac_le_3},
              {"mean_accuracy", result.mean_accuracy},
              {"configurations", std::move(rows)}};
}

inline constexpr int kModelFormatVersion = 1;

inline json model_to_json(const CompletionModel& m) {
  return json{{"format", "ecoshift-model"},
              {"version", kModelFormatVersion},
              {"cpu_levels", m.grid.cpu_levels()},
              {"gpu_levels", m.grid.gpu_levels()},
              {"latent_dim", m.latent_dim},
              {"l2", m.l2},
              {"global_bias", m.global_bias},
              {"config_bias", m.config_bias},
              {"config_factors", m.config_factors},
              {"app_bias", m.app_bias},
              {"app_factors", m.app_factors}};
}

inline CompletionModel model_from_json(const json& doc) {
  if (doc.value("format", std::string()) != "ecoshift-model")
    throw InputError("not an ecoshift model checkpoint");
  if (doc.value("version", 0) != kModelFormatVersion)
    throw InputError("unsupported model checkpoint version");
  CompletionModel m{
      CapGrid(io_detail::require<std::vector<int>>(doc, "cpu_levels"),
              io_detail::require<std::vector<int>>(doc, "gpu_levels")),
      io_detail::require<int>(doc, "latent_dim"),
      io_detail::require<double>(doc, "l2"),
      io_detail::require<double>(doc, "global_bias"),
      io_detail::require<std::vector<double>>(doc, "config_bias"),
      io_detail::require<std::vector<double>>(doc, "config_factors"),
      io_detail::require<std::vector<double>>(doc, "app_bias"),
      io_detail::require<std::vector<double>>(doc, "app_factors"),
      {}};
  std::size_t nc = m.grid.num_points();
  std::size_t d = static_cast<std::size_t>(m.latent_dim);
  if (m.latent_dim < 1 || m.config_bias.size() != nc ||
      m.config_factors.size() != nc * d ||
      m.app_factors.size() != m.app_bias.size() * d)
    throw InputError("inconsistent model checkpoint dimensions");
  return m;
}

inline void save_model(const std::string& path, const CompletionModel& m) {
  io_detail::write_file(path, model_to_json(m).dump(2) + "\n");
}

inline CompletionModel load_model(const std::string& path) {
  return model_from_json(io_detail::load_json_file(path));
}

}  // namespace ecoshift

#endif  // ECOSHIFT_IO_HPP
