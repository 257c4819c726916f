#ifndef ECOSHIFT_OPTIONS_HPP
#define ECOSHIFT_OPTIONS_HPP

#include <map>
#include <string>
#include <vector>

#include "ecoshift/surface.hpp"
#include "ecoshift/types.hpp"

namespace ecoshift {

struct Option {
  double improvement = 0.0;
  CapPair caps;
};

/// Per-application map from extra-power cost e (watts) to the best upgrade at
/// exactly that cost. Always contains the e=0 baseline entry. Entries with
/// zero-or-negative improvement at e>0 and entries dominated by a cheaper,
/// at-least-as-good entry are pruned; neither pruning changes F(b).
struct OptionTable {
  std::string app_id;
  std::map<int, Option> entries;

  const Option& best_entry() const {
    const Option* best = nullptr;
    for (const auto& [e, opt] : entries)
      if (!best || opt.improvement > best->improvement) best = &opt;
    return *best;
  }
};

/// Monotone best-improvement-under-b-watts view of an option table.
struct ImprovementCurve {
  std::string app_id;
  std::vector<double> values;  // index b = 0..B

  double at(int b) const { return values.at(static_cast<std::size_t>(b)); }
};

/// Enumerate grid upgrades for one application and keep, per exact cost e,
/// the cap pair with the highest improvement. Unknown-runtime grid points are
/// simply not candidates. Throws EmptyGridError when no grid point dominates
/// the baseline.
inline OptionTable build_option_table(const Application& app, int budget_w,
                                      const CapGrid& grid) {
  if (budget_w < 0) throw InvalidParamsError("budget must be non-negative");

  OptionTable table;
  table.app_id = app.id;
  table.entries[0] = Option{0.0, app.baseline};

  bool any_dominating = false;
  for (int c : grid.cpu_levels()) {
    if (c < app.baseline.cpu_w) continue;
    for (int g : grid.gpu_levels()) {
      if (g < app.baseline.gpu_w) continue;
      any_dominating = true;
      CapPair caps{c, g};
      int e = (c - app.baseline.cpu_w) + (g - app.baseline.gpu_w);
      if (e > budget_w) continue;
      if (!app.surface.grid().contains(caps) || !app.surface.is_known(caps)) continue;
      double delta = relative_improvement(app, caps);
      auto it = table.entries.find(e);
      if (it == table.entries.end()) {
        if (e > 0 && !(delta > 0.0)) continue;  // harmful/neutral upgrade
        table.entries.emplace(e, Option{delta, caps});
      } else if (delta > it->second.improvement) {
        it->second = Option{delta, caps};
      }
    }
  }
  if (!any_dominating)
    throw EmptyGridError("no grid point dominates baseline of app '" + app.id + "'");

  // Drop entries a strictly cheaper entry already matches or beats.
  double prefix_best = 0.0;
  for (auto it = table.entries.begin(); it != table.entries.end();) {
    if (it->first > 0 && it->second.improvement <= prefix_best) {
      it = table.entries.erase(it);
    } else {
      prefix_best = std::max(prefix_best, it->second.improvement);
      ++it;
    }
  }
  return table;
}

/// F(b) = max improvement over entries with cost <= b, for b = 0..B.
inline ImprovementCurve improvement_curve(const OptionTable& table, int budget_w) {
  if (budget_w < 0) throw InvalidParamsError("budget must be non-negative");
  ImprovementCurve curve;
  curve.app_id = table.app_id;
  curve.values.assign(static_cast<std::size_t>(budget_w) + 1, 0.0);
  double best = 0.0;
  auto it = table.entries.begin();
  for (int b = 0; b <= budget_w; ++b) {
    while (it != table.entries.end() && it->first <= b) {
      best = std::max(best, it->second.improvement);
      ++it;
    }
    curve.values[static_cast<std::size_t>(b)] = best;
  }
  return curve;
}

}  // namespace ecoshift

#endif  // ECOSHIFT_OPTIONS_HPP
