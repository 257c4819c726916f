#ifndef ECOSHIFT_ALLOCATE_HPP
#define ECOSHIFT_ALLOCATE_HPP

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ecoshift/options.hpp"
#include "ecoshift/types.hpp"

namespace ecoshift {

struct AppAllocation {
  std::string app_id;
  CapPair caps;
  int extra_power_w = 0;
  double predicted_improvement = 0.0;
};

struct AllocationResult {
  std::vector<AppAllocation> apps;
  int total_power_used_w = 0;
  double total_improvement = 0.0;
  double avg_improvement = 0.0;  // total / N, 0 for empty instance
  // Number of DP value states held simultaneously at the peak (instrumentation;
  // 0 for non-DP policies).
  std::size_t peak_value_states = 0;
};

namespace detail {

inline void check_distinct_ids(std::span<const OptionTable> tables) {
  std::set<std::string> seen;
  for (const auto& t : tables)
    if (!seen.insert(t.app_id).second)
      throw DuplicateAppError("duplicate app id: " + t.app_id);
}

inline void finalize(AllocationResult& r) {
  r.total_power_used_w = 0;
  r.total_improvement = 0.0;
  for (const auto& a : r.apps) {
    r.total_power_used_w += a.extra_power_w;
    r.total_improvement += a.predicted_improvement;
  }
  r.avg_improvement =
      r.apps.empty() ? 0.0 : r.total_improvement / static_cast<double>(r.apps.size());
}

struct DpCell {
  double total = 0.0;
  int chosen_e = 0;  // cost chosen for the app at this layer
  int prev_u = 0;    // used power before this layer
};

// Sum-maximizing update with the deterministic tie rule: higher total wins;
// on exactly equal totals prefer the smaller chosen cost for the current app,
// then the smaller predecessor state.
inline bool better(double s, int e, int u, const DpCell& cur) {
  if (s != cur.total) return s > cur.total;
  if (e != cur.chosen_e) return e < cur.chosen_e;
  return u < cur.prev_u;
}

inline AppAllocation make_allocation(const OptionTable& table, int e) {
  const Option& opt = table.entries.at(e);
  return AppAllocation{table.app_id, opt.caps, e, opt.improvement};
}

}  // namespace detail

/// Exact MCKP solve over sparse used-power states, keeping every DP layer for
/// reconstruction. Maximizes the sum of improvements (equivalently the
/// average) under the budget; ties resolved toward lower power used.
inline AllocationResult dp_allocate(std::span<const OptionTable> tables, int budget_w) {
  if (budget_w < 0) throw InvalidParamsError("budget must be non-negative");
  detail::check_distinct_ids(tables);

  using Layer = std::map<int, detail::DpCell>;
  std::vector<Layer> layers;
  layers.reserve(tables.size() + 1);
  layers.push_back(Layer{{0, detail::DpCell{}}});

  std::size_t states_held = 1;
  std::size_t peak = 1;
  for (const auto& table : tables) {
    Layer next;
    const Layer& cur = layers.back();
    for (const auto& [u, cell] : cur) {
      for (const auto& [e, opt] : table.entries) {
        int v = u + e;
        if (v > budget_w) break;  // entries ascend in cost
        double s = cell.total + opt.improvement;
        auto [it, inserted] = next.try_emplace(v, detail::DpCell{s, e, u});
        if (!inserted && detail::better(s, e, u, it->second))
          it->second = detail::DpCell{s, e, u};
      }
    }
    states_held += next.size();
    peak = std::max(peak, states_held);
    layers.push_back(std::move(next));
  }

  // Best total; on ties the ascending scan keeps the lowest used power.
  const Layer& last = layers.back();
  int best_u = 0;
  double best_total = -1.0;
  bool found = false;
  for (const auto& [u, cell] : last) {
    if (!found || cell.total > best_total) {
      found = true;
      best_total = cell.total;
      best_u = u;
    }
  }

  AllocationResult result;
  result.peak_value_states = peak;
  if (!tables.empty()) {
    std::vector<AppAllocation> rev;
    int u = best_u;
    for (std::size_t i = tables.size(); i-- > 0;) {
      const detail::DpCell& cell = layers[i + 1].at(u);
      rev.push_back(detail::make_allocation(tables[i], cell.chosen_e));
      u = cell.prev_u;
    }
    result.apps.assign(rev.rbegin(), rev.rend());
  }
  detail::finalize(result);
  return result;
}

/// Same contract and tie rule as dp_allocate, but only one value layer is
/// live at a time; per-app choice records are kept for reconstruction, so
/// peak value state is proportional to the number of reachable budget sums,
/// not N_r times that.
inline AllocationResult dp_allocate_rolling(std::span<const OptionTable> tables,
                                            int budget_w) {
  if (budget_w < 0) throw InvalidParamsError("budget must be non-negative");
  detail::check_distinct_ids(tables);

  std::map<int, double> values{{0, 0.0}};
  struct Choice {
    int chosen_e;
    int prev_u;
  };
  std::vector<std::map<int, Choice>> choices(tables.size());

  std::size_t peak = values.size();
  for (std::size_t i = 0; i < tables.size(); ++i) {
    std::map<int, double> next;
    auto& choice = choices[i];
    for (const auto& [u, total] : values) {
      for (const auto& [e, opt] : tables[i].entries) {
        int v = u + e;
        if (v > budget_w) break;
        double s = total + opt.improvement;
        auto it = next.find(v);
        if (it == next.end()) {
          next.emplace(v, s);
          choice[v] = Choice{e, u};
        } else {
          auto& ch = choice[v];
          detail::DpCell cur{it->second, ch.chosen_e, ch.prev_u};
          if (detail::better(s, e, u, cur)) {
            it->second = s;
            ch = Choice{e, u};
          }
        }
      }
    }
    peak = std::max(peak, values.size() + next.size());
    values = std::move(next);
  }

  int best_u = 0;
  double best_total = -1.0;
  bool found = false;
  for (const auto& [u, total] : values) {
    if (!found || total > best_total) {
      found = true;
      best_total = total;
      best_u = u;
    }
  }

  AllocationResult result;
  result.peak_value_states = peak;
  if (!tables.empty()) {
    std::vector<AppAllocation> rev;
    int u = best_u;
    for (std::size_t i = tables.size(); i-- > 0;) {
      const Choice& ch = choices[i].at(u);
      rev.push_back(detail::make_allocation(tables[i], ch.chosen_e));
      u = ch.prev_u;
    }
    result.apps.assign(rev.rbegin(), rev.rend());
  }
  detail::finalize(result);
  return result;
}

}  // namespace ecoshift

#endif  // ECOSHIFT_ALLOCATE_HPP
