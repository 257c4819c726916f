#ifndef ECOSHIFT_ORACLE_HPP
#define ECOSHIFT_ORACLE_HPP

#include <span>
#include <set>
#include <vector>

#include "ecoshift/allocate.hpp"
#include "ecoshift/options.hpp"
#include "ecoshift/types.hpp"

namespace ecoshift {

inline constexpr double kDefaultOracleLimit = 1e8;

/// Ground-truth optimum by exhaustive enumeration over one-option-per-app
/// selections. Clarity over speed: this is the test oracle. Enumerating
/// compressed option-table entries is equivalent to enumerating raw cap
/// combinations because compression keeps the per-(app, cost) maximum.
/// Throws TooLargeError when the combination count exceeds the limit.
inline AllocationResult brute_force_allocate(std::span<const OptionTable> tables,
                                             int budget_w,
                                             double combination_limit = kDefaultOracleLimit) {
  if (budget_w < 0) throw InvalidParamsError("budget must be non-negative");
  detail::check_distinct_ids(tables);

  double combinations = 1.0;
  for (const auto& t : tables) {
    combinations *= static_cast<double>(t.entries.size());
    if (combinations > combination_limit)
      throw TooLargeError("combination count exceeds oracle limit");
  }

  // Flatten entries (already cost-ascending per table).
  std::vector<std::vector<std::pair<int, const Option*>>> opts(tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i)
    for (const auto& [e, opt] : tables[i].entries) opts[i].emplace_back(e, &opt);

  std::vector<std::size_t> current(tables.size(), 0), best_choice;
  double best_total = -1.0;
  int best_cost = 0;
  bool found = false;

  auto consider = [&](double total, int cost) {
    // Higher total wins; on ties lower cost, then the first (cost-ascending,
    // input-order) selection found.
    if (!found || total > best_total ||
        (total == best_total && cost < best_cost)) {
      found = true;
      best_total = total;
      best_cost = cost;
      best_choice = current;
    }
  };

  auto dfs = [&](auto&& self, std::size_t i, double total, int cost) -> void {
    if (i == tables.size()) {
      consider(total, cost);
      return;
    }
    for (std::size_t j = 0; j < opts[i].size(); ++j) {
      auto [e, opt] = opts[i][j];
      if (cost + e > budget_w) break;  // later entries only cost more
      current[i] = j;
      self(self, i + 1, total + opt->improvement, cost + e);
    }
  };
  dfs(dfs, 0, 0.0, 0);

  AllocationResult result;
  if (!tables.empty()) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      auto [e, opt] = opts[i][best_choice[i]];
      result.apps.push_back(AppAllocation{tables[i].app_id, opt->caps, e,
                                          opt->improvement});
    }
  }
  detail::finalize(result);
  return result;
}

/// Gap in percentage points between the oracle's average improvement and a
/// DP allocation's average improvement, both expected to be evaluated on the
/// true surfaces. Non-negative up to floating error when the oracle had
/// perfect information.
inline double oracle_gap(const AllocationResult& dp_result,
                         const AllocationResult& oracle_result) {
  std::set<std::string> dp_ids, oracle_ids;
  for (const auto& a : dp_result.apps) dp_ids.insert(a.app_id);
  for (const auto& a : oracle_result.apps) oracle_ids.insert(a.app_id);
  if (dp_ids != oracle_ids)
    throw AppSetMismatchError("gap compares allocations over different app sets");
  return (oracle_result.avg_improvement - dp_result.avg_improvement) * 100.0;
}

}  // namespace ecoshift

#endif  // ECOSHIFT_ORACLE_HPP
