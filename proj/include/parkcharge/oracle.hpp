#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "parkcharge/model.hpp"
#include "parkcharge/pricing.hpp"
#include "parkcharge/scheduler.hpp"

namespace parkcharge {

struct OracleLimits {
  std::size_t max_users = 14;
  std::size_t option_cap = 64;
  long node_limit = 20'000'000;
};

class InstanceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One user's choice set for the offline search. `values[i]` is the
/// valuation earned by `options[i]`. Mandatory candidates cannot be rejected.
struct OfflineCandidate {
  int user_id = 0;
  std::vector<ScheduleOption> options;
  std::vector<double> values;
  bool mandatory = false;
};

struct OfflineSolution {
  /// Chosen valuations minus the increase of operational cost over the base
  /// state. -inf when a mandatory candidate cannot be placed.
  double welfare = 0.0;
  /// Chosen option per candidate (input order); nullopt means rejected.
  std::vector<std::optional<ScheduleOption>> choices;
  bool feasible = true;
  bool proven_optimal = true;
  long nodes = 0;
};

/// Exact depth-first branch-and-bound over per-candidate option choices on
/// top of the allocations already in `base`. Candidates are branched in
/// descending order of valuation and options in descending standalone
/// surplus; a branch is cut when its value plus the remaining candidates'
/// congestion-free surpluses cannot beat the incumbent. Stops early (with
/// proven_optimal = false) after `limits.node_limit` nodes.
OfflineSolution solve_candidates(const System& system, const AllocationState& base,
                                 const std::vector<OfflineCandidate>& candidates,
                                 const OracleLimits& limits = {});

/// Offline welfare maximum over the discretized option universe. Throws
/// InstanceTooLarge when the instance exceeds `limits`.
OfflineSolution solve_offline(const std::vector<UserRequest>& users, const System& system,
                              const LevelSet& levels, const OracleLimits& limits = {});

/// Dual prices: cable and energy per [facility][evse][slot], procurement per
/// [facility][slot].
struct DualPrices {
  std::vector<std::vector<std::vector<double>>> cable;
  std::vector<std::vector<std::vector<double>>> energy;
  std::vector<std::vector<double>> procurement;
};

/// Scalar prices p(y) at the state `prices` was built on.
DualPrices snapshot_prices(const PostedPrices& prices);

struct DualEvaluation {
  double objective = 0.0;
  double utility_sum = 0.0;
  double conjugate_sum = 0.0;
  /// True when every utility constraint holds over the option universe and
  /// all prices and utilities are non-negative.
  bool feasible = true;
  int violations = 0;
  /// min over users of u_n - (best surplus over the option universe).
  double worst_slack = 0.0;
};

/// Dual objective sum(u) + sum(f_c*) + sum(f_e*) + sum(f_g*) at the given
/// prices, with the utility constraints checked for every user (`utilities`
/// aligned with `users`) over every (facility, EVSE, schedule) option.
DualEvaluation evaluate_dual(const DualPrices& prices, const std::vector<double>& utilities,
                             const std::vector<UserRequest>& users, const System& system,
                             const LevelSet& levels);

/// offline / online welfare; 1 when both vanish; +inf when only the online
/// welfare vanishes.
double empirical_ratio(double offline_welfare, double online_welfare);

}  // namespace parkcharge
