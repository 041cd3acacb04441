#pragma once

#include <vector>

#include "parkcharge/model.hpp"
#include "parkcharge/oracle.hpp"
#include "parkcharge/scheduler.hpp"

namespace parkcharge {

struct FcfsOptions {
  /// Partially charged users earn v * delivered / h when true, nothing
  /// otherwise.
  bool partial_value = true;
};

/// First-come-first-serve: park at the lowest-indexed (facility, EVSE) with
/// a cable free for the whole stay, then charge immediately at the EVSE's
/// full rate in every slot the EVSE is not already serving an earlier EV,
/// limited by the facility's remaining procurement capacity. No payments.
Decision fcfs_process(AllocationState& state, const System& system, const UserRequest& user,
                      const LevelSet& levels = {}, const FcfsOptions& options = {});

struct CecOptions {
  /// Expected arrivals looked ahead per decision (the earliest ones).
  std::size_t max_future = 4;
  /// Schedules considered per EVSE and per user.
  std::size_t options_per_evse = 6;
  std::size_t option_cap = 24;
  long node_limit = 200'000;
};

/// Deterministic expected future: one synthetic request per expected arrival
/// (counts rounded per slot, mean type), ordered by submission slot.
struct ExpectedArrivals {
  std::vector<UserRequest> users;
};

/// Certainty-equivalent control: solves the offline problem over the
/// committed allocations, the current user and the expected arrivals that
/// submit after it, once with the user forced in and once without it, and
/// admits iff forcing it in strictly increases welfare. Admitted users are
/// served with the option chosen by that solve and pay nothing.
Decision cec_process(AllocationState& state, const System& system, const UserRequest& user,
                     const ExpectedArrivals& expected, const LevelSet& levels = {},
                     const CecOptions& options = {});

/// Capacity-feasible candidate schedules for `user` on top of `state`:
/// per preferred facility and per EVSE with a free cable over the window
/// (EVSEs with an identical occupancy profile are visited once), the
/// cheapest-cost schedule at the current operational cost plus front-loaded
/// schedules, up to the given caps.
OfflineCandidate feasible_candidate(const AllocationState& state, const System& system,
                                    const UserRequest& user, const LevelSet& levels,
                                    std::size_t options_per_evse, std::size_t option_cap);

struct BaselineRun {
  AllocationState state;
  std::vector<Decision> decisions;
};

BaselineRun run_fcfs(const std::vector<UserRequest>& users, const System& system,
                     const LevelSet& levels = {}, const FcfsOptions& options = {});
BaselineRun run_cec(const std::vector<UserRequest>& users, const System& system,
                    const ExpectedArrivals& expected, const LevelSet& levels = {},
                    const CecOptions& options = {});

}  // namespace parkcharge
