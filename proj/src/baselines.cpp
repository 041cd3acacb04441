#include "parkcharge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "parkcharge/pricing.hpp"

namespace parkcharge {

namespace {

constexpr double kEnergyTolerance = 1e-9;

Energy procurement_room(const AllocationState& state, const FacilityConfig& f, int fi, Slot t) {
  const double room = f.solar[t] + f.transformer_limit[t] - state.procurement_demand(fi, t);
  return room <= 0.0 ? 0 : static_cast<Energy>(std::floor(room + kEnergyTolerance));
}

std::vector<int> facility_order(const UserRequest& user, const System& system) {
  std::vector<int> out;
  for (const auto& p : user.preferences) {
    const int fi = system.index_of(p.facility_id);
    if (fi >= 0) out.push_back(fi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void capped_compositions(Energy remaining, std::size_t k, const std::vector<Energy>& caps,
                         const std::vector<Energy>& suffix, std::vector<Energy>& current,
                         std::vector<std::vector<Energy>>& out, std::size_t limit) {
  if (out.size() >= limit) return;
  if (k == caps.size()) {
    if (remaining == 0) out.push_back(current);
    return;
  }
  const Energy hi = std::min(caps[k], remaining);
  const Energy lo = std::max<Energy>(0, remaining - suffix[k + 1]);
  for (Energy e = hi; e >= lo; --e) {
    current[k] = e;
    capped_compositions(remaining - e, k + 1, caps, suffix, current, out, limit);
    if (out.size() >= limit) return;
  }
  current[k] = 0;
}

}  // namespace

Decision fcfs_process(AllocationState& state, const System& system, const UserRequest& user,
                      const LevelSet& levels, const FcfsOptions& options) {
  if (state.find(user.id))
    throw std::logic_error("user " + std::to_string(user.id) + " was already processed");
  Decision d;
  d.user_id = user.id;

  for (int fi : facility_order(user, system)) {
    const auto& f = system.facilities[fi];
    for (int m = 0; m < f.evse_count; ++m) {
      bool free = true;
      for (Slot t = user.arrival; t <= user.departure && free; ++t)
        free = state.cable_demand(fi, m, t) < f.cables_per_evse;
      if (!free) continue;

      ScheduleOption option{f.id, m, user.arrival, user.departure,
                            std::vector<Energy>(user.window_length(), 0)};
      Energy remaining = user.energy;
      const Energy rate = levels.cap(f);
      for (Slot t = user.arrival; t <= user.departure && remaining > 0; ++t) {
        if (state.energy_demand(fi, m, t) > 0) continue;  // an earlier EV holds the EVSE
        const Energy e = std::min({rate, remaining, procurement_room(state, f, fi, t)});
        option.charge[t - user.arrival] = e;
        remaining -= e;
      }
      state.commit(system, user.id, option, 0.0);

      const double v = *user.valuation_for(f.id);
      const Energy delivered = user.energy - remaining;
      d.accepted = true;
      d.valuation = v;
      d.delivered = delivered;
      if (remaining == 0)
        d.utility = v;
      else if (options.partial_value && user.energy > 0)
        d.utility = v * static_cast<double>(delivered) / user.energy;
      d.option = option;
      d.payment = 0.0;
      return d;
    }
  }
  return d;
}

OfflineCandidate feasible_candidate(const AllocationState& state, const System& system,
                                    const UserRequest& user, const LevelSet& levels,
                                    std::size_t options_per_evse, std::size_t option_cap) {
  OfflineCandidate c;
  c.user_id = user.id;
  const int window = user.window_length();

  for (int fi : facility_order(user, system)) {
    const auto& f = system.facilities[fi];
    const double value = *user.valuation_for(f.id);
    const Energy level = levels.cap(f);
    std::set<std::vector<int>> seen_profiles;

    for (int m = 0; m < f.evse_count && c.options.size() < option_cap; ++m) {
      std::vector<int> profile;
      bool free = true;
      for (Slot t = user.arrival; t <= user.departure && free; ++t) {
        free = state.cable_demand(fi, m, t) < f.cables_per_evse;
        profile.push_back(state.cable_demand(fi, m, t));
        profile.push_back(state.energy_demand(fi, m, t));
      }
      if (!free || !seen_profiles.insert(profile).second) continue;

      std::vector<Energy> caps(window);
      for (int k = 0; k < window; ++k) {
        const Slot t = user.arrival + k;
        caps[k] = std::max<Energy>(0, std::min({level, f.evse_max_energy -
                                                           state.energy_demand(fi, m, t),
                                                procurement_room(state, f, fi, t)}));
      }
      std::vector<Energy> suffix(window + 1, 0);
      for (int k = window; k-- > 0;) suffix[k] = suffix[k + 1] + caps[k];
      if (suffix[0] < user.energy) continue;

      std::vector<std::vector<Energy>> schedules;

      // Cheapest schedule at the current operational cost (greedy per unit;
      // the cost is convex in each slot).
      std::vector<Energy> cheap(window, 0);
      for (Energy u = 0; u < user.energy; ++u) {
        int best = -1;
        double best_cost = 0.0;
        for (int k = 0; k < window; ++k) {
          if (cheap[k] >= caps[k]) continue;
          const Slot t = user.arrival + k;
          const double y = state.procurement_demand(fi, t) + cheap[k];
          const auto curve = procurement_curve(f, t);
          const double cost = operational_cost(y + 1, curve) - operational_cost(y, curve);
          if (best < 0 || cost < best_cost - kEnergyTolerance) {
            best = k;
            best_cost = cost;
          }
        }
        ++cheap[best];
      }
      schedules.push_back(cheap);

      std::vector<Energy> current(window, 0);
      capped_compositions(user.energy, 0, caps, suffix, current, schedules,
                          options_per_evse + 1);

      std::size_t added = 0;
      std::set<std::vector<Energy>> unique;
      for (auto& s : schedules) {
        if (added >= options_per_evse || c.options.size() >= option_cap) break;
        if (!unique.insert(s).second) continue;
        c.options.push_back({f.id, m, user.arrival, user.departure, s});
        c.values.push_back(value);
        ++added;
      }
    }
  }
  return c;
}

Decision cec_process(AllocationState& state, const System& system, const UserRequest& user,
                     const ExpectedArrivals& expected, const LevelSet& levels,
                     const CecOptions& options) {
  if (state.find(user.id))
    throw std::logic_error("user " + std::to_string(user.id) + " was already processed");
  Decision d;
  d.user_id = user.id;

  OfflineCandidate current =
      feasible_candidate(state, system, user, levels, options.options_per_evse, options.option_cap);
  if (current.options.empty()) return d;
  current.mandatory = true;

  std::vector<OfflineCandidate> future;
  for (const auto& e : expected.users) {
    if (future.size() >= options.max_future) break;
    if (e.submission <= user.submission) continue;
    auto c = feasible_candidate(state, system, e, levels, options.options_per_evse,
                                options.option_cap);
    if (!c.options.empty()) future.push_back(std::move(c));
  }

  OracleLimits limits;
  limits.node_limit = options.node_limit;

  std::vector<OfflineCandidate> with_user;
  with_user.push_back(current);
  with_user.insert(with_user.end(), future.begin(), future.end());
  const OfflineSolution accept = solve_candidates(system, state, with_user, limits);
  const OfflineSolution reject = solve_candidates(system, state, future, limits);

  if (!accept.feasible || !accept.choices[0] ||
      accept.welfare <= reject.welfare + kCurrencyTolerance)
    return d;

  const ScheduleOption& option = *accept.choices[0];
  state.commit(system, user.id, option, 0.0);
  d.accepted = true;
  d.valuation = *user.valuation_for(option.facility_id);
  d.utility = d.valuation;
  d.option = option;
  d.payment = 0.0;
  d.delivered = user.energy;
  return d;
}

BaselineRun run_fcfs(const std::vector<UserRequest>& users, const System& system,
                     const LevelSet& levels, const FcfsOptions& options) {
  BaselineRun out{AllocationState(system), {}};
  out.decisions.reserve(users.size());
  for (const auto& u : users) out.decisions.push_back(fcfs_process(out.state, system, u, levels, options));
  return out;
}

BaselineRun run_cec(const std::vector<UserRequest>& users, const System& system,
                    const ExpectedArrivals& expected, const LevelSet& levels,
                    const CecOptions& options) {
  BaselineRun out{AllocationState(system), {}};
  out.decisions.reserve(users.size());
  for (const auto& u : users)
    out.decisions.push_back(cec_process(out.state, system, u, expected, levels, options));
  return out;
}

}  // namespace parkcharge
