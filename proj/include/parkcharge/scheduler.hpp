#pragma once

#include <optional>
#include <vector>

#include "parkcharge/model.hpp"
#include "parkcharge/pricing.hpp"

namespace parkcharge {

/// Per-slot energy levels are the contiguous integers {0, 1, ..., max_level}.
/// The effective cap at a facility is min(max_level, E_l).
struct LevelSet {
  Energy max_level = 0;  // 0 means "up to E_l"

  Energy cap(const FacilityConfig& f) const {
    return max_level > 0 && max_level < f.evse_max_energy ? max_level : f.evse_max_energy;
  }
};

/// Marginal prices frozen at one allocation state. With forecasts, the
/// procurement resource is priced and bounded with the solar underestimate
/// made at `t_current`.
class PostedPrices {
 public:
  PostedPrices(const System& system, const ValuationBounds& bounds, const AllocationState& state,
               const std::vector<SolarForecast>* forecasts = nullptr, Slot t_current = 0);

  double cable(int facility_index, int evse, Slot t) const;
  double energy(int facility_index, int evse, Slot t) const;
  /// Scalar procurement price p_g(y_g).
  double procurement(int facility_index, Slot t) const;
  /// Price of a unit that does not fit entirely under the pricing solar.
  double procurement_above_solar(int facility_index, Slot t) const;

  /// Solar the prices are computed with (realized or forecast underestimate).
  double pricing_solar(int facility_index, Slot t) const;
  int free_cables(int facility_index, int evse, Slot t) const;
  Energy evse_headroom(int facility_index, int evse, Slot t) const;
  Energy procurement_headroom(int facility_index, Slot t) const;
  /// Units that still fit entirely under the pricing solar.
  Energy solar_headroom(int facility_index, Slot t) const;

  const System& system() const { return *system_; }
  const ValuationBounds& bounds() const { return *bounds_; }
  const AllocationState& state() const { return *state_; }

 private:
  ProcurementCurve curve(int facility_index, Slot t) const;

  const System* system_;
  const ValuationBounds* bounds_;
  const AllocationState* state_;
  const std::vector<SolarForecast>* forecasts_;
  Slot t_current_;
};

struct Quote {
  /// Surplus v - payment of the chosen option, 0 when none is feasible.
  double utility = 0.0;
  std::optional<ScheduleOption> option;
  double payment = 0.0;
  /// Procurement part of the payment per window slot of `option`.
  std::vector<double> procurement_payment;
  /// max(0, best surplus over the unconstrained option universe) at the
  /// scalar posted prices.
  double dual_utility = 0.0;
};

/// Utility-maximizing option for `user` at the posted prices. Per (facility,
/// EVSE) with a free cable over the whole window, the cheapest energy
/// schedule is found by filling the cheapest slots first up to each slot's
/// headroom. Units that fit under the pricing solar pay the current
/// procurement price; the remaining units of a slot pay the price at the
/// solar level. Ties keep the lowest facility id, then the lowest EVSE, then
/// the earliest charging.
Quote best_option(const UserRequest& user, const PostedPrices& prices, const LevelSet& levels);

/// Posted cost of a specific option under the same rules as best_option, or
/// nullopt when the option does not fit the remaining capacity.
std::optional<double> posted_cost(const ScheduleOption& option, const PostedPrices& prices);

/// Cost of an option at the scalar prices p_c, p_e, p_g (no capacity check).
double scalar_cost(const ScheduleOption& option, const PostedPrices& prices);

/// Every schedule serving `user` at `facility` (all EVSEs), in deterministic
/// order: EVSE ascending, then front-loaded schedules first. Stops after
/// `cap` options.
std::vector<ScheduleOption> enumerate_options(const UserRequest& user,
                                              const FacilityConfig& facility,
                                              const LevelSet& levels, std::size_t cap);

/// enumerate_options over every preferred facility that exists in `system`,
/// in ascending facility id. `cap` bounds the total.
std::vector<ScheduleOption> option_universe(const UserRequest& user, const System& system,
                                            const LevelSet& levels, std::size_t cap);

/// Number of schedules (compositions of `energy` into `slots` parts of at
/// most `level` each).
double count_schedules(Energy energy, int slots, Energy level);

}  // namespace parkcharge
