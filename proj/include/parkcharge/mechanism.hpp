#pragma once

#include <vector>

#include "parkcharge/model.hpp"
#include "parkcharge/pricing.hpp"
#include "parkcharge/scheduler.hpp"

namespace parkcharge {

/// Aggregates of one run. welfare = total_value - electricity_cost, and
/// total_utility = total_value - total_payments.
struct WelfareSummary {
  int arrivals = 0;
  int admitted = 0;
  double total_value = 0.0;
  double total_utility = 0.0;
  double total_payments = 0.0;
  double electricity_cost = 0.0;
  double welfare = 0.0;
  double solar_used = 0.0;
  double solar_available = 0.0;

  double solar_fraction() const {
    return solar_available > 0.0 ? solar_used / solar_available : 0.0;
  }
};

WelfareSummary summarize(const System& system, const AllocationState& state,
                         const std::vector<Decision>& decisions);

/// Posted-price admission control: each arrival is quoted against the
/// current marginal prices, admitted iff its best feasible surplus is
/// strictly positive, and charged the posted price of its option. Demands
/// (and so prices) only change after an admission.
class OnlineMechanism {
 public:
  OnlineMechanism(System system, ValuationBounds bounds, LevelSet levels = {},
                  std::vector<SolarForecast> forecasts = {});

  /// Processes one arrival against `state`, which is updated in place on
  /// admission and left untouched on rejection. Throws std::logic_error if
  /// the user was already processed into `state`.
  Decision process_arrival(AllocationState& state, const UserRequest& user) const;

  PostedPrices prices(const AllocationState& state, Slot t_current) const;

  const System& system() const { return system_; }
  const ValuationBounds& bounds() const { return bounds_; }
  const LevelSet& levels() const { return levels_; }
  bool uses_forecast() const { return !forecasts_.empty(); }
  const std::vector<SolarForecast>& forecasts() const { return forecasts_; }

 private:
  System system_;
  ValuationBounds bounds_;
  LevelSet levels_;
  std::vector<SolarForecast> forecasts_;
};

struct RunResult {
  AllocationState state;
  std::vector<Decision> decisions;
  WelfareSummary summary;
};

/// Folds process_arrival over `users` (sorted by submission slot).
RunResult run_sequence(const std::vector<UserRequest>& users, const OnlineMechanism& mechanism);

/// Slots where the procurement revenue collected falls short of the final
/// operational cost (empty when payments cover cost everywhere).
std::vector<std::string> cost_coverage_violations(const System& system,
                                                  const AllocationState& state);

}  // namespace parkcharge
