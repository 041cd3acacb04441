#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "parkcharge/model.hpp"

namespace parkcharge {

/// Lower/upper bounds on users' valuation per unit of each resource, plus the
/// aggregate resource count R shared by every pricing function.
struct ValuationBounds {
  double cable_lower = 0.0;
  double cable_upper = 0.0;
  double energy_lower = 0.0;
  double energy_upper = 0.0;
  double procurement_lower = 0.0;
  double procurement_upper = 0.0;
  double aggregate_r = 0.0;
};

class BoundsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// R = sum over facilities of M_l (C_l + E_l + 1 / M_l).
double aggregate_resources(const System& system);

/// Smallest R for which the logarithmic ratio bounds are at least one:
/// ceil(e * L_g / (2 * max grid price)).
double required_aggregate_resources(const ValuationBounds& bounds, const System& system);

double max_grid_price(const System& system);

/// Derives the bounds from the users and their option universes
/// (`options[i]` belongs to `users[i]`). Procurement bounds equal the energy
/// bounds. Throws BoundsError on empty input or all-zero schedules.
ValuationBounds compute_bounds(const std::vector<UserRequest>& users, const System& system,
                               const std::vector<std::vector<ScheduleOption>>& options);

/// Invariant violations of `bounds` against `system` (empty when usable).
std::vector<std::string> bounds_violations(const ValuationBounds& bounds, const System& system);

/// Energy procurement parameters of one facility in one slot.
struct ProcurementCurve {
  double solar = 0.0;
  double grid_limit = 0.0;
  double grid_price = 0.0;

  double capacity() const { return solar + grid_limit; }
};

ProcurementCurve procurement_curve(const FacilityConfig& facility, Slot t);

/// Price returned for any demand beyond a resource's capacity.
double exhausted_price(const ValuationBounds& bounds);
bool is_exhausted_price(double price, const ValuationBounds& bounds);

/// Marginal price of one cable-slot at the given cable demand. Throws
/// std::out_of_range outside [0, C_l].
double cable_price(double demand, const FacilityConfig& facility, const ValuationBounds& bounds);

/// Marginal price of one EVSE energy unit. Throws std::out_of_range outside
/// [0, E_l].
double energy_price(double demand, const FacilityConfig& facility, const ValuationBounds& bounds);

/// Marginal price of one procured energy unit. Below the available solar the
/// price climbs from L_g / 2R to the grid price; from the solar level on it
/// climbs from just above the grid price to U_g at solar + grid limit. The
/// upper branch applies at exactly y = solar, and exclusively when there is
/// no solar. Demand beyond capacity returns exhausted_price().
double procurement_price(double demand, const ProcurementCurve& curve,
                         const ValuationBounds& bounds);
double procurement_price(double demand, Slot t, const FacilityConfig& facility,
                         const ValuationBounds& bounds);

/// d(procurement_price)/dy on the branch selected at `demand`.
double procurement_price_derivative(double demand, const ProcurementCurve& curve,
                                    const ValuationBounds& bounds);

/// Interval forecast of one facility's solar: for every forecast slot
/// `t_current` and target slot `t >= t_current`, bounds on the realized
/// solar at `t`.
class SolarForecast {
 public:
  SolarForecast() = default;
  SolarForecast(int horizon, std::vector<double> lower, std::vector<double> upper);

  /// Perfect forecast: both bounds equal the realized series.
  static SolarForecast exact(const std::vector<double>& realized);

  int horizon() const { return horizon_; }
  double lower(Slot t, Slot t_current) const;
  double upper(Slot t, Slot t_current) const;

 private:
  std::size_t cell(Slot t, Slot t_current) const;

  int horizon_ = 0;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// procurement_price with the realized solar replaced by the forecast's
/// underestimate made at `t_current`.
double procurement_price_forecast(double demand, Slot t, Slot t_current,
                                  const FacilityConfig& facility, const SolarForecast& forecast,
                                  const ValuationBounds& bounds);

/// Procurement cost: 0 below solar, grid-priced above it, +inf past capacity.
double operational_cost(double demand, const ProcurementCurve& curve);
double operational_cost(double demand, Slot t, const FacilityConfig& facility);
double operational_cost_derivative(double demand, const ProcurementCurve& curve);

/// Fenchel conjugates of the capacity constraints and of the procurement
/// cost. All throw std::invalid_argument for negative prices.
double cable_conjugate(double price, const FacilityConfig& facility);
double energy_conjugate(double price, const FacilityConfig& facility);
double procurement_conjugate(double price, const ProcurementCurve& curve);
double procurement_conjugate_derivative(double price, const ProcurementCurve& curve);

/// Competitive-ratio bounds. `slot_alpha[l][t]` is the per-slot factor for
/// exact solar; `forecast_slot_alpha[l][t]` the one for interval forecasts
/// (equal to slot_alpha for exact solar). Slots with no procurement capacity
/// at all carry 0.
struct RatioBounds {
  double alpha_1 = 0.0;
  double alpha_2 = 0.0;
  double alpha_3 = 0.0;
  std::vector<std::vector<double>> slot_alpha;
  std::vector<std::vector<double>> forecast_slot_alpha;
};

/// Throws BoundsError when L_g does not exceed every grid price or when R
/// is below required_aggregate_resources(). `forecasts`, when given, holds
/// one forecast per facility (by index).
RatioBounds ratio_bounds(const System& system, const ValuationBounds& bounds,
                         const std::vector<SolarForecast>* forecasts = nullptr);

/// Slack of the per-increment allocation-payment inequality at `demand`
/// (per unit of dy): (p - f'(y)) - f*'(p) * p'(y) / alpha. Non-negative
/// whenever the pricing function is alpha-competitive on this slot.
double allocation_payment_slack(double demand, const ProcurementCurve& curve,
                                const ValuationBounds& bounds, double alpha);

}  // namespace parkcharge
