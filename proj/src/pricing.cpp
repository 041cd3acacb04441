#include "parkcharge/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace parkcharge {

namespace {

constexpr double kDemandTolerance = 1e-9;
constexpr double kExhaustedFactor = 1e6;

// (lower / 2R) * (2R * upper / lower)^(demand / capacity)
double exponential_price(double demand, double capacity, double lower, double upper, double r) {
  const double base = lower / (2.0 * r);
  const double growth = 2.0 * r * upper / lower;
  return base * std::pow(growth, demand / capacity);
}

void check_price(double price) {
  if (price < 0.0) throw std::invalid_argument("Fenchel conjugate requires a non-negative price");
}

}  // namespace

double aggregate_resources(const System& system) {
  double r = 0.0;
  for (const auto& f : system.facilities)
    r += f.evse_count * (f.cables_per_evse + f.evse_max_energy + 1.0 / f.evse_count);
  return r;
}

double max_grid_price(const System& system) {
  double best = 0.0;
  for (const auto& f : system.facilities)
    for (double p : f.grid_price) best = std::max(best, p);
  return best;
}

double required_aggregate_resources(const ValuationBounds& bounds, const System& system) {
  return std::ceil(std::numbers::e * bounds.procurement_lower / (2.0 * max_grid_price(system)));
}

ValuationBounds compute_bounds(const std::vector<UserRequest>& users, const System& system,
                               const std::vector<std::vector<ScheduleOption>>& options) {
  if (users.empty()) throw BoundsError("compute_bounds: no users");
  if (options.size() != users.size())
    throw BoundsError("compute_bounds: one option list per user required");

  const double r = aggregate_resources(system);
  const double inf = std::numeric_limits<double>::infinity();
  ValuationBounds b{inf, 0.0, inf, 0.0, inf, 0.0, r};
  bool any_energy = false;

  for (std::size_t i = 0; i < users.size(); ++i) {
    if (options[i].empty())
      throw BoundsError("compute_bounds: user " + std::to_string(users[i].id) +
                        " has no schedule options");
    for (const auto& o : options[i]) {
      auto v = users[i].valuation_for(o.facility_id);
      if (!v) throw BoundsError("compute_bounds: option at a facility the user does not value");
      const int cable_slots = o.end - o.start + 1;
      const Energy energy = o.total_energy();
      b.cable_lower = std::min(b.cable_lower, *v / (r * cable_slots));
      b.cable_upper = std::max(b.cable_upper, *v);
      if (energy > 0) {
        any_energy = true;
        b.energy_lower = std::min(b.energy_lower, *v / (r * energy));
        for (Energy e : o.charge)
          if (e > 0) b.energy_upper = std::max(b.energy_upper, *v / e);
      }
    }
  }
  if (!any_energy) throw BoundsError("compute_bounds: every schedule delivers zero energy");
  b.procurement_lower = b.energy_lower;
  b.procurement_upper = b.energy_upper;
  return b;
}

std::vector<std::string> bounds_violations(const ValuationBounds& b, const System& system) {
  std::vector<std::string> out;
  auto pair = [&](double lo, double hi, const char* name) {
    if (!(lo > 0.0)) out.push_back(std::string(name) + " lower bound must be > 0");
    if (!(lo <= hi)) out.push_back(std::string(name) + " lower bound exceeds upper bound");
  };
  pair(b.cable_lower, b.cable_upper, "cable");
  pair(b.energy_lower, b.energy_upper, "energy");
  pair(b.procurement_lower, b.procurement_upper, "procurement");
  if (!(b.aggregate_r > 0.0)) out.push_back("aggregate R must be > 0");
  const double pi_max = max_grid_price(system);
  if (!(b.procurement_lower > pi_max)) {
    std::ostringstream msg;
    msg << "procurement lower bound " << b.procurement_lower
        << " must exceed the maximum grid price " << pi_max;
    out.push_back(msg.str());
  } else if (b.aggregate_r < required_aggregate_resources(b, system)) {
    std::ostringstream msg;
    msg << "aggregate R = " << b.aggregate_r << " is below ceil(e L_g / 2 max pi) = "
        << required_aggregate_resources(b, system);
    out.push_back(msg.str());
  }
  return out;
}

ProcurementCurve procurement_curve(const FacilityConfig& facility, Slot t) {
  return {facility.solar.at(t), facility.transformer_limit.at(t), facility.grid_price.at(t)};
}

double exhausted_price(const ValuationBounds& bounds) {
  return bounds.procurement_upper * kExhaustedFactor;
}

bool is_exhausted_price(double price, const ValuationBounds& bounds) {
  return price >= exhausted_price(bounds);
}

double cable_price(double demand, const FacilityConfig& facility, const ValuationBounds& bounds) {
  if (demand < -kDemandTolerance || demand > facility.cables_per_evse + kDemandTolerance)
    throw std::out_of_range("cable demand outside [0, C]");
  return exponential_price(demand, facility.cables_per_evse, bounds.cable_lower,
                           bounds.cable_upper, bounds.aggregate_r);
}

double energy_price(double demand, const FacilityConfig& facility, const ValuationBounds& bounds) {
  if (demand < -kDemandTolerance || demand > facility.evse_max_energy + kDemandTolerance)
    throw std::out_of_range("evse energy demand outside [0, E]");
  return exponential_price(demand, facility.evse_max_energy, bounds.energy_lower,
                           bounds.energy_upper, bounds.aggregate_r);
}

double procurement_price(double demand, const ProcurementCurve& c, const ValuationBounds& b) {
  if (demand < -kDemandTolerance) throw std::out_of_range("negative procurement demand");
  const double capacity = c.capacity();
  if (demand > capacity + kDemandTolerance) return exhausted_price(b);
  const double r = b.aggregate_r;
  if (c.solar > 0.0 && demand < c.solar)
    return exponential_price(demand, c.solar, b.procurement_lower, c.grid_price, r);
  const double lower = b.procurement_lower - c.grid_price;
  const double upper = b.procurement_upper - c.grid_price;
  const double exponent = capacity > 0.0 ? demand / capacity : 1.0;
  return (lower / (2.0 * r)) * std::pow(2.0 * r * upper / lower, exponent) + c.grid_price;
}

double procurement_price(double demand, Slot t, const FacilityConfig& facility,
                         const ValuationBounds& bounds) {
  return procurement_price(demand, procurement_curve(facility, t), bounds);
}

double procurement_price_derivative(double demand, const ProcurementCurve& c,
                                    const ValuationBounds& b) {
  const double r = b.aggregate_r;
  if (c.solar > 0.0 && demand < c.solar) {
    const double growth = 2.0 * r * c.grid_price / b.procurement_lower;
    return b.procurement_lower / (2.0 * r * c.solar) * std::pow(growth, demand / c.solar) *
           std::log(growth);
  }
  const double capacity = c.capacity();
  const double lower = b.procurement_lower - c.grid_price;
  const double growth = 2.0 * r * (b.procurement_upper - c.grid_price) / lower;
  return lower / (2.0 * r * capacity) * std::pow(growth, demand / capacity) * std::log(growth);
}

SolarForecast::SolarForecast(int horizon, std::vector<double> lower, std::vector<double> upper)
    : horizon_(horizon), lower_(std::move(lower)), upper_(std::move(upper)) {
  const auto cells = static_cast<std::size_t>(horizon) * horizon;
  if (lower_.size() != cells || upper_.size() != cells)
    throw std::invalid_argument("SolarForecast: expected horizon x horizon bounds");
}

SolarForecast SolarForecast::exact(const std::vector<double>& realized) {
  const int horizon = static_cast<int>(realized.size());
  std::vector<double> bounds(static_cast<std::size_t>(horizon) * horizon, 0.0);
  for (int tc = 0; tc < horizon; ++tc)
    for (int t = 0; t < horizon; ++t) bounds[static_cast<std::size_t>(tc) * horizon + t] = realized[t];
  return SolarForecast(horizon, bounds, bounds);
}

std::size_t SolarForecast::cell(Slot t, Slot t_current) const {
  if (t < 0 || t >= horizon_ || t_current < 0 || t_current > t)
    throw std::out_of_range("forecast queried outside 0 <= t_current <= t < horizon");
  return static_cast<std::size_t>(t_current) * horizon_ + t;
}

double SolarForecast::lower(Slot t, Slot t_current) const { return lower_[cell(t, t_current)]; }
double SolarForecast::upper(Slot t, Slot t_current) const { return upper_[cell(t, t_current)]; }

double procurement_price_forecast(double demand, Slot t, Slot t_current,
                                  const FacilityConfig& facility, const SolarForecast& forecast,
                                  const ValuationBounds& bounds) {
  ProcurementCurve c = procurement_curve(facility, t);
  c.solar = forecast.lower(t, t_current);
  return procurement_price(demand, c, bounds);
}

double operational_cost(double demand, const ProcurementCurve& c) {
  if (demand < c.solar) return 0.0;
  if (demand > c.capacity() + kDemandTolerance) return std::numeric_limits<double>::infinity();
  return c.grid_price * (demand - c.solar);
}

double operational_cost(double demand, Slot t, const FacilityConfig& facility) {
  return operational_cost(demand, procurement_curve(facility, t));
}

double operational_cost_derivative(double demand, const ProcurementCurve& c) {
  return demand < c.solar ? 0.0 : c.grid_price;
}

double cable_conjugate(double price, const FacilityConfig& facility) {
  check_price(price);
  return price * facility.cables_per_evse;
}

double energy_conjugate(double price, const FacilityConfig& facility) {
  check_price(price);
  return price * facility.evse_max_energy;
}

double procurement_conjugate(double price, const ProcurementCurve& c) {
  check_price(price);
  if (price < c.grid_price) return c.solar * price;
  return c.capacity() * price - c.grid_limit * c.grid_price;
}

double procurement_conjugate_derivative(double price, const ProcurementCurve& c) {
  check_price(price);
  return price < c.grid_price ? c.solar : c.capacity();
}

RatioBounds ratio_bounds(const System& system, const ValuationBounds& b,
                         const std::vector<SolarForecast>* forecasts) {
  auto violations = bounds_violations(b, system);
  if (!violations.empty()) {
    std::string msg = "ratio_bounds: assumptions violated";
    for (const auto& v : violations) msg += "; " + v;
    throw BoundsError(msg);
  }
  if (forecasts && forecasts->size() != system.facilities.size())
    throw BoundsError("ratio_bounds: one forecast per facility required");

  const double r = b.aggregate_r;
  RatioBounds out;
  double max_grid_log = 0.0;
  double max_solar_log = 0.0;
  double max_forecast = 0.0;
  for (std::size_t fi = 0; fi < system.facilities.size(); ++fi) {
    const auto& f = system.facilities[fi];
    const int horizon = system.grid.horizon;
    std::vector<double> exact(horizon, 0.0), interval(horizon, 0.0);
    for (Slot t = 0; t < horizon; ++t) {
      const double pi = f.grid_price[t];
      const double G = f.transformer_limit[t];
      const double solar_log = std::log(2.0 * r * pi / b.procurement_lower);
      const double grid_log = std::log(2.0 * r * (b.procurement_upper - pi) /
                                       (b.procurement_lower - pi));
      max_solar_log = std::max(max_solar_log, solar_log);
      max_grid_log = std::max(max_grid_log, grid_log);
      exact[t] = std::max(solar_log, grid_log);

      const double lo = forecasts ? (*forecasts)[fi].lower(t, 0) : f.solar[t];
      const double hi = forecasts ? (*forecasts)[fi].upper(t, 0) : f.solar[t];
      if (lo > 0.0) {
        interval[t] = std::max(hi / lo * solar_log, (hi + G) / (lo + G) * grid_log);
      } else if (G > 0.0) {
        interval[t] = (hi + G) / G * grid_log;
      }
      max_forecast = std::max(max_forecast, interval[t]);
    }
    out.slot_alpha.push_back(std::move(exact));
    out.forecast_slot_alpha.push_back(std::move(interval));
  }
  out.alpha_1 = 2.0 * max_grid_log;
  out.alpha_2 = 2.0 * max_solar_log;
  out.alpha_3 = 2.0 * max_forecast;
  return out;
}

double allocation_payment_slack(double demand, const ProcurementCurve& c,
                                const ValuationBounds& b, double alpha) {
  const double price = procurement_price(demand, c, b);
  const double lhs = price - operational_cost_derivative(demand, c);
  const double rhs = procurement_conjugate_derivative(price, c) *
                     procurement_price_derivative(demand, c, b) / alpha;
  return lhs - rhs;
}

}  // namespace parkcharge
