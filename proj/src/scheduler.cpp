#include "parkcharge/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parkcharge {

namespace {

constexpr double kEnergyTolerance = 1e-9;

Energy floor_units(double amount) {
  if (amount <= 0.0) return 0;
  return static_cast<Energy>(std::floor(amount + kEnergyTolerance));
}

struct Lot {
  double price;
  Slot t;
  int tier;
  Energy units;
};

bool cheaper(const Lot& a, const Lot& b) {
  if (a.price != b.price) return a.price < b.price;
  if (a.t != b.t) return a.t < b.t;
  return a.tier < b.tier;
}

struct Fill {
  bool feasible = false;
  double cost = 0.0;
  std::vector<Energy> charge;
  std::vector<double> procurement;
};

// Places `energy` units into the cheapest lots. `procurement_price[k]` holds
// the procurement part of each tier's unit price for bookkeeping.
Fill fill_cheapest(std::vector<Lot>& lots, Energy energy, Slot start, int window,
                   const std::vector<std::pair<double, double>>& procurement_price) {
  std::sort(lots.begin(), lots.end(), cheaper);
  Fill out;
  out.charge.assign(window, 0);
  out.procurement.assign(window, 0.0);
  Energy remaining = energy;
  for (const auto& lot : lots) {
    if (remaining == 0) break;
    const Energy take = std::min(remaining, lot.units);
    const int k = lot.t - start;
    out.charge[k] += take;
    out.cost += take * lot.price;
    const double pg = lot.tier == 0 ? procurement_price[k].first : procurement_price[k].second;
    out.procurement[k] += take * pg;
    remaining -= take;
  }
  out.feasible = remaining == 0;
  return out;
}

void compositions(Energy remaining, int slot, int slots, Energy level, std::vector<Energy>& current,
                  std::vector<std::vector<Energy>>& out, std::size_t cap) {
  if (out.size() >= cap) return;
  if (slot == slots - 1) {
    if (remaining <= level) {
      current[slot] = remaining;
      out.push_back(current);
    }
    return;
  }
  const Energy rest_capacity = level * (slots - slot - 1);
  const Energy hi = std::min(level, remaining);
  const Energy lo = std::max<Energy>(0, remaining - rest_capacity);
  for (Energy e = hi; e >= lo; --e) {
    current[slot] = e;
    compositions(remaining - e, slot + 1, slots, level, current, out, cap);
    if (out.size() >= cap) return;
  }
}

}  // namespace

PostedPrices::PostedPrices(const System& system, const ValuationBounds& bounds,
                           const AllocationState& state,
                           const std::vector<SolarForecast>* forecasts, Slot t_current)
    : system_(&system),
      bounds_(&bounds),
      state_(&state),
      forecasts_(forecasts),
      t_current_(t_current) {}

double PostedPrices::pricing_solar(int fi, Slot t) const {
  if (forecasts_) return (*forecasts_)[fi].lower(t, std::min(t_current_, t));
  return system_->facilities[fi].solar[t];
}

ProcurementCurve PostedPrices::curve(int fi, Slot t) const {
  ProcurementCurve c = procurement_curve(system_->facilities[fi], t);
  c.solar = pricing_solar(fi, t);
  return c;
}

double PostedPrices::cable(int fi, int evse, Slot t) const {
  return cable_price(state_->cable_demand(fi, evse, t), system_->facilities[fi], *bounds_);
}

double PostedPrices::energy(int fi, int evse, Slot t) const {
  return energy_price(state_->energy_demand(fi, evse, t), system_->facilities[fi], *bounds_);
}

double PostedPrices::procurement(int fi, Slot t) const {
  return procurement_price(state_->procurement_demand(fi, t), curve(fi, t), *bounds_);
}

double PostedPrices::procurement_above_solar(int fi, Slot t) const {
  const ProcurementCurve c = curve(fi, t);
  const double y = std::max<double>(state_->procurement_demand(fi, t), c.solar);
  return procurement_price(y, c, *bounds_);
}

int PostedPrices::free_cables(int fi, int evse, Slot t) const {
  return system_->facilities[fi].cables_per_evse - state_->cable_demand(fi, evse, t);
}

Energy PostedPrices::evse_headroom(int fi, int evse, Slot t) const {
  return system_->facilities[fi].evse_max_energy - state_->energy_demand(fi, evse, t);
}

Energy PostedPrices::procurement_headroom(int fi, Slot t) const {
  const ProcurementCurve c = curve(fi, t);
  return floor_units(c.capacity() - state_->procurement_demand(fi, t));
}

Energy PostedPrices::solar_headroom(int fi, Slot t) const {
  return floor_units(pricing_solar(fi, t) - state_->procurement_demand(fi, t));
}

Quote best_option(const UserRequest& user, const PostedPrices& prices, const LevelSet& levels) {
  const System& system = prices.system();
  const int window = user.window_length();
  Quote best;
  double best_utility = -std::numeric_limits<double>::infinity();
  double best_dual = 0.0;

  auto prefs = user.preferences;
  std::sort(prefs.begin(), prefs.end(),
            [](const auto& a, const auto& b) { return a.facility_id < b.facility_id; });

  std::vector<Lot> lots;
  std::vector<std::pair<double, double>> pg(window);
  for (const auto& pref : prefs) {
    const int fi = system.index_of(pref.facility_id);
    if (fi < 0) continue;
    const auto& f = system.facilities[fi];
    const Energy level = levels.cap(f);
    if (static_cast<long>(level) * window < user.energy) continue;

    for (int m = 0; m < f.evse_count; ++m) {
      double cable_cost = 0.0;
      bool cable_free = true;
      for (Slot t = user.arrival; t <= user.departure; ++t) {
        cable_cost += prices.cable(fi, m, t);
        if (prices.free_cables(fi, m, t) <= 0) cable_free = false;
      }

      // Unconstrained universe at scalar prices (dual utility).
      lots.clear();
      for (Slot t = user.arrival; t <= user.departure; ++t) {
        const double p = prices.procurement(fi, t);
        pg[t - user.arrival] = {p, p};
        lots.push_back({prices.energy(fi, m, t) + p, t, 0, level});
      }
      const Fill universe = fill_cheapest(lots, user.energy, user.arrival, window, pg);
      if (universe.feasible)
        best_dual = std::max(best_dual, pref.value - cable_cost - universe.cost);

      if (!cable_free) continue;

      // Capacity-feasible posted-price schedule.
      lots.clear();
      for (Slot t = user.arrival; t <= user.departure; ++t) {
        const Energy cap = std::min({level, prices.evse_headroom(fi, m, t),
                                     prices.procurement_headroom(fi, t)});
        if (cap <= 0) continue;
        const Energy under_solar = std::min(cap, prices.solar_headroom(fi, t));
        const double pe = prices.energy(fi, m, t);
        const double low = prices.procurement(fi, t);
        const double high = prices.procurement_above_solar(fi, t);
        pg[t - user.arrival] = {low, high};
        if (under_solar > 0) lots.push_back({pe + low, t, 0, under_solar});
        if (cap > under_solar) lots.push_back({pe + high, t, 1, cap - under_solar});
      }
      const Fill posted = fill_cheapest(lots, user.energy, user.arrival, window, pg);
      if (!posted.feasible) continue;
      const double payment = cable_cost + posted.cost;
      const double utility = pref.value - payment;
      if (utility > best_utility + kCurrencyTolerance) {
        best_utility = utility;
        best.option = ScheduleOption{pref.facility_id, m, user.arrival, user.departure,
                                     posted.charge};
        best.payment = payment;
        best.procurement_payment = posted.procurement;
      }
    }
  }

  best.dual_utility = best_dual;
  if (best.option && best_utility > kCurrencyTolerance) {
    best.utility = best_utility;
  } else {
    best = Quote{};
    best.dual_utility = best_dual;
  }
  return best;
}

std::optional<double> posted_cost(const ScheduleOption& option, const PostedPrices& prices) {
  const int fi = prices.system().index_of(option.facility_id);
  if (fi < 0) return std::nullopt;
  double cost = 0.0;
  for (Slot t = option.start; t <= option.end; ++t) {
    if (prices.free_cables(fi, option.evse, t) <= 0) return std::nullopt;
    const Energy e = option.energy_at(t);
    if (e > prices.evse_headroom(fi, option.evse, t) || e > prices.procurement_headroom(fi, t))
      return std::nullopt;
    const Energy low_units = std::min(e, prices.solar_headroom(fi, t));
    const double pe = prices.energy(fi, option.evse, t);
    cost += prices.cable(fi, option.evse, t);
    cost += low_units * (pe + prices.procurement(fi, t));
    cost += (e - low_units) * (pe + prices.procurement_above_solar(fi, t));
  }
  return cost;
}

double scalar_cost(const ScheduleOption& option, const PostedPrices& prices) {
  const int fi = prices.system().index_of(option.facility_id);
  double cost = 0.0;
  for (Slot t = option.start; t <= option.end; ++t) {
    cost += prices.cable(fi, option.evse, t);
    cost += option.energy_at(t) * (prices.energy(fi, option.evse, t) + prices.procurement(fi, t));
  }
  return cost;
}

std::vector<ScheduleOption> enumerate_options(const UserRequest& user,
                                              const FacilityConfig& facility,
                                              const LevelSet& levels, std::size_t cap) {
  std::vector<ScheduleOption> out;
  const int window = user.window_length();
  const Energy level = levels.cap(facility);
  if (window <= 0 || cap == 0 || static_cast<long>(level) * window < user.energy) return out;

  std::vector<std::vector<Energy>> schedules;
  std::vector<Energy> current(window, 0);
  compositions(user.energy, 0, window, level, current, schedules, cap);

  for (int m = 0; m < facility.evse_count && out.size() < cap; ++m)
    for (const auto& s : schedules) {
      if (out.size() >= cap) break;
      out.push_back({facility.id, m, user.arrival, user.departure, s});
    }
  return out;
}

std::vector<ScheduleOption> option_universe(const UserRequest& user, const System& system,
                                            const LevelSet& levels, std::size_t cap) {
  auto prefs = user.preferences;
  std::sort(prefs.begin(), prefs.end(),
            [](const auto& a, const auto& b) { return a.facility_id < b.facility_id; });
  std::vector<ScheduleOption> out;
  for (const auto& pref : prefs) {
    const int fi = system.index_of(pref.facility_id);
    if (fi < 0 || out.size() >= cap) continue;
    auto more = enumerate_options(user, system.facilities[fi], levels, cap - out.size());
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

double count_schedules(Energy energy, int slots, Energy level) {
  if (energy < 0 || slots < 0) return 0.0;
  std::vector<double> ways(energy + 1, 0.0);
  ways[0] = 1.0;
  for (int s = 0; s < slots; ++s) {
    std::vector<double> next(energy + 1, 0.0);
    for (Energy have = 0; have <= energy; ++have) {
      if (ways[have] == 0.0) continue;
      for (Energy e = 0; e <= level && have + e <= energy; ++e) next[have + e] += ways[have];
    }
    ways = std::move(next);
  }
  return ways[energy];
}

}  // namespace parkcharge
