#include "parkcharge/mechanism.hpp"

#include <algorithm>
#include <stdexcept>

namespace parkcharge {

WelfareSummary summarize(const System& system, const AllocationState& state,
                         const std::vector<Decision>& decisions) {
  WelfareSummary s;
  for (const auto& d : decisions) {
    ++s.arrivals;
    if (!d.accepted) continue;
    ++s.admitted;
    const double payment = d.payment.value_or(0.0);
    s.total_utility += d.utility;
    s.total_payments += payment;
    s.total_value += d.utility + payment;
  }
  for (std::size_t fi = 0; fi < system.facilities.size(); ++fi) {
    const auto& f = system.facilities[fi];
    for (Slot t = 0; t < system.grid.horizon; ++t) {
      const double y = state.procurement_demand(static_cast<int>(fi), t);
      s.electricity_cost += operational_cost(y, t, f);
      s.solar_used += std::min(y, f.solar[t]);
      s.solar_available += f.solar[t];
    }
  }
  s.welfare = s.total_value - s.electricity_cost;
  return s;
}

OnlineMechanism::OnlineMechanism(System system, ValuationBounds bounds, LevelSet levels,
                                 std::vector<SolarForecast> forecasts)
    : system_(std::move(system)),
      bounds_(bounds),
      levels_(levels),
      forecasts_(std::move(forecasts)) {
  if (!forecasts_.empty() && forecasts_.size() != system_.facilities.size())
    throw std::invalid_argument("OnlineMechanism: one forecast per facility required");
  auto violations = bounds_violations(bounds_, system_);
  if (!violations.empty()) {
    std::string msg = "OnlineMechanism: unusable valuation bounds";
    for (const auto& v : violations) msg += "; " + v;
    throw BoundsError(msg);
  }
}

PostedPrices OnlineMechanism::prices(const AllocationState& state, Slot t_current) const {
  return PostedPrices(system_, bounds_, state, uses_forecast() ? &forecasts_ : nullptr,
                      t_current);
}

Decision OnlineMechanism::process_arrival(AllocationState& state, const UserRequest& user) const {
  if (state.find(user.id))
    throw std::logic_error("user " + std::to_string(user.id) + " was already processed");

  const Quote quote = best_option(user, prices(state, user.submission), levels_);
  Decision d;
  d.user_id = user.id;
  d.dual_utility = quote.dual_utility;
  if (!quote.option) return d;

  state.commit(system_, user.id, *quote.option, quote.payment, quote.procurement_payment);
  d.accepted = true;
  d.valuation = *user.valuation_for(quote.option->facility_id);
  d.utility = quote.utility;
  d.option = quote.option;
  d.payment = quote.payment;
  d.delivered = user.energy;
  return d;
}

RunResult run_sequence(const std::vector<UserRequest>& users, const OnlineMechanism& mechanism) {
  RunResult out{AllocationState(mechanism.system()), {}, {}};
  out.decisions.reserve(users.size());
  for (const auto& user : users) out.decisions.push_back(mechanism.process_arrival(out.state, user));
  out.summary = summarize(mechanism.system(), out.state, out.decisions);
  return out;
}

std::vector<std::string> cost_coverage_violations(const System& system,
                                                  const AllocationState& state) {
  std::vector<std::string> out;
  for (std::size_t fi = 0; fi < system.facilities.size(); ++fi) {
    const auto& f = system.facilities[fi];
    for (Slot t = 0; t < system.grid.horizon; ++t) {
      const int idx = static_cast<int>(fi);
      const double cost = operational_cost(state.procurement_demand(idx, t), t, f);
      const double revenue = state.procurement_revenue(idx, t);
      if (revenue + kCurrencyTolerance < cost)
        out.push_back("facility " + std::to_string(f.id) + " slot " + std::to_string(t) +
                      ": revenue " + std::to_string(revenue) + " < cost " +
                      std::to_string(cost));
    }
  }
  return out;
}

}  // namespace parkcharge
