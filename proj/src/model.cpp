#include "parkcharge/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace parkcharge {

namespace {

// Procurement headroom is compared against real-valued solar and grid limits.
constexpr double kEnergyTolerance = 1e-9;

std::string join_lines(const std::vector<std::string>& lines) {
  std::ostringstream out;
  out << lines.size() << " invariant violation(s)";
  for (const auto& line : lines) out << "\n  - " << line;
  return out.str();
}

}  // namespace

std::optional<double> UserRequest::valuation_for(int facility_id) const {
  for (const auto& pref : preferences)
    if (pref.facility_id == facility_id) return pref.value;
  return std::nullopt;
}

double UserRequest::max_valuation() const {
  double best = 0.0;
  for (const auto& pref : preferences) best = std::max(best, pref.value);
  return best;
}

Energy ScheduleOption::total_energy() const {
  return std::accumulate(charge.begin(), charge.end(), Energy{0});
}

bool satisfies(const ScheduleOption& option, const UserRequest& user, Energy evse_max_energy) {
  if (option.start != user.arrival || option.end != user.departure) return false;
  if (static_cast<int>(option.charge.size()) != user.window_length()) return false;
  for (Energy e : option.charge)
    if (e < 0 || e > evse_max_energy) return false;
  return option.total_energy() == user.energy;
}

int System::index_of(int facility_id) const {
  for (std::size_t i = 0; i < facilities.size(); ++i)
    if (facilities[i].id == facility_id) return static_cast<int>(i);
  return -1;
}

const FacilityConfig& System::facility(int facility_id) const {
  int idx = index_of(facility_id);
  if (idx < 0) throw std::out_of_range("unknown facility " + std::to_string(facility_id));
  return facilities[idx];
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_lines(violations)), violations_(std::move(violations)) {}

std::vector<std::string> find_violations(const System& system) {
  std::vector<std::string> out;
  const int horizon = system.grid.horizon;
  if (horizon < 1) out.push_back("time grid: horizon must be >= 1");
  if (!(system.grid.slot_hours > 0.0)) out.push_back("time grid: slot duration must be > 0");
  if (system.facilities.empty()) out.push_back("no facilities configured");

  std::set<int> ids;
  for (const auto& f : system.facilities) {
    const std::string tag = "facility " + std::to_string(f.id) + ": ";
    if (!ids.insert(f.id).second) out.push_back(tag + "duplicate facility id");
    if (f.evse_count < 1) out.push_back(tag + "evse count must be >= 1");
    if (f.cables_per_evse < 1) out.push_back(tag + "cables per evse must be >= 1");
    if (f.evse_max_energy <= 0) out.push_back(tag + "evse max energy must be > 0");
    if (f.solar_rating < 0.0) out.push_back(tag + "solar rating must be >= 0");
    auto check_series = [&](const std::vector<double>& series, const char* name) {
      if (static_cast<int>(series.size()) != horizon) {
        out.push_back(tag + name + " series has " + std::to_string(series.size()) +
                      " entries, expected " + std::to_string(horizon));
        return false;
      }
      return true;
    };
    if (check_series(f.solar, "solar")) {
      for (int t = 0; t < horizon; ++t)
        if (f.solar[t] < 0.0 || f.solar[t] > f.solar_rating + kEnergyTolerance)
          out.push_back(tag + "solar at slot " + std::to_string(t) + " outside [0, rating]");
    }
    if (check_series(f.transformer_limit, "transformer limit")) {
      for (int t = 0; t < horizon; ++t)
        if (f.transformer_limit[t] < 0.0)
          out.push_back(tag + "transformer limit at slot " + std::to_string(t) + " is negative");
    }
    if (check_series(f.grid_price, "grid price")) {
      for (int t = 0; t < horizon; ++t)
        if (!(f.grid_price[t] > 0.0))
          out.push_back(tag + "grid price at slot " + std::to_string(t) + " must be > 0");
    }
  }
  return out;
}

std::vector<std::string> find_violations(const Instance& instance) {
  auto out = find_violations(instance.system);
  const int horizon = instance.system.grid.horizon;
  std::set<int> ids;
  for (const auto& u : instance.users) {
    const std::string tag = "user " + std::to_string(u.id) + ": ";
    if (!ids.insert(u.id).second) out.push_back(tag + "duplicate user id");
    if (u.arrival > u.departure) out.push_back(tag + "empty window (arrival after departure)");
    if (u.arrival < 0 || u.departure >= horizon)
      out.push_back(tag + "window outside the time grid");
    if (u.submission < 0 || u.submission > u.arrival)
      out.push_back(tag + "submission must satisfy 0 <= submission <= arrival");
    if (u.energy <= 0) out.push_back(tag + "energy demand must be > 0");
    if (u.preferences.empty()) out.push_back(tag + "no preferred facility");
    std::set<int> prefs;
    for (const auto& p : u.preferences) {
      if (!prefs.insert(p.facility_id).second)
        out.push_back(tag + "facility " + std::to_string(p.facility_id) + " listed twice");
      if (instance.system.index_of(p.facility_id) < 0)
        out.push_back(tag + "unknown facility " + std::to_string(p.facility_id));
      if (!(p.value > 0.0))
        out.push_back(tag + "valuation for facility " + std::to_string(p.facility_id) +
                      " must be > 0");
    }
  }
  return out;
}

Instance validate_instance(Instance instance) {
  auto violations = find_violations(instance);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return instance;
}

AllocationState::AllocationState(const System& system) : horizon_(system.grid.horizon) {
  int offset = 0;
  for (const auto& f : system.facilities) {
    evse_offset_.push_back(offset);
    offset += f.evse_count;
  }
  evse_offset_.push_back(offset);
  cables_.assign(static_cast<std::size_t>(offset) * horizon_, 0);
  energy_.assign(cables_.size(), 0);
  procurement_.assign(system.facilities.size() * horizon_, 0);
  revenue_.assign(procurement_.size(), 0.0);
}

std::size_t AllocationState::evse_cell(int facility_index, int evse, Slot t) const {
  return static_cast<std::size_t>(evse_offset_[facility_index] + evse) * horizon_ + t;
}

std::size_t AllocationState::facility_cell(int facility_index, Slot t) const {
  return static_cast<std::size_t>(facility_index) * horizon_ + t;
}

int AllocationState::cable_demand(int facility_index, int evse, Slot t) const {
  return cables_[evse_cell(facility_index, evse, t)];
}

Energy AllocationState::energy_demand(int facility_index, int evse, Slot t) const {
  return energy_[evse_cell(facility_index, evse, t)];
}

Energy AllocationState::procurement_demand(int facility_index, Slot t) const {
  return procurement_[facility_cell(facility_index, t)];
}

double AllocationState::procurement_revenue(int facility_index, Slot t) const {
  return revenue_[facility_cell(facility_index, t)];
}

const Assignment* AllocationState::find(int user_id) const {
  auto it = by_user_.find(user_id);
  return it == by_user_.end() ? nullptr : &assignments_[it->second];
}

void AllocationState::commit(const System& system, int user_id, const ScheduleOption& option,
                             double payment, const std::vector<double>& procurement_payment) {
  if (by_user_.count(user_id))
    throw CapacityFault("user " + std::to_string(user_id) + " already holds an assignment");
  const int fi = system.index_of(option.facility_id);
  if (fi < 0) throw CapacityFault("assignment to unknown facility");
  const auto& f = system.facilities[fi];
  if (option.evse < 0 || option.evse >= f.evse_count) throw CapacityFault("evse out of range");
  if (option.start < 0 || option.end >= horizon_ || option.start > option.end ||
      static_cast<int>(option.charge.size()) != option.end - option.start + 1)
    throw CapacityFault("malformed schedule window");
  if (!procurement_payment.empty() && procurement_payment.size() != option.charge.size())
    throw CapacityFault("procurement payment length mismatch");

  for (Slot t = option.start; t <= option.end; ++t) {
    const Energy e = option.charge[t - option.start];
    const auto cell = evse_cell(fi, option.evse, t);
    if (e < 0) throw CapacityFault("negative energy in schedule");
    if (cables_[cell] + 1 > f.cables_per_evse)
      throw CapacityFault("cable capacity exceeded at facility " + std::to_string(f.id) +
                          " evse " + std::to_string(option.evse) + " slot " + std::to_string(t));
    if (energy_[cell] + e > f.evse_max_energy)
      throw CapacityFault("evse energy capacity exceeded at facility " + std::to_string(f.id) +
                          " slot " + std::to_string(t));
    const double limit = f.solar[t] + f.transformer_limit[t];
    if (procurement_[facility_cell(fi, t)] + e > limit + kEnergyTolerance)
      throw CapacityFault("procurement capacity exceeded at facility " + std::to_string(f.id) +
                          " slot " + std::to_string(t));
  }
  for (Slot t = option.start; t <= option.end; ++t) {
    const Energy e = option.charge[t - option.start];
    const auto cell = evse_cell(fi, option.evse, t);
    cables_[cell] += 1;
    energy_[cell] += e;
    procurement_[facility_cell(fi, t)] += e;
    if (!procurement_payment.empty())
      revenue_[facility_cell(fi, t)] += procurement_payment[t - option.start];
  }
  by_user_.emplace(user_id, assignments_.size());
  assignments_.push_back({user_id, option, payment});
}

std::vector<std::string> AllocationState::capacity_violations(const System& system) const {
  std::vector<std::string> out;
  for (std::size_t fi = 0; fi < system.facilities.size(); ++fi) {
    const auto& f = system.facilities[fi];
    for (Slot t = 0; t < horizon_; ++t) {
      Energy sum = 0;
      for (int m = 0; m < f.evse_count; ++m) {
        const auto cell = evse_cell(static_cast<int>(fi), m, t);
        if (cables_[cell] > f.cables_per_evse)
          out.push_back("cable demand above capacity at facility " + std::to_string(f.id));
        if (energy_[cell] > f.evse_max_energy)
          out.push_back("evse energy above capacity at facility " + std::to_string(f.id));
        sum += energy_[cell];
      }
      const Energy yg = procurement_[facility_cell(static_cast<int>(fi), t)];
      if (yg != sum)
        out.push_back("procurement demand differs from evse energy sum at facility " +
                      std::to_string(f.id));
      if (yg > f.solar[t] + f.transformer_limit[t] + kEnergyTolerance)
        out.push_back("procurement above solar + grid limit at facility " + std::to_string(f.id));
    }
  }
  return out;
}

std::vector<std::string> AllocationState::audit(const System& system) const {
  auto out = capacity_violations(system);
  AllocationState replay(system);
  std::set<int> seen;
  for (const auto& a : assignments_) {
    if (!seen.insert(a.user_id).second)
      out.push_back("user " + std::to_string(a.user_id) + " assigned twice");
    try {
      replay.commit(system, a.user_id, a.option, a.payment);
    } catch (const CapacityFault& fault) {
      out.push_back(std::string("replay failed: ") + fault.what());
    }
  }
  if (replay.cables_ != cables_ || replay.energy_ != energy_ ||
      replay.procurement_ != procurement_)
    out.push_back("recorded demands differ from the sums of accepted options");
  return out;
}

}  // namespace parkcharge
