#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parkcharge {

/// Integer number of base energy units (default base unit: 1 kWh).
using Energy = int;

/// Zero-based slot index into the time grid.
using Slot = int;

/// Absolute tolerance used for every currency comparison.
inline constexpr double kCurrencyTolerance = 1e-9;

struct TimeGrid {
  int horizon = 24;
  double slot_hours = 1.0;
};

/// Static parameters of one parking facility. Per-slot series are indexed by
/// slot and must have exactly `horizon` entries.
struct FacilityConfig {
  int id = 1;
  int evse_count = 1;
  int cables_per_evse = 1;
  Energy evse_max_energy = 1;
  std::vector<double> transformer_limit;
  std::vector<double> solar;
  double solar_rating = 0.0;
  std::vector<double> grid_price;
};

struct FacilityValuation {
  int facility_id = 0;
  double value = 0.0;
};

/// An arrival's type: stay window [arrival, departure] (inclusive), energy
/// demand and one valuation per preferred facility.
struct UserRequest {
  int id = 0;
  Slot submission = 0;
  Slot arrival = 0;
  Slot departure = 0;
  Energy energy = 0;
  std::vector<FacilityValuation> preferences;

  int window_length() const { return departure - arrival + 1; }
  std::optional<double> valuation_for(int facility_id) const;
  double max_valuation() const;
};

/// A cable reservation over [start, end] at one EVSE plus an energy schedule
/// over the same window. `charge[k]` is the energy delivered in slot start + k.
struct ScheduleOption {
  int facility_id = 0;
  int evse = 0;
  Slot start = 0;
  Slot end = -1;
  std::vector<Energy> charge;

  bool reserves(Slot t) const { return t >= start && t <= end; }
  Energy energy_at(Slot t) const { return reserves(t) ? charge[t - start] : 0; }
  Energy total_energy() const;

  friend bool operator==(const ScheduleOption&, const ScheduleOption&) = default;
};

/// True when `option` serves `user` at a facility whose per-slot EVSE limit
/// is `evse_max_energy`.
bool satisfies(const ScheduleOption& option, const UserRequest& user, Energy evse_max_energy);

/// Facilities plus the time grid: everything a controller needs besides the
/// arrivals themselves.
struct System {
  TimeGrid grid;
  std::vector<FacilityConfig> facilities;

  /// Index into `facilities`, or -1 when the id is unknown.
  int index_of(int facility_id) const;
  const FacilityConfig& facility(int facility_id) const;
};

struct Instance {
  System system;
  std::vector<UserRequest> users;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

std::vector<std::string> find_violations(const System& system);
std::vector<std::string> find_violations(const Instance& instance);

/// Returns the instance unchanged when every invariant holds; throws
/// ValidationError listing every violation otherwise.
Instance validate_instance(Instance instance);

/// Thrown when an allocation would exceed a capacity. The mechanism and the
/// baselines never trigger it on valid inputs.
class CapacityFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Assignment {
  int user_id = 0;
  ScheduleOption option;
  double payment = 0.0;
};

/// Running resource demands and accepted assignments of one run. This is the
/// only mutable state of a controller; it is owned by exactly one run.
class AllocationState {
 public:
  AllocationState() = default;
  explicit AllocationState(const System& system);

  int cable_demand(int facility_index, int evse, Slot t) const;
  Energy energy_demand(int facility_index, int evse, Slot t) const;
  Energy procurement_demand(int facility_index, Slot t) const;
  double procurement_revenue(int facility_index, Slot t) const;

  const std::vector<Assignment>& assignments() const { return assignments_; }
  const Assignment* find(int user_id) const;

  /// Records an accepted option. `procurement_payment[k]` is the part of the
  /// payment collected for energy procurement in slot option.start + k.
  /// Throws CapacityFault if any capacity would be exceeded or the user is
  /// already assigned; the state is unchanged in that case.
  void commit(const System& system, int user_id, const ScheduleOption& option, double payment,
              const std::vector<double>& procurement_payment = {});

  /// Capacity and bookkeeping violations against `system` (empty when clean).
  /// Recomputes every demand from the assignment list.
  std::vector<std::string> audit(const System& system) const;

  /// Cheap per-cell capacity scan, without recomputing from assignments.
  std::vector<std::string> capacity_violations(const System& system) const;

  int horizon() const { return horizon_; }

 private:
  std::size_t evse_cell(int facility_index, int evse, Slot t) const;
  std::size_t facility_cell(int facility_index, Slot t) const;

  int horizon_ = 0;
  std::vector<int> evse_offset_;
  std::vector<int> cables_;
  std::vector<Energy> energy_;
  std::vector<Energy> procurement_;
  std::vector<double> revenue_;
  std::vector<Assignment> assignments_;
  std::map<int, std::size_t> by_user_;
};

/// Outcome of one arrival.
struct Decision {
  int user_id = 0;
  bool accepted = false;
  double valuation = 0.0;
  double utility = 0.0;
  std::optional<ScheduleOption> option;
  std::optional<double> payment;
  /// The arrival's dual utility: best surplus over the unconstrained option
  /// universe at the posted prices (0 for controllers without prices).
  double dual_utility = 0.0;
  /// Energy actually delivered (equals the request for priced admissions).
  Energy delivered = 0;
};

}  // namespace parkcharge
