#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parkcharge/baselines.hpp"
#include "parkcharge/model.hpp"
#include "parkcharge/oracle.hpp"
#include "parkcharge/pricing.hpp"
#include "parkcharge/scenarios.hpp"
#include "parkcharge/scheduler.hpp"

namespace parkcharge {

inline constexpr int kConfigSchemaVersion = 1;

/// Explicit valuation bounds; missing entries are derived from the scenario.
struct BoundsConfig {
  std::optional<double> cable_lower, cable_upper;
  std::optional<double> energy_lower, energy_upper;
  std::optional<double> procurement_lower, procurement_upper;
};

struct InvestmentParams {
  double per_cable_cost = 3343.0;      // I_C
  double per_evse_install = 3308.0;    // I_M
  double monthly_maintenance = 75.0;   // I_{m,n}, per EVSE per month
  int months = 24;
};

struct SweepConfig {
  std::vector<int> evse_counts{2, 4, 6, 8, 10, 12, 14};
  std::vector<int> cable_counts{1, 2, 3, 4, 5, 6, 7, 8};
  /// Simulated days per grid point; welfare is scaled to the horizon.
  int sample_days = 2;
};

/// Caps of the random instances used to check the ratio bounds.
struct VerifyConfig {
  int instances = 200;
  int min_users = 2;
  int max_users = 8;
  int max_evse = 2;
  int max_cables = 2;
  Energy max_energy = 2;
  Energy level_max = 2;
  int min_horizon = 3;
  int max_horizon = 6;
  int facilities = 1;
  double min_value = 1.0;
  double max_value = 10.0;
  /// Forecast widths per slot of lead time for interval-forecast runs.
  double forecast_width_per_slot = 0.5;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name;
  /// Facilities with zero solar; each day's realized solar is installed
  /// from the solar model (or an imported curve).
  System system;
  ScenarioParams scenario;
  BoundsConfig bounds;
  LevelSet levels;
  double forecast_width_per_slot = 0.0;
  FcfsOptions fcfs;
  CecOptions cec;
  OracleLimits oracle;
  InvestmentParams investment;
  SweepConfig sweep;
  VerifyConfig verify;
  std::vector<int> demand_levels;
  std::vector<double> buffer_hours;
  int threads = 0;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a JSON configuration. Throws ConfigError on syntax, schema or
/// validation problems.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON echo of a configuration.
std::string config_echo(const ExperimentConfig& config);

/// Valuation bounds for `system`: configured values where given, otherwise
/// derived from the scenario's valuation, energy and stay ranges.
ValuationBounds derive_bounds(const ExperimentConfig& config, const System& system);

/// Users whose per-unit valuations fall outside `bounds` (empty when none).
std::vector<std::string> bounds_cross_check(const ValuationBounds& bounds,
                                            const std::vector<UserRequest>& users,
                                            const System& system, const LevelSet& levels);

/// Fixed infrastructure cost of M EVSEs with C cables at every facility.
double investment_cost(const InvestmentParams& params, const std::vector<int>& evse_counts,
                       const std::vector<int>& cable_counts);

}  // namespace parkcharge
