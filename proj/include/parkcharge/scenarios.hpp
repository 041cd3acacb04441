#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "parkcharge/baselines.hpp"
#include "parkcharge/model.hpp"
#include "parkcharge/pricing.hpp"

namespace parkcharge {

/// A one-dimensional distribution on [lo, hi]: uniform, a truncated normal,
/// or a truncated two-component normal mixture. Integer quantities are drawn
/// by rounding a draw on [lo - 0.5, hi + 0.5).
struct Distribution {
  enum class Kind { Uniform, Normal, Bimodal };
  Kind kind = Kind::Uniform;
  double lo = 0.0;
  double hi = 1.0;
  double mean = 0.0;
  double sd = 1.0;
  double mean2 = 0.0;
  double sd2 = 1.0;
  /// Weight of the first component of a mixture.
  double weight = 0.5;

  static Distribution uniform(double lo, double hi);
  static Distribution normal(double lo, double hi, double mean, double sd);
  static Distribution bimodal(double lo, double hi, double mean, double sd, double mean2,
                              double sd2, double weight);
};

Distribution::Kind parse_distribution_kind(const std::string& name);
std::string to_string(Distribution::Kind kind);

/// Violations of a distribution's invariants (empty when valid).
std::vector<std::string> distribution_violations(const Distribution& d, const std::string& name);

double sample_real(const Distribution& d, std::mt19937_64& rng);
int sample_int(const Distribution& d, std::mt19937_64& rng);
/// P(X <= x) of the real-valued draw.
double real_cdf(const Distribution& d, double x);
/// P(X <= k) of the integer draw.
double int_cdf(const Distribution& d, int k);
double real_mean(const Distribution& d);
double int_mean(const Distribution& d);

/// Synthetic daylight curve: rating * (1 - system_loss) * sin over
/// [sunrise, sunset), clipped at 0, scaled by a per-day factor drawn
/// uniformly from [day_factor_lo, day_factor_hi].
struct SolarModel {
  double sunrise = 6.0;
  double sunset = 20.0;
  double system_loss = 0.14;
  double day_factor_lo = 1.0;
  double day_factor_hi = 1.0;
};

std::vector<double> solar_curve(double rating, const SolarModel& model, const TimeGrid& grid,
                                double day_factor);

struct ScenarioParams {
  int days = 1;
  int arrivals_per_day = 100;
  /// Arrival slot distribution (integer draw).
  Distribution arrival = Distribution::uniform(0, 23);
  /// Stay length in slots (integer draw).
  Distribution stay = Distribution::uniform(1, 8);
  /// Requested energy units (integer draw, capped so the request fits the
  /// stay at every preferred facility).
  Distribution energy = Distribution::uniform(1, 20);
  Distribution valuation = Distribution::uniform(1, 10);
  /// Departures are pushed to at least this slot (then clipped to the horizon).
  Slot departure_min = 0;
  int preferences_min = 1;
  int preferences_max = 1;
  /// Relative spread of a user's valuation across preferred facilities.
  double valuation_jitter = 0.0;
  /// Slots between submission and arrival.
  int submission_lead = 0;
  /// Per-slot cap on energy levels (0: EVSE limit).
  Energy level_max = 0;
  SolarModel solar;
  std::uint64_t seed = 1;
};

std::vector<std::string> scenario_violations(const ScenarioParams& params, const System& system);

struct DayTrace {
  int day = 0;
  std::vector<UserRequest> users;
  /// Realized solar per facility (by index) per slot.
  std::vector<std::vector<double>> solar;
};

struct ScenarioTrace {
  std::vector<DayTrace> days;
};

/// Seed of one day, derived from the scenario seed.
std::uint64_t day_seed(std::uint64_t seed, int day);

/// Reproducible trace. Throws std::invalid_argument on infeasible params.
ScenarioTrace sample_scenario(const ScenarioParams& params, const System& system);
DayTrace sample_day(const ScenarioParams& params, const System& system, int day);

/// `system` with the day's realized solar installed.
System with_solar(const System& system, const DayTrace& day);

/// Interval forecast: width(lead) for lead = t - t_current (width[0] is
/// forced to 0; leads past the end reuse the last width).
SolarForecast make_forecast(const std::vector<double>& realized, const std::vector<double>& widths,
                            double rating);
/// Widths growing linearly with lead time.
std::vector<double> linear_widths(int horizon, double per_slot);

/// Extends every departure by `buffer_slots`, clipped at the horizon.
ScenarioTrace buffer_transform(const ScenarioTrace& trace, int buffer_slots, const TimeGrid& grid);
std::vector<UserRequest> buffer_users(const std::vector<UserRequest>& users, int buffer_slots,
                                      const TimeGrid& grid);

/// Deterministic expected arrivals for certainty-equivalent control.
ExpectedArrivals expected_arrivals(const ScenarioParams& params, const System& system);

/// CSV: day,id,submit,arrive,depart,energy,valuations (valuations as
/// "facility:value" pairs separated by ';').
void write_requests_csv(std::ostream& out, const ScenarioTrace& trace);
ScenarioTrace read_requests_csv(std::istream& in);
/// CSV: day,facility,slot,solar.
void write_solar_csv(std::ostream& out, const ScenarioTrace& trace, const System& system);
/// Installs solar rows into `trace` (days must already exist or are created).
void read_solar_csv(std::istream& in, ScenarioTrace& trace, const System& system);

/// Kolmogorov-Smirnov distance between samples and a CDF.
double ks_distance_real(std::vector<double> samples, const Distribution& d);
double ks_distance_int(const std::vector<int>& samples, const Distribution& d);

}  // namespace parkcharge
