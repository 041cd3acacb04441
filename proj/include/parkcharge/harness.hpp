#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parkcharge/config.hpp"
#include "parkcharge/mechanism.hpp"

namespace parkcharge {

enum class Mode { Mechanism, Fcfs, Cec, Offline };
enum class ForecastMode { Perfect, Interval };

Mode parse_mode(const std::string& name);
std::string to_string(Mode mode);
ForecastMode parse_forecast_mode(const std::string& name);
std::string to_string(ForecastMode mode);

/// Seeds first, first + 1, ..., first + count - 1.
std::vector<std::uint64_t> seed_range(std::uint64_t first, int count);

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0: hardware
/// concurrency). Callers store results by index; the outcome does not
/// depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct DayRecord {
  std::uint64_t seed = 0;
  int day = 0;
  Mode mode = Mode::Mechanism;
  int arrivals = 0;
  WelfareSummary summary;
  /// Invariant and accounting violations found after the run.
  std::vector<std::string> violations;
};

struct ExperimentReport {
  std::vector<DayRecord> days;
  std::string config_echo;

  bool ok() const;
  double mean_welfare() const;
  std::vector<std::string> violations() const;
};

/// One controller on one day. `system` must carry the day's realized solar.
DayRecord run_day(const ExperimentConfig& config, Mode mode, const System& system,
                  const std::vector<UserRequest>& users, ForecastMode forecast,
                  std::uint64_t seed = 0, int day = 0);

/// All days of every seed. With `imported`, that trace is used for every
/// seed instead of sampling. Throws InstanceTooLarge in offline mode when
/// a day exceeds the oracle's limits.
ExperimentReport run_experiment(const ExperimentConfig& config, Mode mode,
                                const std::vector<std::uint64_t>& seeds, ForecastMode forecast,
                                const ScenarioTrace* imported = nullptr);

/// Scenario for one seed (config scenario with the seed installed).
ScenarioTrace scenario_for_seed(const ExperimentConfig& config, std::uint64_t seed);

struct CompareRow {
  int arrivals_per_day = 0;
  std::uint64_t seed = 0;
  int day = 0;
  Mode mode = Mode::Mechanism;
  WelfareSummary summary;
};

struct BufferRow {
  double buffer_hours = 0.0;
  std::uint64_t seed = 0;
  int day = 0;
  WelfareSummary summary;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  std::vector<BufferRow> buffers;
  std::vector<std::string> violations;

  /// 1 - mean welfare with the buffer / mean welfare without it.
  double buffer_loss(double hours) const;
};

/// Mechanism vs. the baselines at every demand level of the configuration
/// (or its arrivals_per_day), plus the departure-buffer study when buffer
/// hours are configured.
CompareReport compare(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                      const std::vector<Mode>& modes, ForecastMode forecast);

struct SweepRow {
  int evse_count = 0;
  int cables_per_evse = 0;
  double daily_welfare = 0.0;
  double horizon_welfare = 0.0;
  double cost = 0.0;
  double net = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// Index of the row with the largest net value.
  std::size_t best = 0;
  double horizon_days = 0.0;
  /// True when the maximizer is strictly better than both the smallest and
  /// the largest configuration.
  bool interior_maximum() const;
};

/// Welfare minus investment cost over the grid of (EVSEs, cables per EVSE)
/// applied to every facility. Daily welfare is averaged over the sample days
/// of every seed and scaled to the investment horizon.
SweepReport investment_sweep(const ExperimentConfig& config,
                             const std::vector<std::uint64_t>& seeds);

struct VerificationFailure {
  std::string reason;
  std::string instance_json;
};

struct VerificationReport {
  int instances = 0;
  int alpha2_instances = 0;
  int forecast_instances = 0;
  double max_ratio = 0.0;
  /// Smallest alpha - ratio over the respective checks.
  double alpha1_margin = 0.0;
  double alpha2_margin = 0.0;
  double alpha3_margin = 0.0;
  double min_dual_gap = 0.0;
  double max_oracle_seconds = 0.0;
  int dual_checks = 0;
  std::vector<VerificationFailure> failures;

  bool ok() const { return failures.empty(); }
};

/// One random small instance; reproducible from (seed, index).
Instance random_small_instance(const VerifyConfig& caps, std::uint64_t seed, int index);

/// Runs mechanism and oracle on random small instances and checks the
/// competitive-ratio bounds and weak duality.
VerificationReport verify_bounds(const VerifyConfig& caps, const OracleLimits& limits,
                                 std::uint64_t seed, int threads = 0);

std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

/// Tidy CSV writers (one observation per row).
void write_daily_csv(std::ostream& out, const ExperimentReport& report);
void write_compare_csv(std::ostream& out, const CompareReport& report);
void write_buffer_csv(std::ostream& out, const CompareReport& report);
void write_sweep_csv(std::ostream& out, const SweepReport& report);
void write_verification_csv(std::ostream& out, const VerificationReport& report);

/// Shortest round-trip decimal form.
std::string format_number(double value);

}  // namespace parkcharge
