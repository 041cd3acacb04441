#include "parkcharge/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "json.hpp"
#include "parkcharge/baselines.hpp"
#include "parkcharge/oracle.hpp"

namespace parkcharge {

namespace {

using nlohmann::json;

constexpr double kRatioTolerance = 1e-9;
constexpr double kAccountingTolerance = 1e-6;

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + std::min(hi - lo, static_cast<int>(unit(rng) * (hi - lo + 1)));
}

std::vector<SolarForecast> interval_forecasts(const System& system, double width_per_slot) {
  std::vector<SolarForecast> out;
  const auto widths = linear_widths(system.grid.horizon, width_per_slot);
  for (const auto& f : system.facilities)
    out.push_back(make_forecast(f.solar, widths, f.solar_rating * system.grid.slot_hours));
  return out;
}

WelfareSummary offline_summary(const System& system, const std::vector<UserRequest>& users,
                               const OfflineSolution& solution) {
  AllocationState state(system);
  std::vector<Decision> decisions;
  for (std::size_t i = 0; i < users.size(); ++i) {
    Decision d;
    d.user_id = users[i].id;
    if (solution.choices[i]) {
      const auto& o = *solution.choices[i];
      state.commit(system, users[i].id, o, 0.0);
      d.accepted = true;
      d.valuation = *users[i].valuation_for(o.facility_id);
      d.utility = d.valuation;
      d.option = o;
      d.payment = 0.0;
      d.delivered = users[i].energy;
    }
    decisions.push_back(std::move(d));
  }
  return summarize(system, state, decisions);
}

void check_run(const System& system, const AllocationState& state,
               const std::vector<Decision>& decisions, const std::vector<UserRequest>& users,
               bool priced, std::vector<std::string>& out) {
  for (auto& v : state.capacity_violations(system)) out.push_back("capacity: " + v);
  for (auto& v : state.audit(system)) out.push_back("audit: " + v);
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    const Assignment* a = state.find(d.user_id);
    if (d.accepted != (a != nullptr) || (a && (!d.option || !(a->option == *d.option))))
      out.push_back("user " + std::to_string(d.user_id) + ": assignment differs from decision");
    if (!d.accepted) continue;
    if (d.utility < -kCurrencyTolerance)
      out.push_back("user " + std::to_string(d.user_id) + ": negative utility");
    if (priced && d.payment.value_or(0.0) > d.valuation + kCurrencyTolerance)
      out.push_back("user " + std::to_string(d.user_id) + ": payment exceeds valuation");
    if (priced && d.option && !satisfies(*d.option, users[i],
                                         system.facility(d.option->facility_id).evse_max_energy))
      out.push_back("user " + std::to_string(d.user_id) + ": option does not serve the request");
  }
  if (priced)
    for (auto& v : cost_coverage_violations(system, state)) out.push_back("cost coverage: " + v);
}

void check_accounting(const WelfareSummary& s, std::vector<std::string>& out) {
  const double identity = s.total_utility + s.total_payments - s.electricity_cost;
  if (std::abs(identity - s.welfare) > kAccountingTolerance * std::max(1.0, std::abs(s.welfare)))
    out.push_back("accounting: welfare differs from utility + payments - cost");
}

std::string slug(double hours) { return format_number(hours); }

}  // namespace

Mode parse_mode(const std::string& name) {
  if (name == "mechanism") return Mode::Mechanism;
  if (name == "fcfs") return Mode::Fcfs;
  if (name == "cec") return Mode::Cec;
  if (name == "offline") return Mode::Offline;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Mechanism: return "mechanism";
    case Mode::Fcfs: return "fcfs";
    case Mode::Cec: return "cec";
    case Mode::Offline: return "offline";
  }
  return "mechanism";
}

ForecastMode parse_forecast_mode(const std::string& name) {
  if (name == "perfect") return ForecastMode::Perfect;
  if (name == "interval") return ForecastMode::Interval;
  throw std::invalid_argument("unknown forecast mode '" + name + "'");
}

std::string to_string(ForecastMode mode) {
  return mode == ForecastMode::Perfect ? "perfect" : "interval";
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool ExperimentReport::ok() const {
  return std::all_of(days.begin(), days.end(), [](const auto& d) { return d.violations.empty(); });
}

double ExperimentReport::mean_welfare() const {
  if (days.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& d : days) sum += d.summary.welfare;
  return sum / days.size();
}

std::vector<std::string> ExperimentReport::violations() const {
  std::vector<std::string> out;
  for (const auto& d : days)
    for (const auto& v : d.violations)
      out.push_back("seed " + std::to_string(d.seed) + " day " + std::to_string(d.day) + " (" +
                    to_string(d.mode) + "): " + v);
  return out;
}

DayRecord run_day(const ExperimentConfig& config, Mode mode, const System& system,
                  const std::vector<UserRequest>& users, ForecastMode forecast,
                  std::uint64_t seed, int day) {
  DayRecord rec;
  rec.seed = seed;
  rec.day = day;
  rec.mode = mode;
  rec.arrivals = static_cast<int>(users.size());

  switch (mode) {
    case Mode::Mechanism: {
      const ValuationBounds bounds = derive_bounds(config, system);
      for (auto& v : bounds_cross_check(bounds, users, system, config.levels))
        rec.violations.push_back("bounds: " + v);
      std::vector<SolarForecast> forecasts;
      if (forecast == ForecastMode::Interval)
        forecasts = interval_forecasts(system, config.forecast_width_per_slot);
      OnlineMechanism mechanism(system, bounds, config.levels, std::move(forecasts));
      auto run = run_sequence(users, mechanism);
      check_run(system, run.state, run.decisions, users, true, rec.violations);
      rec.summary = run.summary;
      break;
    }
    case Mode::Fcfs: {
      auto run = run_fcfs(users, system, config.levels, config.fcfs);
      check_run(system, run.state, run.decisions, users, false, rec.violations);
      rec.summary = summarize(system, run.state, run.decisions);
      break;
    }
    case Mode::Cec: {
      const auto expected = expected_arrivals(config.scenario, system);
      auto run = run_cec(users, system, expected, config.levels, config.cec);
      check_run(system, run.state, run.decisions, users, false, rec.violations);
      rec.summary = summarize(system, run.state, run.decisions);
      break;
    }
    case Mode::Offline: {
      const auto solution = solve_offline(users, system, config.levels, config.oracle);
      rec.summary = offline_summary(system, users, solution);
      break;
    }
  }
  check_accounting(rec.summary, rec.violations);
  return rec;
}

ScenarioTrace scenario_for_seed(const ExperimentConfig& config, std::uint64_t seed) {
  ScenarioParams params = config.scenario;
  params.seed = seed;
  params.level_max = config.levels.max_level;
  return sample_scenario(params, config.system);
}

ExperimentReport run_experiment(const ExperimentConfig& config, Mode mode,
                                const std::vector<std::uint64_t>& seeds, ForecastMode forecast,
                                const ScenarioTrace* imported) {
  ExperimentReport report;
  report.config_echo = config_echo(config);
  std::vector<std::vector<DayRecord>> per_seed(seeds.size());
  parallel_for(seeds.size(), config.threads, [&](std::size_t i) {
    const ScenarioTrace trace = imported ? *imported : scenario_for_seed(config, seeds[i]);
    for (const auto& d : trace.days) {
      const System system = d.solar.empty() ? config.system : with_solar(config.system, d);
      per_seed[i].push_back(run_day(config, mode, system, d.users, forecast, seeds[i], d.day));
    }
  });
  for (auto& records : per_seed)
    for (auto& r : records) report.days.push_back(std::move(r));
  return report;
}

double CompareReport::buffer_loss(double hours) const {
  double base = 0.0, buffered = 0.0;
  int nb = 0, nh = 0;
  for (const auto& r : buffers) {
    if (r.buffer_hours == 0.0) {
      base += r.summary.welfare;
      ++nb;
    } else if (r.buffer_hours == hours) {
      buffered += r.summary.welfare;
      ++nh;
    }
  }
  if (nb == 0 || nh == 0 || base == 0.0) return 0.0;
  return 1.0 - (buffered / nh) / (base / nb);
}

CompareReport compare(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                      const std::vector<Mode>& modes, ForecastMode forecast) {
  std::vector<int> levels = config.demand_levels;
  if (levels.empty()) levels.push_back(config.scenario.arrivals_per_day);

  struct Job {
    int level;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int level : levels)
    for (auto seed : seeds) jobs.push_back({level, seed});

  std::vector<std::vector<CompareRow>> rows(jobs.size());
  std::vector<std::vector<std::string>> problems(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
    ExperimentConfig c = config;
    c.scenario.arrivals_per_day = jobs[j].level;
    const ScenarioTrace trace = scenario_for_seed(c, jobs[j].seed);
    for (const auto& d : trace.days) {
      const System system = with_solar(c.system, d);
      for (Mode m : modes) {
        auto rec = run_day(c, m, system, d.users, forecast, jobs[j].seed, d.day);
        for (auto& v : rec.violations)
          problems[j].push_back(to_string(m) + " level " + std::to_string(jobs[j].level) +
                                " seed " + std::to_string(jobs[j].seed) + ": " + v);
        rows[j].push_back({jobs[j].level, jobs[j].seed, d.day, m, rec.summary});
      }
    }
  });

  CompareReport report;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    report.rows.insert(report.rows.end(), rows[j].begin(), rows[j].end());
    report.violations.insert(report.violations.end(), problems[j].begin(), problems[j].end());
  }

  if (!config.buffer_hours.empty()) {
    std::vector<double> hours{0.0};
    for (double h : config.buffer_hours)
      if (h > 0.0) hours.push_back(h);
    std::vector<std::vector<BufferRow>> brows(seeds.size());
    std::vector<std::vector<std::string>> bproblems(seeds.size());
    parallel_for(seeds.size(), config.threads, [&](std::size_t i) {
      const ScenarioTrace trace = scenario_for_seed(config, seeds[i]);
      for (const auto& d : trace.days) {
        const System system = with_solar(config.system, d);
        for (double h : hours) {
          const int slots = static_cast<int>(std::lround(h / config.system.grid.slot_hours));
          const auto users = buffer_users(d.users, slots, config.system.grid);
          ExperimentConfig buffered = config;
          buffered.scenario.stay.lo += slots;
          buffered.scenario.stay.hi += slots;
          auto rec = run_day(buffered, Mode::Mechanism, system, users, forecast, seeds[i], d.day);
          for (auto& v : rec.violations)
            bproblems[i].push_back("buffer " + slug(h) + " seed " + std::to_string(seeds[i]) +
                                   ": " + v);
          brows[i].push_back({h, seeds[i], d.day, rec.summary});
        }
      }
    });
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      report.buffers.insert(report.buffers.end(), brows[i].begin(), brows[i].end());
      report.violations.insert(report.violations.end(), bproblems[i].begin(), bproblems[i].end());
    }
  }
  return report;
}

bool SweepReport::interior_maximum() const {
  if (rows.size() < 3) return false;
  const double best_net = rows[best].net;
  return rows.front().net < best_net && rows.back().net < best_net;
}

SweepReport investment_sweep(const ExperimentConfig& config,
                             const std::vector<std::uint64_t>& seeds) {
  SweepReport report;
  report.horizon_days = config.investment.months * 365.0 / 12.0;
  for (int m : config.sweep.evse_counts)
    for (int c : config.sweep.cable_counts) report.rows.push_back({m, c, 0, 0, 0, 0});
  if (report.rows.empty()) throw std::invalid_argument("investment sweep: empty grid");

  ExperimentConfig base = config;
  base.scenario.days = config.sweep.sample_days;
  std::vector<ScenarioTrace> traces;
  for (auto seed : seeds) traces.push_back(scenario_for_seed(base, seed));

  parallel_for(report.rows.size(), config.threads, [&](std::size_t k) {
    auto& row = report.rows[k];
    ExperimentConfig c = base;
    for (auto& f : c.system.facilities) {
      f.evse_count = row.evse_count;
      f.cables_per_evse = row.cables_per_evse;
    }
    double total = 0.0;
    int days = 0;
    for (const auto& trace : traces)
      for (const auto& d : trace.days) {
        const System system = with_solar(c.system, d);
        total += run_day(c, Mode::Mechanism, system, d.users, ForecastMode::Perfect).summary.welfare;
        ++days;
      }
    row.daily_welfare = days ? total / days : 0.0;
    row.horizon_welfare = row.daily_welfare * report.horizon_days;
    const std::size_t n = c.system.facilities.size();
    row.cost = investment_cost(config.investment, std::vector<int>(n, row.evse_count),
                               std::vector<int>(n, row.cables_per_evse));
    row.net = row.horizon_welfare - row.cost;
  });
  for (std::size_t k = 1; k < report.rows.size(); ++k)
    if (report.rows[k].net > report.rows[report.best].net) report.best = k;
  return report;
}

Instance random_small_instance(const VerifyConfig& caps, std::uint64_t seed, int index) {
  std::mt19937_64 rng(day_seed(seed, index));
  Instance inst;
  const int horizon = uniform_int(rng, caps.min_horizon, caps.max_horizon);
  inst.system.grid.horizon = horizon;
  const int facilities = uniform_int(rng, 1, caps.facilities);
  for (int l = 0; l < facilities; ++l) {
    FacilityConfig f;
    f.id = l + 1;
    f.evse_count = uniform_int(rng, 1, caps.max_evse);
    f.cables_per_evse = uniform_int(rng, 1, caps.max_cables);
    f.evse_max_energy = uniform_int(rng, 1, caps.max_energy);
    for (Slot t = 0; t < horizon; ++t) {
      f.solar.push_back(0.5 * uniform_int(rng, 0, 6));
      f.transformer_limit.push_back(uniform_int(rng, 0, 3));
    }
    f.solar_rating = *std::max_element(f.solar.begin(), f.solar.end());
    f.grid_price.assign(horizon, 0.0);
    inst.system.facilities.push_back(std::move(f));
  }

  const LevelSet levels{caps.level_max};
  const int n = uniform_int(rng, caps.min_users, caps.max_users);
  for (int i = 0; i < n; ++i) {
    UserRequest u;
    u.id = i + 1;
    u.arrival = uniform_int(rng, 0, horizon - 1);
    u.departure = uniform_int(rng, u.arrival, horizon - 1);
    u.submission = u.arrival;
    std::vector<int> chosen;
    for (int l = 0; l < facilities; ++l)
      if (unit(rng) < 0.6) chosen.push_back(l);
    if (chosen.empty()) chosen.push_back(uniform_int(rng, 0, facilities - 1));
    const double v = caps.min_value + unit(rng) * (caps.max_value - caps.min_value);
    Energy cap = -1;
    for (int l : chosen) {
      u.preferences.push_back({l + 1, v});
      const Energy c = levels.cap(inst.system.facilities[l]) * u.window_length();
      cap = cap < 0 ? c : std::min(cap, c);
    }
    u.energy = uniform_int(rng, 1, std::max(1, std::min(cap, 2 * caps.max_energy)));
    inst.users.push_back(std::move(u));
  }
  std::stable_sort(inst.users.begin(), inst.users.end(),
                   [](const auto& a, const auto& b) { return a.submission < b.submission; });

  // grid prices in [0.5, 0.95] L_g
  std::vector<std::vector<ScheduleOption>> options;
  for (const auto& u : inst.users) options.push_back(option_universe(u, inst.system, levels, 100000));
  const ValuationBounds bounds = compute_bounds(inst.users, inst.system, options);
  for (auto& f : inst.system.facilities)
    for (auto& p : f.grid_price) p = (0.5 + 0.45 * unit(rng)) * bounds.procurement_lower;
  return inst;
}

VerificationReport verify_bounds(const VerifyConfig& caps, const OracleLimits& limits,
                                 std::uint64_t seed, int threads) {
  struct Outcome {
    double ratio = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0, gap = 0.0, seconds = 0.0;
    bool alpha2 = false, forecast = false, dual = false;
    std::vector<std::string> failures;
    std::string json;
  };
  const int count = caps.instances;
  std::vector<Outcome> outcomes(count);
  const LevelSet levels{caps.level_max};

  parallel_for(count, threads, [&](std::size_t i) {
    Outcome& o = outcomes[i];
    const Instance inst = random_small_instance(caps, seed, static_cast<int>(i));
    const System& system = inst.system;
    const auto& users = inst.users;
    o.json = instance_to_json(inst);

    std::vector<std::vector<ScheduleOption>> options;
    for (const auto& u : users) options.push_back(option_universe(u, system, levels, 100000));
    const ValuationBounds bounds = compute_bounds(users, system, options);
    const RatioBounds rb = ratio_bounds(system, bounds);

    OnlineMechanism mechanism(system, bounds, levels);
    const auto online = run_sequence(users, mechanism);

    const auto start = std::chrono::steady_clock::now();
    const OfflineSolution offline = solve_offline(users, system, levels, limits);
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    o.ratio = empirical_ratio(offline.welfare, online.summary.welfare);
    o.m1 = rb.alpha_1 - o.ratio;
    if (o.ratio > rb.alpha_1 + kRatioTolerance)
      o.failures.push_back("ratio " + format_number(o.ratio) + " exceeds alpha_1 " +
                           format_number(rb.alpha_1));

    bool below_solar = true;
    for (std::size_t fi = 0; fi < system.facilities.size(); ++fi)
      for (Slot t = 0; t < system.grid.horizon; ++t) {
        const double y = online.state.procurement_demand(static_cast<int>(fi), t);
        if (y > 0 && !(y < system.facilities[fi].solar[t])) below_solar = false;
      }
    if (below_solar) {
      o.alpha2 = true;
      o.m2 = rb.alpha_2 - o.ratio;
      if (o.ratio > rb.alpha_2 + kRatioTolerance)
        o.failures.push_back("ratio " + format_number(o.ratio) + " exceeds alpha_2 " +
                             format_number(rb.alpha_2) + " with demand below solar");
    }

    std::vector<double> utilities;
    for (const auto& d : online.decisions) utilities.push_back(d.dual_utility);
    const auto dual = evaluate_dual(snapshot_prices(mechanism.prices(online.state, 0)), utilities,
                                    users, system, levels);
    o.dual = true;
    o.gap = dual.objective - offline.welfare;
    if (!dual.feasible)
      o.failures.push_back("dual infeasible at final prices (" +
                           std::to_string(dual.violations) + " utility constraints, worst slack " +
                           format_number(dual.worst_slack) + ")");
    if (dual.objective < online.summary.welfare - kRatioTolerance)
      o.failures.push_back("dual objective " + format_number(dual.objective) +
                           " below online welfare " + format_number(online.summary.welfare));
    if (dual.feasible && dual.objective < offline.welfare - kRatioTolerance)
      o.failures.push_back("dual objective " + format_number(dual.objective) +
                           " below offline welfare " + format_number(offline.welfare));

    if (caps.forecast_width_per_slot > 0.0) {
      auto forecasts = interval_forecasts(system, caps.forecast_width_per_slot);
      const RatioBounds rb3 = ratio_bounds(system, bounds, &forecasts);
      OnlineMechanism fmech(system, bounds, levels, forecasts);
      const auto frun = run_sequence(users, fmech);
      const double ratio3 = empirical_ratio(offline.welfare, frun.summary.welfare);
      o.forecast = true;
      o.m3 = rb3.alpha_3 - ratio3;
      if (ratio3 > rb3.alpha_3 + kRatioTolerance)
        o.failures.push_back("forecast ratio " + format_number(ratio3) + " exceeds alpha_3 " +
                             format_number(rb3.alpha_3));
    }
  });

  VerificationReport r;
  r.instances = count;
  bool first1 = true, first2 = true, first3 = true, firstg = true;
  for (const auto& o : outcomes) {
    r.max_ratio = std::max(r.max_ratio, o.ratio);
    r.max_oracle_seconds = std::max(r.max_oracle_seconds, o.seconds);
    r.alpha1_margin = first1 ? o.m1 : std::min(r.alpha1_margin, o.m1);
    first1 = false;
    if (o.alpha2) {
      ++r.alpha2_instances;
      r.alpha2_margin = first2 ? o.m2 : std::min(r.alpha2_margin, o.m2);
      first2 = false;
    }
    if (o.forecast) {
      ++r.forecast_instances;
      r.alpha3_margin = first3 ? o.m3 : std::min(r.alpha3_margin, o.m3);
      first3 = false;
    }
    if (o.dual) {
      ++r.dual_checks;
      r.min_dual_gap = firstg ? o.gap : std::min(r.min_dual_gap, o.gap);
      firstg = false;
    }
    for (const auto& f : o.failures) r.failures.push_back({f, o.json});
  }
  return r;
}

std::string instance_to_json(const Instance& instance) {
  json facilities = json::array();
  for (const auto& f : instance.system.facilities)
    facilities.push_back({{"id", f.id},
                          {"evse_count", f.evse_count},
                          {"cables_per_evse", f.cables_per_evse},
                          {"evse_max_energy", f.evse_max_energy},
                          {"solar_rating", f.solar_rating},
                          {"solar", f.solar},
                          {"transformer_limit", f.transformer_limit},
                          {"grid_price", f.grid_price}});
  json users = json::array();
  for (const auto& u : instance.users) {
    json prefs = json::array();
    for (const auto& p : u.preferences) prefs.push_back({p.facility_id, p.value});
    users.push_back({{"id", u.id},
                     {"submission", u.submission},
                     {"arrival", u.arrival},
                     {"departure", u.departure},
                     {"energy", u.energy},
                     {"preferences", prefs}});
  }
  json root{{"grid",
             {{"horizon", instance.system.grid.horizon},
              {"slot_hours", instance.system.grid.slot_hours}}},
            {"facilities", facilities},
            {"users", users}};
  return root.dump();
}

Instance instance_from_json(const std::string& text) {
  const json root = json::parse(text);
  Instance inst;
  inst.system.grid.horizon = root.at("grid").at("horizon").get<int>();
  inst.system.grid.slot_hours = root.at("grid").at("slot_hours").get<double>();
  for (const auto& fj : root.at("facilities")) {
    FacilityConfig f;
    f.id = fj.at("id").get<int>();
    f.evse_count = fj.at("evse_count").get<int>();
    f.cables_per_evse = fj.at("cables_per_evse").get<int>();
    f.evse_max_energy = fj.at("evse_max_energy").get<int>();
    f.solar_rating = fj.at("solar_rating").get<double>();
    f.solar = fj.at("solar").get<std::vector<double>>();
    f.transformer_limit = fj.at("transformer_limit").get<std::vector<double>>();
    f.grid_price = fj.at("grid_price").get<std::vector<double>>();
    inst.system.facilities.push_back(std::move(f));
  }
  for (const auto& uj : root.at("users")) {
    UserRequest u;
    u.id = uj.at("id").get<int>();
    u.submission = uj.at("submission").get<int>();
    u.arrival = uj.at("arrival").get<int>();
    u.departure = uj.at("departure").get<int>();
    u.energy = uj.at("energy").get<int>();
    for (const auto& p : uj.at("preferences"))
      u.preferences.push_back({p.at(0).get<int>(), p.at(1).get<double>()});
    inst.users.push_back(std::move(u));
  }
  return inst;
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

void write_summary(std::ostream& out, const WelfareSummary& s) {
  out << s.arrivals << ',' << s.admitted << ',' << format_number(s.total_value) << ','
      << format_number(s.total_utility) << ',' << format_number(s.total_payments) << ','
      << format_number(s.electricity_cost) << ',' << format_number(s.welfare) << ','
      << format_number(s.solar_used) << ',' << format_number(s.solar_available) << ','
      << format_number(s.solar_fraction());
}

constexpr const char* kSummaryHeader =
    "arrivals,admitted,total_value,total_utility,payments,electricity_cost,welfare,solar_used,"
    "solar_available,solar_fraction";

}  // namespace

void write_daily_csv(std::ostream& out, const ExperimentReport& report) {
  out << "seed,day,mode," << kSummaryHeader << ",violations\n";
  for (const auto& d : report.days) {
    out << d.seed << ',' << d.day << ',' << to_string(d.mode) << ',';
    write_summary(out, d.summary);
    out << ',' << d.violations.size() << '\n';
  }
}

void write_compare_csv(std::ostream& out, const CompareReport& report) {
  out << "arrivals_per_day,seed,day,mode," << kSummaryHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.arrivals_per_day << ',' << r.seed << ',' << r.day << ',' << to_string(r.mode) << ',';
    write_summary(out, r.summary);
    out << '\n';
  }
}

void write_buffer_csv(std::ostream& out, const CompareReport& report) {
  out << "buffer_hours,seed,day," << kSummaryHeader << '\n';
  for (const auto& r : report.buffers) {
    out << format_number(r.buffer_hours) << ',' << r.seed << ',' << r.day << ',';
    write_summary(out, r.summary);
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "evse_count,cables_per_evse,daily_welfare,horizon_welfare,cost,net,best\n";
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const auto& r = report.rows[k];
    out << r.evse_count << ',' << r.cables_per_evse << ',' << format_number(r.daily_welfare)
        << ',' << format_number(r.horizon_welfare) << ',' << format_number(r.cost) << ','
        << format_number(r.net) << ',' << (k == report.best ? 1 : 0) << '\n';
  }
}

void write_verification_csv(std::ostream& out, const VerificationReport& r) {
  out << "metric,value\n";
  out << "instances," << r.instances << '\n';
  out << "alpha2_instances," << r.alpha2_instances << '\n';
  out << "forecast_instances," << r.forecast_instances << '\n';
  out << "dual_checks," << r.dual_checks << '\n';
  out << "max_ratio," << format_number(r.max_ratio) << '\n';
  out << "alpha1_margin," << format_number(r.alpha1_margin) << '\n';
  out << "alpha2_margin," << format_number(r.alpha2_margin) << '\n';
  out << "alpha3_margin," << format_number(r.alpha3_margin) << '\n';
  out << "min_dual_gap," << format_number(r.min_dual_gap) << '\n';
  out << "failures," << r.failures.size() << '\n';
}

}  // namespace parkcharge
