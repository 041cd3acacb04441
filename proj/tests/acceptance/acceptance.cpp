// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "parkcharge/harness.hpp"

using namespace parkcharge;

namespace {

std::string config_dir = PARKCHARGE_SOURCE_DIR "/configs";

struct Outcome {
  bool pass = false;
  std::string detail;
  // Deterministic report body compared across repeated runs.
  std::string report;
};

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
int pick(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(unit(rng) * (hi - lo + 1));
}
double between(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

std::string num(double v) { return format_number(v); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig load(const std::string& name) { return load_config(config_dir + "/" + name); }

// 1. closed-form pricing identities --------------------------------------

Outcome pricing_identities() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<System> systems;
  for (const char* name : {"cec_single_facility.json", "fcfs_morning.json", "multi_facility.json"}) {
    const auto c = load(name);
    systems.push_back(with_solar(c.system, scenario_for_seed(c, 1).days.front()));
  }
  std::mt19937_64 rng(101);
  for (int i = 0; i < 50; ++i) {
    System s;
    s.grid.horizon = 4;
    FacilityConfig f;
    f.id = 1;
    f.evse_count = pick(rng, 1, 15);
    f.cables_per_evse = pick(rng, 1, 8);
    f.evse_max_energy = pick(rng, 1, 11);
    for (Slot t = 0; t < 4; ++t) {
      f.solar.push_back(t == 0 ? 0.0 : between(rng, 0.5, 60.0));
      f.transformer_limit.push_back(between(rng, 1.0, 80.0));
      f.grid_price.push_back(between(rng, 0.05, 0.3));
    }
    f.solar_rating = *std::max_element(f.solar.begin(), f.solar.end());
    s.facilities.push_back(f);
    systems.push_back(s);
  }

  int checks = 0, failures = 0;
  double worst = 0.0, worst_limit = 0.0;
  std::ostringstream report;
  auto expect = [&](double got, double want, double tol, double& track) {
    ++checks;
    const double err = std::abs(got - want);
    track = std::max(track, err);
    if (!(err <= tol)) ++failures;
  };
  for (const auto& sys : systems) {
    ExperimentConfig c;
    c.system = sys;
    c.scenario.stay = Distribution::uniform(1, 8);
    const ValuationBounds b = derive_bounds(c, sys);
    const double r = b.aggregate_r;
    for (const auto& f : sys.facilities) {
      expect(cable_price(0, f, b), b.cable_lower / (2 * r), 1e-9, worst);
      expect(cable_price(f.cables_per_evse, f, b), b.cable_upper, 1e-9, worst);
      expect(energy_price(f.evse_max_energy, f, b), b.energy_upper, 1e-9, worst);
      for (Slot t = 0; t < sys.grid.horizon; ++t) {
        const double s = f.solar[t];
        expect(procurement_price(s + f.transformer_limit[t], t, f, b), b.procurement_upper, 1e-9,
               worst);
        if (s > 0.0)
          expect(procurement_price(s * (1 - 1e-9), t, f, b), f.grid_price[t], 1e-6, worst_limit);
      }
      report << f.id << ',' << num(cable_price(0, f, b)) << ',' << num(b.procurement_upper) << '\n';
    }
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = failures == 0 && elapsed < 1.0;
  o.detail = std::to_string(checks) + " identities over " + std::to_string(systems.size()) +
             " systems, " + std::to_string(failures) + " off; max error " + num(worst) +
             " (limit check " + num(worst_limit) + "); " + num(elapsed) + " s";
  o.report = report.str();
  return o;
}

// 2. capacity safety and no revocation -----------------------------------

bool same(const Assignment& a, const Assignment& b) {
  return a.user_id == b.user_id && a.payment == b.payment &&
         a.option.facility_id == b.option.facility_id && a.option.evse == b.option.evse &&
         a.option.start == b.option.start && a.option.end == b.option.end &&
         a.option.charge == b.option.charge;
}

ExperimentConfig random_scenario_config(std::uint64_t index) {
  std::mt19937_64 rng(day_seed(20240601, static_cast<int>(index)));
  ExperimentConfig c;
  c.system.grid.horizon = 24;
  const int facilities = 1 + static_cast<int>(index % 6);
  for (int l = 0; l < facilities; ++l) {
    FacilityConfig f;
    f.id = l + 1;
    f.evse_count = pick(rng, 1, 15);
    f.cables_per_evse = pick(rng, 1, 4);
    f.evse_max_energy = pick(rng, 3, 11);
    f.solar_rating = between(rng, 0.0, 80.0);
    f.solar.assign(24, 0.0);
    f.transformer_limit.assign(24, between(rng, 10.0, 80.0));
    const double base = between(rng, 0.08, 0.2);
    f.grid_price.assign(24, base);
    for (Slot t = 16; t < 21; ++t) f.grid_price[t] = 1.5 * base;
    c.system.facilities.push_back(f);
  }
  auto& p = c.scenario;
  p.arrivals_per_day = index % 5 == 0 ? 600 : pick(rng, 1, 600);
  p.arrival = index % 2 ? Distribution::bimodal(0, 22, 8, 2, 17, 2.5, 0.55)
                        : Distribution::uniform(0, 22);
  p.stay = Distribution::normal(1, 10, 5, 2.5);
  p.energy = Distribution::uniform(1, 20);
  p.valuation = Distribution::uniform(1, 10);
  p.preferences_min = 1;
  p.preferences_max = std::min(3, facilities);
  p.valuation_jitter = 0.2;
  p.solar.day_factor_lo = 0.6;
  c.forecast_width_per_slot = 1.0;
  c.threads = 1;
  return c;
}

Outcome capacity_safety() {
  const auto start = std::chrono::steady_clock::now();
  const int scenarios = 1000;
  struct Result {
    int arrivals = 0, admitted = 0, faults = 0, mutations = 0, violations = 0;
    double welfare = 0.0;
    std::vector<std::string> messages;
  };
  std::vector<Result> results(scenarios);
  parallel_for(scenarios, 0, [&](std::size_t i) {
    Result& res = results[i];
    const ExperimentConfig c = random_scenario_config(i);
    const DayTrace day = scenario_for_seed(c, 1000 + i).days.front();
    const System system = with_solar(c.system, day);
    res.arrivals = static_cast<int>(day.users.size());

    OnlineMechanism mech(system, derive_bounds(c, system), c.levels);
    AllocationState state(system);
    std::vector<Assignment> snapshot;
    for (const auto& u : day.users) {
      try {
        const Decision d = mech.process_arrival(state, u);
        if (d.accepted) ++res.admitted;
      } catch (const CapacityFault& e) {
        ++res.faults;
        res.messages.push_back(e.what());
      }
      const auto& now = state.assignments();
      if (now.size() < snapshot.size() || now.size() > snapshot.size() + 1) ++res.mutations;
      for (std::size_t k = 0; k < std::min(now.size(), snapshot.size()); ++k)
        if (!same(now[k], snapshot[k])) ++res.mutations;
      if (now.size() > snapshot.size()) snapshot.push_back(now.back());
    }
    for (auto& v : state.capacity_violations(system)) res.messages.push_back(v);
    for (auto& v : state.audit(system)) res.messages.push_back(v);

    const ForecastMode fm = i % 2 ? ForecastMode::Interval : ForecastMode::Perfect;
    for (Mode m : {Mode::Mechanism, Mode::Fcfs}) {
      const DayRecord rec = run_day(c, m, system, day.users, fm, 1000 + i, 0);
      for (auto& v : rec.violations) res.messages.push_back(to_string(m) + ": " + v);
      if (m == Mode::Mechanism) res.welfare = rec.summary.welfare;
    }
    res.violations = static_cast<int>(res.messages.size());
  });

  Outcome o;
  std::ostringstream report;
  int faults = 0, mutations = 0, violations = 0, big = 0;
  long arrivals = 0;
  std::string first;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    faults += r.faults;
    mutations += r.mutations;
    violations += r.violations;
    arrivals += r.arrivals;
    if (r.arrivals == 600) ++big;
    if (first.empty() && !r.messages.empty()) first = r.messages.front();
    report << i << ',' << r.arrivals << ',' << r.admitted << ',' << num(r.welfare) << ','
           << r.violations << '\n';
  }
  const double elapsed = seconds_since(start);
  o.pass = faults == 0 && mutations == 0 && violations == 0;
  o.detail = std::to_string(scenarios) + " scenarios (" + std::to_string(arrivals) +
             " arrivals, " + std::to_string(big) + " days at 600), " + std::to_string(faults) +
             " capacity faults, " + std::to_string(mutations) + " assignment mutations, " +
             std::to_string(violations) + " invariant violations; " + num(elapsed) + " s" +
             (first.empty() ? "" : "; first: " + first);
  o.report = report.str();
  return o;
}

// 3 and 4. competitive ratio and weak duality ----------------------------

VerificationReport verification() {
  const auto c = load("small_instances.json");
  return verify_bounds(c.verify, c.oracle, 1, c.threads);
}

bool mentions(const std::string& s, const std::string& what) {
  return s.find(what) != std::string::npos;
}

Outcome competitive_ratio(const VerificationReport& r) {
  int f1 = 0, f2 = 0, f3 = 0;
  for (const auto& f : r.failures) {
    if (mentions(f.reason, "exceeds alpha_1")) ++f1;
    if (mentions(f.reason, "exceeds alpha_2")) ++f2;
    if (mentions(f.reason, "exceeds alpha_3")) ++f3;
  }
  Outcome o;
  o.pass = r.instances >= 200 && f1 == 0 && f2 == 0 && f3 == 0 && r.max_oracle_seconds < 5.0;
  std::ostringstream d;
  d << r.instances << " instances, max ratio " << num(r.max_ratio) << "; alpha_1: " << f1
    << " over (min margin " << num(r.alpha1_margin) << "); alpha_2: " << f2 << " over of "
    << r.alpha2_instances << " below-solar instances (min margin " << num(r.alpha2_margin)
    << "); alpha_3: " << f3 << " over of " << r.forecast_instances << " (min margin "
    << num(r.alpha3_margin) << "); slowest oracle " << num(r.max_oracle_seconds) << " s";
  o.detail = d.str();
  std::ostringstream report;
  write_verification_csv(report, r);
  o.report = report.str();
  return o;
}

Outcome weak_duality(const VerificationReport& r) {
  int failures = 0;
  for (const auto& f : r.failures)
    if (mentions(f.reason, "dual")) ++failures;
  Outcome o;
  o.pass = r.dual_checks == r.instances && r.instances >= 200 && failures == 0;
  o.detail = std::to_string(r.dual_checks) + " dual evaluations, " + std::to_string(failures) +
             " violations; min dual objective - offline welfare " + num(r.min_dual_gap);
  std::ostringstream report;
  write_verification_csv(report, r);
  o.report = report.str();
  return o;
}

// 5. allocation-payment relationship ------------------------------------

Outcome allocation_payment() {
  std::mt19937_64 rng(505);
  int configs = 0, points = 0, failures = 0;
  double worst = 0.0;
  std::ostringstream report;
  while (configs < 50) {
    System s;
    s.grid.horizon = 1;
    FacilityConfig f;
    f.id = 1;
    f.evse_count = pick(rng, 1, 15);
    f.cables_per_evse = pick(rng, 1, 8);
    f.evse_max_energy = pick(rng, 1, 11);
    f.solar = {configs % 5 == 0 ? 0.0 : between(rng, 0.5, 60.0)};
    f.solar_rating = f.solar[0];
    f.transformer_limit = {between(rng, 1.0, 80.0)};
    f.grid_price = {between(rng, 0.05, 0.3)};
    s.facilities.push_back(f);
    ValuationBounds b;
    b.aggregate_r = aggregate_resources(s);
    b.procurement_lower = f.grid_price[0] * between(rng, 1.05, 3.0);
    b.procurement_upper = b.procurement_lower * between(rng, 2.0, 100.0);
    b.cable_lower = b.energy_lower = b.procurement_lower;
    b.cable_upper = b.energy_upper = b.procurement_upper;
    if (!bounds_violations(b, s).empty()) continue;
    const double alpha = ratio_bounds(s, b).slot_alpha[0][0];
    const auto curve = procurement_curve(f, 0);
    for (int k = 0; k < 1000; ++k) {
      const double y = curve.capacity() * k / 1000.0;
      const double slack = allocation_payment_slack(y, curve, b, alpha);
      ++points;
      worst = std::min(worst, slack);
      if (slack < -1e-8) ++failures;
    }
    report << configs << ',' << num(alpha) << '\n';
    ++configs;
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = std::to_string(configs) + " configurations, " + std::to_string(points) +
             " grid points, " + std::to_string(failures) + " below -1e-8; min slack " + num(worst);
  o.report = report.str() + num(worst) + '\n';
  return o;
}

// 6 and 7. mechanism vs. FCFS ---------------------------------------------

CompareReport fcfs_comparison() {
  const auto c = load("fcfs_morning.json");
  return compare(c, seed_range(1, 50), {Mode::Mechanism, Mode::Fcfs}, ForecastMode::Perfect);
}

std::map<int, std::map<std::uint64_t, std::pair<WelfareSummary, WelfareSummary>>> by_level(
    const CompareReport& r) {
  std::map<int, std::map<std::uint64_t, std::pair<WelfareSummary, WelfareSummary>>> out;
  for (const auto& row : r.rows) {
    auto& cell = out[row.arrivals_per_day][row.seed];
    (row.mode == Mode::Mechanism ? cell.first : cell.second) = row.summary;
  }
  return out;
}

Outcome utility_trend(const CompareReport& r) {
  const auto levels = by_level(r);
  bool pass = r.violations.empty();
  int low_levels = 0, high_levels = 0;
  std::ostringstream d;
  for (const auto& [level, seeds] : levels) {
    const bool low = level <= 20;
    const bool high = level >= 100 && level <= 120;
    if (!low && !high) continue;
    int good = 0;
    for (const auto& [seed, pair] : seeds) {
      const double mech = pair.first.total_utility, fcfs = pair.second.total_utility;
      if (low ? std::abs(mech - fcfs) <= 0.1 * std::abs(fcfs) : mech >= fcfs) ++good;
    }
    const double frac = static_cast<double>(good) / seeds.size();
    if (frac < 0.8) pass = false;
    (low ? low_levels : high_levels) += 1;
    d << level << ":" << num(std::round(frac * 1000) / 1000) << ' ';
  }
  if (low_levels == 0 || high_levels == 0) pass = false;
  Outcome o;
  o.pass = pass;
  o.detail = "share of 50 seeds (within 10% at <=20 arrivals, >= FCFS at 100-120): " + d.str() +
             "; " + std::to_string(r.violations.size()) + " run violations";
  std::ostringstream report;
  write_compare_csv(report, r);
  o.report = report.str();
  return o;
}

Outcome solar_trend(const CompareReport& r) {
  const auto levels = by_level(r);
  Outcome o;
  const auto it = levels.find(100);
  if (it == levels.end()) {
    o.detail = "no 100-arrival runs";
    return o;
  }
  int good = 0;
  double mech = 0.0, fcfs = 0.0;
  for (const auto& [seed, pair] : it->second) {
    if (pair.first.solar_fraction() > pair.second.solar_fraction()) ++good;
    mech += pair.first.solar_fraction();
    fcfs += pair.second.solar_fraction();
  }
  const int n = static_cast<int>(it->second.size());
  o.pass = n == 50 && good >= 0.9 * n;
  o.detail = std::to_string(good) + "/" + std::to_string(n) +
             " seeds with higher solar use; mean fraction mechanism " + num(mech / n) +
             " vs FCFS " + num(fcfs / n);
  std::ostringstream report;
  for (const auto& [seed, pair] : it->second)
    report << seed << ',' << num(pair.first.solar_fraction()) << ','
           << num(pair.second.solar_fraction()) << '\n';
  o.report = report.str();
  return o;
}

// 8. departure buffers ---------------------------------------------------

Outcome buffer_trend() {
  const auto c = load("multi_facility.json");
  const auto r = compare(c, seed_range(1, 20), {Mode::Mechanism}, ForecastMode::Perfect);
  const double l1 = r.buffer_loss(1.0), l2 = r.buffer_loss(2.0);
  Outcome o;
  o.pass = r.violations.empty() && l1 > 0 && l2 > l1 && l1 >= 0.05 && l1 <= 0.45 &&
           l2 >= 0.05 && l2 <= 0.45;
  o.detail = "mean welfare loss 1 h " + num(std::round(l1 * 1e4) / 1e4) + ", 2 h " +
             num(std::round(l2 * 1e4) / 1e4) + " over 20 seeds; " +
             std::to_string(r.violations.size()) + " run violations";
  std::ostringstream report;
  write_buffer_csv(report, r);
  o.report = report.str();
  return o;
}

// 9. investment sweep ----------------------------------------------------

Outcome investment_shape() {
  const auto c = load("multi_facility.json");
  const auto r = investment_sweep(c, seed_range(1, 1));
  const auto& best = r.rows[r.best];
  Outcome o;
  o.pass = r.interior_maximum();
  o.detail = std::to_string(r.rows.size()) + " grid points; best " +
             std::to_string(best.evse_count) + " EVSEs x " + std::to_string(best.cables_per_evse) +
             " cables, net " + num(std::round(best.net)) + " vs smallest " +
             num(std::round(r.rows.front().net)) + " and largest " +
             num(std::round(r.rows.back().net));
  std::ostringstream report;
  write_sweep_csv(report, r);
  o.report = report.str();
  return o;
}

void print(int criterion, const std::string& title, const Outcome& o) {
  std::printf("criterion %d: %s  %s: %s\n", criterion, o.pass ? "PASS" : "FAIL", title.c_str(),
              o.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) config_dir = argv[1];
  bool all = true;

  auto run = [&](int n, const std::string& title, const std::function<Outcome()>& fn) {
    const Outcome o = fn();
    print(n, title, o);
    all = all && o.pass;
    return o.report;
  };

  std::vector<std::string> first;
  first.push_back(run(1, "pricing identities", pricing_identities));
  first.push_back(run(2, "capacity safety and no revocation", capacity_safety));
  const auto verified = verification();
  first.push_back(run(3, "empirical competitive ratio", [&] { return competitive_ratio(verified); }));
  first.push_back(run(4, "weak duality", [&] { return weak_duality(verified); }));
  first.push_back(run(5, "allocation-payment relationship", allocation_payment));
  const auto fcfs = fcfs_comparison();
  first.push_back(run(6, "user utility vs. FCFS", [&] { return utility_trend(fcfs); }));
  first.push_back(run(7, "solar utilization vs. FCFS", [&] { return solar_trend(fcfs); }));
  first.push_back(run(8, "departure buffer loss", buffer_trend));
  first.push_back(run(9, "investment sweep interior maximum", investment_shape));

  // 10: everything again from scratch, including the shared runs
  const auto verified2 = verification();
  const auto fcfs2 = fcfs_comparison();
  std::vector<std::string> second{
      pricing_identities().report,       capacity_safety().report,
      competitive_ratio(verified2).report, weak_duality(verified2).report,
      allocation_payment().report,       utility_trend(fcfs2).report,
      solar_trend(fcfs2).report,         buffer_trend().report,
      investment_shape().report};
  std::string differing;
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    bytes += first[i].size();
    if (first[i] != second[i]) differing += " " + std::to_string(i + 1);
  }
  Outcome det;
  det.pass = differing.empty();
  det.detail = det.pass ? "repeated reports of criteria 1-9 are byte-identical (" +
                              std::to_string(bytes) + " bytes)"
                        : "reports differ for criteria" + differing;
  print(10, "determinism", det);
  all = all && det.pass;
  return all ? 0 : 1;
}
