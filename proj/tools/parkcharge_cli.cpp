#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "parkcharge/harness.hpp"

namespace fs = std::filesystem;
using namespace parkcharge;

namespace {

struct Common {
  std::string config;
  std::string scenario;
  std::string solar;
  std::uint64_t seed = 1;
  int seeds = 1;
  std::string mode = "mechanism";
  std::string out;
  std::string forecast = "perfect";
  int threads = -1;
  bool with_cec = false;
};

void add_common(CLI::App* app, Common& c, bool mode) {
  app->add_option("--config", c.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "first seed");
  app->add_option("--seeds", c.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory for CSV files");
  app->add_option("--threads", c.threads, "worker threads (0: all cores)");
  if (mode) {
    app->add_option("--mode", c.mode, "controller")
        ->check(CLI::IsMember({"mechanism", "fcfs", "cec", "offline"}));
    app->add_option("--forecast", c.forecast, "solar information")
        ->check(CLI::IsMember({"perfect", "interval"}));
  }
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig config = load_config(c.config);
  if (c.threads >= 0) config.threads = c.threads;
  return config;
}

std::ofstream open_out(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(c.out) / name).string());
  return f;
}

int print_violations(const std::vector<std::string>& violations) {
  for (const auto& v : violations) std::cerr << "violation: " << v << '\n';
  return violations.empty() ? 0 : 1;
}

int simulate(const Common& c) {
  const ExperimentConfig config = load(c);
  std::optional<ScenarioTrace> imported;
  if (!c.scenario.empty()) {
    std::ifstream in(c.scenario);
    if (!in) throw std::runtime_error("cannot open scenario " + c.scenario);
    imported = read_requests_csv(in);
    if (!c.solar.empty()) {
      std::ifstream sin(c.solar);
      if (!sin) throw std::runtime_error("cannot open solar " + c.solar);
      read_solar_csv(sin, *imported, config.system);
    } else {
      for (auto& d : imported->days) {
        ScenarioParams p = config.scenario;
        d.solar = sample_day(p, config.system, d.day).solar;
      }
    }
  }
  const auto report = run_experiment(config, parse_mode(c.mode), seed_range(c.seed, c.seeds),
                                     parse_forecast_mode(c.forecast),
                                     imported ? &*imported : nullptr);
  std::printf("%-6s %-4s %-9s %8s %8s %12s %12s %12s %8s\n", "seed", "day", "mode", "arrivals",
              "admitted", "welfare", "utility", "cost", "solar");
  for (const auto& d : report.days)
    std::printf("%-6llu %-4d %-9s %8d %8d %12.4f %12.4f %12.4f %8.4f\n",
                static_cast<unsigned long long>(d.seed), d.day, to_string(d.mode).c_str(),
                d.summary.arrivals, d.summary.admitted, d.summary.welfare,
                d.summary.total_utility, d.summary.electricity_cost, d.summary.solar_fraction());
  std::printf("mean welfare %.6f\n", report.mean_welfare());
  if (!c.out.empty()) {
    auto f = open_out(c, "daily.csv");
    write_daily_csv(f, report);
    auto e = open_out(c, "config_echo.json");
    e << report.config_echo << '\n';
  }
  return print_violations(report.violations());
}

int compare_cmd(const Common& c) {
  const ExperimentConfig config = load(c);
  std::vector<Mode> modes{Mode::Mechanism, Mode::Fcfs};
  if (c.with_cec) modes.push_back(Mode::Cec);
  const auto report =
      compare(config, seed_range(c.seed, c.seeds), modes, parse_forecast_mode(c.forecast));

  std::map<std::pair<int, std::string>, std::pair<double, int>> utility, solar;
  for (const auto& r : report.rows) {
    auto key = std::make_pair(r.arrivals_per_day, to_string(r.mode));
    utility[key].first += r.summary.total_utility;
    utility[key].second += 1;
    solar[key].first += r.summary.solar_fraction();
    solar[key].second += 1;
  }
  std::printf("%-9s %-9s %14s %14s\n", "arrivals", "mode", "mean_utility", "mean_solar");
  for (const auto& [key, v] : utility)
    std::printf("%-9d %-9s %14.4f %14.4f\n", key.first, key.second.c_str(), v.first / v.second,
                solar[key].first / solar[key].second);
  for (double h : config.buffer_hours)
    if (h > 0) std::printf("buffer %.2f h: mean welfare loss %.4f\n", h, report.buffer_loss(h));
  if (!c.out.empty()) {
    auto f = open_out(c, "compare.csv");
    write_compare_csv(f, report);
    if (!report.buffers.empty()) {
      auto b = open_out(c, "buffers.csv");
      write_buffer_csv(b, report);
    }
  }
  return print_violations(report.violations);
}

int verify_cmd(const Common& c, bool seeds_given) {
  const ExperimentConfig config = load(c);
  VerifyConfig caps = config.verify;
  if (seeds_given) caps.instances = c.seeds;
  const auto report = verify_bounds(caps, config.oracle, c.seed, config.threads);
  std::printf("instances %d (alpha_2 subset %d, forecast %d, dual %d)\n", report.instances,
              report.alpha2_instances, report.forecast_instances, report.dual_checks);
  std::printf("max ratio %.6f; margins alpha_1 %.6f alpha_2 %.6f alpha_3 %.6f; min dual gap %.6g\n",
              report.max_ratio, report.alpha1_margin, report.alpha2_margin, report.alpha3_margin,
              report.min_dual_gap);
  std::printf("max oracle time %.3f s\n", report.max_oracle_seconds);
  if (!c.out.empty()) {
    auto f = open_out(c, "verification.csv");
    write_verification_csv(f, report);
    auto j = open_out(c, "failures.jsonl");
    for (const auto& fail : report.failures)
      j << "{\"reason\":" << nlohmann::json(fail.reason).dump()
        << ",\"instance\":" << fail.instance_json << "}\n";
  }
  for (const auto& fail : report.failures)
    std::cerr << "violation: " << fail.reason << "\n  instance: " << fail.instance_json << '\n';
  return report.ok() ? 0 : 1;
}

int sweep_cmd(const Common& c) {
  const ExperimentConfig config = load(c);
  const auto report = investment_sweep(config, seed_range(c.seed, c.seeds));
  std::printf("%-5s %-7s %14s %14s %14s\n", "evse", "cables", "welfare", "cost", "net");
  for (const auto& r : report.rows)
    std::printf("%-5d %-7d %14.2f %14.2f %14.2f\n", r.evse_count, r.cables_per_evse,
                r.horizon_welfare, r.cost, r.net);
  const auto& best = report.rows[report.best];
  std::printf("best: %d EVSEs x %d cables, net %.2f (%s)\n", best.evse_count,
              best.cables_per_evse, best.net,
              report.interior_maximum() ? "interior" : "on the boundary");
  if (!c.out.empty()) {
    auto f = open_out(c, "sweep.csv");
    write_sweep_csv(f, report);
  }
  return 0;
}

int gen_cmd(const Common& c) {
  const ExperimentConfig config = load(c);
  const ScenarioTrace trace = scenario_for_seed(config, c.seed);
  if (c.out.empty()) {
    write_requests_csv(std::cout, trace);
    return 0;
  }
  auto r = open_out(c, "requests.csv");
  write_requests_csv(r, trace);
  auto s = open_out(c, "solar.csv");
  write_solar_csv(s, trace, config.system);
  std::size_t n = 0;
  for (const auto& d : trace.days) n += d.users.size();
  std::printf("wrote %zu requests over %zu days to %s\n", n, trace.days.size(), c.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parkcharge: online posted-price EV charging simulator"};
  app.require_subcommand(1);
  Common c;

  auto* sim = app.add_subcommand("simulate", "run one controller over seeded days");
  add_common(sim, c, true);
  sim->add_option("--scenario", c.scenario, "requests CSV to replay instead of sampling")
      ->check(CLI::ExistingFile);
  sim->add_option("--solar", c.solar, "solar CSV for a replayed scenario")
      ->check(CLI::ExistingFile);

  auto* cmp = app.add_subcommand("compare", "mechanism vs. baselines across demand levels");
  add_common(cmp, c, true);
  cmp->add_flag("--with-cec", c.with_cec, "include the certainty-equivalent controller");

  auto* ver = app.add_subcommand("verify-bounds", "check competitive-ratio bounds on small instances");
  add_common(ver, c, false);

  auto* sweep = app.add_subcommand("sweep-investment", "welfare minus investment over (EVSEs, cables)");
  add_common(sweep, c, false);

  auto* gen = app.add_subcommand("gen-scenario", "write a seeded scenario as CSV");
  add_common(gen, c, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return simulate(c);
    if (cmp->parsed()) return compare_cmd(c);
    if (ver->parsed()) return verify_cmd(c, ver->count("--seeds") > 0);
    if (sweep->parsed()) return sweep_cmd(c);
    if (gen->parsed()) return gen_cmd(c);
  } catch (const InstanceTooLarge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
