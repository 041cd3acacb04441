#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "parkcharge/harness.hpp"

using namespace parkcharge;
using namespace testing_helpers;

namespace {

const char* kSmall = R"({
  "schema_version": 1,
  "name": "tiny",
  "grid": {"horizon": 24, "slot_hours": 1.0},
  "facilities": [{"id": 1, "evse_count": 3, "cables_per_evse": 2, "evse_max_energy": 7,
                  "solar_rating_kw": 20, "transformer_limit": 15}],
  "scenario": {
    "days": 2, "arrivals_per_day": 25,
    "arrival": {"kind": "normal", "lo": 6, "hi": 18, "mean": 11, "sd": 3},
    "stay": {"kind": "uniform", "lo": 1, "hi": 6},
    "energy": {"kind": "uniform", "lo": 1, "hi": 12},
    "valuation": {"kind": "uniform", "lo": 1, "hi": 10}
  },
  "bounds": {"procurement_lower": 0.25},
  "forecast": {"width_per_slot": 1.0},
  "threads": 1
})";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kSmall;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("investment cost of seven EVSEs with six cables over two years") {
  const InvestmentParams p;
  CHECK(investment_cost(p, {7}, {6}) == doctest::Approx(176162.0));
  InvestmentParams none = p;
  none.months = 0;
  CHECK(investment_cost(none, {7}, {6}) == doctest::Approx(7 * (6 * 3343.0 + 3308.0)));
  CHECK(investment_cost(p, {7, 7}, {6, 6}) == doctest::Approx(2 * 176162.0));
}

TEST_CASE("config parsing") {
  const auto c = parse_config(kSmall);
  CHECK(c.system.facilities.size() == 1);
  CHECK(c.system.facilities[0].grid_price[0] == doctest::Approx(0.127));
  CHECK(c.scenario.arrivals_per_day == 25);
  CHECK(c.forecast_width_per_slot == 1.0);
  CHECK(parse_config(config_echo(c)).scenario.arrivals_per_day == 25);

  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(with("\"schema_version\": 1", "\"schema_version\": 2")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("\"name\"", "\"nmae\"")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("\"evse_count\": 3", "\"evse_count\": 0")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("\"kind\": \"uniform\", \"lo\": 1, \"hi\": 6",
                                    "\"kind\": \"uniform\", \"lo\": 30, \"hi\": 40")),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/parkcharge.json"), ConfigError);
}

TEST_CASE("derived bounds cover the scenario") {
  const auto c = parse_config(kSmall);
  const auto b = derive_bounds(c, c.system);
  CHECK(b.procurement_lower == 0.25);
  CHECK(b.cable_upper == 10.0);
  CHECK(b.cable_lower > 0.0);
  const auto trace = scenario_for_seed(c, 3);
  for (const auto& d : trace.days)
    CHECK(bounds_cross_check(b, d.users, c.system, c.levels).empty());
}

TEST_CASE("experiments are reproducible and consistent") {
  auto c = parse_config(kSmall);
  for (Mode mode : {Mode::Mechanism, Mode::Fcfs, Mode::Cec}) {
    for (ForecastMode f : {ForecastMode::Perfect, ForecastMode::Interval}) {
      const auto a = run_experiment(c, mode, {4, 5}, f);
      const auto b = run_experiment(c, mode, {4, 5}, f);
      CHECK(a.violations().empty());
      REQUIRE(a.days.size() == 4);
      std::ostringstream sa, sb;
      write_daily_csv(sa, a);
      write_daily_csv(sb, b);
      CHECK(sa.str() == sb.str());
      for (const auto& d : a.days) {
        const auto& s = d.summary;
        CHECK(s.welfare == doctest::Approx(s.total_value - s.electricity_cost));
        CHECK(s.total_value == doctest::Approx(s.total_utility + s.total_payments));
      }
    }
  }
  // thread count does not change results
  c.threads = 3;
  std::ostringstream s1, s3;
  write_daily_csv(s3, run_experiment(c, Mode::Mechanism, {7}, ForecastMode::Perfect));
  c.threads = 1;
  write_daily_csv(s1, run_experiment(c, Mode::Mechanism, {7}, ForecastMode::Perfect));
  CHECK(s1.str() == s3.str());
}

TEST_CASE("offline mode refuses large days") {
  auto c = parse_config(kSmall);
  c.scenario.arrivals_per_day = 600;
  c.scenario.days = 1;
  CHECK_THROWS_AS(run_experiment(c, Mode::Offline, {1}, ForecastMode::Perfect), InstanceTooLarge);
}

TEST_CASE("random small instances round trip through JSON") {
  const VerifyConfig caps;
  for (int i = 0; i < 20; ++i) {
    const auto inst = random_small_instance(caps, 9, i);
    CHECK(find_violations(inst).empty());
    CHECK(static_cast<int>(inst.users.size()) <= caps.max_users);
    const auto back = instance_from_json(instance_to_json(inst));
    CHECK(instance_to_json(back) == instance_to_json(inst));
  }
  CHECK(instance_to_json(random_small_instance(caps, 9, 4)) ==
        instance_to_json(random_small_instance(caps, 9, 4)));
}

TEST_CASE("bound verification on a handful of instances") {
  VerifyConfig caps;
  caps.instances = 6;
  OracleLimits limits;
  limits.option_cap = 400;
  const auto r = verify_bounds(caps, limits, 1, 1);
  CHECK(r.instances == 6);
  CHECK(r.dual_checks == 6);
  for (const auto& f : r.failures) MESSAGE(f.reason);
  std::ostringstream out;
  write_verification_csv(out, r);
  CHECK(out.str().find("max_ratio") != std::string::npos);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
}
