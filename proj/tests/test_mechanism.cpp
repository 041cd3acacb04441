#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "parkcharge/mechanism.hpp"

using namespace parkcharge;
using namespace testing_helpers;

namespace {

ValuationBounds good_bounds(const System& sys) { return bounds(0.25, 10.0, aggregate_resources(sys)); }

}  // namespace

TEST_CASE("admitted user pays the posted price and the state is updated") {
  const System sys = single(1, 2, 2, 2, 4.0, 4.0, 0.127);
  OnlineMechanism mech(sys, good_bounds(sys));
  AllocationState st(sys);
  const auto d = mech.process_arrival(st, user(1, 0, 1, 2, 10.0));
  REQUIRE(d.accepted);
  CHECK(d.payment.value() <= d.valuation);
  CHECK(d.utility == doctest::Approx(d.valuation - *d.payment));
  CHECK(st.find(1) != nullptr);
  CHECK(st.cable_demand(0, 0, 0) == 1);
  CHECK_THROWS_AS(mech.process_arrival(st, user(1, 0, 1, 2, 10.0)), std::logic_error);
}

TEST_CASE("rejection leaves the state untouched") {
  const System sys = single(1, 1, 2, 2, 4.0, 4.0, 0.127);
  OnlineMechanism mech(sys, good_bounds(sys));
  AllocationState st(sys);
  REQUIRE(mech.process_arrival(st, user(1, 0, 1, 2, 10.0)).accepted);
  const auto before = st.assignments().size();
  const auto d = mech.process_arrival(st, user(2, 0, 1, 1, 9.0));
  CHECK_FALSE(d.accepted);
  CHECK_FALSE(d.payment);
  CHECK(st.assignments().size() == before);
  CHECK(st.cable_demand(0, 0, 0) == 1);
}

TEST_CASE("unusable bounds are rejected at construction") {
  const System sys = single(1, 2, 2, 2, 4.0, 4.0, 0.127);
  auto b = good_bounds(sys);
  b.procurement_lower = 0.1;  // below the grid price
  CHECK_THROWS_AS(OnlineMechanism(sys, b), BoundsError);
}

TEST_CASE("random sequences: capacity, individual rationality, cost coverage, no revocation") {
  std::mt19937_64 rng(7);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 60; ++trial) {
    const int horizon = pick(3, 8);
    System sys = single(pick(1, 3), pick(1, 3), pick(1, 4), horizon, 0.0, pick(0, 5), 0.127);
    for (auto& s : sys.facilities[0].solar) s = 0.5 * pick(0, 8);
    sys.facilities[0].solar_rating = 4.0;
    OnlineMechanism mech(sys, good_bounds(sys));
    std::vector<UserRequest> users;
    for (int i = 0; i < 25; ++i) {
      const int a = pick(0, horizon - 1), d = pick(a, std::min(horizon - 1, a + 3));
      users.push_back(user(i + 1, a, d, pick(1, 3), 0.5 + 0.5 * pick(0, 19)));
    }
    std::stable_sort(users.begin(), users.end(),
                     [](const auto& x, const auto& y) { return x.submission < y.submission; });
    AllocationState st(sys);
    std::vector<Assignment> seen;
    for (const auto& u : users) {
      const auto d = mech.process_arrival(st, u);
      if (d.accepted) {
        CHECK(*d.payment <= d.valuation + kCurrencyTolerance);
        CHECK(satisfies(*d.option, u, sys.facilities[0].evse_max_energy));
        seen.push_back(*st.find(u.id));
      }
      CHECK(st.capacity_violations(sys).empty());
      for (const auto& a : seen) CHECK(st.find(a.user_id)->option == a.option);
    }
    CHECK(st.audit(sys).empty());
    CHECK(cost_coverage_violations(sys, st).empty());
  }
}

TEST_CASE("summary accounting identities") {
  const System sys = single(2, 2, 3, 4, 2.0, 3.0, 0.127);
  OnlineMechanism mech(sys, good_bounds(sys));
  std::vector<UserRequest> users{user(1, 0, 2, 4, 8.0), user(2, 1, 3, 5, 6.0), user(3, 0, 0, 1, 2.0)};
  const auto run = run_sequence(users, mech);
  const auto& s = run.summary;
  CHECK(s.welfare == doctest::Approx(s.total_utility + s.total_payments - s.electricity_cost));
  CHECK(s.total_value == doctest::Approx(s.total_utility + s.total_payments));
  CHECK(s.solar_available == doctest::Approx(8.0));
  CHECK(s.solar_fraction() <= 1.0);
}

TEST_CASE("interval forecasts price procurement with the underestimate") {
  const System sys = single(1, 2, 2, 3, 3.0, 3.0, 0.127);
  const auto b = good_bounds(sys);
  std::vector<double> lower(9, 3.0), upper(9, 3.0);
  lower[0 * 3 + 2] = 1.0;  // at t_current 0 the slot-2 solar is only known to be >= 1
  OnlineMechanism exact(sys, b);
  OnlineMechanism interval(sys, b, LevelSet{}, {SolarForecast(3, lower, upper)});
  AllocationState st(sys);
  AllocationState other(sys);
  other.commit(sys, 9, ScheduleOption{1, 0, 2, 2, {2}}, 0.0);
  CHECK(interval.prices(other, 0).procurement(0, 2) > exact.prices(other, 0).procurement(0, 2));
  CHECK(interval.prices(other, 1).procurement(0, 2) ==
        doctest::Approx(exact.prices(other, 1).procurement(0, 2)));
}
