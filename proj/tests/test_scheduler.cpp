#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "parkcharge/scheduler.hpp"

using namespace parkcharge;
using namespace testing_helpers;

TEST_CASE("schedule enumeration") {
  const System sys = single(1, 2, 2, 3, 4.0, 4.0, 0.127);
  const auto u = user(1, 0, 2, 2, 5.0);
  const auto opts = enumerate_options(u, sys.facilities[0], LevelSet{}, 100);
  CHECK(opts.size() == 6);
  CHECK(count_schedules(2, 3, 2) == 6.0);
  CHECK(opts.front().charge == std::vector<Energy>{2, 0, 0});
  for (const auto& o : opts) CHECK(satisfies(o, u, 2));
  CHECK(enumerate_options(u, sys.facilities[0], LevelSet{}, 4).size() == 4);
  // a level cap of 1 leaves the three 0/1 schedules
  CHECK(enumerate_options(u, sys.facilities[0], LevelSet{1}, 100).size() == 3);
  // infeasible: 7 units in 3 slots at 2 per slot
  CHECK(enumerate_options(user(2, 0, 2, 7, 5.0), sys.facilities[0], LevelSet{}, 100).empty());
}

TEST_CASE("best option on an empty facility") {
  const System sys = single(1, 2, 2, 2, 4.0, 4.0, 0.127);
  const auto b = bounds(1.0, 10.0, 5.0);
  AllocationState st(sys);
  PostedPrices prices(sys, b, st);
  const auto q = best_option(user(1, 0, 1, 2, 10.0), prices, LevelSet{});
  REQUIRE(q.option);
  // cable 0.1 per slot, energy 0.1 and procurement 0.1 per unit
  CHECK(q.payment == doctest::Approx(0.6));
  CHECK(q.utility == doctest::Approx(9.4));
  CHECK(q.option->charge == std::vector<Energy>{2, 0});
  CHECK(q.dual_utility == doctest::Approx(9.4));
  REQUIRE(q.procurement_payment.size() == 2);
  CHECK(q.procurement_payment[0] == doctest::Approx(0.2));
}

TEST_CASE("no option when every cable is taken or surplus is not positive") {
  const System sys = single(1, 1, 2, 2, 4.0, 4.0, 0.127);
  const auto b = bounds(1.0, 10.0, 4.0);
  AllocationState st(sys);
  st.commit(sys, 1, ScheduleOption{1, 0, 1, 1, {1}}, 0.0);
  PostedPrices prices(sys, b, st);
  const auto q = best_option(user(2, 0, 1, 1, 10.0), prices, LevelSet{});
  CHECK_FALSE(q.option);
  CHECK(q.utility == 0.0);
  CHECK(q.dual_utility == 0.0);  // a full cable is priced at the upper bound

  AllocationState empty(sys);
  PostedPrices p2(sys, b, empty);
  CHECK_FALSE(best_option(user(3, 0, 1, 2, 0.01), p2, LevelSet{}).option);
}

TEST_CASE("ties keep the lowest EVSE") {
  const System sys = single(3, 2, 2, 2, 4.0, 4.0, 0.127);
  const auto b = bounds(1.0, 10.0, aggregate_resources(sys));
  AllocationState st(sys);
  PostedPrices prices(sys, b, st);
  const auto q = best_option(user(1, 0, 1, 1, 5.0), prices, LevelSet{});
  REQUIRE(q.option);
  CHECK(q.option->evse == 0);
}

TEST_CASE("units above the solar level pay the above-solar price") {
  const System sys = single(2, 2, 3, 1, 1.0, 4.0, 0.127);
  const auto b = bounds(1.0, 10.0, aggregate_resources(sys));
  AllocationState st(sys);
  PostedPrices prices(sys, b, st);
  const auto q = best_option(user(1, 0, 0, 3, 10.0), prices, LevelSet{});
  REQUIRE(q.option);
  const double low = prices.procurement(0, 0);
  const double high = prices.procurement_above_solar(0, 0);
  CHECK(high > 0.127);
  CHECK(q.procurement_payment[0] == doctest::Approx(low + 2 * high));
  const auto cost = posted_cost(*q.option, prices);
  REQUIRE(cost);
  CHECK(*cost == doctest::Approx(q.payment));
}

TEST_CASE("greedy fill equals enumeration over the option universe") {
  std::mt19937_64 rng(42);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 300; ++trial) {
    const int horizon = pick(2, 5);
    System sys = single(pick(1, 2), pick(1, 3), pick(1, 3), horizon, 0.0, pick(1, 4), 0.127);
    for (auto& s : sys.facilities[0].solar) s = 0.5 * pick(0, 6);
    sys.facilities[0].solar_rating = 3.0;
    const auto b = bounds(0.3, 10.0, aggregate_resources(sys));
    AllocationState st(sys);
    // random background load
    for (int k = 0; k < pick(0, 4); ++k) {
      const int a = pick(0, horizon - 1), d = pick(a, horizon - 1);
      ScheduleOption o{1, pick(0, sys.facilities[0].evse_count - 1), a, d,
                       std::vector<Energy>(d - a + 1, 0)};
      for (auto& e : o.charge) e = pick(0, 1);
      try {
        st.commit(sys, 100 + k, o, 0.0);
      } catch (const CapacityFault&) {
      }
    }
    PostedPrices prices(sys, b, st);
    const int a = pick(0, horizon - 1), d = pick(a, horizon - 1);
    const auto u = user(1, a, d, pick(1, 4), 0.5 + 0.5 * pick(0, 19));
    const auto q = best_option(u, prices, LevelSet{});
    double best = 0.0;
    for (const auto& o : enumerate_options(u, sys.facilities[0], LevelSet{}, 100000))
      if (auto c = posted_cost(o, prices)) best = std::max(best, u.preferences[0].value - *c);
    if (best > kCurrencyTolerance) {
      REQUIRE(q.option);
      CHECK(q.utility == doctest::Approx(best).epsilon(1e-9));
    } else {
      CHECK_FALSE(q.option);
    }
  }
}
