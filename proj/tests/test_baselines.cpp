#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "parkcharge/baselines.hpp"
#include "parkcharge/mechanism.hpp"

using namespace parkcharge;
using namespace testing_helpers;

TEST_CASE("fcfs: empty lot admits at the first EVSE and charges immediately") {
  const System sys = single(3, 2, 2, 4, 4.0, 4.0, 0.127);
  AllocationState st(sys);
  const auto d = fcfs_process(st, sys, user(1, 1, 3, 3, 6.0));
  REQUIRE(d.accepted);
  CHECK(d.option->facility_id == 1);
  CHECK(d.option->evse == 0);
  CHECK(d.option->charge == std::vector<Energy>{2, 1, 0});
  CHECK(d.utility == doctest::Approx(6.0));
  CHECK(d.payment.value() == 0.0);
}

TEST_CASE("fcfs: a full lot rejects regardless of valuation") {
  const System sys = single(1, 1, 2, 3, 4.0, 4.0, 0.127);
  AllocationState st(sys);
  REQUIRE(fcfs_process(st, sys, user(1, 0, 2, 1, 1.0)).accepted);
  CHECK_FALSE(fcfs_process(st, sys, user(2, 1, 1, 1, 1000.0)).accepted);
}

TEST_CASE("fcfs: two EVs on one EVSE charge one after the other") {
  const System sys = single(1, 2, 2, 3, 10.0, 10.0, 0.127);
  AllocationState st(sys);
  const auto first = fcfs_process(st, sys, user(1, 0, 2, 4, 5.0));
  const auto second = fcfs_process(st, sys, user(2, 0, 2, 4, 5.0));
  REQUIRE(first.accepted);
  REQUIRE(second.accepted);
  CHECK(first.option->charge == std::vector<Energy>{2, 2, 0});
  CHECK(second.option->charge == std::vector<Energy>{0, 0, 2});
  CHECK(second.delivered == 2);
  CHECK(second.utility == doctest::Approx(2.5));  // pro-rated

  AllocationState st2(sys);
  fcfs_process(st2, sys, user(1, 0, 2, 4, 5.0), LevelSet{}, FcfsOptions{false});
  const auto none = fcfs_process(st2, sys, user(2, 0, 2, 4, 5.0), LevelSet{}, FcfsOptions{false});
  CHECK(none.accepted);
  CHECK(none.utility == 0.0);
}

TEST_CASE("fcfs: procurement capacity limits the charging rate") {
  const System sys = single(2, 1, 5, 1, 1.0, 2.0, 0.127);
  AllocationState st(sys);
  const auto a = fcfs_process(st, sys, user(1, 0, 0, 2, 5.0));
  const auto b = fcfs_process(st, sys, user(2, 0, 0, 2, 5.0));
  CHECK(a.delivered == 2);
  CHECK(b.delivered == 1);
  CHECK(st.capacity_violations(sys).empty());
}

TEST_CASE("fcfs rejects only when no cable is free for the whole stay") {
  std::mt19937_64 rng(3);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 100; ++trial) {
    const int horizon = pick(2, 6);
    const System sys = single(pick(1, 3), pick(1, 2), pick(1, 3), horizon, 2.0, 2.0, 0.127);
    AllocationState st(sys);
    for (int i = 0; i < 20; ++i) {
      const int a = pick(0, horizon - 1), d = pick(a, horizon - 1);
      const auto u = user(i + 1, a, d, pick(1, 3), 1.0 + pick(0, 9));
      bool free_somewhere = false;
      for (int m = 0; m < sys.facilities[0].evse_count; ++m) {
        bool free = true;
        for (Slot t = a; t <= d; ++t) free &= st.cable_demand(0, m, t) < sys.facilities[0].cables_per_evse;
        free_somewhere |= free;
      }
      CHECK(fcfs_process(st, sys, u).accepted == free_somewhere);
      CHECK(st.capacity_violations(sys).empty());
    }
  }
}

TEST_CASE("cec without expected arrivals accepts any positive surplus") {
  const System sys = single(1, 1, 2, 3, 0.0, 4.0, 0.5);
  AllocationState st(sys);
  const auto d = cec_process(st, sys, user(1, 0, 1, 2, 1.5), ExpectedArrivals{});
  REQUIRE(d.accepted);
  const auto loss = cec_process(st, sys, user(2, 2, 2, 2, 0.9), ExpectedArrivals{});
  CHECK_FALSE(loss.accepted);  // two grid units cost 1.0
}

TEST_CASE("cec keeps the last cable for an expected high-value arrival") {
  const System sys = single(1, 1, 2, 4, 4.0, 4.0, 0.127);
  ExpectedArrivals expected;
  UserRequest future = user(-1, 2, 3, 2, 9.0);
  expected.users.push_back(future);
  AllocationState st(sys);
  CHECK_FALSE(cec_process(st, sys, user(1, 0, 3, 1, 2.0), expected).accepted);
  AllocationState st2(sys);
  CHECK(cec_process(st2, sys, user(1, 0, 1, 1, 2.0), expected).accepted);
}

TEST_CASE("baseline runs never revoke and respect capacity") {
  const System sys = single(2, 2, 3, 6, 2.0, 3.0, 0.127);
  std::vector<UserRequest> users;
  for (int i = 0; i < 12; ++i) users.push_back(user(i + 1, i % 4, std::min(5, i % 4 + 2), 1 + i % 3, 1.0 + i));
  std::stable_sort(users.begin(), users.end(),
                   [](const auto& a, const auto& b) { return a.submission < b.submission; });
  ExpectedArrivals expected;
  expected.users.push_back(user(-1, 3, 5, 2, 5.0));
  for (auto run : {run_fcfs(users, sys), run_cec(users, sys, expected)}) {
    CHECK(run.state.audit(sys).empty());
    for (const auto& d : run.decisions)
      if (d.accepted) CHECK(run.state.find(d.user_id)->option == *d.option);
  }
}
