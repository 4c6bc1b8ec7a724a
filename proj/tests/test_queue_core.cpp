#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dlab/queue_core.hpp"
#include "test_support.hpp"

using namespace dlab;

namespace {

// Quadratic reference: after each completion, scan every customer that has
// arrived by then and is unserved, and let select() choose.
std::vector<double> reference_begin(const ArrivalTrace& t, const DisciplineId& d) {
  const std::size_t n = t.size();
  std::vector<double> begin(n, -1.0);
  std::vector<bool> served(n, false);
  double clock = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    DecisionState s{clock, {}};
    for (std::size_t i = 0; i < n; ++i) {
      if (!served[i] && t[i].arrival <= clock) s.waiting.push_back({i, t[i].deadline, t[i].arrival});
    }
    std::size_t c;
    if (s.waiting.empty()) {
      c = static_cast<std::size_t>(std::find(served.begin(), served.end(), false) - served.begin());
      clock = t[c].arrival;
    } else {
      c = select(d, s);
    }
    served[c] = true;
    begin[c] = clock;
    clock += t[c].service;
  }
  return begin;
}

std::vector<ScenarioConfig> scenario_mix(std::uint64_t seed) {
  std::vector<ScenarioConfig> out;
  for (double rho : {0.5, 0.8, 0.95}) {
    ScenarioConfig mm = testing::mm_config(rho, seed, 60);
    out.push_back(mm);
    ScenarioConfig md = mm;
    md.service = DistributionSpec::deterministic(rho);
    out.push_back(md);
    ScenarioConfig dm = mm;
    dm.interarrival = DistributionSpec::deterministic(1.0);
    out.push_back(dm);
    ScenarioConfig gg = mm;
    gg.interarrival = DistributionSpec::uniform(0.5, 1.5);
    gg.service = DistributionSpec::gamma(0.5, 2.0 * rho);
    out.push_back(gg);
  }
  return out;
}

const DisciplineId kDeterministic[] = {DisciplineId::edf(), DisciplineId::ldf(), DisciplineId::fifo(),
                                       DisciplineId::lifo()};

}  // namespace

TEST_CASE("three-customer trace under EDF and LDF") {
  const ArrivalTrace t = testing::trace_e();
  const Schedule e = simulate(t, DisciplineId::edf());
  CHECK(e.begin == std::vector<double>{0, 8, 5});
  CHECK(e.waiting == std::vector<double>{0, 7, 3});
  CHECK(e.residual == std::vector<double>{10, 2, -2});
  CHECK(e.lateness == std::vector<double>{0, 0, 2});
  CHECK(e.service_order == Permutation(std::vector<std::size_t>{0, 2, 1}));
  CHECK(e.cycles == std::vector<CycleRecord>{{0, 2}});

  const Schedule l = simulate(t, DisciplineId::ldf());
  CHECK(l.begin == std::vector<double>{0, 5, 7});
  CHECK(l.residual == std::vector<double>{10, 5, -4});
  CHECK(l.lateness == std::vector<double>{0, 0, 4});
  CHECK(l.service_order == Permutation(std::vector<std::size_t>{0, 1, 2}));

  CHECK(simulate(t, DisciplineId::fifo()).begin == l.begin);
  CHECK(simulate(t, DisciplineId::lifo()).begin == e.begin);
}

TEST_CASE("single customer") {
  const double a[] = {0}, s[] = {2}, p[] = {1};
  const ArrivalTrace t(a, s, p);
  for (const auto& d : kDeterministic) {
    const Schedule sch = simulate(t, d);
    CHECK(sch.begin == std::vector<double>{0});
    CHECK(sch.residual == std::vector<double>{1});
    CHECK(sch.cycles == std::vector<CycleRecord>{{0, 0}});
  }
}

TEST_CASE("arrival at a completion epoch") {
  SUBCASE("empty system: the arrival opens a new cycle") {
    const double a[] = {0, 1}, s[] = {1, 1}, p[] = {1, 1};
    const ArrivalTrace t(a, s, p);
    const Schedule sch = simulate(t, DisciplineId::edf());
    CHECK(sch.begin == std::vector<double>{0, 1});
    CHECK(sch.cycles == std::vector<CycleRecord>{{0, 0}, {1, 1}});
    CHECK(busy_cycles(t, sch) == sch.cycles);
  }
  SUBCASE("nonempty system: the arrival joins the decision") {
    // C1 waits from 0.5; C2 lands exactly when C0 completes and has the
    // earlier deadline, so EDF serves it first.
    const double a[] = {0, 0.5, 2}, s[] = {2, 1, 1}, p[] = {10, 10, 1};
    const ArrivalTrace t(a, s, p);
    const Schedule sch = simulate(t, DisciplineId::edf());
    CHECK(sch.begin == std::vector<double>{0, 3, 2});
    CHECK(sch.cycles == std::vector<CycleRecord>{{0, 2}});
    CHECK(simulate(t, DisciplineId::fifo()).begin == std::vector<double>{0, 2, 3});
  }
}

TEST_CASE("busy_cycles examples and errors") {
  const ArrivalTrace e = testing::trace_e();
  CHECK(busy_cycles(e, simulate(e, DisciplineId::edf())) == std::vector<CycleRecord>{{0, 2}});

  const double a[] = {0, 100}, s[] = {1, 1}, p[] = {0, 0};
  const ArrivalTrace two(a, s, p);
  CHECK(busy_cycles(two, simulate(two, DisciplineId::fifo())) == std::vector<CycleRecord>{{0, 0}, {1, 1}});

  CHECK(busy_cycles(ArrivalTrace(), simulate(ArrivalTrace(), DisciplineId::edf())).empty());

  Schedule bad = simulate(e, DisciplineId::edf());
  bad.begin[2] = 6.0;  // idle gap inside the cycle
  CHECK_THROWS_AS(busy_cycles(e, bad), ScheduleMismatch);
  bad = simulate(e, DisciplineId::edf());
  bad.begin[1] = 0.5;  // before arrival
  CHECK_THROWS_AS(busy_cycles(e, bad), ScheduleMismatch);
  CHECK_THROWS_AS(busy_cycles(two, simulate(e, DisciplineId::edf())), ScheduleMismatch);
}

TEST_CASE("residuals_in_deadline_order") {
  const ArrivalTrace e = testing::trace_e();
  // Deadlines (10,10,3): rank order is C2, C0, C1.
  CHECK(residuals_in_deadline_order(e, simulate(e, DisciplineId::edf()), 0) == Vector{-2, 10, 2});
  CHECK(residuals_in_deadline_order(e, simulate(e, DisciplineId::ldf()), 0) == Vector{-4, 10, 5});
  CHECK(deadline_order(e, {0, 2}) == Permutation(std::vector<std::size_t>{2, 0, 1}));
  CHECK_THROWS_AS(residuals_in_deadline_order(e, simulate(e, DisciplineId::edf()), 1), std::out_of_range);
}

TEST_CASE("engine agrees with a quadratic reference simulator") {
  for (const ScenarioConfig& c : scenario_mix(41)) {
    const ArrivalTrace t = generate_trace(c);
    for (const auto& d : {DisciplineId::edf(), DisciplineId::ldf(), DisciplineId::fifo(), DisciplineId::lifo()}) {
      CAPTURE(d.name());
      CHECK(simulate(t, d).begin == reference_begin(t, d));
    }
  }
}

TEST_CASE("logged decisions match select") {
  const ArrivalTrace t = generate_trace(testing::mm_config(0.95, 8, 200));
  for (const auto& d : kDeterministic) {
    std::vector<DecisionRecord> log;
    const Schedule s = simulate(t, d, &log);
    CHECK(log.size() == t.size() - s.cycles.size());
    for (const auto& r : log) {
      CHECK(select(d, r.state) == r.chosen);
      CHECK(s.begin[r.chosen] == r.state.now);
      for (const auto& w : r.state.waiting) CHECK(t[w.index].arrival <= r.state.now);
    }
  }
}

TEST_CASE("schedule invariants across disciplines") {
  for (const ScenarioConfig& c : scenario_mix(3)) {
    const ArrivalTrace t = generate_trace(c);
    const Schedule ref = simulate(t, DisciplineId::fifo());
    std::vector<DisciplineId> all(std::begin(kDeterministic), std::end(kDeterministic));
    all.push_back(DisciplineId::random(5));
    for (const auto& d : all) {
      CAPTURE(d.name());
      const Schedule s = simulate(t, d);
      // Cycle boundaries do not depend on the discipline.
      CHECK(s.cycles == ref.cycles);
      CHECK(busy_cycles(t, s) == s.cycles);
      for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(s.begin[i] >= t[i].arrival);
        CHECK(s.waiting[i] == s.begin[i] - t[i].arrival);
        CHECK(s.residual[i] == t[i].deadline - s.begin[i]);
        CHECK(s.lateness[i] == std::max(-s.residual[i], 0.0));
      }
      // Non-preemptive, work-conserving: services tile each cycle.
      for (const CycleRecord& cyc : s.cycles) {
        double work = 0.0;
        std::vector<double> completions, ref_completions;
        for (std::size_t i = cyc.first; i <= cyc.last; ++i) {
          work += t[i].service;
          completions.push_back(s.begin[i] + t[i].service);
          ref_completions.push_back(ref.begin[i] + t[i].service);
        }
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = cyc.first; i <= cyc.last; ++i) {
          lo = std::min(lo, s.begin[i]);
          hi = std::max(hi, s.begin[i] + t[i].service);
        }
        CHECK(lo == t[cyc.first].arrival);
        CHECK(hi - lo == doctest::Approx(work).epsilon(1e-12));
        std::sort(completions.begin(), completions.end());
        for (std::size_t k = 0; k + 1 < completions.size(); ++k) {
          CHECK(completions[k] <= completions[k + 1]);
        }
        CHECK(completions.back() == doctest::Approx(ref_completions.back()).epsilon(1e-12));
      }
      // Services do not overlap.
      for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const std::size_t a = s.service_order[k], b = s.service_order[k + 1];
        CHECK(s.begin[a] + t[a].service <= s.begin[b]);
      }
    }
  }
}

TEST_CASE("EDF and FIFO coincide under constant patience") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioConfig c = testing::mm_config(0.9, seed, 100);
    c.patience = DistributionSpec::deterministic(5.0);
    const ArrivalTrace t = generate_trace(c);
    const Schedule e = simulate(t, DisciplineId::edf()), f = simulate(t, DisciplineId::fifo());
    CHECK(e.begin == f.begin);
    CHECK(e.service_order == f.service_order);
    CHECK(simulate(t, DisciplineId::ldf()).begin == simulate(t, DisciplineId::lifo()).begin);
  }
}

TEST_CASE("random discipline is reproducible") {
  const ArrivalTrace t = generate_trace(testing::mm_config(0.95, 4, 100));
  CHECK(simulate(t, DisciplineId::random(9)).begin == simulate(t, DisciplineId::random(9)).begin);
  CHECK_FALSE(simulate(t, DisciplineId::random(9)).begin == simulate(t, DisciplineId::random(10)).begin);
}

TEST_CASE("simulate_positional") {
  const ArrivalTrace t = testing::trace_e();
  // Durations by service position equal to LDF's order of service lengths.
  const double dur[] = {5, 2, 3};
  const Schedule s = simulate_positional(t, DisciplineId::edf(), dur);
  CHECK(s.begin == std::vector<double>{0, 7, 5});
  const double bad_len[] = {1, 2};
  CHECK_THROWS_AS(simulate_positional(t, DisciplineId::edf(), bad_len), std::invalid_argument);
  const double bad_val[] = {1, 0, 2};
  CHECK_THROWS_AS(simulate_positional(t, DisciplineId::edf(), bad_val), std::invalid_argument);
}

TEST_CASE("schedule CSV") {
  const ArrivalTrace t = testing::trace_e();
  std::ostringstream out;
  write_schedule_csv(out, t, simulate(t, DisciplineId::edf()));
  CHECK(out.str() ==
        "index,arrival,service,deadline,begin,waiting,residual,lateness,cycle\n"
        "0,0,5,10,0,0,10,0,0\n"
        "1,1,2,10,8,7,2,0,0\n"
        "2,2,3,3,5,3,-2,2,0\n");
}
