#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dlab/arrivals.hpp"
#include "dlab/queue_core.hpp"
#include "test_support.hpp"

using namespace dlab;

TEST_CASE("splitmix64 reference values") {
  // First outputs of the reference splitmix64 generator seeded with 0 and 1234567.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(1234567) == 0x599ed017fb08fc85ULL);
  CHECK(substream_seed(42, 1) == splitmix64(42 ^ splitmix64(1)));
}

TEST_CASE("uniform stream stays inside (0,1]") {
  RandomStream r(5, StreamLabel::service);
  double lo = 1, hi = 0, sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform_open_zero();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi <= 1.0);
  CHECK(std::abs(sum / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
}

TEST_CASE("mean_of and utilization") {
  CHECK(mean_of(DistributionSpec::exponential(2.0)) == 0.5);
  CHECK(mean_of(DistributionSpec::deterministic(3.0)) == 3.0);
  CHECK(mean_of(DistributionSpec::uniform(1.0, 3.0)) == 2.0);
  CHECK(mean_of(DistributionSpec::gamma(2.0, 1.5)) == 3.0);
  CHECK(mean_of(DistributionSpec::shifted(DistributionSpec::exponential(1.0), 2.0)) == 3.0);

  ScenarioConfig c;
  c.interarrival = DistributionSpec::exponential(1.0);
  c.service = DistributionSpec::exponential(1.25);
  CHECK(utilization(c).rho == 0.8);
  CHECK(utilization(c).stable);

  c.interarrival = DistributionSpec::deterministic(2.0);
  c.service = DistributionSpec::uniform(0.5, 1.5);
  CHECK(utilization(c).rho == 0.5);
  CHECK(utilization(c).stable);

  c.interarrival = DistributionSpec::exponential(1.0);
  c.service = DistributionSpec::exponential(1.0);
  CHECK(utilization(c).rho == 1.0);
  CHECK_FALSE(utilization(c).stable);
}

TEST_CASE("distribution constructors reject bad parameters") {
  CHECK_THROWS_AS(DistributionSpec::exponential(0.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::exponential(-1.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::uniform(2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::gamma(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::deterministic(INFINITY), ConfigError);
}

TEST_CASE("deterministic trace") {
  ScenarioConfig c;
  c.interarrival = DistributionSpec::deterministic(1.0);
  c.service = DistributionSpec::deterministic(0.5);
  c.patience = DistributionSpec::deterministic(2.0);
  c.horizon = {Horizon::Kind::customers, 3};
  const ArrivalTrace t = generate_trace(c);
  CHECK(t.arrivals() == std::vector<double>{0, 1, 2});
  CHECK(t.services() == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(t.deadlines() == std::vector<double>{2, 3, 4});
  for (std::size_t i = 0; i < 3; ++i) CHECK(t[i].index == i);
}

TEST_CASE("trace generation is reproducible and seed-sensitive") {
  ScenarioConfig c = testing::mm_config(0.8, 17, 50);
  const ArrivalTrace a = generate_trace(c), b = generate_trace(c);
  CHECK(a == b);
  c.seed = 18;
  CHECK_FALSE(a == generate_trace(c));
}

TEST_CASE("substreams are independent of the other laws") {
  // Changing the service law must not move arrivals or patiences.
  ScenarioConfig c = testing::mm_config(0.5, 3, 1);
  c.horizon = {Horizon::Kind::customers, 500};
  const ArrivalTrace a = generate_trace(c);
  c.service = DistributionSpec::uniform(0.1, 0.3);
  const ArrivalTrace b = generate_trace(c);
  CHECK(a.arrivals() == b.arrivals());
  CHECK(a.patiences() == b.patiences());
  CHECK_FALSE(a.services() == b.services());
  c.patience = DistributionSpec::deterministic(4.0);
  CHECK(generate_trace(c).arrivals() == a.arrivals());
}

TEST_CASE("sample means within four standard errors") {
  struct Case {
    DistributionSpec spec;
    double variance;
  };
  const Case cases[] = {
      {DistributionSpec::exponential(1.0), 1.0},
      {DistributionSpec::exponential(0.2), 25.0},
      {DistributionSpec::uniform(0.5, 1.5), 1.0 / 12},
      {DistributionSpec::gamma(2.0, 0.4), 2.0 * 0.16},
      {DistributionSpec::gamma(0.5, 2.0), 0.5 * 4.0},
      {DistributionSpec::shifted(DistributionSpec::exponential(2.0), 1.0), 0.25},
  };
  std::uint64_t seed = 100;
  for (const Case& k : cases) {
    CAPTURE(k.spec.describe());
    RandomStream r(seed++, StreamLabel::service);
    const int n = 100000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
      const double x = k.spec.sample(r);
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - k.spec.mean()) < 4 * std::sqrt(k.variance / n));
    const double var = sumsq / n - mean * mean;
    CHECK(var == doctest::Approx(k.variance).epsilon(0.05));
  }
  RandomStream d(1, StreamLabel::service);
  CHECK(DistributionSpec::deterministic(2.5).sample(d) == 2.5);
}

TEST_CASE("cycle horizon produces exactly that many busy cycles") {
  for (std::size_t count : {1u, 7u, 300u}) {
    const ArrivalTrace t = generate_trace(testing::mm_config(0.9, count, count));
    const Schedule s = simulate(t, DisciplineId::fifo());
    CHECK(s.cycles.size() == count);
  }
}

TEST_CASE("generation errors") {
  ScenarioConfig c = testing::mm_config(0.8, 1, 10);
  c.service = DistributionSpec::exponential(1.0);
  CHECK_THROWS_AS(generate_trace(c), StabilityError);
  c.horizon = {Horizon::Kind::customers, 10};
  CHECK(generate_trace(c).size() == 10);

  c = testing::mm_config(0.8, 1, 10);
  c.interarrival = DistributionSpec::deterministic(0.0);
  CHECK_THROWS_AS(generate_trace(c), ConfigError);

  c = testing::mm_config(0.8, 1, 10);
  c.horizon = {Horizon::Kind::customers, 0};
  CHECK_THROWS_AS(generate_trace(c), ConfigError);

  c = testing::mm_config(0.8, 1, 1);
  c.horizon = {Horizon::Kind::customers, 100};
  c.service = DistributionSpec::uniform(-1.0, 1.0);
  CHECK_THROWS_AS(generate_trace(c), GenerationError);
}

TEST_CASE("trace validation") {
  const double t[] = {0, 1, 1}, s[] = {1, 1, 1}, p[] = {1, 1, 1};
  CHECK_THROWS_AS(ArrivalTrace(t, s, p), ConfigError);
  const double t2[] = {0, 1, 2}, s2[] = {1, 0, 1};
  CHECK_THROWS_AS(ArrivalTrace(t2, s2, p), ConfigError);
  const double p2[] = {1, NAN, 1};
  CHECK_THROWS_AS(ArrivalTrace(t2, s, p2), ConfigError);
  const double p3[] = {-5, 0, 1};  // negative patience is allowed
  CHECK(ArrivalTrace(t2, s, p3)[0].deadline == -5);
}

TEST_CASE("trace CSV round trip is exact") {
  ScenarioConfig c = testing::mm_config(0.95, 11, 40);
  c.service = DistributionSpec::gamma(0.7, 0.95 / 0.7);
  const ArrivalTrace t = generate_trace(c);
  std::stringstream ss;
  write_trace_csv(ss, t);
  const ArrivalTrace back = read_trace_csv(ss);
  CHECK(back == t);
  CHECK(back.deadlines() == t.deadlines());

  std::istringstream bad_header("i,a,s,p\n");
  CHECK_THROWS_AS(read_trace_csv(bad_header), ConfigError);
  std::istringstream bad_number("index,arrival,service,patience\n0,0,x,1\n");
  CHECK_THROWS_AS(read_trace_csv(bad_number), ConfigError);
  std::istringstream bad_index("index,arrival,service,patience\n1,0,1,1\n");
  CHECK_THROWS_AS(read_trace_csv(bad_index), ConfigError);
}

TEST_CASE("config JSON") {
  const auto j = nlohmann::json::parse(R"({
    "interarrival": {"family": "exponential", "params": {"rate": 1.0}},
    "service": {"family": "gamma", "params": {"shape": 2, "scale": 0.4}},
    "patience": {"family": "shifted", "params": {"base": {"family": "uniform", "params": {"lo": 0, "hi": 2}}, "offset": 3}},
    "seed": 9,
    "horizon": {"cycles": 500}
  })");
  const ScenarioConfig c = config_from_json(j);
  CHECK(c.seed == 9);
  CHECK(c.horizon.kind == Horizon::Kind::cycles);
  CHECK(c.horizon.count == 500);
  CHECK(c.service.family() == DistributionSpec::Family::gamma);
  CHECK(utilization(c).rho == doctest::Approx(0.8));
  CHECK(c.patience.mean() == 4.0);

  const ScenarioConfig again = config_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(generate_trace(again) == generate_trace(c));

  auto missing = j;
  missing.erase("seed");
  CHECK_THROWS_AS(config_from_json(missing), ConfigError);
  auto unknown = j;
  unknown["service"]["family"] = "pareto";
  CHECK_THROWS_AS(config_from_json(unknown), ConfigError);
  auto bad_horizon = j;
  bad_horizon["horizon"] = {{"days", 3}};
  CHECK_THROWS_AS(config_from_json(bad_horizon), ConfigError);
  auto bad_rate = j;
  bad_rate["interarrival"]["params"]["rate"] = -2;
  CHECK_THROWS_AS(config_from_json(bad_rate), ConfigError);
}

TEST_CASE("batch seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < 10000; ++i) seen.insert(batch_seed(7, i));
  CHECK(seen.size() == 10000);
}

TEST_CASE("generated interarrivals have the configured mean") {
  ScenarioConfig c = testing::mm_config(0.8, 2718, 1);
  c.horizon = {Horizon::Kind::customers, 100000};
  const auto a = generate_trace(c).arrivals();
  const double mean = a.back() / static_cast<double>(a.size() - 1);
  CHECK(std::abs(mean - 1.0) < 3.0 / std::sqrt(static_cast<double>(a.size() - 1)));
}
