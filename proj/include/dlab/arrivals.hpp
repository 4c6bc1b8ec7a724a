#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dlab {

/// Invalid scenario or distribution parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Utilization at or above one where a finite busy-cycle count was requested.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampled interarrival or service duration came out nonpositive.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Random streams
//
// Every stream is a std::mt19937_64 seeded with
//   splitmix64(seed ^ splitmix64(label))
// where splitmix64 is the standard finalizer (increment 0x9e3779b97f4a7c15,
// multipliers 0xbf58476d1ce4e5b9 and 0x94d049bb133111eb, shifts 30/27/31).
// Uniforms on (0,1] are ((x >> 11) + 1) * 2^-53. Exponentials use -log(u)/rate;
// normals use the polar-free Box-Muller cosine branch; gammas use
// Marsaglia-Tsang with the u^(1/shape) boost below shape 1. None of the
// <random> distribution adaptors are used, so traces are portable.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t label);

enum class StreamLabel : std::uint64_t { interarrival = 1, service = 2, patience = 3, discipline = 4 };

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamLabel label)
      : engine_(substream_seed(seed, static_cast<std::uint64_t>(label))) {}
  explicit RandomStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

  /// Uniform on (0, 1].
  double uniform_open_zero();
  /// Uniform on {0, ..., n-1}; n > 0.
  std::size_t index(std::size_t n);
  double standard_normal();

 private:
  std::mt19937_64 engine_;
};

class DistributionSpec {
 public:
  enum class Family { exponential, deterministic, uniform, gamma, shifted };

  static DistributionSpec exponential(double rate);
  static DistributionSpec deterministic(double value);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec gamma(double shape, double scale);
  static DistributionSpec shifted(DistributionSpec base, double offset);

  Family family() const { return family_; }
  double first() const { return a_; }
  double second() const { return b_; }
  const DistributionSpec* base() const { return base_.get(); }

  double mean() const;
  /// Largest value a sample can take (may be +inf).
  double support_max() const;
  double sample(RandomStream& rng) const;
  std::string describe() const;

 private:
  DistributionSpec(Family f, double a, double b) : family_(f), a_(a), b_(b) {}

  Family family_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::shared_ptr<const DistributionSpec> base_;
};

double mean_of(const DistributionSpec& spec);

struct Horizon {
  enum class Kind { customers, cycles };
  Kind kind = Kind::customers;
  std::size_t count = 1;
};

struct ScenarioConfig {
  DistributionSpec interarrival = DistributionSpec::exponential(1.0);
  DistributionSpec service = DistributionSpec::exponential(1.25);
  DistributionSpec patience = DistributionSpec::exponential(0.2);
  std::uint64_t seed = 1;
  Horizon horizon;
};

/// Throws ConfigError for a zero horizon or an interarrival/service law
/// whose samples can never be positive.
void validate(const ScenarioConfig& config);

struct Utilization {
  double rho;
  bool stable;
};

/// ρ = E[σ]/E[ξ]; stable iff ρ < 1.
Utilization utilization(const ScenarioConfig& config);

struct Customer {
  std::size_t index = 0;
  double arrival = 0.0;
  double service = 0.0;
  double patience = 0.0;
  double deadline = 0.0;  // arrival + patience
};

class ArrivalTrace {
 public:
  ArrivalTrace() = default;
  /// Builds customers 0..n-1; throws ConfigError unless arrivals strictly
  /// increase, services are positive and every value is finite.
  ArrivalTrace(std::span<const double> arrivals, std::span<const double> services,
               std::span<const double> patiences);

  std::size_t size() const { return customers_.size(); }
  bool empty() const { return customers_.empty(); }
  const Customer& operator[](std::size_t i) const { return customers_[i]; }
  std::span<const Customer> customers() const { return customers_; }

  std::vector<double> arrivals() const;
  std::vector<double> services() const;
  std::vector<double> patiences() const;
  std::vector<double> deadlines() const;

  friend bool operator==(const ArrivalTrace& a, const ArrivalTrace& b);

 private:
  std::vector<Customer> customers_;
};

/// Deterministic in (config). First arrival at time 0. A cycle-count
/// horizon stops right before the arrival that would open cycle count+1.
ArrivalTrace generate_trace(const ScenarioConfig& config);

/// Seed of the i-th trace in a batch rooted at `seed`.
std::uint64_t batch_seed(std::uint64_t seed, std::size_t i);

// CSV: header `index,arrival,service,patience`, values printed with %.17g.
void write_trace_csv(std::ostream& out, const ArrivalTrace& trace);
ArrivalTrace read_trace_csv(std::istream& in);

// JSON config: {"interarrival": {"family": ..., "params": {...}}, "service": ...,
// "patience": ..., "seed": n, "horizon": {"customers": n} | {"cycles": n}}.
DistributionSpec distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistributionSpec& spec);
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& config);

}  // namespace dlab
