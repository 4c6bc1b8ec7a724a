#include "dlab/arrivals.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace dlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t label) {
  return splitmix64(seed ^ splitmix64(label));
}

double RandomStream::uniform_open_zero() {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

std::size_t RandomStream::index(std::size_t n) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double RandomStream::standard_normal() {
  const double u1 = uniform_open_zero();
  const double u2 = uniform_open_zero();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// --- distributions -----------------------------------------------------------

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

double sample_gamma(double shape, RandomStream& rng) {
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(rng.uniform_open_zero(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open_zero();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

DistributionSpec DistributionSpec::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "exponential: rate must be positive");
  return {Family::exponential, rate, 0.0};
}

DistributionSpec DistributionSpec::deterministic(double value) {
  require(std::isfinite(value), "deterministic: value must be finite");
  return {Family::deterministic, value, 0.0};
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, "uniform: need finite lo <= hi");
  return {Family::uniform, lo, hi};
}

DistributionSpec DistributionSpec::gamma(double shape, double scale) {
  require(std::isfinite(shape) && shape > 0.0 && std::isfinite(scale) && scale > 0.0,
          "gamma: shape and scale must be positive");
  return {Family::gamma, shape, scale};
}

DistributionSpec DistributionSpec::shifted(DistributionSpec base, double offset) {
  require(std::isfinite(offset), "shifted: offset must be finite");
  DistributionSpec s{Family::shifted, offset, 0.0};
  s.base_ = std::make_shared<const DistributionSpec>(std::move(base));
  return s;
}

double DistributionSpec::mean() const {
  switch (family_) {
    case Family::exponential: return 1.0 / a_;
    case Family::deterministic: return a_;
    case Family::uniform: return 0.5 * (a_ + b_);
    case Family::gamma: return a_ * b_;
    case Family::shifted: return base_->mean() + a_;
  }
  return 0.0;
}

double DistributionSpec::support_max() const {
  switch (family_) {
    case Family::exponential:
    case Family::gamma: return std::numeric_limits<double>::infinity();
    case Family::deterministic: return a_;
    case Family::uniform: return b_;
    case Family::shifted: return base_->support_max() + a_;
  }
  return 0.0;
}

double DistributionSpec::sample(RandomStream& rng) const {
  switch (family_) {
    case Family::exponential: return -std::log(rng.uniform_open_zero()) / a_;
    case Family::deterministic: return a_;
    case Family::uniform: return a_ + (b_ - a_) * (1.0 - rng.uniform_open_zero());
    case Family::gamma: return b_ * sample_gamma(a_, rng);
    case Family::shifted: return base_->sample(rng) + a_;
  }
  return 0.0;
}

std::string DistributionSpec::describe() const {
  switch (family_) {
    case Family::exponential: return "exponential(rate=" + fmt(a_) + ")";
    case Family::deterministic: return "deterministic(" + fmt(a_) + ")";
    case Family::uniform: return "uniform(" + fmt(a_) + "," + fmt(b_) + ")";
    case Family::gamma: return "gamma(shape=" + fmt(a_) + ",scale=" + fmt(b_) + ")";
    case Family::shifted: return "shifted(" + base_->describe() + "," + fmt(a_) + ")";
  }
  return "?";
}

double mean_of(const DistributionSpec& spec) { return spec.mean(); }

// --- scenario ----------------------------------------------------------------

void validate(const ScenarioConfig& config) {
  require(config.horizon.count > 0, "horizon must be positive");
  require(config.interarrival.support_max() > 0.0,
          "interarrival law " + config.interarrival.describe() + " never yields a positive gap");
  require(config.service.support_max() > 0.0,
          "service law " + config.service.describe() + " never yields a positive duration");
}

Utilization utilization(const ScenarioConfig& config) {
  const double rho = config.service.mean() / config.interarrival.mean();
  return {rho, rho < 1.0};
}

ArrivalTrace::ArrivalTrace(std::span<const double> arrivals, std::span<const double> services,
                           std::span<const double> patiences) {
  require(arrivals.size() == services.size() && arrivals.size() == patiences.size(),
          "trace columns differ in length");
  customers_.reserve(arrivals.size());
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    require(std::isfinite(arrivals[i]) && std::isfinite(services[i]) && std::isfinite(patiences[i]),
            "trace row " + std::to_string(i) + " has a non-finite value");
    require(services[i] > 0.0, "trace row " + std::to_string(i) + ": service must be positive");
    require(i == 0 || arrivals[i] > arrivals[i - 1],
            "trace row " + std::to_string(i) + ": arrivals must strictly increase");
    customers_.push_back({i, arrivals[i], services[i], patiences[i], arrivals[i] + patiences[i]});
  }
}

std::vector<double> ArrivalTrace::arrivals() const {
  std::vector<double> v;
  v.reserve(size());
  for (const auto& c : customers_) v.push_back(c.arrival);
  return v;
}

std::vector<double> ArrivalTrace::services() const {
  std::vector<double> v;
  v.reserve(size());
  for (const auto& c : customers_) v.push_back(c.service);
  return v;
}

std::vector<double> ArrivalTrace::patiences() const {
  std::vector<double> v;
  v.reserve(size());
  for (const auto& c : customers_) v.push_back(c.patience);
  return v;
}

std::vector<double> ArrivalTrace::deadlines() const {
  std::vector<double> v;
  v.reserve(size());
  for (const auto& c : customers_) v.push_back(c.deadline);
  return v;
}

bool operator==(const ArrivalTrace& a, const ArrivalTrace& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Customer &x = a[i], &y = b[i];
    if (x.arrival != y.arrival || x.service != y.service || x.patience != y.patience) return false;
  }
  return true;
}

ArrivalTrace generate_trace(const ScenarioConfig& config) {
  validate(config);
  const bool by_cycles = config.horizon.kind == Horizon::Kind::cycles;
  if (by_cycles) {
    const Utilization u = utilization(config);
    if (!u.stable) {
      throw StabilityError("utilization " + fmt(u.rho) + " >= 1; a busy-cycle horizon would not terminate");
    }
  }

  RandomStream gaps(config.seed, StreamLabel::interarrival);
  RandomStream work(config.seed, StreamLabel::service);
  RandomStream patience(config.seed, StreamLabel::patience);

  std::vector<double> arrivals, services, patiences;
  double t = 0.0;
  double busy_until = 0.0;  // FIFO completion of the current cycle's workload
  std::size_t cycles = 0;
  for (std::size_t n = 0;; ++n) {
    if (n > 0) {
      const double xi = config.interarrival.sample(gaps);
      if (!(xi > 0.0)) throw GenerationError("sampled interarrival " + fmt(xi) + " is not positive");
      t += xi;
    }
    const double sigma = config.service.sample(work);
    if (!(sigma > 0.0)) throw GenerationError("sampled service " + fmt(sigma) + " is not positive");
    const double p = config.patience.sample(patience);

    if (n == 0 || t >= busy_until) {
      if (by_cycles && cycles == config.horizon.count) break;
      ++cycles;
      busy_until = t;
    }
    if (!by_cycles && n == config.horizon.count) break;
    busy_until += sigma;
    arrivals.push_back(t);
    services.push_back(sigma);
    patiences.push_back(p);
  }
  return ArrivalTrace(arrivals, services, patiences);
}

std::uint64_t batch_seed(std::uint64_t seed, std::size_t i) {
  return splitmix64(seed + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(i));
}

// --- I/O ---------------------------------------------------------------------

void write_trace_csv(std::ostream& out, const ArrivalTrace& trace) {
  out << "index,arrival,service,patience\n";
  char buf[160];
  for (const Customer& c : trace.customers()) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", c.index, c.arrival, c.service,
                  c.patience);
    out << buf;
  }
}

ArrivalTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,arrival,service,patience") throw ConfigError("trace CSV: unexpected header '" + line + "'");
  std::vector<double> a, s, p;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell[4];
    for (auto& c : cell) {
      if (!std::getline(fields, c, ',')) throw ConfigError("trace CSV: short row " + std::to_string(row));
    }
    try {
      if (std::stoull(cell[0]) != row) throw ConfigError("trace CSV: indices must be consecutive from 0");
      a.push_back(std::stod(cell[1]));
      s.push_back(std::stod(cell[2]));
      p.push_back(std::stod(cell[3]));
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ConfigError*>(&e)) throw;
      throw ConfigError("trace CSV: bad number in row " + std::to_string(row));
    }
    ++row;
  }
  return ArrivalTrace(a, s, p);
}

namespace {

double param(const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_number()) {
    throw ConfigError(std::string("distribution parameter '") + key + "' missing or not a number");
  }
  return params.at(key).get<double>();
}

}  // namespace

DistributionSpec distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    throw ConfigError("distribution must be an object with a string 'family'");
  }
  const std::string family = j.at("family").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  if (family == "exponential") return DistributionSpec::exponential(param(params, "rate"));
  if (family == "deterministic") return DistributionSpec::deterministic(param(params, "value"));
  if (family == "uniform") return DistributionSpec::uniform(param(params, "lo"), param(params, "hi"));
  if (family == "gamma") return DistributionSpec::gamma(param(params, "shape"), param(params, "scale"));
  if (family == "shifted") {
    if (!params.contains("base")) throw ConfigError("shifted distribution needs params.base");
    return DistributionSpec::shifted(distribution_from_json(params.at("base")), param(params, "offset"));
  }
  throw ConfigError("unknown distribution family '" + family + "'");
}

nlohmann::json to_json(const DistributionSpec& spec) {
  using F = DistributionSpec::Family;
  switch (spec.family()) {
    case F::exponential: return {{"family", "exponential"}, {"params", {{"rate", spec.first()}}}};
    case F::deterministic: return {{"family", "deterministic"}, {"params", {{"value", spec.first()}}}};
    case F::uniform:
      return {{"family", "uniform"}, {"params", {{"lo", spec.first()}, {"hi", spec.second()}}}};
    case F::gamma:
      return {{"family", "gamma"}, {"params", {{"shape", spec.first()}, {"scale", spec.second()}}}};
    case F::shifted:
      return {{"family", "shifted"}, {"params", {{"base", to_json(*spec.base())}, {"offset", spec.first()}}}};
  }
  return nullptr;
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const char* key : {"interarrival", "service", "patience", "seed", "horizon"}) {
    if (!j.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
  }
  ScenarioConfig c;
  c.interarrival = distribution_from_json(j.at("interarrival"));
  c.service = distribution_from_json(j.at("service"));
  c.patience = distribution_from_json(j.at("patience"));
  if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& h = j.at("horizon");
  auto count = [](const nlohmann::json& v) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
      throw ConfigError("horizon count must be a positive integer");
    }
    return static_cast<std::size_t>(v.get<std::uint64_t>());
  };
  if (h.is_object() && h.size() == 1 && h.contains("customers")) {
    c.horizon = {Horizon::Kind::customers, count(h.at("customers"))};
  } else if (h.is_object() && h.size() == 1 && h.contains("cycles")) {
    c.horizon = {Horizon::Kind::cycles, count(h.at("cycles"))};
  } else {
    throw ConfigError("horizon must be {\"customers\": n} or {\"cycles\": n}");
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const ScenarioConfig& config) {
  const char* key = config.horizon.kind == Horizon::Kind::cycles ? "cycles" : "customers";
  return {{"interarrival", to_json(config.interarrival)},
          {"service", to_json(config.service)},
          {"patience", to_json(config.patience)},
          {"seed", config.seed},
          {"horizon", {{key, config.horizon.count}}}};
}

}  // namespace dlab
