#include "dlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "dlab/parallel.hpp"

namespace dlab {

void PalmAccumulator::add_cycle(double sum, std::size_t size) {
  if (size == 0) throw std::invalid_argument("PalmAccumulator: empty cycle");
  sums_.push_back(sum);
  sizes_.push_back(size);
}

double normal_critical_value(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("normal_critical_value: confidence must lie in (0,1)");
  }
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * confidence);
}

PalmEstimate PalmAccumulator::estimate(const ConvexFunction& g, double confidence) const {
  const std::size_t c = sums_.size();
  if (c == 0) throw EstimationError("palm_mean: no complete cycles");
  double total = 0.0;
  std::size_t customers = 0;
  for (std::size_t k = 0; k < c; ++k) {
    total += sums_[k];
    customers += sizes_[k];
  }
  PalmEstimate e;
  e.value = total / static_cast<double>(customers);
  e.n_cycles = c;
  e.n_customers = customers;
  e.g = g;
  if (c >= 2) {
    double ss = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double d = sums_[k] - e.value * static_cast<double>(sizes_[k]);
      ss += d * d;
    }
    const double s = std::sqrt(ss / static_cast<double>(c - 1));
    const double mean_size = static_cast<double>(customers) / static_cast<double>(c);
    e.ci_halfwidth = normal_critical_value(confidence) * s / (mean_size * std::sqrt(static_cast<double>(c)));
  }
  return e;
}

namespace {

void accumulate(PalmAccumulator& acc, const Schedule& schedule, const ConvexFunction& g) {
  for (const CycleRecord& rec : schedule.cycles) {
    double sum = 0.0;
    for (std::size_t i = rec.first; i <= rec.last; ++i) sum += g(schedule.residual[i]);
    acc.add_cycle(sum, rec.size());
  }
}

}  // namespace

PalmEstimate palm_mean(const Schedule& schedule, const ConvexFunction& g, double confidence) {
  PalmAccumulator acc;
  accumulate(acc, schedule, g);
  return acc.estimate(g, confidence);
}

PalmEstimate palm_mean(std::span<const Schedule> schedules, const ConvexFunction& g, double confidence) {
  PalmAccumulator acc;
  for (const Schedule& s : schedules) accumulate(acc, s, g);
  return acc.estimate(g, confidence);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::separated: return "separated";
    case Verdict::confirmed: return "confirmed";
    case Verdict::reversed_within_noise: return "reversed_within_noise";
    case Verdict::violated: return "violated";
  }
  return "?";
}

Verdict ordering_verdict(const PalmEstimate& lower, const PalmEstimate& upper) {
  // Estimates that agree to rounding count as ordered.
  const double slack = 1e-12 * std::max({1.0, std::abs(lower.value), std::abs(upper.value)});
  const bool ordered = lower.value <= upper.value + slack;
  if (ordered) return lower.upper() < upper.lower() ? Verdict::separated : Verdict::confirmed;
  return upper.upper() < lower.lower() ? Verdict::violated : Verdict::reversed_within_noise;
}

const PalmEstimate& ComparisonReport::at(const DisciplineId& d, const ConvexFunction& g) const {
  for (std::size_t i = 0; i < disciplines.size(); ++i) {
    if (!(disciplines[i] == d)) continue;
    for (std::size_t j = 0; j < functions.size(); ++j) {
      if (functions[j] == g) return grid[i][j];
    }
  }
  throw std::out_of_range("ComparisonReport::at: no estimate for " + d.name() + "/" + g.name());
}

std::vector<std::pair<DisciplineId, DisciplineId>> ll_verified_pairs(std::span<const DisciplineId> disciplines,
                                                                     std::span<const DecisionState> states) {
  std::vector<std::pair<DisciplineId, DisciplineId>> pairs;
  for (const DisciplineId& a : disciplines) {
    for (const DisciplineId& b : disciplines) {
      if (a == b || !a.deterministic() || !b.deterministic()) continue;
      if (check_ll_order(a, b, states).holds) pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

ComparisonReport compare_disciplines(const ScenarioConfig& config, std::span<const DisciplineId> disciplines,
                                     std::span<const ConvexFunction> functions, std::size_t n_cycles,
                                     unsigned jobs) {
  if (disciplines.empty()) throw std::invalid_argument("compare_disciplines: no disciplines");
  if (functions.empty()) throw std::invalid_argument("compare_disciplines: no functions");
  if (n_cycles < 100) throw std::invalid_argument("compare_disciplines: at least 100 cycles required");
  const Utilization u = utilization(config);
  if (!u.stable) throw StabilityError("compare_disciplines: utilization " + std::to_string(u.rho) + " >= 1");

  ComparisonReport report;
  report.config = config;
  report.config.horizon = {Horizon::Kind::cycles, n_cycles};
  report.disciplines.assign(disciplines.begin(), disciplines.end());
  report.functions.assign(functions.begin(), functions.end());

  const ArrivalTrace trace = generate_trace(report.config);
  report.grid.assign(disciplines.size(), {});
  parallel_for(disciplines.size(), jobs, [&](std::size_t d) {
    const Schedule s = simulate(trace, disciplines[d]);
    for (const ConvexFunction& g : functions) report.grid[d].push_back(palm_mean(s, g));
  });

  // Decision states: synthetic ones plus the first selections seen on this trace.
  std::vector<DecisionState> states = sample_decision_states(config.seed, 4096);
  {
    std::vector<DecisionRecord> log;
    const std::size_t prefix = std::min<std::size_t>(trace.size(), 20000);
    const auto a = trace.arrivals(), s = trace.services(), p = trace.patiences();
    const ArrivalTrace head{std::span(a).first(prefix), std::span(s).first(prefix), std::span(p).first(prefix)};
    simulate(head, DisciplineId::fifo(), &log);
    for (auto& r : log) states.push_back(std::move(r.state));
  }
  report.ll_pairs = ll_verified_pairs(disciplines, states);
  for (const auto& [a, b] : report.ll_pairs) {
    for (const ConvexFunction& g : functions) {
      report.verdicts.push_back({a, b, g, ordering_verdict(report.at(a, g), report.at(b, g))});
    }
  }
  return report;
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
  out << "discipline,g,estimate,ci_halfwidth,n_cycles\n";
  char buf[256];
  for (std::size_t d = 0; d < report.disciplines.size(); ++d) {
    for (const PalmEstimate& e : report.grid[d]) {
      char hw[64] = "";
      if (e.ci_halfwidth) std::snprintf(hw, sizeof hw, "%.17g", *e.ci_halfwidth);
      std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%s,%zu\n", report.disciplines[d].name().c_str(),
                    e.g.name().c_str(), e.value, hw, e.n_cycles);
      out << buf;
    }
  }
}

nlohmann::json to_json(const ComparisonReport& report) {
  nlohmann::json grid = nlohmann::json::object();
  for (std::size_t d = 0; d < report.disciplines.size(); ++d) {
    nlohmann::json row = nlohmann::json::object();
    for (const PalmEstimate& e : report.grid[d]) {
      row[e.g.name()] = {{"estimate", e.value},
                         {"ci_halfwidth", e.ci_halfwidth ? nlohmann::json(*e.ci_halfwidth) : nlohmann::json()},
                         {"n_cycles", e.n_cycles},
                         {"n_customers", e.n_customers}};
    }
    grid[report.disciplines[d].name()] = std::move(row);
  }
  nlohmann::json verdicts = nlohmann::json::array();
  for (const PairVerdict& v : report.verdicts) {
    verdicts.push_back(
        {{"lower", v.lower.name()}, {"upper", v.upper.name()}, {"g", v.g.name()}, {"verdict", to_string(v.verdict)}});
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : report.ll_pairs) pairs.push_back({a.name(), b.name()});
  return {{"config", to_json(report.config)}, {"grid", grid}, {"ll_pairs", pairs}, {"verdicts", verdicts}};
}

}  // namespace dlab
