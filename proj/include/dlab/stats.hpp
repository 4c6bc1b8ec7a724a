#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlab/arrivals.hpp"
#include "dlab/disciplines.hpp"
#include "dlab/majorization.hpp"
#include "dlab/queue_core.hpp"

namespace dlab {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cycle-formula estimate of the per-customer Palm mean of g(R).
struct PalmEstimate {
  double value = 0.0;
  std::optional<double> ci_halfwidth;  // absent with fewer than two cycles
  std::size_t n_cycles = 0;
  std::size_t n_customers = 0;
  ConvexFunction g{ConvexFunction::Kind::lateness};

  double lower() const { return value - ci_halfwidth.value_or(0.0); }
  double upper() const { return value + ci_halfwidth.value_or(0.0); }
};

/// Regenerative ratio estimator. Each cycle contributes the pair
/// (Y, N) = (Σ g(R_i) over the cycle, cycle size). The estimate is ΣY/ΣN and
/// the half-width is z * S / (N̄ √C) with S² the sample variance of
/// Y - estimate * N across the C cycles.
class PalmAccumulator {
 public:
  void add_cycle(double sum, std::size_t size);
  std::size_t cycles() const { return sums_.size(); }

  /// Throws EstimationError when no cycle was added.
  PalmEstimate estimate(const ConvexFunction& g, double confidence = 0.95) const;

 private:
  std::vector<double> sums_;
  std::vector<std::size_t> sizes_;
};

/// Two-sided normal quantile for the given confidence level.
double normal_critical_value(double confidence);

PalmEstimate palm_mean(const Schedule& schedule, const ConvexFunction& g, double confidence = 0.95);
/// Pools the cycles of several schedules, in order.
PalmEstimate palm_mean(std::span<const Schedule> schedules, const ConvexFunction& g,
                       double confidence = 0.95);

enum class Verdict {
  separated,              // ordered and the confidence intervals are disjoint
  confirmed,              // point estimates ordered, intervals overlap
  reversed_within_noise,  // point estimates reversed, intervals overlap
  violated                // reversed with disjoint intervals
};

std::string to_string(Verdict v);

/// Verdict for the claim est(lower) <= est(upper).
Verdict ordering_verdict(const PalmEstimate& lower, const PalmEstimate& upper);

struct PairVerdict {
  DisciplineId lower;
  DisciplineId upper;
  ConvexFunction g;
  Verdict verdict;
};

struct ComparisonReport {
  ScenarioConfig config;
  std::vector<DisciplineId> disciplines;
  std::vector<ConvexFunction> functions;
  std::vector<std::vector<PalmEstimate>> grid;  // [discipline][function]
  std::vector<std::pair<DisciplineId, DisciplineId>> ll_pairs;
  std::vector<PairVerdict> verdicts;

  const PalmEstimate& at(const DisciplineId& d, const ConvexFunction& g) const;
};

/// Ordered pairs (a, b), a != b, of deterministic disciplines in `disciplines`
/// for which check_ll_order(a, b, states) holds.
std::vector<std::pair<DisciplineId, DisciplineId>> ll_verified_pairs(
    std::span<const DisciplineId> disciplines, std::span<const DecisionState> states);

/// Generates one trace of `n_cycles` busy cycles and replays every
/// discipline on it. Verdicts are given only for ≪-verified pairs.
/// Throws StabilityError when ρ >= 1, std::invalid_argument for an empty
/// discipline or function list or n_cycles < 100.
ComparisonReport compare_disciplines(const ScenarioConfig& config, std::span<const DisciplineId> disciplines,
                                     std::span<const ConvexFunction> functions, std::size_t n_cycles,
                                     unsigned jobs = 1);

/// CSV `discipline,g,estimate,ci_halfwidth,n_cycles`.
void write_comparison_csv(std::ostream& out, const ComparisonReport& report);
nlohmann::json to_json(const ComparisonReport& report);

}  // namespace dlab
