#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dlab {

enum class DisciplineKind { edf, ldf, fifo, lifo, random };

/// A non-preemptive selection policy. `seed` is only meaningful for random.
struct DisciplineId {
  DisciplineKind kind = DisciplineKind::edf;
  std::uint64_t seed = 0;

  static DisciplineId edf() { return {DisciplineKind::edf, 0}; }
  static DisciplineId ldf() { return {DisciplineKind::ldf, 0}; }
  static DisciplineId fifo() { return {DisciplineKind::fifo, 0}; }
  static DisciplineId lifo() { return {DisciplineKind::lifo, 0}; }
  static DisciplineId random(std::uint64_t seed) { return {DisciplineKind::random, seed}; }

  /// `edf`, `ldf`, `fifo`, `lifo` or `random:<seed>`; throws std::invalid_argument.
  static DisciplineId parse(std::string_view text);
  std::string name() const;
  bool deterministic() const { return kind != DisciplineKind::random; }

  friend bool operator==(const DisciplineId&, const DisciplineId&) = default;
};

/// Comma-separated list of discipline names.
std::vector<DisciplineId> parse_discipline_list(std::string_view text);

struct WaitingCustomer {
  std::size_t index = 0;
  double deadline = 0.0;
  double arrival = 0.0;
};

/// What a policy sees when the server frees up.
struct DecisionState {
  double now = 0.0;
  std::vector<WaitingCustomer> waiting;

  double residual(const WaitingCustomer& c) const { return c.deadline - now; }
};

/// Strict priority order of a deterministic discipline: true when `a` must be
/// served before `b`. Deadline and arrival ties go to the lower index.
bool has_priority(DisciplineKind kind, const WaitingCustomer& a, const WaitingCustomer& b);

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Customer index chosen by `d`. The random discipline draws from a fresh
/// stream seeded by its own seed. Throws ContractViolation if nobody waits.
std::size_t select(const DisciplineId& d, const DecisionState& s);

struct LlOrderReport {
  bool holds = true;
  std::size_t states_checked = 0;
  std::optional<DecisionState> counterexample;
  std::size_t phi_choice = 0;
  std::size_t psi_choice = 0;
};

/// Checks that phi never picks a later deadline than psi on `states`.
/// Throws std::invalid_argument for a random discipline or no states.
LlOrderReport check_ll_order(const DisciplineId& phi, const DisciplineId& psi,
                             std::span<const DecisionState> states);

/// Synthetic decision states with 1..max_waiting customers whose deadlines
/// and arrival times are drawn independently (small integers, so ties occur).
std::vector<DecisionState> sample_decision_states(std::uint64_t seed, std::size_t count,
                                                  std::size_t max_waiting = 6);

}  // namespace dlab
