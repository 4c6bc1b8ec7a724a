#include "dlab/disciplines.hpp"

#include <algorithm>
#include <stdexcept>

#include "dlab/arrivals.hpp"

namespace dlab {

DisciplineId DisciplineId::parse(std::string_view text) {
  if (text == "edf") return edf();
  if (text == "ldf") return ldf();
  if (text == "fifo") return fifo();
  if (text == "lifo") return lifo();
  constexpr std::string_view prefix = "random:";
  if (text.starts_with(prefix)) {
    const std::string digits(text.substr(prefix.size()));
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      try {
        return random(std::stoull(digits));
      } catch (const std::out_of_range&) {
      }
    }
  }
  throw std::invalid_argument("unknown discipline '" + std::string(text) + "'");
}

std::string DisciplineId::name() const {
  switch (kind) {
    case DisciplineKind::edf: return "edf";
    case DisciplineKind::ldf: return "ldf";
    case DisciplineKind::fifo: return "fifo";
    case DisciplineKind::lifo: return "lifo";
    case DisciplineKind::random: return "random:" + std::to_string(seed);
  }
  return "?";
}

std::vector<DisciplineId> parse_discipline_list(std::string_view text) {
  std::vector<DisciplineId> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    if (item.empty()) throw std::invalid_argument("empty entry in discipline list");
    out.push_back(DisciplineId::parse(item));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) throw std::invalid_argument("trailing comma in discipline list");
  }
  return out;
}

bool has_priority(DisciplineKind kind, const WaitingCustomer& a, const WaitingCustomer& b) {
  switch (kind) {
    case DisciplineKind::edf:
      if (a.deadline != b.deadline) return a.deadline < b.deadline;
      break;
    case DisciplineKind::ldf:
      if (a.deadline != b.deadline) return a.deadline > b.deadline;
      break;
    case DisciplineKind::fifo:
      if (a.arrival != b.arrival) return a.arrival < b.arrival;
      break;
    case DisciplineKind::lifo:
      if (a.arrival != b.arrival) return a.arrival > b.arrival;
      break;
    case DisciplineKind::random:
      throw std::invalid_argument("has_priority: random discipline has no priority order");
  }
  return a.index < b.index;
}

std::size_t select(const DisciplineId& d, const DecisionState& s) {
  if (s.waiting.empty()) throw ContractViolation("select: empty waiting set");
  if (d.kind == DisciplineKind::random) {
    RandomStream rng(d.seed, StreamLabel::discipline);
    return s.waiting[rng.index(s.waiting.size())].index;
  }
  const auto best = std::min_element(
      s.waiting.begin(), s.waiting.end(),
      [&](const WaitingCustomer& a, const WaitingCustomer& b) { return has_priority(d.kind, a, b); });
  return best->index;
}

LlOrderReport check_ll_order(const DisciplineId& phi, const DisciplineId& psi,
                             std::span<const DecisionState> states) {
  if (!phi.deterministic() || !psi.deterministic()) {
    throw std::invalid_argument("check_ll_order: random selection has no pointwise order");
  }
  if (states.empty()) throw std::invalid_argument("check_ll_order: no decision states");

  auto deadline_of = [](const DecisionState& s, std::size_t index) {
    for (const auto& c : s.waiting) {
      if (c.index == index) return c.deadline;
    }
    throw ContractViolation("check_ll_order: selected customer not in state");
  };

  LlOrderReport report;
  for (const DecisionState& s : states) {
    ++report.states_checked;
    const std::size_t a = select(phi, s);
    const std::size_t b = select(psi, s);
    if (deadline_of(s, a) > deadline_of(s, b)) {
      report.holds = false;
      report.counterexample = s;
      report.phi_choice = a;
      report.psi_choice = b;
      break;
    }
  }
  return report;
}

std::vector<DecisionState> sample_decision_states(std::uint64_t seed, std::size_t count,
                                                  std::size_t max_waiting) {
  if (max_waiting == 0) throw std::invalid_argument("sample_decision_states: max_waiting must be positive");
  RandomStream rng(seed, StreamLabel::discipline);
  std::vector<DecisionState> states;
  states.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    DecisionState s;
    s.now = 10.0;
    const std::size_t m = 1 + rng.index(max_waiting);
    // Distinct arrival times at or before `now`, deadlines anywhere in [0, 20].
    std::vector<double> arrivals;
    while (arrivals.size() < m) {
      const double t = static_cast<double>(rng.index(11));
      if (std::find(arrivals.begin(), arrivals.end(), t) == arrivals.end()) arrivals.push_back(t);
    }
    std::sort(arrivals.begin(), arrivals.end());
    for (std::size_t i = 0; i < m; ++i) {
      s.waiting.push_back({i, static_cast<double>(rng.index(21)), arrivals[i]});
    }
    states.push_back(std::move(s));
  }
  return states;
}

}  // namespace dlab
