#include "dlab/coupling.hpp"

#include <algorithm>
#include <stdexcept>

namespace dlab {

DeadlineRankMaps deadline_rank_maps(const ArrivalTrace& trace, const Schedule& schedule,
                                    const CycleRecord& cycle) {
  if (schedule.size() != trace.size() || cycle.last >= trace.size() || cycle.last < cycle.first) {
    throw ScheduleMismatch("deadline_rank_maps: cycle outside schedule");
  }
  const std::size_t m = cycle.size();
  Permutation alpha = deadline_order(trace, cycle);
  const Permutation rank_of = alpha.inverse();  // customer -> rank

  // In a valid schedule the cycle occupies service positions first..last.
  std::vector<std::size_t> ranks(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t c = schedule.service_order[cycle.first + k];
    if (c < cycle.first || c > cycle.last) {
      throw ScheduleMismatch("deadline_rank_maps: schedule serves customer " + std::to_string(c) +
                             " inside the block of cycle [" + std::to_string(cycle.first) + "," +
                             std::to_string(cycle.last) + "]");
    }
    ranks[k] = rank_of[c - cycle.first];
  }
  return {std::move(alpha), Permutation(std::move(ranks))};
}

Permutation build_gamma(const Permutation& alpha, const Permutation& phi, const Permutation& psi) {
  if (alpha.size() != phi.size() || alpha.size() != psi.size()) {
    throw std::domain_error("build_gamma: size mismatch");
  }
  return alpha.compose(psi).compose(phi.inverse()).compose(alpha.inverse());
}

Permutation assemble_block_diagonal(std::span<const CycleRecord> cycles,
                                    std::span<const Permutation> per_cycle, std::size_t n) {
  if (cycles.size() != per_cycle.size()) {
    throw std::invalid_argument("assemble_block_diagonal: one permutation per cycle required");
  }
  std::vector<std::size_t> map(n);
  std::size_t expected = 0;
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const CycleRecord& rec = cycles[c];
    if (rec.first != expected || rec.last < rec.first || rec.last >= n || per_cycle[c].size() != rec.size()) {
      throw std::invalid_argument("assemble_block_diagonal: cycles must partition 0..n-1");
    }
    for (std::size_t i = 0; i < rec.size(); ++i) map[rec.first + i] = rec.first + per_cycle[c][i];
    expected = rec.last + 1;
  }
  if (expected != n) throw std::invalid_argument("assemble_block_diagonal: cycles must partition 0..n-1");
  return Permutation(std::move(map));
}

ArrivalTrace rearrange_services(const ArrivalTrace& trace, std::span<const CycleRecord> cycles,
                                const Permutation& gamma) {
  const std::size_t n = trace.size();
  if (gamma.size() != n) throw std::invalid_argument("rearrange_services: gamma size differs from trace");
  std::size_t expected = 0;
  for (const CycleRecord& rec : cycles) {
    if (rec.first != expected || rec.last < rec.first || rec.last >= n) {
      throw std::invalid_argument("rearrange_services: cycles must partition the trace");
    }
    for (std::size_t i = rec.first; i <= rec.last; ++i) {
      if (gamma[i] < rec.first || gamma[i] > rec.last) {
        throw std::invalid_argument("rearrange_services: gamma is not block-structured on cycle [" +
                                    std::to_string(rec.first) + "," + std::to_string(rec.last) + "]");
      }
    }
    expected = rec.last + 1;
  }
  if (expected != n) throw std::invalid_argument("rearrange_services: cycles must partition the trace");

  const auto arrivals = trace.arrivals();
  const auto services = trace.services();
  const auto patiences = trace.patiences();
  std::vector<double> moved(n);
  for (std::size_t i = 0; i < n; ++i) moved[i] = services[gamma[i]];
  return ArrivalTrace(arrivals, moved, patiences);
}

std::size_t CouplingReport::identity_failures() const {
  return static_cast<std::size_t>(
      std::count_if(cycles.begin(), cycles.end(), [](const CycleCoupling& c) { return !c.identity_ok; }));
}

std::size_t CouplingReport::majorization_failures() const {
  return static_cast<std::size_t>(
      std::count_if(cycles.begin(), cycles.end(), [](const CycleCoupling& c) { return !c.majorization_ok; }));
}

std::size_t CouplingReport::decomposition_failures() const {
  return static_cast<std::size_t>(
      std::count_if(cycles.begin(), cycles.end(), [](const CycleCoupling& c) { return !c.decomposition_ok; }));
}

bool CouplingReport::all_ok() const {
  return std::all_of(cycles.begin(), cycles.end(), [](const CycleCoupling& c) { return c.ok(); });
}

namespace {

// Replays the steps on v, requiring each to swap an inverted pair, and
// compares the end point with the target.
std::string replay_decomposition(const std::vector<Transposition>& steps, Vector v, const Vector& target) {
  for (const Transposition& t : steps) {
    if (!(t.first < t.second && v[t.first] > v[t.second])) return "decomposition step is not a reordering";
    std::swap(v[t.first], v[t.second]);
  }
  return v == target ? std::string() : std::string("decomposition does not reach the target");
}

}  // namespace

CouplingReport verify_coupling(const ArrivalTrace& trace, const DisciplineId& phi, const DisciplineId& psi,
                               double sum_tolerance) {
  if (!phi.deterministic() || !psi.deterministic()) {
    throw std::invalid_argument("verify_coupling: both disciplines must be deterministic");
  }
  CouplingReport report{phi, psi, {}};
  const std::size_t n = trace.size();
  if (n == 0) return report;

  const Schedule on_psi = simulate(trace, psi);
  std::vector<double> positional(n);
  for (std::size_t k = 0; k < n; ++k) positional[k] = trace[on_psi.service_order[k]].service;
  const Schedule lockstep = simulate_positional(trace, phi, positional);
  const std::vector<CycleRecord>& cycles = on_psi.cycles;

  report.cycles.resize(cycles.size());
  if (lockstep.cycles != cycles) {
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      report.cycles[c].cycle = cycles[c];
      report.cycles[c].diagnostic = "lockstep run changed the busy-cycle structure";
    }
    return report;
  }

  std::vector<Permutation> gammas;
  std::vector<DeadlineRankMaps> psi_maps;
  gammas.reserve(cycles.size());
  psi_maps.reserve(cycles.size());
  for (const CycleRecord& rec : cycles) {
    DeadlineRankMaps on_phi = deadline_rank_maps(trace, lockstep, rec);
    psi_maps.push_back(deadline_rank_maps(trace, on_psi, rec));
    gammas.push_back(build_gamma(psi_maps.back().alpha, on_phi.ranks, psi_maps.back().ranks));
  }
  const ArrivalTrace rearranged =
      rearrange_services(trace, cycles, assemble_block_diagonal(cycles, gammas, n));
  const Schedule on_gamma = simulate(rearranged, phi);
  const bool same_structure = on_gamma.cycles == cycles;

  bool any_failure = false;
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const CycleRecord& rec = cycles[c];
    const Permutation& alpha = psi_maps[c].alpha;
    const Permutation& gamma = gammas[c];
    const std::size_t m = rec.size();
    CycleCoupling& out = report.cycles[c];
    out.cycle = rec;
    out.gamma = gamma;

    // (a)
    bool same_order = same_structure;
    for (std::size_t k = rec.first; same_order && k <= rec.last; ++k) {
      same_order = on_gamma.service_order[k] == lockstep.service_order[k];
    }
    if (!same_order) {
      out.diagnostic = "service order of phi on the rearranged input differs from the lockstep run";
    } else {
      out.identity_ok = true;
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t lhs = rec.first + alpha[j];
        const std::size_t rhs = rec.first + gamma[alpha[j]];
        if (on_gamma.begin[lhs] != on_psi.begin[rhs]) {
          out.identity_ok = false;
          out.diagnostic = "begin-service identity fails at deadline rank " + std::to_string(j);
          break;
        }
      }
    }

    // (b)
    out.r_phi.resize(m);
    out.r_psi.resize(m);
    Vector b_psi(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = rec.first + alpha[j];
      out.r_phi[j] = on_gamma.residual[i];
      out.r_psi[j] = on_psi.residual[i];
      b_psi[j] = on_psi.begin[i];
    }
    out.majorization_ok = majorizes(out.r_phi, out.r_psi, sum_tolerance);
    if (!out.majorization_ok && out.diagnostic.empty()) out.diagnostic = "residual vectors not majorized";

    // (c)
    const Permutation on_ranks = alpha.inverse().compose(gamma).compose(alpha);
    try {
      const auto steps = decompose_into_reorderings(on_ranks, b_psi);
      const std::string problem = replay_decomposition(steps, b_psi, apply_permutation(on_ranks, b_psi));
      out.decomposition_ok = problem.empty();
      out.decomposition_steps = steps.size();
      if (!problem.empty() && out.diagnostic.empty()) out.diagnostic = problem;
    } catch (const NotDecomposableError& e) {
      out.decomposition_ok = false;
      if (out.diagnostic.empty()) out.diagnostic = e.what();
    }
    any_failure = any_failure || !out.ok();
  }

  if (any_failure) {
    std::vector<DecisionRecord> log;
    simulate(rearranged, phi, &log);
    std::vector<std::size_t> cycle_of(n);
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      for (std::size_t i = cycles[c].first; i <= cycles[c].last; ++i) cycle_of[i] = c;
    }
    for (DecisionRecord& d : log) {
      CycleCoupling& out = report.cycles[cycle_of[d.chosen]];
      if (!out.ok()) out.decisions.push_back(std::move(d));
    }
  }
  return report;
}

nlohmann::json to_json(const CouplingReport& report) {
  nlohmann::json cycles = nlohmann::json::array();
  for (const CycleCoupling& c : report.cycles) {
    nlohmann::json j;
    j["first"] = c.cycle.first;
    j["last"] = c.cycle.last;
    j["gamma"] = std::vector<std::size_t>(c.gamma.mapping().begin(), c.gamma.mapping().end());
    j["identity_ok"] = c.identity_ok;
    j["majorization_ok"] = c.majorization_ok;
    j["decomposition_ok"] = c.decomposition_ok;
    j["r_phi"] = c.r_phi;
    j["r_psi"] = c.r_psi;
    if (!c.ok()) {
      j["diagnostic"] = c.diagnostic;
      nlohmann::json decisions = nlohmann::json::array();
      for (const DecisionRecord& d : c.decisions) {
        nlohmann::json waiting = nlohmann::json::array();
        for (const WaitingCustomer& w : d.state.waiting) {
          waiting.push_back({{"index", w.index}, {"deadline", w.deadline}, {"arrival", w.arrival}});
        }
        decisions.push_back({{"now", d.state.now}, {"waiting", waiting}, {"chosen", d.chosen}});
      }
      j["decisions"] = decisions;
    }
    cycles.push_back(std::move(j));
  }
  return {{"phi", report.phi.name()}, {"psi", report.psi.name()}, {"cycles", cycles}};
}

}  // namespace dlab
