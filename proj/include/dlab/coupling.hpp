#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlab/arrivals.hpp"
#include "dlab/disciplines.hpp"
#include "dlab/majorization.hpp"
#include "dlab/queue_core.hpp"

namespace dlab {

// Interchange construction comparing a discipline Φ against Ψ on one trace N.
//
// Within each busy cycle, indices are local (customer first+i is i):
//   alpha : deadline rank -> customer
//   phi   : service position -> deadline rank, under Φ
//   psi   : service position -> deadline rank, under Ψ
//   gamma = alpha ∘ psi ∘ phi⁻¹ ∘ alpha⁻¹ : customer -> customer
// gamma sends each customer to the one Ψ serves in the same position. N^γ
// gives customer n the service duration of customer gamma(n).
//
// Φ's service order is taken from Φ running on N^γ. That order is computed
// first by a lockstep run in which the k-th service started by Φ lasts as
// long as the k-th service started by Ψ on N, and it is then confirmed by an
// ordinary simulation of Φ on N^γ.

struct DeadlineRankMaps {
  Permutation alpha;
  Permutation ranks;  // service position -> deadline rank
};

/// alpha and the position -> rank map of `schedule` on one cycle. Throws
/// ScheduleMismatch when the schedule does not serve exactly the cycle's
/// customers in that block of positions.
DeadlineRankMaps deadline_rank_maps(const ArrivalTrace& trace, const Schedule& schedule,
                                    const CycleRecord& cycle);

/// alpha ∘ psi ∘ phi⁻¹ ∘ alpha⁻¹. Throws std::domain_error on size mismatch.
Permutation build_gamma(const Permutation& alpha, const Permutation& phi, const Permutation& psi);

/// Places per-cycle (local) permutations on the diagonal of a trace-wide one.
Permutation assemble_block_diagonal(std::span<const CycleRecord> cycles,
                                    std::span<const Permutation> per_cycle, std::size_t n);

/// N^γ: same arrivals and patiences, customer n gets service σ_{gamma(n)}.
/// Throws std::invalid_argument if `cycles` do not partition the trace or
/// gamma moves a customer out of its cycle.
ArrivalTrace rearrange_services(const ArrivalTrace& trace, std::span<const CycleRecord> cycles,
                                const Permutation& gamma);

struct CycleCoupling {
  CycleRecord cycle;
  Permutation gamma;  // local
  bool identity_ok = false;
  bool majorization_ok = false;
  bool decomposition_ok = false;
  std::size_t decomposition_steps = 0;
  Vector r_phi;  // R_α on N^γ under Φ
  Vector r_psi;  // R_α on N under Ψ
  std::string diagnostic;
  std::vector<DecisionRecord> decisions;  // Φ on N^γ, filled only on failure

  bool ok() const { return identity_ok && majorization_ok && decomposition_ok; }
};

struct CouplingReport {
  DisciplineId phi;
  DisciplineId psi;
  std::vector<CycleCoupling> cycles;

  std::size_t identity_failures() const;
  std::size_t majorization_failures() const;
  std::size_t decomposition_failures() const;
  bool all_ok() const;
};

/// Runs the construction on every cycle of `trace` and checks:
///   (a) B^{N^γ,Φ}_{alpha(n)} == B^{N,Ψ}_{gamma(alpha(n))} exactly;
///   (b) R_α^{N^γ,Φ} ≺ R_α^{N,Ψ} with the given relative sum tolerance;
///   (c) alpha⁻¹ ∘ gamma ∘ alpha decomposes into reordering transpositions of
///       B_α^{N,Ψ}.
/// Failures are recorded per cycle. Throws std::invalid_argument for a
/// random discipline.
CouplingReport verify_coupling(const ArrivalTrace& trace, const DisciplineId& phi,
                               const DisciplineId& psi, double sum_tolerance = kDefaultSumTolerance);

/// One object per cycle: first, last, gamma, identity_ok, majorization_ok,
/// decomposition_ok, r_phi, r_psi (plus diagnostic and decisions on failure).
nlohmann::json to_json(const CouplingReport& report);

}  // namespace dlab
