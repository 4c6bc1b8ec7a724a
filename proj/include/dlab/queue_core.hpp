#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "dlab/arrivals.hpp"
#include "dlab/disciplines.hpp"
#include "dlab/majorization.hpp"

namespace dlab {

/// Customers first..last (arrival indices, inclusive) served in one busy
/// cycle. A cycle opens when a customer arrives to an empty system.
struct CycleRecord {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first + 1; }
  friend bool operator==(const CycleRecord&, const CycleRecord&) = default;
};

/// Outcome of running one discipline on one trace. Per-customer vectors are
/// indexed by arrival index.
struct Schedule {
  DisciplineId discipline;
  std::vector<double> begin;
  std::vector<double> waiting;   // begin - arrival
  std::vector<double> residual;  // deadline - begin
  std::vector<double> lateness;  // max(-residual, 0)
  Permutation service_order;     // service position -> customer
  std::vector<CycleRecord> cycles;

  std::size_t size() const { return begin.size(); }
};

/// One selection made from a nonempty waiting set.
struct DecisionRecord {
  DecisionState state;
  std::size_t chosen;
};

class ScheduleMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Event-driven non-preemptive single-server run. At an epoch where a
/// service ends and customers arrive, the completion is processed first,
/// then the arrivals, then the selection; an arrival that finds the server
/// just freed and nobody waiting opens a new cycle. Begin times inside a
/// cycle are running sums from the cycle's first arrival in service order.
/// When `log` is given every selection from a nonempty waiting set is
/// appended to it.
Schedule simulate(const ArrivalTrace& trace, const DisciplineId& discipline,
                  std::vector<DecisionRecord>* log = nullptr);

/// Same engine, but the k-th service started lasts durations_by_position[k]
/// whoever receives it. The returned schedule's timing fields reflect those
/// durations.
Schedule simulate_positional(const ArrivalTrace& trace, const DisciplineId& discipline,
                             std::span<const double> durations_by_position);

/// Recovers the busy cycles from a schedule: position k opens a cycle when
/// customers 0..k-1 were all served before it and it begins at its own
/// arrival. Throws ScheduleMismatch when the schedule cannot belong to the
/// trace (sizes, begin before arrival, overlapping or idle-gapped services).
std::vector<CycleRecord> busy_cycles(const ArrivalTrace& trace, const Schedule& schedule);

/// Residual patiences of the cycle's customers in (deadline, index) order.
/// Throws std::out_of_range for a bad cycle index.
Vector residuals_in_deadline_order(const ArrivalTrace& trace, const Schedule& schedule,
                                   std::size_t cycle);

/// Customer indices of a cycle in (deadline, index) order, relative to
/// cycle.first.
Permutation deadline_order(const ArrivalTrace& trace, const CycleRecord& cycle);

/// CSV `index,arrival,service,deadline,begin,waiting,residual,lateness,cycle`.
void write_schedule_csv(std::ostream& out, const ArrivalTrace& trace, const Schedule& schedule);

}  // namespace dlab
