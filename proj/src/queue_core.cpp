#include "dlab/queue_core.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

namespace dlab {

namespace {

// Waiting room ordered by a discipline. Deterministic kinds keep a binary
// heap on has_priority; random picks uniformly from an unordered pool.
class WaitingRoom {
 public:
  explicit WaitingRoom(const DisciplineId& d) : kind_(d.kind), rng_(d.seed, StreamLabel::discipline) {}

  bool empty() const { return pool_.empty(); }
  const std::vector<WaitingCustomer>& contents() const { return pool_; }

  void push(const WaitingCustomer& c) {
    pool_.push_back(c);
    if (kind_ != DisciplineKind::random) std::push_heap(pool_.begin(), pool_.end(), lower_priority());
  }

  std::size_t pop() {
    if (kind_ == DisciplineKind::random) {
      const std::size_t k = rng_.index(pool_.size());
      std::swap(pool_[k], pool_.back());
    } else {
      std::pop_heap(pool_.begin(), pool_.end(), lower_priority());
    }
    const std::size_t chosen = pool_.back().index;
    pool_.pop_back();
    return chosen;
  }

 private:
  struct LowerPriority {
    DisciplineKind kind;
    bool operator()(const WaitingCustomer& a, const WaitingCustomer& b) const { return has_priority(kind, b, a); }
  };
  LowerPriority lower_priority() const { return {kind_}; }

  DisciplineKind kind_;
  RandomStream rng_;
  std::vector<WaitingCustomer> pool_;
};

template <class Duration>
Schedule run_engine(const ArrivalTrace& trace, const DisciplineId& discipline, Duration duration,
                    std::vector<DecisionRecord>* log) {
  const std::size_t n = trace.size();
  Schedule s;
  s.discipline = discipline;
  s.begin.assign(n, 0.0);
  std::vector<std::size_t> order(n);

  WaitingRoom room(discipline);
  auto admit = [&](std::size_t i) {
    const Customer& c = trace[i];
    room.push({i, c.deadline, c.arrival});
  };

  std::size_t next = 0;
  double now = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t c;
    if (room.empty()) {
      c = next++;
      now = trace[c].arrival;
      s.cycles.push_back({c, c});
    } else {
      if (log) {
        DecisionState state{now, room.contents()};
        std::sort(state.waiting.begin(), state.waiting.end(),
                  [](const WaitingCustomer& a, const WaitingCustomer& b) { return a.index < b.index; });
        log->push_back({std::move(state), 0});
      }
      c = room.pop();
      if (log) log->back().chosen = c;
    }
    s.begin[c] = now;
    order[k] = c;
    s.cycles.back().last = std::max(s.cycles.back().last, c);

    const double completion = now + duration(c, k);
    while (next < n && trace[next].arrival < completion) admit(next++);
    if (!room.empty()) {
      while (next < n && trace[next].arrival == completion) admit(next++);
    }
    now = completion;
  }

  s.service_order = Permutation(std::move(order));
  s.waiting.resize(n);
  s.residual.resize(n);
  s.lateness.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Customer& c = trace[i];
    s.waiting[i] = s.begin[i] - c.arrival;
    s.residual[i] = c.deadline - s.begin[i];
    s.lateness[i] = s.residual[i] < 0.0 ? -s.residual[i] : 0.0;
  }
  return s;
}

}  // namespace

Schedule simulate(const ArrivalTrace& trace, const DisciplineId& discipline,
                  std::vector<DecisionRecord>* log) {
  return run_engine(
      trace, discipline, [&](std::size_t c, std::size_t) { return trace[c].service; }, log);
}

Schedule simulate_positional(const ArrivalTrace& trace, const DisciplineId& discipline,
                             std::span<const double> durations_by_position) {
  if (durations_by_position.size() != trace.size()) {
    throw std::invalid_argument("simulate_positional: one duration per customer required");
  }
  for (double d : durations_by_position) {
    if (!(d > 0.0)) throw std::invalid_argument("simulate_positional: durations must be positive");
  }
  return run_engine(
      trace, discipline, [&](std::size_t, std::size_t k) { return durations_by_position[k]; }, nullptr);
}

std::vector<CycleRecord> busy_cycles(const ArrivalTrace& trace, const Schedule& schedule) {
  const std::size_t n = trace.size();
  if (schedule.size() != n || schedule.service_order.size() != n) {
    throw ScheduleMismatch("busy_cycles: schedule size does not match trace");
  }
  std::vector<CycleRecord> cycles;
  std::size_t max_served = 0;
  double completion = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t c = schedule.service_order[k];
    const double b = schedule.begin[c];
    if (b < trace[c].arrival) throw ScheduleMismatch("busy_cycles: service begins before arrival");
    const bool opens = (k == 0 || max_served + 1 == k) && c == k && b == trace[c].arrival;
    if (opens) {
      if (k > 0 && b < completion) throw ScheduleMismatch("busy_cycles: overlapping services");
      cycles.push_back({c, c});
    } else if (b != completion) {
      throw ScheduleMismatch("busy_cycles: server idles or overlaps inside a busy cycle");
    }
    cycles.back().last = std::max(cycles.back().last, c);
    max_served = k == 0 ? c : std::max(max_served, c);
    completion = b + trace[c].service;
  }
  return cycles;
}

Permutation deadline_order(const ArrivalTrace& trace, const CycleRecord& cycle) {
  if (cycle.last < cycle.first || cycle.last >= trace.size()) {
    throw std::out_of_range("deadline_order: cycle outside trace");
  }
  Vector deadlines;
  deadlines.reserve(cycle.size());
  for (std::size_t i = cycle.first; i <= cycle.last; ++i) deadlines.push_back(trace[i].deadline);
  return sort_with_permutation(deadlines).second;
}

Vector residuals_in_deadline_order(const ArrivalTrace& trace, const Schedule& schedule,
                                   std::size_t cycle) {
  if (cycle >= schedule.cycles.size()) throw std::out_of_range("residuals_in_deadline_order: no such cycle");
  const CycleRecord& rec = schedule.cycles[cycle];
  const Permutation alpha = deadline_order(trace, rec);
  Vector out(rec.size());
  for (std::size_t j = 0; j < rec.size(); ++j) out[j] = schedule.residual[rec.first + alpha[j]];
  return out;
}

void write_schedule_csv(std::ostream& out, const ArrivalTrace& trace, const Schedule& schedule) {
  if (schedule.size() != trace.size()) throw ScheduleMismatch("write_schedule_csv: size mismatch");
  out << "index,arrival,service,deadline,begin,waiting,residual,lateness,cycle\n";
  std::size_t cycle = 0;
  char buf[512];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    while (cycle + 1 < schedule.cycles.size() && schedule.cycles[cycle].last < i) ++cycle;
    const Customer& c = trace[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", i, c.arrival,
                  c.service, c.deadline, schedule.begin[i], schedule.waiting[i], schedule.residual[i],
                  schedule.lateness[i], cycle);
    out << buf;
  }
}

}  // namespace dlab
