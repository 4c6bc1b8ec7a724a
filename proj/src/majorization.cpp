#include "dlab/majorization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace dlab {

namespace {

void require_finite(std::span<const double> x, const char* what) {
  if (x.empty()) throw std::domain_error(std::string(what) + ": empty vector");
  for (double v : x) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(what) + ": non-finite entry");
  }
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::domain_error(std::string(what) + ": length mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
}

// Ascending copy; ties are irrelevant for the sums taken from it.
Vector sorted_copy(std::span<const double> x) {
  Vector out(x.begin(), x.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

// --- Permutation -------------------------------------------------------------

Permutation::Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t v : map_) {
    if (v >= map_.size() || seen[v]) {
      throw std::invalid_argument("Permutation: mapping is not a bijection");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  Permutation p;
  p.map_.resize(n);
  std::iota(p.map_.begin(), p.map_.end(), std::size_t{0});
  return p;
}

Permutation Permutation::transposition(std::size_t n, std::size_t i, std::size_t j) {
  if (i >= n || j >= n) throw std::invalid_argument("Permutation::transposition: index out of range");
  Permutation p = identity(n);
  std::swap(p.map_[i], p.map_[j]);
  return p;
}

Permutation Permutation::inverse() const {
  Permutation p;
  p.map_.resize(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) p.map_[map_[i]] = i;
  return p;
}

Permutation Permutation::compose(const Permutation& inner) const {
  if (inner.size() != size()) throw std::domain_error("Permutation::compose: size mismatch");
  Permutation p;
  p.map_.resize(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) p.map_[i] = map_[inner.map_[i]];
  return p;
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < map_.size(); ++i) {
    if (map_[i] != i) return false;
  }
  return true;
}

// --- ordering ----------------------------------------------------------------

std::pair<Vector, Permutation> sort_with_permutation(std::span<const double> x) {
  require_finite(x, "sort_with_permutation");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  Vector sorted(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = x[order[i]];
  return {std::move(sorted), Permutation(std::move(order))};
}

Vector apply_permutation(const Permutation& g, std::span<const double> x) {
  require_same_size(g.size(), x.size(), "apply_permutation");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[g[i]];
  return out;
}

bool majorizes(std::span<const double> x, std::span<const double> y, double sum_tolerance) {
  require_same_size(x.size(), y.size(), "majorizes");
  require_finite(x, "majorizes");
  require_finite(y, "majorizes");
  if (sum_tolerance < 0.0) throw std::domain_error("majorizes: negative tolerance");

  const Vector xs = sorted_copy(x);
  const Vector ys = sorted_copy(y);
  const std::size_t n = xs.size();

  // Suffix sums from the largest entry down; the last one is the total.
  Vector top_x(n), top_y(n);
  double sx = 0.0, sy = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    sx += xs[n - 1 - m];
    sy += ys[n - 1 - m];
    top_x[m] = sx;
    top_y[m] = sy;
  }
  const double slack = sum_tolerance * std::max(1.0, std::abs(sy));
  if (std::abs(sx - sy) > slack) return false;
  for (std::size_t m = 0; m + 1 < n; ++m) {
    if (top_x[m] > top_y[m] + slack) return false;
  }
  return true;
}

bool is_reordering_transposition(const Permutation& g, std::span<const double> x) {
  require_same_size(g.size(), x.size(), "is_reordering_transposition");
  std::vector<std::size_t> moved;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] != i) moved.push_back(i);
  }
  if (moved.size() != 2) return false;
  const std::size_t i = moved[0], j = moved[1];
  return g[i] == j && g[j] == i && x[i] > x[j];
}

// --- decomposition into reordering swaps ------------------------------------

NotDecomposableError::NotDecomposableError(std::size_t position, Vector current,
                                           std::vector<Transposition> steps_so_far)
    : std::runtime_error("decompose_into_reorderings: no reordering transposition settles position " +
                         std::to_string(position)),
      position_(position),
      current_(std::move(current)),
      steps_(std::move(steps_so_far)) {}

std::vector<Transposition> decompose_into_reorderings(const Permutation& g,
                                                      std::span<const double> v) {
  require_same_size(g.size(), v.size(), "decompose_into_reorderings");
  const std::size_t n = v.size();
  std::vector<Transposition> steps;
  if (n == 0 || g.is_identity()) return steps;
  require_finite(v, "decompose_into_reorderings");

  // Work on ranks: stable ranks of v, and the target ranks with tied values
  // assigned in order of appearance so equal entries never need swapping.
  auto [sorted, alpha] = sort_with_permutation(v);
  std::vector<std::size_t> rank(n), group_start(n);
  for (std::size_t r = 0; r < n; ++r) {
    rank[alpha[r]] = r;
    group_start[r] = (r > 0 && sorted[r] == sorted[r - 1]) ? group_start[r - 1] : r;
  }
  std::vector<std::size_t> next_in_group(n);
  for (std::size_t r = 0; r < n; ++r) next_in_group[r] = r;
  std::vector<std::size_t> target(n);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t start = group_start[rank[g[p]]];
    target[p] = next_in_group[start]++;
  }

  std::vector<std::size_t> current(rank);

  auto snapshot = [&] {
    Vector cur(n);
    for (std::size_t p = 0; p < n; ++p) cur[p] = sorted[current[p]];
    return cur;
  };

  for (std::size_t p = 0; p < n; ++p) {
    if (current[p] == target[p]) continue;
    if (current[p] < target[p]) throw NotDecomposableError(p, snapshot(), std::move(steps));
    // Nearest entry to the right whose rank lies in [target, current): swap
    // it in. Entries skipped over stay outside the shrinking range, so a
    // single pass settles position p.
    for (std::size_t q = p + 1; q < n && current[p] != target[p]; ++q) {
      const std::size_t r = current[q];
      if (r < target[p] || r >= current[p] || !(sorted[current[p]] > sorted[r])) continue;
      steps.push_back({p, q});
      current[q] = current[p];
      current[p] = r;
    }
    if (current[p] != target[p]) throw NotDecomposableError(p, snapshot(), std::move(steps));
  }
  return steps;
}

// --- convex family -----------------------------------------------------------

ConvexFunction::ConvexFunction(Kind kind, double threshold) : kind_(kind), threshold_(threshold) {
  if (!std::isfinite(threshold)) throw std::invalid_argument("ConvexFunction: non-finite threshold");
}

ConvexFunction ConvexFunction::parse(std::string_view id) {
  if (id == "lateness") return ConvexFunction(Kind::lateness);
  if (id == "square") return ConvexFunction(Kind::square);
  if (id == "abs") return ConvexFunction(Kind::abs);
  if (id == "negate") return ConvexFunction(Kind::negate);
  if (id == "identity") return ConvexFunction(Kind::identity);
  constexpr std::string_view prefix = "excess:";
  if (id.starts_with(prefix)) {
    const std::string text(id.substr(prefix.size()));
    char* end = nullptr;
    const double c = std::strtod(text.c_str(), &end);
    if (!text.empty() && end == text.c_str() + text.size() && std::isfinite(c)) {
      return ConvexFunction(Kind::excess, c);
    }
  }
  throw std::invalid_argument("unknown convex function '" + std::string(id) + "'");
}

std::string ConvexFunction::name() const {
  switch (kind_) {
    case Kind::lateness: return "lateness";
    case Kind::square: return "square";
    case Kind::abs: return "abs";
    case Kind::negate: return "negate";
    case Kind::identity: return "identity";
    case Kind::excess: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "excess:%g", threshold_);
      return buf;
    }
  }
  return "?";
}

double ConvexFunction::operator()(double t) const {
  switch (kind_) {
    case Kind::lateness: return t < 0.0 ? -t : 0.0;
    case Kind::square: return t * t;
    case Kind::abs: return std::abs(t);
    case Kind::excess: return t > threshold_ ? t - threshold_ : 0.0;
    case Kind::negate: return -t;
    case Kind::identity: return t;
  }
  return 0.0;
}

double ConvexFunction::sum(std::span<const double> x) const {
  double s = 0.0;
  for (double t : x) s += (*this)(t);
  return s;
}

std::vector<ConvexFunction> default_convex_family() {
  using K = ConvexFunction::Kind;
  return {ConvexFunction(K::lateness),  ConvexFunction(K::square),    ConvexFunction(K::abs),
          ConvexFunction(K::excess, 0), ConvexFunction(K::excess, 1), ConvexFunction(K::identity),
          ConvexFunction(K::negate)};
}

std::vector<DominanceEntry> convex_dominance_check(std::span<const double> x,
                                                   std::span<const double> y,
                                                   std::span<const ConvexFunction> family) {
  require_same_size(x.size(), y.size(), "convex_dominance_check");
  std::vector<DominanceEntry> report;
  report.reserve(family.size());
  for (const ConvexFunction& f : family) {
    const double fx = f.sum(x);
    const double fy = f.sum(y);
    const bool pass = fx <= fy + 1e-9 * std::max(1.0, std::abs(fy));
    report.push_back({f, fx, fy, pass});
  }
  return report;
}

}  // namespace dlab
