#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dlab {

/// Real vector. Entries are finite; functions that take one validate on entry.
using Vector = std::vector<double>;

/// Relative tolerance used when comparing sums of floating-point vectors.
inline constexpr double kDefaultSumTolerance = 1e-9;

/// Bijection on {0, ..., n-1}, stored as the image of each index.
class Permutation {
 public:
  Permutation() = default;
  /// Throws std::invalid_argument if `mapping` is not a bijection.
  explicit Permutation(std::vector<std::size_t> mapping);

  static Permutation identity(std::size_t n);
  static Permutation transposition(std::size_t n, std::size_t i, std::size_t j);

  std::size_t size() const { return map_.size(); }
  std::size_t operator[](std::size_t i) const { return map_[i]; }
  std::span<const std::size_t> mapping() const { return map_; }

  Permutation inverse() const;
  /// (this ∘ inner)(i) = this[inner[i]].
  Permutation compose(const Permutation& inner) const;
  bool is_identity() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

/// Swap of two positions in an n-vector. Decompositions are reported with
/// this compact form; `as_permutation` expands it.
struct Transposition {
  std::size_t first = 0;
  std::size_t second = 0;

  Permutation as_permutation(std::size_t n) const {
    return Permutation::transposition(n, first, second);
  }
  friend bool operator==(const Transposition&, const Transposition&) = default;
};

/// Ascending copy of `x` and the permutation α with out[i] = x[α(i)].
/// Ties keep their original index order. Throws std::domain_error on an
/// empty or non-finite input.
std::pair<Vector, Permutation> sort_with_permutation(std::span<const double> x);

/// out[i] = x[g(i)].
Vector apply_permutation(const Permutation& g, std::span<const double> x);

/// True iff x ≺ y: equal totals and every sum of the m largest entries of
/// x bounded by the same sum for y. Both comparisons allow an absolute slack
/// of sum_tolerance * max(1, |Σy|).
bool majorizes(std::span<const double> x, std::span<const double> y,
               double sum_tolerance = kDefaultSumTolerance);

/// True iff g swaps exactly one pair i < j with x[i] > x[j] and fixes every
/// other index.
bool is_reordering_transposition(const Permutation& g, std::span<const double> x);

/// Raised when a permutation cannot be reached through reordering
/// transpositions. Carries the intermediate vector where progress stopped.
class NotDecomposableError : public std::runtime_error {
 public:
  NotDecomposableError(std::size_t position, Vector current,
                       std::vector<Transposition> steps_so_far);

  std::size_t position() const { return position_; }
  const Vector& current() const { return current_; }
  const std::vector<Transposition>& steps_so_far() const { return steps_; }

 private:
  std::size_t position_;
  Vector current_;
  std::vector<Transposition> steps_;
};

/// Writes g as a chain of reordering transpositions of v: swapping each
/// returned pair in turn, starting from v, ends at apply_permutation(g, v),
/// and every swap exchanges an inverted pair of the vector it acts on.
///
/// Positions are settled in ascending order. At an unsettled position p the
/// entry is swapped with the nearest entry to its right whose value lies
/// between the target value (inclusive) and the current one, until the
/// target arrives. Each swap is a Bruhat cover, and the walk finds a chain
/// whenever one exists.
///
/// Throws NotDecomposableError when the target is not below v, and
/// std::domain_error on a size mismatch.
std::vector<Transposition> decompose_into_reorderings(const Permutation& g,
                                                      std::span<const double> v);

/// Scalar convex functions g; F(x) = Σ g(x_i) is convex and symmetric.
class ConvexFunction {
 public:
  enum class Kind { lateness, square, abs, excess, negate, identity };

  explicit ConvexFunction(Kind kind, double threshold = 0.0);

  /// Accepts `lateness`, `square`, `abs`, `excess:<c>`, `negate`, `identity`.
  /// Throws std::invalid_argument on anything else.
  static ConvexFunction parse(std::string_view id);

  Kind kind() const { return kind_; }
  double threshold() const { return threshold_; }
  std::string name() const;
  double operator()(double t) const;
  double sum(std::span<const double> x) const;

  friend bool operator==(const ConvexFunction&, const ConvexFunction&) = default;

 private:
  Kind kind_;
  double threshold_;
};

/// t⁻, t², |t|, max(t,0), max(t-1,0), t, -t.
std::vector<ConvexFunction> default_convex_family();

struct DominanceEntry {
  ConvexFunction function;
  double value_x;
  double value_y;
  bool pass;
};

/// Evaluates F(x) ≤ F(y) for each family member with a 1e-9 relative slack.
std::vector<DominanceEntry> convex_dominance_check(std::span<const double> x,
                                                   std::span<const double> y,
                                                   std::span<const ConvexFunction> family);

}  // namespace dlab
