#ifndef HCVAL_INTERVAL_HPP
#define HCVAL_INTERVAL_HPP

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hcval/expr.hpp"

namespace hcval {

struct EmptyOperand : std::runtime_error {
  EmptyOperand() : std::runtime_error("operation on empty interval") {}
};
struct EmptyBox : std::runtime_error {
  EmptyBox() : std::runtime_error("operation on empty box") {}
};
struct NothingToSplit : std::runtime_error {
  NothingToSplit() : std::runtime_error("all widths below precision") {}
};

/// Closed interval with outward-rounded arithmetic. lo > hi encodes Empty.
struct Interval {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {}
  static Interval point(double v) { return {v, v}; }
  static Interval empty() { return {}; }
  static Interval entire() {
    return {-std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  }

  bool is_empty() const { return !(lo <= hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Interval& o) const {
    return o.is_empty() || (lo <= o.lo && o.hi <= hi);
  }
  double width() const { return is_empty() ? 0.0 : hi - lo; }
  double mid() const;
};

bool operator==(const Interval& a, const Interval& b);

Interval intersect(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

Interval iadd(const Interval& a, const Interval& b);
Interval isub(const Interval& a, const Interval& b);
Interval imul(const Interval& a, const Interval& b);
/// Extended division: when 0 lies strictly inside b the hull of the two
/// unbounded pieces (the whole line) is returned; division by [0,0] is Empty.
Interval idiv(const Interval& a, const Interval& b);
Interval ineg(const Interval& a);

enum class IntervalOp { Add, Sub, Mul, Div };
Interval interval_op(IntervalOp kind, const Interval& a, const Interval& b);

/// Ordered variable -> interval map over a fixed variable set.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<std::pair<std::string, Interval>> entries)
      : entries_(std::move(entries)) {}

  void set(const std::string& name, const Interval& iv);
  const Interval& get(const std::string& name) const;
  const Interval* find(const std::string& name) const;
  Interval* find(const std::string& name);

  bool has(const std::string& name) const { return find(name) != nullptr; }
  std::size_t size() const { return entries_.size(); }
  bool any_empty() const;
  /// max over variables of (hi - lo); requires all intervals bounded
  double max_width() const;
  Point midpoint() const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  const std::pair<std::string, Interval>& at(std::size_t i) const {
    return entries_[i];
  }

 private:
  std::vector<std::pair<std::string, Interval>> entries_;
};

/// Natural interval extension of e over b; contains eval(e, p) for all p in b.
Interval eval_extension(const ExprPtr& e, const Box& b);

/// HC4 forward-backward contractor for one atomic constraint. Returns a
/// subset of b that keeps every point of b satisfying c; an all-empty result
/// means no point of b can satisfy c.
Box hc4_revise(const AtomicConstraint& c, const Box& b);

/// Intervals at or below this width are treated as points when splitting.
constexpr double kSplitFloor = 1e-12;

struct SortLookup {
  const ConstraintSystem* sys = nullptr;
  bool is_int(const std::string& name) const {
    if (!sys) return false;
    const VarDecl* d = sys->find_var(name);
    return d && d->sort == Sort::Int;
  }
};

/// Splits on the widest variable (lexicographic tie-break). Int-sorted
/// variables split into disjoint integer ranges.
std::pair<Box, Box> bisect(const Box& b, const SortLookup& sorts = {});

/// Rounds an Int variable's interval to its integral sub-range.
Interval tighten_int(const Interval& iv);

}  // namespace hcval

#endif
