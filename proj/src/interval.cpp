#include "hcval/interval.hpp"

#include <algorithm>
#include <cmath>

namespace hcval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxFinite = std::numeric_limits<double>::max();

double next_down(double x) { return std::nextafter(x, -kInf); }
double next_up(double x) { return std::nextafter(x, kInf); }

double clamp_overflow(double s, bool up) {
  // An overflowed sum/product stands for a finite value beyond the float
  // range; the inward direction must stay finite to remain a valid bound.
  if (s == kInf && !up) return kMaxFinite;
  if (s == -kInf && up) return -kMaxFinite;
  return s;
}

// Knuth two-sum error term; exact for finite inputs.
double add_error(double a, double b, double s) {
  double bv = s - a;
  double av = s - bv;
  return (a - av) + (b - bv);
}

double dadd(double a, double b, bool up) {
  if (std::isinf(a) || std::isinf(b)) {
    double s = a + b;
    return std::isnan(s) ? (up ? kInf : -kInf) : s;
  }
  double s = a + b;
  if (std::isinf(s)) return clamp_overflow(s, up);
  double e = add_error(a, b, s);
  if (up) return e > 0 ? next_up(s) : s;
  return e < 0 ? next_down(s) : s;
}

double dsub(double a, double b, bool up) { return dadd(a, -b, up); }

double dmul(double a, double b, bool up) {
  if (a == 0.0 || b == 0.0) return 0.0;  // 0 * inf -> 0 for containment
  if (std::isinf(a) || std::isinf(b)) {
    return (std::signbit(a) != std::signbit(b)) ? -kInf : kInf;
  }
  double p = a * b;
  if (std::isinf(p)) return clamp_overflow(p, up);
  double e = std::fma(a, b, -p);
  if (up) return e > 0 ? next_up(p) : p;
  return e < 0 ? next_down(p) : p;
}

// b must be nonzero and finite-or-infinite; a/inf is exactly 0.
double ddiv(double a, double b, bool up) {
  if (std::isinf(b)) {
    if (std::isinf(a)) return (std::signbit(a) != std::signbit(b)) ? -kInf : kInf;
    return 0.0;
  }
  if (std::isinf(a)) return (std::signbit(a) != std::signbit(b)) ? -kInf : kInf;
  double q = a / b;
  if (std::isinf(q)) return clamp_overflow(q, up);
  double r = std::fma(q, b, -a);  // q*b - a, exact
  if (r == 0.0) return q;
  // true quotient minus q has the sign of (-r)/b
  bool true_above = (r < 0.0) == (b > 0.0);
  if (up) return true_above ? next_up(q) : q;
  return true_above ? q : next_down(q);
}

}  // namespace

double Interval::mid() const {
  if (is_empty()) return 0.0;
  if (lo == -kInf && hi == kInf) return 0.0;
  if (lo == -kInf) return hi - 1.0;
  if (hi == kInf) return lo + 1.0;
  double m = 0.5 * lo + 0.5 * hi;
  return std::clamp(m, lo, hi);
}

bool operator==(const Interval& a, const Interval& b) {
  if (a.is_empty() && b.is_empty()) return true;
  return a.lo == b.lo && a.hi == b.hi;
}

Interval intersect(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  return r.is_empty() ? Interval::empty() : r;
}

Interval hull(const Interval& a, const Interval& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Interval iadd(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return {dadd(a.lo, b.lo, false), dadd(a.hi, b.hi, true)};
}

Interval isub(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return {dsub(a.lo, b.hi, false), dsub(a.hi, b.lo, true)};
}

Interval ineg(const Interval& a) {
  if (a.is_empty()) return a;
  return {-a.hi, -a.lo};
}

Interval imul(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  double lo = kInf, hi = -kInf;
  const double as[2] = {a.lo, a.hi};
  const double bs[2] = {b.lo, b.hi};
  for (double x : as)
    for (double y : bs) {
      lo = std::min(lo, dmul(x, y, false));
      hi = std::max(hi, dmul(x, y, true));
    }
  return {lo, hi};
}

Interval idiv(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  if (b.lo == 0.0 && b.hi == 0.0) return Interval::empty();
  if (b.lo < 0.0 && b.hi > 0.0) return Interval::entire();
  if (b.hi <= 0.0) return ineg(idiv(a, ineg(b)));
  // b is now [0, hi] or strictly positive
  if (b.lo == 0.0) {
    double lo = a.lo >= 0.0 ? ddiv(a.lo, b.hi, false) : -kInf;
    double hi = a.hi <= 0.0 ? ddiv(a.hi, b.hi, true) : kInf;
    return {lo, hi};
  }
  double lo = ddiv(a.lo, a.lo >= 0.0 ? b.hi : b.lo, false);
  double hi = ddiv(a.hi, a.hi >= 0.0 ? b.lo : b.hi, true);
  return {lo, hi};
}

Interval interval_op(IntervalOp kind, const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) throw EmptyOperand();
  switch (kind) {
    case IntervalOp::Add: return iadd(a, b);
    case IntervalOp::Sub: return isub(a, b);
    case IntervalOp::Mul: return imul(a, b);
    case IntervalOp::Div: return idiv(a, b);
  }
  throw EmptyOperand();
}

void Box::set(const std::string& name, const Interval& iv) {
  if (Interval* p = find(name)) {
    *p = iv;
  } else {
    entries_.emplace_back(name, iv);
  }
}

const Interval* Box::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return &e.second;
  return nullptr;
}

Interval* Box::find(const std::string& name) {
  for (auto& e : entries_)
    if (e.first == name) return &e.second;
  return nullptr;
}

const Interval& Box::get(const std::string& name) const {
  const Interval* p = find(name);
  if (!p) throw UnboundVariable(name);
  return *p;
}

bool Box::any_empty() const {
  for (const auto& e : entries_)
    if (e.second.is_empty()) return true;
  return false;
}

double Box::max_width() const {
  double w = 0.0;
  for (const auto& e : entries_) w = std::max(w, e.second.width());
  return w;
}

Point Box::midpoint() const {
  Point p;
  for (const auto& e : entries_) p[e.first] = e.second.mid();
  return p;
}

Interval eval_extension(const ExprPtr& e, const Box& b) {
  switch (e->kind()) {
    case Expr::Kind::Constant:
      return Interval::point(e->value());
    case Expr::Kind::Variable: {
      const Interval& iv = b.get(e->name());
      if (iv.is_empty()) throw EmptyBox();
      return iv;
    }
    case Expr::Kind::Neg:
      return ineg(eval_extension(e->lhs(), b));
    case Expr::Kind::Add:
      return iadd(eval_extension(e->lhs(), b), eval_extension(e->rhs(), b));
    case Expr::Kind::Sub:
      return isub(eval_extension(e->lhs(), b), eval_extension(e->rhs(), b));
    case Expr::Kind::Mul:
      return imul(eval_extension(e->lhs(), b), eval_extension(e->rhs(), b));
    case Expr::Kind::Div: {
      Interval q = idiv(eval_extension(e->lhs(), b),
                        eval_extension(e->rhs(), b));
      // division by the degenerate zero interval has no values; the
      // surrounding contractor interprets Empty as infeasible
      return q;
    }
  }
  return Interval::entire();
}

namespace {

// Forward value without emptiness signalling; callers intersect with box.
Interval forward(const ExprPtr& e, const Box& b) {
  switch (e->kind()) {
    case Expr::Kind::Constant: return Interval::point(e->value());
    case Expr::Kind::Variable: return b.get(e->name());
    case Expr::Kind::Neg: return ineg(forward(e->lhs(), b));
    case Expr::Kind::Add: return iadd(forward(e->lhs(), b), forward(e->rhs(), b));
    case Expr::Kind::Sub: return isub(forward(e->lhs(), b), forward(e->rhs(), b));
    case Expr::Kind::Mul: return imul(forward(e->lhs(), b), forward(e->rhs(), b));
    case Expr::Kind::Div: return idiv(forward(e->lhs(), b), forward(e->rhs(), b));
  }
  return Interval::entire();
}

// Pushes the refined node interval down the tree, narrowing box variables.
// Returns false on contradiction.
bool backward(const ExprPtr& e, const Interval& refined, Box& box) {
  if (refined.is_empty()) return false;
  switch (e->kind()) {
    case Expr::Kind::Constant:
      return refined.contains(e->value());
    case Expr::Kind::Variable: {
      Interval nv = intersect(box.get(e->name()), refined);
      if (nv.is_empty()) return false;
      box.set(e->name(), nv);
      return true;
    }
    case Expr::Kind::Neg: {
      Interval child = intersect(forward(e->lhs(), box), ineg(refined));
      return backward(e->lhs(), child, box);
    }
    case Expr::Kind::Add: {
      Interval a = forward(e->lhs(), box);
      Interval b = forward(e->rhs(), box);
      Interval a_ref = intersect(a, isub(refined, b));
      if (!backward(e->lhs(), a_ref, box)) return false;
      Interval b_ref = intersect(b, isub(refined, forward(e->lhs(), box)));
      return backward(e->rhs(), b_ref, box);
    }
    case Expr::Kind::Sub: {
      Interval a = forward(e->lhs(), box);
      Interval b = forward(e->rhs(), box);
      Interval a_ref = intersect(a, iadd(refined, b));
      if (!backward(e->lhs(), a_ref, box)) return false;
      Interval b_ref = intersect(b, isub(forward(e->lhs(), box), refined));
      return backward(e->rhs(), b_ref, box);
    }
    case Expr::Kind::Mul: {
      // the projection of a*b in `refined` onto a is a division only when
      // 0 is excluded somewhere: if both `refined` and b contain 0, any a
      // satisfies a*0 = 0, so no contraction is sound
      Interval a = forward(e->lhs(), box);
      Interval b = forward(e->rhs(), box);
      Interval a_ref = a;
      if (!(refined.contains(0.0) && b.contains(0.0)))
        a_ref = intersect(a, idiv(refined, b));
      if (!backward(e->lhs(), a_ref, box)) return false;
      Interval a2 = forward(e->lhs(), box);
      Interval b_ref = b;
      if (!(refined.contains(0.0) && a2.contains(0.0)))
        b_ref = intersect(b, idiv(refined, a2));
      return backward(e->rhs(), b_ref, box);
    }
    case Expr::Kind::Div: {
      Interval a = forward(e->lhs(), box);
      Interval b = forward(e->rhs(), box);
      Interval a_ref = intersect(a, imul(refined, b));
      if (!backward(e->lhs(), a_ref, box)) return false;
      Interval b_ref = b;
      Interval back = idiv(forward(e->lhs(), box), refined);
      if (!back.is_empty()) b_ref = intersect(b, back);
      if (b_ref.is_empty()) return false;
      return backward(e->rhs(), b_ref, box);
    }
  }
  return true;
}

Box all_empty(const Box& b) {
  Box out = b;
  for (const auto& e : b) out.set(e.first, Interval::empty());
  return out;
}

}  // namespace

Box hc4_revise(const AtomicConstraint& c, const Box& b) {
  if (b.any_empty()) return all_empty(b);
  Box box = b;
  Interval l = forward(c.lhs, box);
  Interval r = forward(c.rhs, box);
  if (l.is_empty() || r.is_empty()) return all_empty(b);
  Interval l_ref, r_ref;
  switch (c.rel) {
    case Rel::Eq: {
      Interval t = intersect(l, r);
      l_ref = t;
      r_ref = t;
      break;
    }
    case Rel::Le:
    case Rel::Lt:
      l_ref = intersect(l, Interval{-kInf, r.hi});
      r_ref = intersect(r, Interval{l_ref.is_empty() ? l.lo : l_ref.lo, kInf});
      break;
    case Rel::Ge:
    case Rel::Gt:
      l_ref = intersect(l, Interval{r.lo, kInf});
      r_ref = intersect(r, Interval{-kInf, l_ref.is_empty() ? l.hi : l_ref.hi});
      break;
  }
  if (l_ref.is_empty() || r_ref.is_empty()) return all_empty(b);
  if (!backward(c.lhs, l_ref, box)) return all_empty(b);
  if (!backward(c.rhs, r_ref, box)) return all_empty(b);
  return box;
}

Interval tighten_int(const Interval& iv) {
  if (iv.is_empty()) return iv;
  Interval r{std::ceil(iv.lo), std::floor(iv.hi)};
  return r.is_empty() ? Interval::empty() : r;
}

std::pair<Box, Box> bisect(const Box& b, const SortLookup& sorts) {
  const std::string* pick = nullptr;
  double best = kSplitFloor;
  bool pick_int = false;
  for (const auto& e : b) {
    bool is_int = sorts.is_int(e.first);
    double w = e.second.width();
    if (is_int && w < 1.0) continue;
    if (w > best || (pick && w == best && e.first < *pick)) {
      pick = &e.first;
      best = w;
      pick_int = is_int;
    }
  }
  if (!pick) throw NothingToSplit();
  const Interval iv = b.get(*pick);
  Box left = b, right = b;
  if (pick_int) {
    double m = std::floor(0.5 * iv.lo + 0.5 * iv.hi);
    if (m >= iv.hi) m = iv.hi - 1.0;
    left.set(*pick, {iv.lo, m});
    right.set(*pick, {m + 1.0, iv.hi});
  } else {
    double m = iv.mid();
    if (!(m > iv.lo && m < iv.hi)) throw NothingToSplit();
    left.set(*pick, {iv.lo, m});
    right.set(*pick, {m, iv.hi});
  }
  return {left, right};
}

}  // namespace hcval
