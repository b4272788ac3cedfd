#include "hcval/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace hcval {

namespace {
ExprPtr make(Expr&& e) { return std::make_shared<const Expr>(std::move(e)); }
}  // namespace

ExprPtr Expr::constant(const std::string& decimal_literal) {
  Expr e;
  e.kind_ = Kind::Constant;
  e.literal_ = decimal_literal;
  e.value_ = std::strtod(decimal_literal.c_str(), nullptr);
  return make(std::move(e));
}

ExprPtr Expr::constant(double v) {
  Expr e;
  e.kind_ = Kind::Constant;
  e.value_ = v;
  // literal_ filled lazily by the emitters via format_number
  return make(std::move(e));
}

ExprPtr Expr::var(const std::string& name) {
  Expr e;
  e.kind_ = Kind::Variable;
  e.name_ = name;
  return make(std::move(e));
}

ExprPtr Expr::neg(ExprPtr c) {
  Expr e;
  e.kind_ = Kind::Neg;
  e.lhs_ = std::move(c);
  return make(std::move(e));
}

#define HCVAL_BINARY(fn, k)                \
  ExprPtr Expr::fn(ExprPtr a, ExprPtr b) { \
    Expr e;                                \
    e.kind_ = Kind::k;                     \
    e.lhs_ = std::move(a);                 \
    e.rhs_ = std::move(b);                 \
    return make(std::move(e));             \
  }
HCVAL_BINARY(add, Add)
HCVAL_BINARY(sub, Sub)
HCVAL_BINARY(mul, Mul)
HCVAL_BINARY(div, Div)
#undef HCVAL_BINARY

double eval(const ExprPtr& e, const Point& point) {
  switch (e->kind()) {
    case Expr::Kind::Constant:
      return e->value();
    case Expr::Kind::Variable: {
      auto it = point.find(e->name());
      if (it == point.end()) throw UnboundVariable(e->name());
      return it->second;
    }
    case Expr::Kind::Neg:
      return -eval(e->lhs(), point);
    case Expr::Kind::Add:
      return eval(e->lhs(), point) + eval(e->rhs(), point);
    case Expr::Kind::Sub:
      return eval(e->lhs(), point) - eval(e->rhs(), point);
    case Expr::Kind::Mul:
      return eval(e->lhs(), point) * eval(e->rhs(), point);
    case Expr::Kind::Div: {
      double d = eval(e->rhs(), point);
      if (d == 0.0) throw DivisionByZero(to_string(e));
      return eval(e->lhs(), point) / d;
    }
  }
  throw EvalError("corrupt expression node");
}

namespace {
void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
  switch (e->kind()) {
    case Expr::Kind::Constant:
      return;
    case Expr::Kind::Variable:
      out.insert(e->name());
      return;
    case Expr::Kind::Neg:
      collect_vars(e->lhs(), out);
      return;
    default:
      collect_vars(e->lhs(), out);
      collect_vars(e->rhs(), out);
  }
}

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div:
      return 2;
    case Expr::Kind::Neg:
      return 3;
    default:
      return 4;
  }
}

void render(const ExprPtr& e, std::string& out, int parent_prec,
            bool right_side) {
  int prec = precedence(e->kind());
  bool need_parens =
      prec < parent_prec || (prec == parent_prec && right_side && prec <= 2);
  switch (e->kind()) {
    case Expr::Kind::Constant:
      if (!e->literal().empty()) {
        out += e->literal();
      } else {
        out += format_number(e->value());
      }
      return;
    case Expr::Kind::Variable:
      out += e->name();
      return;
    case Expr::Kind::Neg:
      if (need_parens) out += '(';
      out += '-';
      render(e->lhs(), out, prec, true);
      if (need_parens) out += ')';
      return;
    default: {
      const char* op = e->kind() == Expr::Kind::Add   ? " + "
                       : e->kind() == Expr::Kind::Sub ? " - "
                       : e->kind() == Expr::Kind::Mul ? " * "
                                                      : " / ";
      if (need_parens) out += '(';
      render(e->lhs(), out, prec, false);
      out += op;
      render(e->rhs(), out, prec, true);
      if (need_parens) out += ')';
      return;
    }
  }
}
}  // namespace

std::string format_number(double v) {
  char buf[48];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

std::string to_string(const ExprPtr& e) {
  std::string out;
  render(e, out, 0, false);
  return out;
}

const char* rel_text(Rel r) {
  switch (r) {
    case Rel::Eq: return "=";
    case Rel::Le: return "<=";
    case Rel::Lt: return "<";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "?";
}

double residual(const AtomicConstraint& c, const Point& point) {
  double l = eval(c.lhs, point);
  double r = eval(c.rhs, point);
  switch (c.rel) {
    case Rel::Eq:
      return std::fabs(l - r);
    case Rel::Le:
    case Rel::Lt:
      return std::max(0.0, l - r);
    case Rel::Ge:
    case Rel::Gt:
      return std::max(0.0, r - l);
  }
  return 0.0;
}

bool satisfies_exactly(const AtomicConstraint& c, const Point& point,
                       double eps) {
  double l = eval(c.lhs, point);
  double r = eval(c.rhs, point);
  switch (c.rel) {
    case Rel::Eq: return std::fabs(l - r) <= eps;
    case Rel::Le: return l <= r + eps;
    case Rel::Lt: return l < r - eps;
    case Rel::Ge: return l >= r - eps;
    case Rel::Gt: return l > r + eps;
  }
  return false;
}

AtomicConstraint negate_nonstrict(const AtomicConstraint& c) {
  AtomicConstraint out = c;
  switch (c.rel) {
    case Rel::Le: out.rel = Rel::Gt; break;
    case Rel::Lt: out.rel = Rel::Ge; break;
    case Rel::Ge: out.rel = Rel::Lt; break;
    case Rel::Gt: out.rel = Rel::Le; break;
    case Rel::Eq:
      throw EvalError("equality requires negate_atom");
  }
  return out;
}

std::vector<AtomicConstraint> negate_atom(const AtomicConstraint& c) {
  if (c.rel == Rel::Eq) {
    return {{c.lhs, Rel::Lt, c.rhs}, {c.lhs, Rel::Gt, c.rhs}};
  }
  return {negate_nonstrict(c)};
}

std::string to_string(const AtomicConstraint& c) {
  return to_string(c.lhs) + " " + rel_text(c.rel) + " " + to_string(c.rhs);
}

const VarDecl* ConstraintSystem::find_var(const std::string& name) const {
  for (const auto& v : vars)
    if (v.name == name) return &v;
  return nullptr;
}

const char* level_text(Level l) {
  switch (l) {
    case Level::Interface: return "interface";
    case Level::Mechanical: return "mechanical";
    case Level::Biological: return "biological";
    case Level::Environmental: return "environmental";
    case Level::None: return "none";
  }
  return "none";
}

const char* trust_text(Trust t) {
  return t == Trust::Trusted ? "trusted" : "untrusted";
}

}  // namespace hcval
