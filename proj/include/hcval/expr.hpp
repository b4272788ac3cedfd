#ifndef HCVAL_EXPR_HPP
#define HCVAL_EXPR_HPP

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcval {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnboundVariable : EvalError {
  std::string name;
  explicit UnboundVariable(const std::string& n)
      : EvalError("unbound variable: " + n), name(n) {}
};
struct DivisionByZero : EvalError {
  explicit DivisionByZero(const std::string& where)
      : EvalError("division by zero in " + where) {}
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable arithmetic expression tree over named variables.
/// Constants keep their source decimal literal so emission round-trips
/// digit-for-digit.
class Expr {
 public:
  enum class Kind { Constant, Variable, Neg, Add, Sub, Mul, Div };

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  const std::string& literal() const { return literal_; }
  const std::string& name() const { return name_; }
  const ExprPtr& lhs() const { return lhs_; }
  const ExprPtr& rhs() const { return rhs_; }

  static ExprPtr constant(const std::string& decimal_literal);
  static ExprPtr constant(double v);
  static ExprPtr var(const std::string& name);
  static ExprPtr neg(ExprPtr e);
  static ExprPtr add(ExprPtr a, ExprPtr b);
  static ExprPtr sub(ExprPtr a, ExprPtr b);
  static ExprPtr mul(ExprPtr a, ExprPtr b);
  static ExprPtr div(ExprPtr a, ExprPtr b);

 private:
  Kind kind_;
  double value_ = 0.0;    // Constant
  std::string literal_;   // Constant, exact decimal text
  std::string name_;      // Variable
  ExprPtr lhs_, rhs_;     // children (lhs only for Neg)
};

using Point = std::map<std::string, double>;

double eval(const ExprPtr& e, const Point& point);
std::set<std::string> free_vars(const ExprPtr& e);

/// Shortest decimal string that round-trips the value.
std::string format_number(double v);

/// Infix rendering with minimal parentheses; parses back to the same tree.
std::string to_string(const ExprPtr& e);

enum class Rel { Eq, Le, Lt, Ge, Gt };

const char* rel_text(Rel r);

struct AtomicConstraint {
  ExprPtr lhs;
  Rel rel = Rel::Eq;
  ExprPtr rhs;
};

/// Violation magnitude at a point; strict relations share the magnitude of
/// their non-strict counterpart.
double residual(const AtomicConstraint& c, const Point& point);

/// Exact satisfaction, honouring strictness. eps > 0 relaxes equalities to
/// |lhs-rhs| <= eps (used to absorb float noise, not delta semantics).
bool satisfies_exactly(const AtomicConstraint& c, const Point& point,
                       double eps = 0.0);

/// Relation complement: <= -> >, < -> >=, etc. Equality negates into the
/// two-disjunct clause {<, >}, so it is handled by negate_atoms below.
AtomicConstraint negate_nonstrict(const AtomicConstraint& c);
std::vector<AtomicConstraint> negate_atom(const AtomicConstraint& c);

std::string to_string(const AtomicConstraint& c);

struct Clause {
  std::vector<AtomicConstraint> disjuncts;
  // Emission grouping: consecutive single-atom clauses sharing a nonnegative
  // group id render as one (assert (and ...)).
  int group = -1;
};

enum class Sort { Int, Real };
enum class Level { Interface, Mechanical, Biological, Environmental, None };
enum class Trust { Trusted, Untrusted };

struct VarDecl {
  std::string name;
  Sort sort = Sort::Real;
  double lo = 0.0, hi = 0.0;
  std::string lo_str, hi_str;  // source literals for emission
  Level level = Level::None;
  Trust trust = Trust::Untrusted;
  std::string unit;
  bool explicit_domain = true;  // false for `error`-shorthand declarations
};

struct ConstraintSystem {
  std::vector<VarDecl> vars;
  std::vector<Clause> clauses;

  const VarDecl* find_var(const std::string& name) const;
};

const char* level_text(Level l);
const char* trust_text(Trust t);

}  // namespace hcval

#endif
