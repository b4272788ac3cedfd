#ifndef HCVAL_MODEL_HPP
#define HCVAL_MODEL_HPP

#include <optional>

#include "hcval/expr.hpp"

namespace hcval {

struct SyntaxError : std::runtime_error {
  int line, col;
  std::string expected;
  SyntaxError(int l, int c, const std::string& exp)
      : std::runtime_error("syntax error at " + std::to_string(l) + ":" +
                           std::to_string(c) + ": expected " + exp),
        line(l), col(c), expected(exp) {}
};
struct DuplicateDeclaration : std::runtime_error {
  std::string name;
  explicit DuplicateDeclaration(const std::string& n)
      : std::runtime_error("duplicate declaration: " + n), name(n) {}
};
struct UnknownIdentifier : std::runtime_error {
  std::string name;
  explicit UnknownIdentifier(const std::string& n)
      : std::runtime_error("unknown identifier: " + n), name(n) {}
};
struct HorizonTooLarge : std::runtime_error {
  explicit HorizonTooLarge(int h)
      : std::runtime_error("horizon too large: " + std::to_string(h)) {}
};
struct InconsistentScenario : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ErrorMapEntry {
  std::string var;
  double bound = 0.0;
  std::string bound_str;
};

/// One discrete-time update: state@t+1 = rhs, where rhs references names
/// suffixed "@t" / "@t+1" plus plain (time-invariant) names.
struct DynamicsEq {
  std::string state;
  ExprPtr rhs;
};

struct Rule {
  std::string label;
  std::vector<AtomicConstraint> guard;  // conjunction over plain names
};

struct RuleTable {
  std::vector<Rule> rules;
};

struct HealthModel {
  std::string name;
  std::vector<VarDecl> params;
  std::vector<ErrorMapEntry> error_map;
  std::vector<DynamicsEq> dynamics;
  RuleTable rules;
  std::vector<AtomicConstraint> safety;  // conjunction, plain names = final step

  const VarDecl* find_param(const std::string& name) const;
  bool is_state(const std::string& name) const;
};

struct Scenario {
  struct Item {
    enum class Kind { Fix, Free };
    Kind kind = Kind::Fix;
    std::string name;   // lowered instance name, e.g. bg@t1
    double value = 0.0;
    std::string literal;
  };
  int horizon = 1;
  std::optional<double> delta;
  std::optional<double> precision;
  std::vector<Item> items;  // file order; drives lowering order
  std::map<std::string, double> reference;  // known-real readings, if any

  bool is_fixed(const std::string& name) const;
};

HealthModel parse_model(const std::string& text);
std::string print_model(const HealthModel& m);
Scenario parse_scenario(const std::string& text);

/// Instance name for base variable at time index k: k=0 -> base@t,
/// k=1 -> base@t1, k>=2 -> base@tk.
std::string time_name(const std::string& base, int k);

/// Rewrites a dynamics right-hand side for a concrete step: "@t+1" names to
/// time_name(base, step), "@t" names to time_name(base, step-1).
ExprPtr instantiate_at(const ExprPtr& e, int step);

/// Base names that act as fresh per-step inputs (appear at t+1 in some
/// dynamics equation without being a state variable).
std::set<std::string> input_vars(const HealthModel& m);

/// Unrolls dynamics over the scenario horizon and turns observations, error
/// terms and domains into clauses, in the order the scenario states them.
ConstraintSystem lower(const HealthModel& m, const Scenario& s);

/// Folds the sensor error map into rule guards: each atom over a mapped
/// variable v becomes the pair of atoms over v+b and v-b.
std::vector<std::pair<std::string, std::vector<AtomicConstraint>>>
compile_guards(const RuleTable& rt, const std::vector<ErrorMapEntry>& map);

}  // namespace hcval

#endif
