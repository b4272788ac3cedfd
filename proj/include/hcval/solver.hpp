#ifndef HCVAL_SOLVER_HPP
#define HCVAL_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <variant>

#include "hcval/interval.hpp"

namespace hcval {

struct UnboundedDomain : std::runtime_error {
  std::string name;
  explicit UnboundedDomain(const std::string& n)
      : std::runtime_error("unbounded domain for variable: " + n), name(n) {}
};
struct BudgetMisconfigured : std::runtime_error {
  BudgetMisconfigured() : std::runtime_error("budget must be >= 1") {}
};
struct SortViolation : std::runtime_error {
  explicit SortViolation(const std::string& n)
      : std::runtime_error("Int variable bound to non-integer: " + n) {}
};

struct SolverConfig {
  double delta = 0.01;
  double precision = 0.001;  // delta / 10
  std::int64_t budget = 1'000'000;
  bool parallel = false;

  static SolverConfig with_delta(double d) {
    SolverConfig c;
    c.delta = d;
    c.precision = d / 10.0;
    return c;
  }
};

struct Unsat {};
struct DeltaSat {
  Box witness;
  Point certificate_point;
  double delta = 0.0;
};
struct Unknown {
  std::int64_t expanded = 0;
  std::int64_t frontier_size = 0;
};

using DeltaVerdict = std::variant<Unsat, DeltaSat, Unknown>;

inline bool is_unsat(const DeltaVerdict& v) {
  return std::holds_alternative<Unsat>(v);
}
inline bool is_delta_sat(const DeltaVerdict& v) {
  return std::holds_alternative<DeltaSat>(v);
}
inline bool is_unknown(const DeltaVerdict& v) {
  return std::holds_alternative<Unknown>(v);
}

struct ResidualEntry {
  std::size_t clause_index = 0;
  double residual = 0.0;  // best over the clause's disjuncts
  bool within_delta = false;
};

struct CertifyReport {
  bool certified = false;
  std::vector<ResidualEntry> entries;
};

/// True iff every clause has a disjunct with residual <= delta at point.
/// Int-sorted variables must be bound to integers.
CertifyReport certify(const ConstraintSystem& sys, const Point& point,
                      double delta);

/// Delta-complete decision over the product of the declared domains.
DeltaVerdict solve(const ConstraintSystem& sys, const SolverConfig& cfg);

/// Repeated solving with blocking clauses around prior certificates; returned
/// certificates differ pairwise by >= separation in some untrusted variable.
std::vector<DeltaVerdict> solve_enumerate(const ConstraintSystem& sys,
                                          const SolverConfig& cfg,
                                          int k, double separation);

}  // namespace hcval

#endif
