#ifndef HCVAL_SMTLIB_HPP
#define HCVAL_SMTLIB_HPP

#include <optional>

#include "hcval/interval.hpp"

namespace hcval {

struct MalformedResult : std::runtime_error {
  int line;
  MalformedResult(int l, const std::string& what)
      : std::runtime_error("malformed solver result at line " +
                           std::to_string(l) + ": " + what),
        line(l) {}
};

/// QF_NRA script for a lowered system. Declarations precede assertions;
/// byte-stable for identical input.
std::string emit(const ConstraintSystem& sys);

struct ExternalResult {
  bool delta_sat = false;
  double delta = 0.0;
  std::vector<std::pair<std::string, Interval>> ranges;
};

bool operator==(const ExternalResult& a, const ExternalResult& b);

/// Parses a dReal-style result block: "unsat", or "delta-sat with delta = d"
/// followed by "name : [lo, hi]" lines.
ExternalResult parse_external(const std::string& text);
std::string print_external(const ExternalResult& r);

/// Runs `command script_path` and parses its standard output. Returns
/// nullopt when the command cannot be started.
std::optional<ExternalResult> run_external_solver(const std::string& command,
                                                  const std::string& script_path);

}  // namespace hcval

#endif
