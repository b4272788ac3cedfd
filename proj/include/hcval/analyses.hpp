#ifndef HCVAL_ANALYSES_HPP
#define HCVAL_ANALYSES_HPP

#include "hcval/model.hpp"
#include "hcval/solver.hpp"

namespace hcval {

struct NoSafetyRegion : std::runtime_error {
  NoSafetyRegion() : std::runtime_error("model declares no safety region") {}
};
struct UnknownLabel : std::runtime_error {
  explicit UnknownLabel(const std::string& l)
      : std::runtime_error("no rule labelled: " + l) {}
};
struct MissingVariable : std::runtime_error {
  int step;
  std::string name;
  MissingVariable(int s, const std::string& n)
      : std::runtime_error("trace step " + std::to_string(s) +
                           " missing variable " + n),
        step(s), name(n) {}
};

enum class FindingKind { Spoof, Unsafe, Unreachable, Gap, Overlap, TraceViolation };

const char* finding_kind_text(FindingKind k);
FindingKind finding_kind_from(const std::string& s);

struct Finding {
  FindingKind kind = FindingKind::Spoof;
  std::optional<Box> witness;
  std::optional<Point> certificate;
  std::vector<std::string> involved;  // rule labels / equation ids
  std::string narrative;
  double delta = 0.0;
  // Delta-level boundary contact that a delta-decision cannot distinguish
  // from a true intersection; reported but not counted as a finding.
  bool warning = false;
};

struct AnalysisVerdict {
  std::string analysis;
  std::string verdict;  // "clean" | "findings" | "warnings" | "unknown"
};

struct ValidationReport {
  std::string model_name;
  double delta = 0.01;
  double precision = 0.001;
  int horizon = 1;
  std::int64_t budget = 1'000'000;
  std::vector<Finding> findings;
  std::vector<AnalysisVerdict> verdicts;

  bool has_hard_findings() const;
};

/// Accepted-but-unreal value detection: enumerates delta-sat assignments of
/// the untrusted variables, excluding a separation ball around any declared
/// real readings.
std::vector<Finding> find_spoof(const HealthModel& m, const Scenario& s,
                                const SolverConfig& cfg, int k = 1,
                                double separation = 0.0);

/// Legitimate states outside the declared safe region.
std::vector<Finding> check_unsafe(const HealthModel& m, const SolverConfig& cfg,
                                  int horizon = 1);

struct ReachResult {
  bool reachable = false;
  int at_step = 0;
  std::optional<Box> trace_box;
  std::optional<Point> certificate;
  std::optional<Finding> finding;  // set when unreachable within the horizon
};

/// Bounded reachability of a rule's band from the scenario's initial
/// observations, with fresh per-step inputs.
ReachResult check_reachable(const HealthModel& m, const Scenario& init,
                            const std::string& label, int max_horizon,
                            const SolverConfig& cfg);

/// Rule coverage gaps over the declared guard-variable domains.
std::vector<Finding> check_exhaustive(const HealthModel& m,
                                      const SolverConfig& cfg);

/// Pairwise rule intersections; boundary-sharing half-open bands report a
/// delta-overlap warning, not a finding.
std::vector<Finding> check_overlap(const HealthModel& m, const SolverConfig& cfg);

/// Certifies the dynamics over each consecutive trace pair.
std::vector<Finding> check_trace(const HealthModel& m,
                                 const std::vector<Point>& trace, double delta);

/// Trace file: one step per line, comma-separated name=value pairs.
std::vector<Point> parse_trace(const std::string& text);

struct AnalyzeOptions {
  bool spoof = true, unsafe = true, reachable = false;
  bool exhaustive = true, overlap = true;
  std::string reach_target;
  int reach_horizon = 3;
  int spoof_k = 1;
  double separation = 0.0;  // 0 -> 10 * delta
};

ValidationReport run_analyses(const HealthModel& m,
                              const std::optional<Scenario>& s,
                              const SolverConfig& cfg,
                              const AnalyzeOptions& opt);

}  // namespace hcval

#endif
