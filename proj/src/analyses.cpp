#include "hcval/analyses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hcval {

namespace {

// Margin used to separate true (open-interior) intersections from
// measure-zero boundary contact, which delta-decisions cannot tell apart.
constexpr double kStrictMargin = 1e-6;

std::string describe_point(const Point& p) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, v] : p) {
    if (!first) out << ", ";
    out << name << " = " << format_number(v);
    first = false;
  }
  return out.str();
}

// Shifts every inequality inward by kStrictMargin so that boundary points
// become infeasible; a delta-sat certificate of the shifted system then has
// interior slack, i.e. it satisfies the original robustly. Without the shift
// a delta-decision cannot tell a shared boundary from a true intersection.
AtomicConstraint strictify(const AtomicConstraint& a) {
  AtomicConstraint out = a;
  if (a.rel == Rel::Lt || a.rel == Rel::Le) {
    out.rel = Rel::Le;
    out.rhs = Expr::sub(a.rhs, Expr::constant(kStrictMargin));
  } else if (a.rel == Rel::Gt || a.rel == Rel::Ge) {
    out.rel = Rel::Ge;
    out.rhs = Expr::add(a.rhs, Expr::constant(kStrictMargin));
  }
  return out;
}

ConstraintSystem strictify(const ConstraintSystem& sys) {
  ConstraintSystem out;
  out.vars = sys.vars;
  for (const auto& cl : sys.clauses) {
    Clause c;
    c.group = cl.group;
    for (const auto& a : cl.disjuncts) c.disjuncts.push_back(strictify(a));
    out.clauses.push_back(std::move(c));
  }
  return out;
}

SolverConfig margin_config(const SolverConfig& cfg) {
  SolverConfig c = cfg;
  c.delta = kStrictMargin / 10.0;
  c.precision = c.delta / 10.0;
  return c;
}

// Solves the delta-weakened system and, separately, a strict-margin variant.
// Returns: (hard delta-sat with exact certificate) or (delta-only warning).
struct TwoLevelResult {
  std::optional<DeltaSat> hard;
  std::optional<DeltaSat> weak;
};

TwoLevelResult solve_two_level(const ConstraintSystem& sys,
                               const SolverConfig& cfg) {
  TwoLevelResult out;
  DeltaVerdict strict = solve(strictify(sys), margin_config(cfg));
  if (is_delta_sat(strict)) {
    DeltaSat ds = std::get<DeltaSat>(strict);
    ds.delta = cfg.delta;  // certificate satisfies the original exactly
    out.hard = std::move(ds);
    return out;
  }
  DeltaVerdict weak = solve(sys, cfg);
  if (is_delta_sat(weak)) out.weak = std::get<DeltaSat>(weak);
  return out;
}

// Maps plain state/input names in rule or safety atoms to their step-h
// instances; time-invariant names pass through.
ExprPtr subst_final(const ExprPtr& e, const HealthModel& m, int h) {
  switch (e->kind()) {
    case Expr::Kind::Constant:
      return e;
    case Expr::Kind::Variable: {
      const std::string& n = e->name();
      if (m.is_state(n) || input_vars(m).count(n))
        return Expr::var(time_name(n, h));
      return e;
    }
    case Expr::Kind::Neg:
      return Expr::neg(subst_final(e->lhs(), m, h));
    case Expr::Kind::Add:
      return Expr::add(subst_final(e->lhs(), m, h), subst_final(e->rhs(), m, h));
    case Expr::Kind::Sub:
      return Expr::sub(subst_final(e->lhs(), m, h), subst_final(e->rhs(), m, h));
    case Expr::Kind::Mul:
      return Expr::mul(subst_final(e->lhs(), m, h), subst_final(e->rhs(), m, h));
    case Expr::Kind::Div:
      return Expr::div(subst_final(e->lhs(), m, h), subst_final(e->rhs(), m, h));
  }
  return e;
}

VarDecl plain_decl(const HealthModel& m, const std::string& base) {
  const VarDecl* d = m.find_param(base);
  if (!d) throw UnknownIdentifier(base);
  return *d;
}

// Variables referenced by the compiled rule guards, with their domains.
std::vector<VarDecl> guard_vars(
    const HealthModel& m,
    const std::vector<std::pair<std::string, std::vector<AtomicConstraint>>>&
        guards) {
  std::vector<VarDecl> out;
  std::set<std::string> seen;
  for (const auto& [label, atoms] : guards)
    for (const auto& a : atoms) {
      auto vars = free_vars(a.lhs);
      for (const auto& v : free_vars(a.rhs)) vars.insert(v);
      for (const auto& v : vars)
        if (seen.insert(v).second) out.push_back(plain_decl(m, v));
    }
  std::sort(out.begin(), out.end(),
            [](const VarDecl& a, const VarDecl& b) { return a.name < b.name; });
  return out;
}

}  // namespace

const char* finding_kind_text(FindingKind k) {
  switch (k) {
    case FindingKind::Spoof: return "spoof";
    case FindingKind::Unsafe: return "unsafe";
    case FindingKind::Unreachable: return "unreachable";
    case FindingKind::Gap: return "gap";
    case FindingKind::Overlap: return "overlap";
    case FindingKind::TraceViolation: return "trace-violation";
  }
  return "spoof";
}

FindingKind finding_kind_from(const std::string& s) {
  if (s == "spoof") return FindingKind::Spoof;
  if (s == "unsafe") return FindingKind::Unsafe;
  if (s == "unreachable") return FindingKind::Unreachable;
  if (s == "gap") return FindingKind::Gap;
  if (s == "overlap") return FindingKind::Overlap;
  if (s == "trace-violation") return FindingKind::TraceViolation;
  throw std::invalid_argument("unknown finding kind: " + s);
}

bool ValidationReport::has_hard_findings() const {
  for (const auto& f : findings)
    if (!f.warning) return true;
  return false;
}

std::vector<Finding> find_spoof(const HealthModel& m, const Scenario& s,
                                const SolverConfig& cfg, int k,
                                double separation) {
  if (separation <= 0.0) separation = 10.0 * cfg.delta;
  ConstraintSystem sys = lower(m, s);

  std::vector<std::string> untrusted;
  for (const auto& v : sys.vars)
    if (v.trust == Trust::Untrusted && !s.is_fixed(v.name))
      untrusted.push_back(v.name);

  // block the separation ball around the declared real readings, so only
  // accepted-but-unreal assignments remain
  if (!s.reference.empty()) {
    Clause blocking;
    for (const auto& name : untrusted) {
      auto it = s.reference.find(name);
      if (it == s.reference.end()) continue;
      ExprPtr var = Expr::var(name);
      blocking.disjuncts.push_back(
          {var, Rel::Le, Expr::constant(it->second - separation)});
      blocking.disjuncts.push_back(
          {var, Rel::Ge, Expr::constant(it->second + separation)});
    }
    if (blocking.disjuncts.empty()) return {};  // everything pinned & blocked
    sys.clauses.push_back(std::move(blocking));
  }

  std::vector<Finding> findings;
  for (const auto& verdict : solve_enumerate(sys, cfg, k, separation)) {
    if (!is_delta_sat(verdict)) continue;
    const DeltaSat& ds = std::get<DeltaSat>(verdict);
    Finding f;
    f.kind = FindingKind::Spoof;
    f.witness = ds.witness;
    f.certificate = ds.certificate_point;
    f.delta = ds.delta;
    Point untrusted_part;
    for (const auto& name : untrusted) {
      auto it = ds.certificate_point.find(name);
      if (it != ds.certificate_point.end()) untrusted_part[it->first] = it->second;
    }
    f.narrative = "the model accepts untrusted readings " +
                  describe_point(untrusted_part) +
                  " that satisfy every model equation within delta = " +
                  format_number(ds.delta) + " but need not be real";
    findings.push_back(std::move(f));
  }
  return findings;
}

std::vector<Finding> check_unsafe(const HealthModel& m, const SolverConfig& cfg,
                                  int horizon) {
  if (m.safety.empty()) throw NoSafetyRegion();
  Scenario open;  // nothing observed: every legitimate state is in play
  open.horizon = horizon;
  ConstraintSystem sys = lower(m, open);

  Clause not_safe;
  std::vector<std::string> involved;
  for (const auto& atom : m.safety) {
    AtomicConstraint shifted{subst_final(atom.lhs, m, horizon), atom.rel,
                             subst_final(atom.rhs, m, horizon)};
    for (auto& neg : negate_atom(shifted)) not_safe.disjuncts.push_back(neg);
    involved.push_back(to_string(atom));
  }
  sys.clauses.push_back(std::move(not_safe));

  TwoLevelResult res = solve_two_level(sys, cfg);
  if (!res.hard) return {};
  Finding f;
  f.kind = FindingKind::Unsafe;
  f.witness = res.hard->witness;
  f.certificate = res.hard->certificate_point;
  f.delta = cfg.delta;
  f.involved = involved;
  f.narrative =
      "legitimate state " + describe_point(*f.certificate) +
      " satisfies the model dynamics but lies outside the safe region";
  return {std::move(f)};
}

ReachResult check_reachable(const HealthModel& m, const Scenario& init,
                            const std::string& label, int max_horizon,
                            const SolverConfig& cfg) {
  auto guards = compile_guards(m.rules, m.error_map);
  const std::vector<AtomicConstraint>* guard = nullptr;
  for (const auto& [l, atoms] : guards)
    if (l == label) guard = &atoms;
  if (!guard) throw UnknownLabel(label);

  for (int h = 1; h <= max_horizon; ++h) {
    Scenario sc;
    sc.horizon = h;
    for (const auto& it : init.items) {
      // only step-0 observations and time-invariant readings constrain
      if (it.kind == Scenario::Item::Kind::Fix) {
        auto at = it.name.find('@');
        if (at == std::string::npos || it.name.substr(at) == "@t")
          sc.items.push_back(it);
      }
    }
    ConstraintSystem sys = lower(m, sc);
    for (const auto& atom : *guard)
      sys.clauses.push_back({{AtomicConstraint{
          subst_final(atom.lhs, m, h), atom.rel, subst_final(atom.rhs, m, h)}}});
    DeltaVerdict v = solve(sys, cfg);
    if (is_delta_sat(v)) {
      const DeltaSat& ds = std::get<DeltaSat>(v);
      ReachResult r;
      r.reachable = true;
      r.at_step = h;
      r.trace_box = ds.witness;
      r.certificate = ds.certificate_point;
      return r;
    }
  }
  ReachResult r;
  Finding f;
  f.kind = FindingKind::Unreachable;
  f.involved = {label};
  f.delta = cfg.delta;
  f.narrative = "rule '" + label + "' is unreachable within " +
                std::to_string(max_horizon) +
                " steps under the declared dynamics and input bounds "
                "(bounded-horizon reachability; longer horizons are not "
                "checked)";
  r.finding = std::move(f);
  return r;
}

std::vector<Finding> check_exhaustive(const HealthModel& m,
                                      const SolverConfig& cfg) {
  if (m.rules.rules.empty()) return {};
  auto guards = compile_guards(m.rules, m.error_map);
  ConstraintSystem sys;
  sys.vars = guard_vars(m, guards);
  for (const auto& [label, atoms] : guards) {
    Clause not_guard;
    for (const auto& a : atoms)
      for (auto& neg : negate_atom(a)) not_guard.disjuncts.push_back(neg);
    sys.clauses.push_back(std::move(not_guard));
  }
  TwoLevelResult res = solve_two_level(sys, cfg);
  std::vector<Finding> out;
  if (res.hard) {
    Finding f;
    f.kind = FindingKind::Gap;
    f.witness = res.hard->witness;
    f.certificate = res.hard->certificate_point;
    f.delta = cfg.delta;
    for (const auto& r : m.rules.rules) f.involved.push_back(r.label);
    f.narrative = "parameter value " + describe_point(*f.certificate) +
                  " is matched by no rule: the rule table is in-exhaustive";
    out.push_back(std::move(f));
  } else if (res.weak) {
    // the weak pass overshoots at rule boundaries; a certificate that some
    // rule still matches exactly is covered, not a gap
    bool covered = false;
    for (const auto& [label, atoms] : guards) {
      bool all = true;
      for (const auto& a : atoms) {
        try {
          all = all && satisfies_exactly(a, res.weak->certificate_point);
        } catch (const EvalError&) {
          all = false;
        }
      }
      if (all) covered = true;
    }
    if (!covered) {
      Finding f;
      f.kind = FindingKind::Gap;
      f.warning = true;
      f.witness = res.weak->witness;
      f.certificate = res.weak->certificate_point;
      f.delta = cfg.delta;
      f.narrative = "delta-boundary gap at " + describe_point(*f.certificate) +
                    ": uncovered only up to delta = " + format_number(cfg.delta);
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<Finding> check_overlap(const HealthModel& m,
                                   const SolverConfig& cfg) {
  std::vector<Finding> out;
  if (m.rules.rules.size() < 2) return out;
  auto guards = compile_guards(m.rules, m.error_map);
  for (std::size_t i = 0; i < guards.size(); ++i)
    for (std::size_t j = i + 1; j < guards.size(); ++j) {
      ConstraintSystem sys;
      std::vector<std::pair<std::string, std::vector<AtomicConstraint>>> pair{
          guards[i], guards[j]};
      sys.vars = guard_vars(m, pair);
      for (const auto& a : guards[i].second) sys.clauses.push_back({{a}});
      for (const auto& a : guards[j].second) sys.clauses.push_back({{a}});
      TwoLevelResult res = solve_two_level(sys, cfg);
      if (res.hard) {
        Finding f;
        f.kind = FindingKind::Overlap;
        f.witness = res.hard->witness;
        f.certificate = res.hard->certificate_point;
        f.delta = cfg.delta;
        f.involved = {guards[i].first, guards[j].first};
        f.narrative = "rules '" + guards[i].first + "' and '" +
                      guards[j].first + "' both match " +
                      describe_point(*f.certificate);
        out.push_back(std::move(f));
      } else if (res.weak) {
        Finding f;
        f.kind = FindingKind::Overlap;
        f.warning = true;
        f.witness = res.weak->witness;
        f.certificate = res.weak->certificate_point;
        f.delta = cfg.delta;
        f.involved = {guards[i].first, guards[j].first};
        f.narrative = "rules '" + guards[i].first + "' and '" +
                      guards[j].first +
                      "' touch within delta at " +
                      describe_point(*f.certificate) +
                      " (boundary contact, not a true overlap)";
        out.push_back(std::move(f));
      }
    }
  return out;
}

std::vector<Finding> check_trace(const HealthModel& m,
                                 const std::vector<Point>& trace,
                                 double delta) {
  std::vector<Finding> out;
  if (trace.size() < 2) return out;
  for (std::size_t step = 0; step + 1 < trace.size(); ++step) {
    const Point& cur = trace[step];
    const Point& nxt = trace[step + 1];
    for (const auto& eq : m.dynamics) {
      AtomicConstraint atom{Expr::var(time_name(eq.state, 1)), Rel::Eq,
                            instantiate_at(eq.rhs, 1)};
      Point point;
      auto need = free_vars(atom.lhs);
      for (const auto& v : free_vars(atom.rhs)) need.insert(v);
      for (const auto& name : need) {
        auto at = name.find('@');
        std::string base = at == std::string::npos ? name : name.substr(0, at);
        bool current = at != std::string::npos && name.substr(at) == "@t";
        const Point& src = current ? cur : nxt;
        auto it = src.find(base);
        if (it == src.end()) {
          // time-invariant readings may also appear in the earlier step
          auto it2 = cur.find(base);
          if (at == std::string::npos && it2 != cur.end()) {
            point[name] = it2->second;
            continue;
          }
          throw MissingVariable(static_cast<int>(step + (current ? 0 : 1)),
                                base);
        }
        point[name] = it->second;
      }
      double r;
      try {
        r = residual(atom, point);
      } catch (const DivisionByZero&) {
        r = std::numeric_limits<double>::infinity();
      }
      if (r > delta) {
        Finding f;
        f.kind = FindingKind::TraceViolation;
        f.certificate = point;
        f.delta = delta;
        f.involved = {eq.state + "@t+1 = " + to_string(eq.rhs)};
        f.narrative = "step " + std::to_string(step + 1) + ": equation " +
                      f.involved[0] + " violated with residual " +
                      format_number(r);
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

std::vector<Point> parse_trace(const std::string& text) {
  std::vector<Point> out;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Point step;
    std::istringstream parts(line);
    std::string kv;
    while (std::getline(parts, kv, ',')) {
      auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw SyntaxError(ln, 1, "name=value pair");
      auto trim = [](std::string s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        std::size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      std::string name = trim(kv.substr(0, eq));
      std::string val = trim(kv.substr(eq + 1));
      if (name.empty() || val.empty())
        throw SyntaxError(ln, 1, "name=value pair");
      step[name] = std::strtod(val.c_str(), nullptr);
    }
    out.push_back(std::move(step));
  }
  return out;
}

ValidationReport run_analyses(const HealthModel& m,
                              const std::optional<Scenario>& s,
                              const SolverConfig& cfg,
                              const AnalyzeOptions& opt) {
  ValidationReport rep;
  rep.model_name = m.name;
  rep.delta = cfg.delta;
  rep.precision = cfg.precision;
  rep.horizon = s ? s->horizon : 1;
  rep.budget = cfg.budget;

  auto verdict_for = [](const std::vector<Finding>& fs) {
    bool hard = false, warn = false;
    for (const auto& f : fs) (f.warning ? warn : hard) = true;
    return hard ? "findings" : warn ? "warnings" : "clean";
  };
  auto add = [&](const std::string& name, std::vector<Finding> fs) {
    rep.verdicts.push_back({name, verdict_for(fs)});
    for (auto& f : fs) rep.findings.push_back(std::move(f));
  };

  if (opt.spoof && s && !m.dynamics.empty())
    add("spoof", find_spoof(m, *s, cfg, opt.spoof_k, opt.separation));
  if (opt.unsafe && !m.safety.empty())
    add("unsafe", check_unsafe(m, cfg, s ? std::max(1, s->horizon) : 1));
  if (opt.reachable && !opt.reach_target.empty() && s) {
    ReachResult r =
        check_reachable(m, *s, opt.reach_target, opt.reach_horizon, cfg);
    std::vector<Finding> fs;
    if (r.finding) fs.push_back(*r.finding);
    add("reachable", std::move(fs));
  }
  if (opt.exhaustive && !m.rules.rules.empty())
    add("exhaustive", check_exhaustive(m, cfg));
  if (opt.overlap && m.rules.rules.size() >= 2)
    add("overlap", check_overlap(m, cfg));

  // deterministic order: kind, then involved labels
  std::stable_sort(rep.findings.begin(), rep.findings.end(),
                   [](const Finding& a, const Finding& b) {
                     if (a.kind != b.kind) return a.kind < b.kind;
                     return a.involved < b.involved;
                   });
  return rep;
}

}  // namespace hcval
