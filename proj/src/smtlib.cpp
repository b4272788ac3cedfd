#include "hcval/smtlib.hpp"

#include <cstdio>
#include <sstream>

namespace hcval {

namespace {

void emit_expr(const ExprPtr& e, std::ostringstream& out) {
  switch (e->kind()) {
    case Expr::Kind::Constant:
      out << (e->literal().empty() ? format_number(e->value()) : e->literal());
      return;
    case Expr::Kind::Variable:
      out << e->name();
      return;
    case Expr::Kind::Neg:
      out << "(- ";
      emit_expr(e->lhs(), out);
      out << ")";
      return;
    default: {
      const char* op = e->kind() == Expr::Kind::Add   ? "+"
                       : e->kind() == Expr::Kind::Sub ? "-"
                       : e->kind() == Expr::Kind::Mul ? "*"
                                                      : "/";
      out << "(" << op << " ";
      emit_expr(e->lhs(), out);
      out << " ";
      emit_expr(e->rhs(), out);
      out << ")";
      return;
    }
  }
}

void emit_atom(const AtomicConstraint& a, std::ostringstream& out) {
  out << "(" << rel_text(a.rel) << " ";
  emit_expr(a.lhs, out);
  out << " ";
  emit_expr(a.rhs, out);
  out << ")";
}

}  // namespace

std::string emit(const ConstraintSystem& sys) {
  std::ostringstream out;
  out << "(set-logic QF_NRA)\n";
  for (const auto& v : sys.vars)
    out << "(declare-fun " << v.name << " () "
        << (v.sort == Sort::Int ? "Int" : "Real") << ")\n";
  std::size_t i = 0;
  while (i < sys.clauses.size()) {
    const Clause& cl = sys.clauses[i];
    if (cl.disjuncts.size() > 1) {
      out << "(assert (or";
      for (const auto& a : cl.disjuncts) {
        out << " ";
        emit_atom(a, out);
      }
      out << "))\n";
      ++i;
      continue;
    }
    // run of consecutive single-atom clauses sharing a group id
    std::size_t j = i + 1;
    if (cl.group >= 0)
      while (j < sys.clauses.size() && sys.clauses[j].group == cl.group &&
             sys.clauses[j].disjuncts.size() == 1)
        ++j;
    if (j - i > 1) {
      out << "(assert (and";
      for (std::size_t k = i; k < j; ++k) {
        out << " ";
        emit_atom(sys.clauses[k].disjuncts[0], out);
      }
      out << "))\n";
    } else {
      out << "(assert ";
      emit_atom(cl.disjuncts[0], out);
      out << ")\n";
    }
    i = j;
  }
  out << "(check-sat)\n(exit)\n";
  return out.str();
}

bool operator==(const ExternalResult& a, const ExternalResult& b) {
  if (a.delta_sat != b.delta_sat || a.delta != b.delta) return false;
  if (a.ranges.size() != b.ranges.size()) return false;
  for (std::size_t i = 0; i < a.ranges.size(); ++i)
    if (a.ranges[i].first != b.ranges[i].first ||
        !(a.ranges[i].second == b.ranges[i].second))
      return false;
  return true;
}

ExternalResult parse_external(const std::string& text) {
  ExternalResult r;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  bool have_status = false;
  auto trim = [](std::string s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++ln;
    line = trim(line);
    if (line.empty()) continue;
    if (!have_status) {
      if (line == "unsat") {
        have_status = true;
        continue;
      }
      const std::string prefix = "delta-sat with delta =";
      if (line.compare(0, prefix.size(), prefix) == 0) {
        r.delta_sat = true;
        try {
          r.delta = std::stod(line.substr(prefix.size()));
        } catch (...) {
          throw MalformedResult(ln, "delta value");
        }
        have_status = true;
        continue;
      }
      throw MalformedResult(ln, "'unsat' or 'delta-sat with delta = ...'");
    }
    if (!r.delta_sat)
      throw MalformedResult(ln, "no ranges after unsat");
    auto colon = line.find(':');
    auto lb = line.find('[');
    auto comma = line.find(',', lb);
    auto rb = line.find(']', lb);
    if (colon == std::string::npos || lb == std::string::npos ||
        comma == std::string::npos || rb == std::string::npos)
      throw MalformedResult(ln, "'name : [lo, hi]'");
    std::string name = trim(line.substr(0, colon));
    if (name.empty()) throw MalformedResult(ln, "variable name");
    try {
      double lo = std::stod(line.substr(lb + 1, comma - lb - 1));
      double hi = std::stod(line.substr(comma + 1, rb - comma - 1));
      r.ranges.emplace_back(name, Interval{lo, hi});
    } catch (...) {
      throw MalformedResult(ln, "numeric bounds");
    }
  }
  if (!have_status) throw MalformedResult(1, "a status line");
  if (r.delta_sat && r.ranges.empty())
    throw MalformedResult(ln, "ranges after delta-sat");
  return r;
}

std::string print_external(const ExternalResult& r) {
  if (!r.delta_sat) return "unsat\n";
  std::ostringstream out;
  out << "delta-sat with delta = " << format_number(r.delta) << "\n";
  for (const auto& [name, iv] : r.ranges)
    out << name << " : [" << format_number(iv.lo) << ", "
        << format_number(iv.hi) << "]\n";
  return out.str();
}

std::optional<ExternalResult> run_external_solver(const std::string& command,
                                                  const std::string& script_path) {
  std::string cmd = command + " " + script_path + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return std::nullopt;
  std::string output;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) output.append(buf, n);
  int rc = pclose(pipe);
  if (rc != 0 && output.empty()) return std::nullopt;
  return parse_external(output);
}

}  // namespace hcval
