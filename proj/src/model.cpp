#include "hcval/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hcval {

namespace {

bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum((unsigned char)c) || c == '_';
}

// Single-line cursor with 1-based column reporting.
struct Cursor {
  const std::string& s;
  int line;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  int col() const { return static_cast<int>(pos) + 1; }
  [[noreturn]] void fail(const std::string& expected) {
    throw SyntaxError(line, col(), expected);
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool try_consume(const std::string& tok) {
    skip_ws();
    if (s.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& tok) {
    if (!try_consume(tok)) fail("'" + tok + "'");
  }
  // identifier with optional time suffix @t+1 / @t1 / @t / @<digits>
  std::string ident() {
    skip_ws();
    if (pos >= s.size() || !ident_start(s[pos])) fail("identifier");
    std::size_t start = pos;
    while (pos < s.size() && ident_char(s[pos])) ++pos;
    if (pos < s.size() && s[pos] == '@') {
      ++pos;
      if (s.compare(pos, 3, "t+1") == 0) {
        pos += 3;
      } else if (pos < s.size() && s[pos] == 't') {
        ++pos;
        while (pos < s.size() && std::isdigit((unsigned char)s[pos])) ++pos;
      } else {
        fail("time suffix after '@'");
      }
    }
    return s.substr(start, pos - start);
  }
  std::string number() {
    skip_ws();
    std::size_t start = pos;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
    std::size_t digits = pos;
    while (pos < s.size() && std::isdigit((unsigned char)s[pos])) ++pos;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit((unsigned char)s[pos])) ++pos;
    }
    if (pos == digits) fail("number");
    return s.substr(start, pos - start);
  }
  std::string rest() {
    skip_ws();
    std::string r = s.substr(pos);
    while (!r.empty() && (r.back() == ' ' || r.back() == '\t')) r.pop_back();
    pos = s.size();
    return r;
  }
};

// expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)*
// factor := '-' factor | '(' expr ')' | number | ident
ExprPtr parse_expr(Cursor& c);

ExprPtr parse_factor(Cursor& c) {
  c.skip_ws();
  if (c.try_consume("(")) {
    ExprPtr e = parse_expr(c);
    c.expect(")");
    return e;
  }
  char ch = c.peek();
  if (ch == '-') {
    ++c.pos;
    return Expr::neg(parse_factor(c));
  }
  if (std::isdigit((unsigned char)ch) || ch == '.') {
    return Expr::constant(c.number());
  }
  if (ident_start(ch)) return Expr::var(c.ident());
  c.fail("expression");
}

ExprPtr parse_term(Cursor& c) {
  ExprPtr e = parse_factor(c);
  for (;;) {
    if (c.try_consume("*")) {
      e = Expr::mul(e, parse_factor(c));
    } else if (c.try_consume("/")) {
      e = Expr::div(e, parse_factor(c));
    } else {
      return e;
    }
  }
}

ExprPtr parse_expr(Cursor& c) {
  ExprPtr e = parse_term(c);
  for (;;) {
    c.skip_ws();
    if (c.try_consume("+")) {
      e = Expr::add(e, parse_term(c));
    } else if (c.pos < c.s.size() && c.s[c.pos] == '-') {
      ++c.pos;
      e = Expr::sub(e, parse_term(c));
    } else {
      return e;
    }
  }
}

Rel parse_rel(Cursor& c) {
  if (c.try_consume("<=")) return Rel::Le;
  if (c.try_consume(">=")) return Rel::Ge;
  if (c.try_consume("<")) return Rel::Lt;
  if (c.try_consume(">")) return Rel::Gt;
  if (c.try_consume("=")) return Rel::Eq;
  c.fail("relation");
}

AtomicConstraint parse_atom(Cursor& c) {
  AtomicConstraint a;
  a.lhs = parse_expr(c);
  a.rel = parse_rel(c);
  a.rhs = parse_expr(c);
  return a;
}

std::vector<AtomicConstraint> parse_atom_list(Cursor& c) {
  std::vector<AtomicConstraint> atoms;
  atoms.push_back(parse_atom(c));
  while (c.try_consume(",")) atoms.push_back(parse_atom(c));
  return atoms;
}

std::vector<std::pair<int, std::string>> logical_lines(const std::string& text) {
  std::vector<std::pair<int, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    std::size_t b = line.find_last_not_of(" \t\r");
    out.emplace_back(n, line.substr(a, b - a + 1));
  }
  return out;
}

Level parse_level_word(Cursor& c) {
  if (c.try_consume("interface")) return Level::Interface;
  if (c.try_consume("mechanical")) return Level::Mechanical;
  if (c.try_consume("biological")) return Level::Biological;
  if (c.try_consume("environmental")) return Level::Environmental;
  if (c.try_consume("none")) return Level::None;
  c.fail("level name");
}

struct TimeRef {
  std::string base;
  int index = -1;  // -1 plain, 0 = @t, k = @t+k... (parser yields 0/1 markers)
  bool next = false;  // true for @t+1
};

TimeRef split_time(const std::string& name) {
  TimeRef r;
  auto at = name.find('@');
  if (at == std::string::npos) {
    r.base = name;
    return r;
  }
  r.base = name.substr(0, at);
  std::string suf = name.substr(at + 1);
  if (suf == "t") {
    r.index = 0;
  } else if (suf == "t+1") {
    r.next = true;
    r.index = 1;
  } else if (suf.size() > 1 && suf[0] == 't') {
    r.index = std::stoi(suf.substr(1));
  }
  return r;
}

void check_expr_vars(const ExprPtr& e, const HealthModel& m, bool dynamics_ctx) {
  for (const auto& v : free_vars(e)) {
    TimeRef tr = split_time(v);
    if (!m.find_param(tr.base)) throw UnknownIdentifier(tr.base);
    if (!dynamics_ctx && tr.index >= 0)
      throw UnknownIdentifier(v + " (time index outside dynamics)");
    if (dynamics_ctx && tr.index > 1)
      throw UnknownIdentifier(v + " (dynamics may reference only t and t+1)");
  }
}

}  // namespace

const VarDecl* HealthModel::find_param(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

bool HealthModel::is_state(const std::string& name) const {
  for (const auto& d : dynamics)
    if (d.state == name) return true;
  return false;
}

bool Scenario::is_fixed(const std::string& name) const {
  for (const auto& it : items)
    if (it.kind == Item::Kind::Fix && it.name == name) return true;
  return false;
}

HealthModel parse_model(const std::string& text) {
  auto lines = logical_lines(text);
  if (lines.empty()) throw SyntaxError(1, 1, "'format 1' header");
  std::size_t li = 0;
  {
    Cursor c{lines[li].second, lines[li].first};
    c.expect("format");
    if (c.number() != "1") c.fail("format version 1");
    ++li;
  }
  if (li >= lines.size()) throw SyntaxError(lines.back().first + 1, 1, "'model <name>'");
  HealthModel m;
  {
    Cursor c{lines[li].second, lines[li].first};
    c.expect("model");
    m.name = c.ident();
    ++li;
  }
  for (; li < lines.size(); ++li) {
    Cursor c{lines[li].second, lines[li].first};
    if (c.try_consume("var")) {
      VarDecl d;
      d.name = c.ident();
      if (m.find_param(d.name)) throw DuplicateDeclaration(d.name);
      c.expect(":");
      if (c.try_consume("Int")) {
        d.sort = Sort::Int;
      } else if (c.try_consume("Real")) {
        d.sort = Sort::Real;
      } else {
        c.fail("'Int' or 'Real'");
      }
      c.expect("[");
      d.lo_str = c.number();
      c.expect(",");
      d.hi_str = c.number();
      c.expect("]");
      d.lo = std::strtod(d.lo_str.c_str(), nullptr);
      d.hi = std::strtod(d.hi_str.c_str(), nullptr);
      if (d.lo > d.hi) c.fail("lo <= hi in domain");
      if (d.sort == Sort::Int && std::ceil(d.lo) > std::floor(d.hi))
        c.fail("an Int domain containing an integer");
      while (!c.done()) {
        if (c.try_consume("level")) {
          d.level = parse_level_word(c);
        } else if (c.try_consume("trusted")) {
          d.trust = Trust::Trusted;
        } else if (c.try_consume("untrusted")) {
          d.trust = Trust::Untrusted;
        } else if (c.try_consume("unit")) {
          c.skip_ws();
          std::size_t start = c.pos;
          while (c.pos < c.s.size() && !std::isspace((unsigned char)c.s[c.pos]))
            ++c.pos;
          d.unit = c.s.substr(start, c.pos - start);
        } else {
          c.fail("'level', 'trusted', 'untrusted' or 'unit'");
        }
      }
      m.params.push_back(std::move(d));
    } else if (c.try_consume("level")) {
      Level lvl = parse_level_word(c);
      while (!c.done()) {
        std::string name = c.ident();
        bool found = false;
        for (auto& p : m.params)
          if (p.name == name) {
            p.level = lvl;
            found = true;
          }
        if (!found) throw UnknownIdentifier(name);
      }
    } else if (c.try_consume("error")) {
      ErrorMapEntry e;
      e.var = c.ident();
      e.bound_str = c.number();
      e.bound = std::strtod(e.bound_str.c_str(), nullptr);
      if (e.bound < 0) c.fail("nonnegative error bound");
      if (!m.find_param(e.var)) {
        VarDecl d;
        d.name = e.var;
        d.sort = Sort::Real;
        d.lo = -e.bound;
        d.hi = e.bound;
        d.lo_str = "-" + e.bound_str;
        d.hi_str = e.bound_str;
        d.level = Level::Mechanical;
        d.trust = Trust::Untrusted;
        d.explicit_domain = false;
        m.params.push_back(std::move(d));
      }
      m.error_map.push_back(std::move(e));
    } else if (c.try_consume("dynamics")) {
      DynamicsEq eq;
      std::string lhs = c.ident();
      TimeRef tr = split_time(lhs);
      if (!tr.next) c.fail("'<name>@t+1' on the left of dynamics");
      eq.state = tr.base;
      c.expect("=");
      eq.rhs = parse_expr(c);
      if (!c.done()) c.fail("end of line");
      m.dynamics.push_back(std::move(eq));
    } else if (c.try_consume("rule")) {
      Rule r;
      r.label = c.ident();
      for (const auto& prev : m.rules.rules)
        if (prev.label == r.label) throw DuplicateDeclaration(r.label);
      c.expect(":");
      r.guard = parse_atom_list(c);
      if (!c.done()) c.fail("end of line");
      m.rules.rules.push_back(std::move(r));
    } else if (c.try_consume("safe")) {
      auto atoms = parse_atom_list(c);
      if (!c.done()) c.fail("end of line");
      for (auto& a : atoms) m.safety.push_back(std::move(a));
    } else {
      c.fail("'var', 'level', 'error', 'dynamics', 'rule' or 'safe'");
    }
  }
  // semantic checks
  for (const auto& e : m.error_map)
    if (!m.find_param(e.var)) throw UnknownIdentifier(e.var);
  for (const auto& d : m.dynamics) {
    if (!m.find_param(d.state)) throw UnknownIdentifier(d.state);
    check_expr_vars(d.rhs, m, true);
  }
  for (const auto& r : m.rules.rules)
    for (const auto& a : r.guard) {
      check_expr_vars(a.lhs, m, false);
      check_expr_vars(a.rhs, m, false);
    }
  for (const auto& a : m.safety) {
    check_expr_vars(a.lhs, m, false);
    check_expr_vars(a.rhs, m, false);
  }
  return m;
}

std::string print_model(const HealthModel& m) {
  std::ostringstream out;
  out << "format 1\n";
  out << "model " << m.name << "\n";
  for (const auto& p : m.params) {
    if (!p.explicit_domain) continue;  // re-created by its error line
    out << "var " << p.name << " : " << (p.sort == Sort::Int ? "Int" : "Real")
        << " [" << (p.lo_str.empty() ? format_number(p.lo) : p.lo_str) << ", "
        << (p.hi_str.empty() ? format_number(p.hi) : p.hi_str) << "]";
    if (p.level != Level::None) out << " level " << level_text(p.level);
    out << " " << trust_text(p.trust);
    if (!p.unit.empty()) out << " unit " << p.unit;
    out << "\n";
  }
  for (const auto& e : m.error_map)
    out << "error " << e.var << " "
        << (e.bound_str.empty() ? format_number(e.bound) : e.bound_str) << "\n";
  for (const auto& d : m.dynamics)
    out << "dynamics " << d.state << "@t+1 = " << to_string(d.rhs) << "\n";
  for (const auto& r : m.rules.rules) {
    out << "rule " << r.label << " : ";
    for (std::size_t i = 0; i < r.guard.size(); ++i) {
      if (i) out << ", ";
      out << to_string(r.guard[i]);
    }
    out << "\n";
  }
  for (const auto& a : m.safety) out << "safe " << to_string(a) << "\n";
  return out.str();
}

Scenario parse_scenario(const std::string& text) {
  auto lines = logical_lines(text);
  if (lines.empty()) throw SyntaxError(1, 1, "'format 1' header");
  std::size_t li = 0;
  {
    Cursor c{lines[li].second, lines[li].first};
    c.expect("format");
    if (c.number() != "1") c.fail("format version 1");
    ++li;
  }
  Scenario s;
  for (; li < lines.size(); ++li) {
    Cursor c{lines[li].second, lines[li].first};
    if (c.try_consume("horizon")) {
      c.expect("=");
      s.horizon = std::stoi(c.number());
    } else if (c.try_consume("delta")) {
      c.expect("=");
      s.delta = std::strtod(c.number().c_str(), nullptr);
    } else if (c.try_consume("precision")) {
      c.expect("=");
      s.precision = std::strtod(c.number().c_str(), nullptr);
    } else if (c.try_consume("free")) {
      Scenario::Item it;
      it.kind = Scenario::Item::Kind::Free;
      it.name = c.ident();
      s.items.push_back(std::move(it));
    } else if (c.try_consume("real")) {
      std::string name = c.ident();
      c.expect("=");
      s.reference[name] = std::strtod(c.number().c_str(), nullptr);
    } else {
      Scenario::Item it;
      it.name = c.ident();
      c.expect("=");
      it.literal = c.number();
      it.value = std::strtod(it.literal.c_str(), nullptr);
      s.items.push_back(std::move(it));
    }
    if (!c.done()) c.fail("end of line");
  }
  return s;
}

std::string time_name(const std::string& base, int k) {
  if (k == 0) return base + "@t";
  return base + "@t" + std::to_string(k);
}

namespace {

ExprPtr subst_time(const ExprPtr& e, int step) {
  switch (e->kind()) {
    case Expr::Kind::Constant:
      return e;
    case Expr::Kind::Variable: {
      TimeRef tr = split_time(e->name());
      if (tr.index < 0) return e;  // plain, time-invariant
      int k = tr.next ? step : step - 1;
      return Expr::var(time_name(tr.base, k));
    }
    case Expr::Kind::Neg:
      return Expr::neg(subst_time(e->lhs(), step));
    case Expr::Kind::Add:
      return Expr::add(subst_time(e->lhs(), step), subst_time(e->rhs(), step));
    case Expr::Kind::Sub:
      return Expr::sub(subst_time(e->lhs(), step), subst_time(e->rhs(), step));
    case Expr::Kind::Mul:
      return Expr::mul(subst_time(e->lhs(), step), subst_time(e->rhs(), step));
    case Expr::Kind::Div:
      return Expr::div(subst_time(e->lhs(), step), subst_time(e->rhs(), step));
  }
  return e;
}

ExprPtr const_from(double v, const std::string& literal) {
  return literal.empty() ? Expr::constant(v) : Expr::constant(literal);
}

}  // namespace

ExprPtr instantiate_at(const ExprPtr& e, int step) {
  return subst_time(e, step);
}

std::set<std::string> input_vars(const HealthModel& m) {
  std::set<std::string> inputs;
  for (const auto& d : m.dynamics)
    for (const auto& v : free_vars(d.rhs)) {
      TimeRef tr = split_time(v);
      if (tr.next && !m.is_state(tr.base)) inputs.insert(tr.base);
    }
  return inputs;
}

ConstraintSystem lower(const HealthModel& m, const Scenario& s) {
  if (s.horizon < 0 || s.horizon > 64) throw HorizonTooLarge(s.horizon);
  ConstraintSystem sys;

  // which base variables are state / per-step inputs / time-invariant
  std::set<std::string> inputs;
  for (const auto& d : m.dynamics)
    for (const auto& v : free_vars(d.rhs)) {
      TimeRef tr = split_time(v);
      if (tr.next && !m.is_state(tr.base)) inputs.insert(tr.base);
    }

  for (const auto& p : m.params) {
    if (m.is_state(p.name)) {
      for (int k = 0; k <= s.horizon; ++k) {
        VarDecl inst = p;
        inst.name = time_name(p.name, k);
        sys.vars.push_back(std::move(inst));
      }
    } else if (inputs.count(p.name)) {
      for (int k = 1; k <= s.horizon; ++k) {
        VarDecl inst = p;
        inst.name = time_name(p.name, k);
        sys.vars.push_back(std::move(inst));
      }
    } else {
      bool referenced = false;
      for (const auto& d : m.dynamics)
        if (free_vars(d.rhs).count(p.name)) referenced = true;
      if (referenced || m.dynamics.empty()) sys.vars.push_back(p);
    }
  }

  int next_group = 1;  // group 0 is the leading Int-fix conjunction
  std::set<std::string> bounds_done, fixed;

  auto emit_bounds = [&](const VarDecl& v) {
    if (bounds_done.count(v.name)) return;
    bounds_done.insert(v.name);
    int g = next_group++;
    ExprPtr var = Expr::var(v.name);
    sys.clauses.push_back(
        {{{const_from(v.lo, v.lo_str), Rel::Le, var}}, g});
    sys.clauses.push_back(
        {{{var, Rel::Le, const_from(v.hi, v.hi_str)}}, g});
  };

  // pass 1: Int fixes form the leading conjunction, in scenario order
  for (const auto& it : s.items) {
    if (it.kind != Scenario::Item::Kind::Fix) continue;
    const VarDecl* v = sys.find_var(it.name);
    if (!v) throw UnknownIdentifier(it.name);
    if (it.value < v->lo || it.value > v->hi)
      throw InconsistentScenario("fixed value for " + it.name +
                                 " outside declared domain");
    fixed.insert(it.name);
    if (v->sort != Sort::Int) continue;
    sys.clauses.push_back(
        {{{Expr::var(it.name), Rel::Eq, const_from(it.value, it.literal)}}, 0});
  }

  // pass 2: remaining scenario items in file order
  for (const auto& it : s.items) {
    const VarDecl* v = sys.find_var(it.name);
    if (!v) throw UnknownIdentifier(it.name);
    if (it.kind == Scenario::Item::Kind::Free) {
      emit_bounds(*v);
      continue;
    }
    if (v->sort == Sort::Int) continue;  // already in the leading group
    // a mechanical-level error term states its bounds with its reading
    if (v->level == Level::Mechanical && v->explicit_domain) emit_bounds(*v);
    sys.clauses.push_back(
        {{{Expr::var(it.name), Rel::Eq, const_from(it.value, it.literal)}},
         next_group++});
  }

  // trailing bounds in declaration order
  for (const auto& v : sys.vars) {
    if (bounds_done.count(v.name)) continue;
    if (fixed.count(v.name) && (v.sort == Sort::Int || !v.explicit_domain))
      continue;
    emit_bounds(v);
  }

  // unrolled dynamics
  for (int k = 1; k <= s.horizon; ++k)
    for (const auto& d : m.dynamics)
      sys.clauses.push_back(
          {{{Expr::var(time_name(d.state, k)), Rel::Eq, subst_time(d.rhs, k)}},
           next_group++});

  return sys;
}

namespace {

ExprPtr perturb(const ExprPtr& e, const std::string& var, const ExprPtr& repl) {
  switch (e->kind()) {
    case Expr::Kind::Constant:
      return e;
    case Expr::Kind::Variable:
      return e->name() == var ? repl : e;
    case Expr::Kind::Neg:
      return Expr::neg(perturb(e->lhs(), var, repl));
    case Expr::Kind::Add:
      return Expr::add(perturb(e->lhs(), var, repl), perturb(e->rhs(), var, repl));
    case Expr::Kind::Sub:
      return Expr::sub(perturb(e->lhs(), var, repl), perturb(e->rhs(), var, repl));
    case Expr::Kind::Mul:
      return Expr::mul(perturb(e->lhs(), var, repl), perturb(e->rhs(), var, repl));
    case Expr::Kind::Div:
      return Expr::div(perturb(e->lhs(), var, repl), perturb(e->rhs(), var, repl));
  }
  return e;
}

}  // namespace

std::vector<std::pair<std::string, std::vector<AtomicConstraint>>>
compile_guards(const RuleTable& rt, const std::vector<ErrorMapEntry>& map) {
  std::vector<std::pair<std::string, std::vector<AtomicConstraint>>> out;
  for (const auto& rule : rt.rules) {
    std::vector<AtomicConstraint> compiled;
    for (const auto& atom : rule.guard) {
      std::vector<AtomicConstraint> variants{atom};
      auto vars = free_vars(atom.lhs);
      for (const auto& v : free_vars(atom.rhs)) vars.insert(v);
      for (const auto& entry : map) {
        if (!vars.count(entry.var)) continue;
        if (entry.bound == 0.0) continue;  // zero error: identity
        ExprPtr bound = entry.bound_str.empty()
                            ? Expr::constant(entry.bound)
                            : Expr::constant(entry.bound_str);
        std::vector<AtomicConstraint> next;
        for (const auto& va : variants) {
          ExprPtr plus = Expr::add(Expr::var(entry.var), bound);
          ExprPtr minus = Expr::sub(Expr::var(entry.var), bound);
          next.push_back({perturb(va.lhs, entry.var, plus), va.rel,
                          perturb(va.rhs, entry.var, plus)});
          next.push_back({perturb(va.lhs, entry.var, minus), va.rel,
                          perturb(va.rhs, entry.var, minus)});
        }
        variants = std::move(next);
      }
      for (auto& va : variants) compiled.push_back(std::move(va));
    }
    out.emplace_back(rule.label, std::move(compiled));
  }
  return out;
}

}  // namespace hcval
