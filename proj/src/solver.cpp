#include "hcval/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <future>
#include <thread>

namespace hcval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clause_residual(const Clause& cl, const Point& point) {
  double best = kInf;
  for (const auto& atom : cl.disjuncts) {
    double r;
    try {
      r = residual(atom, point);
    } catch (const DivisionByZero&) {
      continue;
    }
    best = std::min(best, r);
  }
  return best;
}

double total_residual(const ConstraintSystem& sys, const Point& point) {
  double total = 0.0;
  for (const auto& cl : sys.clauses) {
    double r = clause_residual(cl, point);
    if (r == kInf) return kInf;
    total += r;
  }
  return total;
}

void snap_ints(const ConstraintSystem& sys, const Box& box, Point& point) {
  for (const auto& v : sys.vars) {
    if (v.sort != Sort::Int) continue;
    auto it = point.find(v.name);
    if (it == point.end()) continue;
    const Interval& iv = box.get(v.name);
    double snapped = std::clamp(std::round(it->second), std::ceil(iv.lo),
                                std::floor(iv.hi));
    it->second = snapped;
  }
}

// Coordinate descent on the summed clause residuals, staying inside the box.
Point refine_point(const ConstraintSystem& sys, const Box& box, Point point,
                   int max_steps) {
  double best = total_residual(sys, point);
  std::vector<std::pair<std::string, double>> steps;
  for (const auto& e : box) {
    bool is_int = false;
    if (const VarDecl* d = sys.find_var(e.first)) is_int = d->sort == Sort::Int;
    double st = is_int ? 1.0 : std::max(e.second.width() / 4.0, 1e-9);
    steps.emplace_back(e.first, st);
  }
  for (int iter = 0; iter < max_steps && best > 0.0; ++iter) {
    bool improved = false;
    for (auto& [name, step] : steps) {
      const Interval& iv = box.get(name);
      bool is_int = false;
      if (const VarDecl* d = sys.find_var(name)) is_int = d->sort == Sort::Int;
      for (double dir : {1.0, -1.0}) {
        Point trial = point;
        double nv = trial[name] + dir * step;
        if (is_int) nv = std::round(nv);
        nv = std::clamp(nv, is_int ? std::ceil(iv.lo) : iv.lo,
                        is_int ? std::floor(iv.hi) : iv.hi);
        if (nv == point[name]) continue;
        trial[name] = nv;
        double r = total_residual(sys, trial);
        if (r < best) {
          best = r;
          point = std::move(trial);
          improved = true;
          break;
        }
      }
      if (!is_int && !improved) step *= 0.5;
    }
    if (!improved) {
      bool all_tiny = true;
      for (const auto& [name, step] : steps)
        if (step > 1e-12) all_tiny = false;
      if (all_tiny) break;
    }
  }
  return point;
}

struct Node {
  Box box;
  // per clause: indices of disjuncts not yet refuted on this box
  std::vector<std::vector<int>> surviving;
};

class Search {
 public:
  Search(const ConstraintSystem& sys, const SolverConfig& cfg,
         std::atomic<bool>* stop = nullptr)
      : sys_(sys), cfg_(cfg), stop_(stop) {
    sorts_.sys = &sys;
  }

  std::int64_t expanded = 0;
  std::int64_t inconclusive = 0;

  DeltaVerdict run(Node root) {
    std::vector<Node> stack;
    stack.push_back(std::move(root));
    while (!stack.empty()) {
      if (stop_ && stop_->load(std::memory_order_relaxed))
        return Unknown{expanded, static_cast<std::int64_t>(stack.size())};
      if (expanded >= cfg_.budget)
        return Unknown{expanded, static_cast<std::int64_t>(stack.size())};
      Node node = std::move(stack.back());
      stack.pop_back();
      ++expanded;
      if (!contract_fixpoint(node)) continue;
      if (auto cert = try_certify(node)) return *cert;
      try {
        auto [left, right] = bisect(node.box, sorts_);
        stack.push_back({std::move(right), node.surviving});
        stack.push_back({std::move(left), std::move(node.surviving)});
      } catch (const NothingToSplit&) {
        ++inconclusive;
      }
    }
    if (inconclusive > 0) return Unknown{expanded, inconclusive};
    return Unsat{};
  }

 private:
  bool contract_fixpoint(Node& node) {
    for (int sweep = 0; sweep < 64; ++sweep) {
      bool improved = false;
      for (std::size_t ci = 0; ci < sys_.clauses.size(); ++ci) {
        const Clause& cl = sys_.clauses[ci];
        auto& surv = node.surviving[ci];
        if (surv.empty()) return false;
        if (surv.size() == 1) {
          Box contracted = hc4_revise(cl.disjuncts[surv[0]], node.box);
          if (contracted.any_empty()) return false;
          improved |= note_improvement(node.box, contracted);
          node.box = std::move(contracted);
        } else {
          // constructive disjunction: hull of the per-disjunct contractions
          Box hull_box = node.box;
          bool first = true;
          std::vector<int> alive;
          for (int d : surv) {
            Box contracted = hc4_revise(cl.disjuncts[d], node.box);
            if (contracted.any_empty()) continue;
            alive.push_back(d);
            if (first) {
              hull_box = std::move(contracted);
              first = false;
            } else {
              for (const auto& e : contracted)
                hull_box.set(e.first, hull(hull_box.get(e.first), e.second));
            }
          }
          if (alive.empty()) return false;
          surv = std::move(alive);
          improved |= note_improvement(node.box, hull_box);
          node.box = std::move(hull_box);
        }
      }
      for (const auto& v : sys_.vars) {
        if (v.sort != Sort::Int) continue;
        Interval t = tighten_int(node.box.get(v.name));
        if (t.is_empty()) return false;
        node.box.set(v.name, t);
      }
      if (!improved) break;
    }
    return true;
  }

  static bool note_improvement(const Box& before, const Box& after) {
    for (const auto& e : after) {
      double wa = before.get(e.first).width();
      double wb = e.second.width();
      if (wa > 0.0 && (wa - wb) > 0.01 * wa) return true;
    }
    return false;
  }

  std::optional<DeltaSat> try_certify(const Node& node) {
    Point p = node.box.midpoint();
    snap_ints(sys_, node.box, p);
    if (total_residual(sys_, p) > cfg_.delta) {
      p = refine_point(sys_, node.box, std::move(p), 100);
      snap_ints(sys_, node.box, p);
    }
    CertifyReport rep = certify(sys_, p, cfg_.delta);
    if (!rep.certified) return std::nullopt;
    return DeltaSat{node.box, std::move(p), cfg_.delta};
  }

  const ConstraintSystem& sys_;
  const SolverConfig& cfg_;
  SortLookup sorts_;
  std::atomic<bool>* stop_;
};

Node make_root(const ConstraintSystem& sys) {
  Box box;
  for (const auto& v : sys.vars) {
    if (!std::isfinite(v.lo) || !std::isfinite(v.hi))
      throw UnboundedDomain(v.name);
    Interval iv{v.lo, v.hi};
    if (v.sort == Sort::Int) iv = tighten_int(iv);
    box.set(v.name, iv);
  }
  Node root;
  root.box = std::move(box);
  root.surviving.resize(sys.clauses.size());
  for (std::size_t i = 0; i < sys.clauses.size(); ++i) {
    root.surviving[i].resize(sys.clauses[i].disjuncts.size());
    for (std::size_t d = 0; d < sys.clauses[i].disjuncts.size(); ++d)
      root.surviving[i][d] = static_cast<int>(d);
  }
  return root;
}

void validate_config(const SolverConfig& cfg) {
  if (cfg.budget < 1) throw BudgetMisconfigured();
  if (!(cfg.delta > 0.0) || !(cfg.precision > 0.0))
    throw std::invalid_argument("delta and precision must be positive");
}

DeltaVerdict solve_parallel(const ConstraintSystem& sys,
                            const SolverConfig& cfg, Node root) {
  unsigned workers = std::max(2u, std::thread::hardware_concurrency() / 2);
  std::deque<Node> pieces;
  pieces.push_back(std::move(root));
  SortLookup sorts{&sys};
  while (pieces.size() < workers) {
    Node n = std::move(pieces.front());
    pieces.pop_front();
    try {
      auto [l, r] = bisect(n.box, sorts);
      pieces.push_back({std::move(l), n.surviving});
      pieces.push_back({std::move(r), std::move(n.surviving)});
    } catch (const NothingToSplit&) {
      pieces.push_back(std::move(n));
      break;
    }
  }
  std::atomic<bool> found{false};
  std::vector<std::future<DeltaVerdict>> futs;
  std::deque<Node> work = std::move(pieces);
  for (auto& piece : work) {
    futs.push_back(std::async(std::launch::async, [&sys, &cfg, &found,
                                                   p = std::move(piece)]() mutable {
      Search s(sys, cfg, &found);
      DeltaVerdict v = s.run(std::move(p));
      if (is_delta_sat(v)) found.store(true, std::memory_order_relaxed);
      return v;
    }));
  }
  std::optional<DeltaSat> sat;
  std::int64_t expanded = 0, frontier = 0;
  bool unknown = false;
  for (auto& f : futs) {
    DeltaVerdict v = f.get();
    if (auto* s = std::get_if<DeltaSat>(&v)) {
      if (!sat) sat = std::move(*s);
    } else if (auto* u = std::get_if<Unknown>(&v)) {
      unknown = true;
      expanded += u->expanded;
      frontier += u->frontier_size;
    }
  }
  if (sat) return *sat;
  if (unknown) return Unknown{expanded, frontier};
  return Unsat{};
}

}  // namespace

CertifyReport certify(const ConstraintSystem& sys, const Point& point,
                      double delta) {
  for (const auto& v : sys.vars) {
    auto it = point.find(v.name);
    if (it == point.end()) throw UnboundVariable(v.name);
    if (v.sort == Sort::Int && std::round(it->second) != it->second)
      throw SortViolation(v.name);
  }
  CertifyReport rep;
  rep.certified = true;
  for (std::size_t i = 0; i < sys.clauses.size(); ++i) {
    double r = clause_residual(sys.clauses[i], point);
    bool ok = r <= delta;
    rep.entries.push_back({i, r, ok});
    rep.certified = rep.certified && ok;
  }
  return rep;
}

DeltaVerdict solve(const ConstraintSystem& sys, const SolverConfig& cfg) {
  validate_config(cfg);
  Node root = make_root(sys);
  if (root.box.any_empty()) return Unsat{};
  if (cfg.parallel) return solve_parallel(sys, cfg, std::move(root));
  Search s(sys, cfg);
  return s.run(std::move(root));
}

std::vector<DeltaVerdict> solve_enumerate(const ConstraintSystem& sys,
                                          const SolverConfig& cfg,
                                          int k, double separation) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(separation > 0.0))
    throw std::invalid_argument("separation must be positive");
  std::vector<std::string> blockable;
  for (const auto& v : sys.vars)
    if (v.trust == Trust::Untrusted && v.hi > v.lo) blockable.push_back(v.name);
  if (blockable.empty())
    for (const auto& v : sys.vars)
      if (v.hi > v.lo) blockable.push_back(v.name);

  std::vector<DeltaVerdict> out;
  ConstraintSystem work = sys;
  for (int round = 0; round < k; ++round) {
    DeltaVerdict v = solve(work, cfg);
    bool sat = is_delta_sat(v);
    if (round == 0 || sat) out.push_back(v);
    if (!sat) break;
    const DeltaSat& ds = std::get<DeltaSat>(out.back());
    Clause blocking;
    for (const auto& name : blockable) {
      auto it = ds.certificate_point.find(name);
      if (it == ds.certificate_point.end()) continue;
      ExprPtr var = Expr::var(name);
      blocking.disjuncts.push_back(
          {var, Rel::Le, Expr::constant(it->second - separation)});
      blocking.disjuncts.push_back(
          {var, Rel::Ge, Expr::constant(it->second + separation)});
    }
    if (blocking.disjuncts.empty()) break;
    work.clauses.push_back(std::move(blocking));
  }
  // keep only DeltaSat entries unless the very first verdict was conclusive
  if (out.size() == 1 && !is_delta_sat(out.front())) return out;
  std::vector<DeltaVerdict> sats;
  for (auto& v : out)
    if (is_delta_sat(v)) sats.push_back(std::move(v));
  return sats;
}

}  // namespace hcval
