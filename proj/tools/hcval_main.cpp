#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hcval/report.hpp"
#include "hcval/smtlib.hpp"

namespace {

constexpr int kExitClean = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitFindings = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + out_path);
  out << content;
}

hcval::SolverConfig make_config(const hcval::Scenario* sc, double delta,
                                double precision, std::int64_t budget,
                                bool parallel) {
  hcval::SolverConfig cfg;
  cfg.delta = delta > 0 ? delta : (sc && sc->delta ? *sc->delta : 0.01);
  cfg.precision = precision > 0
                      ? precision
                      : (sc && sc->precision ? *sc->precision : cfg.delta / 10);
  cfg.budget = budget;
  cfg.parallel = parallel;
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"validation toolkit for multi-level health-condition models"};
  app.require_subcommand(1);

  std::string model_path, scenario_path, trace_path, out_path, target;
  std::string format = "text";
  std::vector<std::string> only;
  double delta = 0.0, precision = 0.0, separation = 0.0;
  std::int64_t budget = 1'000'000;
  int horizon = -1, reach_horizon = 3, k = 1;
  bool parallel = false;

  auto add_solver_flags = [&](CLI::App* cmd) {
    cmd->add_option("--delta", delta, "perturbation bound (default 0.01)");
    cmd->add_option("--precision", precision, "minimum box width (default delta/10)");
    cmd->add_option("--budget", budget, "node expansion budget");
    cmd->add_flag("--parallel", parallel, "parallel subtree exploration");
  };

  auto* check = app.add_subcommand("check", "parse and validate a model file");
  check->add_option("model", model_path)->required();

  auto* analyze = app.add_subcommand("analyze", "run the validation battery");
  analyze->add_option("model", model_path)->required();
  analyze->add_option("--scenario", scenario_path, "scenario (.scn) file");
  analyze->add_option("--only", only,
                      "restrict to analyses: spoof unsafe reachable exhaustive overlap");
  analyze->add_option("--target", target, "rule label for reachability");
  analyze->add_option("--horizon", reach_horizon, "reachability horizon");
  analyze->add_option("--k", k, "max spoof witnesses to enumerate");
  analyze->add_option("--separation", separation,
                      "spoof witness separation (default 10*delta)");
  analyze->add_option("--format", format, "text | json");
  analyze->add_option("--out", out_path, "write report to file");
  add_solver_flags(analyze);

  auto* emit_cmd = app.add_subcommand("emit", "emit the lowered system as SMT-LIB 2");
  emit_cmd->add_option("model", model_path)->required();
  emit_cmd->add_option("--scenario", scenario_path)->required();
  emit_cmd->add_option("-o,--out", out_path, "output .smt2 path (default stdout)");

  auto* monitor = app.add_subcommand("monitor", "check a trace against the model");
  monitor->add_option("model", model_path)->required();
  monitor->add_option("trace", trace_path)->required();
  monitor->add_option("--delta", delta, "residual tolerance (default 0.01)");

  auto* solve_cmd = app.add_subcommand("solve", "solve the lowered system directly");
  solve_cmd->add_option("model", model_path)->required();
  solve_cmd->add_option("--scenario", scenario_path)->required();
  solve_cmd->add_option("--horizon", horizon, "override scenario horizon");
  solve_cmd->add_option("--solver", target,
                        "external delta-solver command (cross-check)");
  add_solver_flags(solve_cmd);

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) {
    hcval::HealthModel m = hcval::parse_model(read_file(model_path));
    std::cout << "ok: model '" << m.name << "' with " << m.params.size()
              << " variables, " << m.dynamics.size() << " dynamics equations, "
              << m.rules.rules.size() << " rules\n";
    return kExitClean;
  }

  if (analyze->parsed()) {
    hcval::HealthModel m = hcval::parse_model(read_file(model_path));
    std::optional<hcval::Scenario> sc;
    if (!scenario_path.empty())
      sc = hcval::parse_scenario(read_file(scenario_path));
    if (horizon > 0 && sc) sc->horizon = horizon;
    hcval::SolverConfig cfg =
        make_config(sc ? &*sc : nullptr, delta, precision, budget, parallel);
    hcval::AnalyzeOptions opt;
    if (!only.empty()) {
      opt.spoof = opt.unsafe = opt.reachable = opt.exhaustive = opt.overlap = false;
      for (const auto& o : only) {
        if (o == "spoof") opt.spoof = true;
        else if (o == "unsafe") opt.unsafe = true;
        else if (o == "reachable") opt.reachable = true;
        else if (o == "exhaustive") opt.exhaustive = true;
        else if (o == "overlap") opt.overlap = true;
        else throw std::runtime_error("unknown analysis: " + o);
      }
    } else {
      opt.reachable = !target.empty();
    }
    opt.reach_target = target;
    opt.reach_horizon = reach_horizon;
    opt.spoof_k = k;
    opt.separation = separation;
    hcval::ValidationReport rep = hcval::run_analyses(m, sc, cfg, opt);
    write_output(out_path, format == "json" ? hcval::report_to_json(rep)
                                            : hcval::report_to_text(rep));
    return rep.has_hard_findings() ? kExitFindings : kExitClean;
  }

  if (emit_cmd->parsed()) {
    hcval::HealthModel m = hcval::parse_model(read_file(model_path));
    hcval::Scenario sc = hcval::parse_scenario(read_file(scenario_path));
    write_output(out_path, hcval::emit(hcval::lower(m, sc)));
    return kExitClean;
  }

  if (monitor->parsed()) {
    hcval::HealthModel m = hcval::parse_model(read_file(model_path));
    auto trace = hcval::parse_trace(read_file(trace_path));
    if (trace.empty()) {
      std::cout << "0 steps, nothing to check\n";
      return kExitClean;
    }
    auto findings =
        hcval::check_trace(m, trace, delta > 0 ? delta : 0.01);
    for (const auto& f : findings) std::cout << f.narrative << "\n";
    std::cout << trace.size() << " steps, " << findings.size()
              << " violations\n";
    return findings.empty() ? kExitClean : kExitFindings;
  }

  if (solve_cmd->parsed()) {
    hcval::HealthModel m = hcval::parse_model(read_file(model_path));
    hcval::Scenario sc = hcval::parse_scenario(read_file(scenario_path));
    if (horizon > 0) sc.horizon = horizon;
    hcval::SolverConfig cfg = make_config(&sc, delta, precision, budget, parallel);
    hcval::ConstraintSystem sys = hcval::lower(m, sc);
    hcval::DeltaVerdict v = hcval::solve(sys, cfg);
    if (hcval::is_delta_sat(v)) {
      const auto& ds = std::get<hcval::DeltaSat>(v);
      hcval::ExternalResult r;
      r.delta_sat = true;
      r.delta = ds.delta;
      for (const auto& [name, iv] : ds.witness) r.ranges.emplace_back(name, iv);
      std::cout << hcval::print_external(r);
    } else if (hcval::is_unsat(v)) {
      std::cout << "unsat\n";
    } else {
      const auto& u = std::get<hcval::Unknown>(v);
      std::cout << "unknown (budget: expanded " << u.expanded
                << " nodes, frontier " << u.frontier_size << ")\n";
    }
    // optional cross-check against an external delta-solver
    std::string solver_cmd = target;
    if (solver_cmd.empty())
      if (const char* env = std::getenv("HCVAL_EXTERNAL_SOLVER"))
        solver_cmd = env;
    if (!solver_cmd.empty()) {
      std::string tmp = "/tmp/hcval_cross_check.smt2";
      write_output(tmp, hcval::emit(sys));
      if (auto ext = hcval::run_external_solver(solver_cmd, tmp)) {
        bool agree = ext->delta_sat == hcval::is_delta_sat(v);
        std::cout << "external solver: "
                  << (ext->delta_sat ? "delta-sat" : "unsat")
                  << (agree ? " (agrees)" : " (DISAGREES)") << "\n";
      } else {
        std::cout << "external solver unavailable\n";
      }
    }
    return kExitClean;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hcval::SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const hcval::UnknownIdentifier& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const hcval::DuplicateDeclaration& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const hcval::InconsistentScenario& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::string msg = e.what();
    return msg.rfind("cannot read", 0) == 0 ? kExitInput : kExitInternal;
  }
}
