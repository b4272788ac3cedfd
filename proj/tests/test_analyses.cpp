#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hcval/analyses.hpp"
#include "hcval/report.hpp"
#include "oracle.hpp"

using namespace hcval;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(HCVAL_SOURCE_DIR) + "/" + rel);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

HealthModel medication() {
  return parse_model(slurp("models/diabetes_medication.hcm"));
}

}  // namespace

TEST_CASE("spoofable insulin reading is found with its certificate") {
  HealthModel m = medication();
  Scenario s = parse_scenario(slurp("scenarios/s1.scn"));
  auto findings = find_spoof(m, s, SolverConfig::with_delta(0.01));
  REQUIRE(findings.size() == 1);
  const Finding& f = findings[0];
  CHECK(f.kind == FindingKind::Spoof);
  REQUIRE(f.certificate);
  CHECK(std::abs(f.certificate->at("i@t1") - 2.5) <= 0.02);
  // the spoofed value is far from the declared real reading of 1.5
  CHECK(std::abs(f.certificate->at("i@t1") - 1.5) > 0.1);
}

TEST_CASE("a rejected tampered reading produces no spoof finding") {
  HealthModel m = medication();
  Scenario s = parse_scenario(slurp("scenarios/s1_reject.scn"));
  CHECK(find_spoof(m, s, SolverConfig::with_delta(0.01)).empty());
}

TEST_CASE("spoof enumeration respects the separation distance") {
  HealthModel m = parse_model(slurp("models/diabetes_medication_diet.hcm"));
  Scenario s = parse_scenario(slurp("scenarios/s2.scn"));
  auto findings = find_spoof(m, s, SolverConfig::with_delta(0.05), 2, 0.3);
  REQUIRE(findings.size() >= 2);
  double a = findings[0].certificate->at("i@t1");
  double b = findings[1].certificate->at("i@t1");
  double da = findings[0].certificate->at("diet_in@t1");
  double db = findings[1].certificate->at("diet_in@t1");
  CHECK((std::abs(a - b) >= 0.25 || std::abs(da - db) >= 0.25));
}

TEST_CASE("legitimate-but-unsafe states are detected") {
  HealthModel m = medication();
  auto findings = check_unsafe(m, SolverConfig::with_delta(0.01));
  REQUIRE(findings.size() == 1);
  const Finding& f = findings[0];
  REQUIRE(f.certificate);
  double bg1 = f.certificate->at("bg@t1");
  CHECK((bg1 < 4.0 || bg1 > 10.0));
  // and the state really is legitimate: it satisfies the dynamics
  double lhs = f.certificate->at("bg@t") -
               (f.certificate->at("i@t1") - f.certificate->at("err"));
  CHECK(std::abs(bg1 - lhs) <= 0.02);
}

TEST_CASE("a safe region covering the whole domain has no unsafe states") {
  HealthModel m = medication();
  m.safety.clear();
  m.safety.push_back({Expr::var("bg"), Rel::Ge, Expr::constant(0.0)});
  m.safety.push_back({Expr::var("bg"), Rel::Le, Expr::constant(20.0)});
  CHECK(check_unsafe(m, SolverConfig::with_delta(0.01)).empty());
}

TEST_CASE("an empty safe region makes every legitimate state a finding") {
  HealthModel m = medication();
  m.safety.clear();
  m.safety.push_back({Expr::var("bg"), Rel::Lt, Expr::constant(0.0)});
  CHECK(check_unsafe(m, SolverConfig::with_delta(0.01)).size() == 1);
}

TEST_CASE("a model without a safety region cannot be checked for one") {
  HealthModel m = medication();
  m.safety.clear();
  CHECK_THROWS_AS(check_unsafe(m, SolverConfig::with_delta(0.01)),
                  NoSafetyRegion);
}

TEST_CASE("reachability finds the step at which a band is entered") {
  HealthModel m = medication();
  Scenario init;
  init.horizon = 1;
  init.items.push_back({Scenario::Item::Kind::Fix, "bg@t", 14.0, "14"});
  auto res = check_reachable(m, init, "normal", 3,
                             SolverConfig::with_delta(0.01));
  CHECK(res.reachable);
  CHECK(res.at_step >= 1);
  REQUIRE(res.certificate);
}

TEST_CASE("bands beyond the input authority are unreachable") {
  HealthModel m = medication();
  Scenario init;
  init.horizon = 1;
  init.items.push_back({Scenario::Item::Kind::Fix, "bg@t", 14.0, "14"});
  // insulin removes at most 5.5/step, so bg <= 3 needs three steps from 14
  auto res = check_reachable(m, init, "hypo", 1,
                             SolverConfig::with_delta(0.01));
  CHECK_FALSE(res.reachable);
  REQUIRE(res.finding);
  CHECK(res.finding->kind == FindingKind::Unreachable);
  auto res2 = check_reachable(m, init, "hypo", 3,
                              SolverConfig::with_delta(0.01));
  CHECK(res2.reachable);
}

TEST_CASE("unknown rule labels are rejected") {
  HealthModel m = medication();
  Scenario init;
  CHECK_THROWS_AS(check_reachable(m, init, "nonsense", 2,
                                  SolverConfig::with_delta(0.01)),
                  UnknownLabel);
}

TEST_CASE("a single whole-domain rule is exhaustive") {
  HealthModel m = parse_model(
      "format 1\nmodel g\nvar x : Real [0, 10]\n"
      "rule all : 0 <= x, x <= 10\n");
  CHECK(check_exhaustive(m, SolverConfig::with_delta(0.01)).empty());
}

TEST_CASE("a genuine coverage hole is a hard gap finding") {
  HealthModel m = parse_model(
      "format 1\nmodel g\nvar x : Real [0, 10]\n"
      "rule lo : 0 <= x, x <= 4\nrule hi : 6 <= x, x <= 10\n");
  auto findings = check_exhaustive(m, SolverConfig::with_delta(0.01));
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].kind == FindingKind::Gap);
  CHECK_FALSE(findings[0].warning);
  double x = findings[0].certificate->at("x");
  CHECK(x > 4.0);
  CHECK(x < 6.0);
}

TEST_CASE("half-open touching bands are exhaustive and non-overlapping") {
  HealthModel m = parse_model(
      "format 1\nmodel g\nvar x : Real [0, 10]\n"
      "rule lo : 0 <= x, x < 5\nrule hi : 5 <= x, x <= 10\n");
  auto gaps = check_exhaustive(m, SolverConfig::with_delta(0.01));
  for (const auto& f : gaps) CHECK(f.warning);
  auto overlaps = check_overlap(m, SolverConfig::with_delta(0.01));
  for (const auto& f : overlaps) CHECK(f.warning);
}

TEST_CASE("closed touching bands overlap only at the boundary: a warning") {
  HealthModel m = parse_model(
      "format 1\nmodel g\nvar x : Real [0, 10]\n"
      "rule lo : 0 <= x, x <= 5\nrule hi : 5 <= x, x <= 10\n");
  auto overlaps = check_overlap(m, SolverConfig::with_delta(0.01));
  REQUIRE_FALSE(overlaps.empty());
  for (const auto& f : overlaps) CHECK(f.warning);
}

TEST_CASE("a genuine band intersection is a hard overlap finding") {
  HealthModel m = parse_model(
      "format 1\nmodel g\nvar x : Real [0, 10]\n"
      "rule lo : 0 <= x, x <= 6\nrule hi : 4 <= x, x <= 10\n");
  auto findings = check_overlap(m, SolverConfig::with_delta(0.01));
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].kind == FindingKind::Overlap);
  CHECK_FALSE(findings[0].warning);
  CHECK(findings[0].involved == std::vector<std::string>{"lo", "hi"});
  double x = findings[0].certificate->at("x");
  CHECK(x >= 4.0);
  CHECK(x <= 6.0);
}

TEST_CASE("the error map participates in coverage analysis") {
  // bands touch, but the +-0.5 error map shrinks each by 0.5 per side,
  // opening a real gap around the boundary
  HealthModel m = parse_model(
      "format 1\nmodel g\nvar x : Real [2, 8]\nerror x 0.5\n"
      "rule lo : 2 <= x, x <= 5\nrule hi : 5 <= x, x <= 8\n");
  auto findings = check_exhaustive(m, SolverConfig::with_delta(0.01));
  bool hard = false;
  for (const auto& f : findings) hard = hard || !f.warning;
  CHECK(hard);
}

TEST_CASE("rule analyses agree with the grid oracle on random tables") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 12; ++trial) {
    oracle::TableCase tc = oracle::make_table(rng);
    CAPTURE(tc.text);
    HealthModel m = parse_model(tc.text);
    auto ores = oracle::table_oracle(m, 1e-3, 0.01);
    bool hard_gap = false, hard_overlap = false;
    for (const auto& f : check_exhaustive(m, SolverConfig::with_delta(0.01)))
      hard_gap = hard_gap || !f.warning;
    for (const auto& f : check_overlap(m, SolverConfig::with_delta(0.01)))
      hard_overlap = hard_overlap || !f.warning;
    CHECK(hard_gap == ores.gap);
    CHECK(hard_overlap == ores.overlap);
  }
}

TEST_CASE("a consistent trace passes monitoring") {
  HealthModel m = medication();
  auto trace = parse_trace(slurp("traces/clean.trace"));
  REQUIRE(trace.size() == 3);
  CHECK(check_trace(m, trace, 0.01).empty());
}

TEST_CASE("a tampered trace names the violated equation and step") {
  HealthModel m = medication();
  auto trace = parse_trace(slurp("traces/tampered.trace"));
  auto findings = check_trace(m, trace, 0.01);
  REQUIRE_FALSE(findings.empty());
  CHECK(findings[0].kind == FindingKind::TraceViolation);
  CHECK(findings[0].narrative.find("bg@t+1 = bg@t - (i@t+1 - err)") !=
        std::string::npos);
  CHECK(findings[0].narrative.find("step 1") != std::string::npos);
}

TEST_CASE("traces missing a needed variable are rejected") {
  HealthModel m = medication();
  std::vector<Point> trace{{{"bg", 14}}, {{"bg", 12}}};
  CHECK_THROWS_AS(check_trace(m, trace, 0.01), MissingVariable);
}

TEST_CASE("the report merges analyses in a stable order") {
  HealthModel m = medication();
  Scenario s = parse_scenario(slurp("scenarios/s1.scn"));
  AnalyzeOptions opt;
  ValidationReport rep =
      run_analyses(m, s, SolverConfig::with_delta(0.01), opt);
  CHECK(rep.model_name == "diabetes_medication");
  CHECK(rep.has_hard_findings());
  REQUIRE(rep.verdicts.size() >= 4);
  // findings sorted by kind
  for (std::size_t i = 1; i < rep.findings.size(); ++i)
    CHECK(static_cast<int>(rep.findings[i - 1].kind) <=
          static_cast<int>(rep.findings[i].kind));
}

TEST_CASE("the JSON report round-trips losslessly") {
  HealthModel m = medication();
  Scenario s = parse_scenario(slurp("scenarios/s1.scn"));
  ValidationReport rep =
      run_analyses(m, s, SolverConfig::with_delta(0.01), AnalyzeOptions{});
  std::string json = report_to_json(rep);
  ValidationReport back = report_from_json(json);
  CHECK(report_to_json(back) == json);
  CHECK(back.findings.size() == rep.findings.size());
  CHECK(back.model_name == rep.model_name);
}

TEST_CASE("repeated analysis runs are byte-identical") {
  HealthModel m = medication();
  Scenario s = parse_scenario(slurp("scenarios/s1.scn"));
  std::string a =
      report_to_json(run_analyses(m, s, SolverConfig::with_delta(0.01), {}));
  std::string b =
      report_to_json(run_analyses(m, s, SolverConfig::with_delta(0.01), {}));
  CHECK(a == b);
}
