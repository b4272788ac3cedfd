#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(HCVAL_CLI_BIN) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  RunResult r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string src(const std::string& rel) {
  return std::string(HCVAL_SOURCE_DIR) + "/" + rel;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = "/tmp/" + name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("check accepts a well-formed model") {
  auto r = run("check " + src("models/diabetes_medication.hcm"));
  CHECK(r.code == 0);
  CHECK(r.out.find("diabetes_medication") != std::string::npos);
}

TEST_CASE("check reports unknown identifiers with exit code 2") {
  std::string bad = write_temp(
      "broken.hcm",
      "format 1\nmodel broken\nvar x : Real [0, 1]\ndynamics y@t+1 = x\n");
  auto r = run("check " + bad);
  CHECK(r.code == 2);
  CHECK(r.out.find("y") != std::string::npos);
}

TEST_CASE("check rejects an empty file at line 1 column 1") {
  std::string empty = write_temp("empty.hcm", "");
  auto r = run("check " + empty);
  CHECK(r.code == 2);
  CHECK(r.out.find("1:1") != std::string::npos);
}

TEST_CASE("missing files exit with the input-error code") {
  CHECK(run("check /nonexistent/nope.hcm").code == 2);
}

TEST_CASE("emit reproduces the golden scripts") {
  auto r1 = run("emit " + src("models/diabetes_medication.hcm") +
                " --scenario " + src("scenarios/s1.scn"));
  CHECK(r1.code == 0);
  CHECK(r1.out == slurp(src("tests/golden/listing1.smt2")));

  auto r3 = run("emit " + src("models/diabetes_medication_diet.hcm") +
                " --scenario " + src("scenarios/s2.scn"));
  CHECK(r3.out == slurp(src("tests/golden/listing3.smt2")));

  auto r5 = run("emit " + src("models/diabetes_medication_diet_exercise.hcm") +
                " --scenario " + src("scenarios/s3.scn"));
  CHECK(r5.out == slurp(src("tests/golden/listing5.smt2")));
}

TEST_CASE("emit writes to a file with --out") {
  std::string out = "/tmp/hcval_emit_test.smt2";
  std::remove(out.c_str());
  auto r = run("emit " + src("models/diabetes_medication.hcm") +
               " --scenario " + src("scenarios/s1.scn") + " -o " + out);
  CHECK(r.code == 0);
  CHECK(slurp(out) == slurp(src("tests/golden/listing1.smt2")));
}

TEST_CASE("solve prints a result block matching the first scenario") {
  auto r = run("solve " + src("models/diabetes_medication.hcm") +
               " --scenario " + src("scenarios/s1.scn"));
  CHECK(r.code == 0);
  CHECK(r.out == slurp(src("tests/golden/listing2.txt")));
}

TEST_CASE("solve reports unsat for the rejected scenario") {
  auto r = run("solve " + src("models/diabetes_medication.hcm") +
               " --scenario " + src("scenarios/s1_reject.scn"));
  CHECK(r.code == 0);
  CHECK(r.out == "unsat\n");
}

TEST_CASE("solve honours a delta override from the command line") {
  auto r = run("solve " + src("models/diabetes_medication.hcm") +
               " --scenario " + src("scenarios/s1.scn") + " --delta 0.5");
  CHECK(r.out.find("delta = 0.5") != std::string::npos);
}

TEST_CASE("analyze exits 3 on findings and 0 when clean") {
  auto spoof = run("analyze " + src("models/diabetes_medication.hcm") +
                   " --scenario " + src("scenarios/s1.scn") + " --only spoof");
  CHECK(spoof.code == 3);
  CHECK(spoof.out.find("[spoof]") != std::string::npos);
  CHECK(spoof.out.find("2.5") != std::string::npos);

  auto clean = run("analyze " + src("models/diabetes_medication.hcm") +
                   " --scenario " + src("scenarios/s1_reject.scn") +
                   " --only spoof");
  CHECK(clean.code == 0);
}

TEST_CASE("overlap analysis of a single-rule model is clean") {
  std::string single = write_temp(
      "single.hcm",
      "format 1\nmodel single\nvar x : Real [0, 10]\nrule all : 0 <= x\n");
  auto r = run("analyze " + single + " --only overlap");
  CHECK(r.code == 0);
}

TEST_CASE("analyze emits machine-readable reports") {
  auto r = run("analyze " + src("models/glucose_rules.hcm") +
               " --only exhaustive --format json");
  CHECK(r.code == 3);
  CHECK(r.out.find("\"kind\": \"gap\"") != std::string::npos);
  CHECK(r.out.find("\"model\": \"glucose_rules\"") != std::string::npos);
}

TEST_CASE("analyze runs are deterministic byte for byte") {
  std::string args = "analyze " + src("models/diabetes_medication.hcm") +
                     " --scenario " + src("scenarios/s1.scn") +
                     " --format json";
  auto a = run(args);
  auto b = run(args);
  CHECK(a.out == b.out);
}

TEST_CASE("monitor distinguishes clean from tampered traces") {
  auto clean = run("monitor " + src("models/diabetes_medication.hcm") + " " +
                   src("traces/clean.trace"));
  CHECK(clean.code == 0);
  auto bad = run("monitor " + src("models/diabetes_medication.hcm") + " " +
                 src("traces/tampered.trace"));
  CHECK(bad.code == 3);
  CHECK(bad.out.find("violated") != std::string::npos);
}

TEST_CASE("reachability from the command line") {
  auto r = run("analyze " + src("models/diabetes_medication.hcm") +
               " --scenario " + src("scenarios/s1.scn") +
               " --only reachable --target hypo --horizon 1");
  CHECK(r.code == 3);
  CHECK(r.out.find("[unreachable]") != std::string::npos);
}
