#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(SPACER_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "spacer_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Cli, SafeProgramExitsZeroAndProofVerifies) {
  auto pf = scratch("fig2.proof");
  auto r = run("check corpus/fig2.prog --emit-proof " + pf.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("SAFE\n", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("abstraction "), std::string::npos);
  auto v = run("verify-proof corpus/fig2.prog " + pf.string());
  EXPECT_EQ(v.code, 0) << v.out;
}

TEST(Cli, TamperedProofFailsVerification) {
  auto pf = scratch("fig2-tampered.proof");
  ASSERT_EQ(run("check corpus/fig2.prog --emit-proof " + pf.string()).code, 0);
  std::string text = slurp(pf);
  auto at = text.find("(location er");
  ASSERT_NE(at, std::string::npos);
  auto end = text.find(')', at);
  text.erase(at, end - at + 1);
  spit(pf, text);
  auto v = run("verify-proof corpus/fig2.prog " + pf.string());
  EXPECT_EQ(v.code, 1) << v.out;
  EXPECT_NE(v.out.find("safe"), std::string::npos) << v.out;
}

TEST(Cli, UnsafeProgramExitsTenAndCexVerifies) {
  auto cx = scratch("unsafe.cex");
  auto r = run("check corpus/fig2-unsafe.prog --emit-cex " + cx.string());
  EXPECT_EQ(r.code, 10) << r.out;
  EXPECT_EQ(r.out.rfind("UNSAFE\n", 0), 0u);
  EXPECT_EQ(run("verify-cex corpus/fig2-unsafe.prog " + cx.string()).code, 0);
  // the same trace is not an execution of the safe program
  EXPECT_EQ(run("verify-cex corpus/fig2.prog " + cx.string()).code, 1);
}

TEST(Cli, BoundLimitExitsTwenty) {
  auto r = run("check corpus/fig2.prog --max-bound 0 --no-templates");
  EXPECT_EQ(r.code, 20) << r.out;
  EXPECT_NE(r.out.find("reason bound limit reached"), std::string::npos) << r.out;
}

TEST(Cli, ParseErrorsReportPosition) {
  auto bad = scratch("bad.prog");
  spit(bad, "(program\n  (vars (x rat))\n  (locations a e)\n  (init a)\n  (error e)\n  (edge a e (<= x y)))\n");
  auto r = run("check " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find(bad.string() + ":6:19: "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(" error: "), std::string::npos) << r.out;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("check").code, 2);
  EXPECT_EQ(run("check corpus/fig2.prog --strategy bogus").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("check does/not/exist.prog").code, 2);
}

TEST(Cli, TraceIsTabSeparated) {
  auto tr = scratch("fig2.tsv");
  ASSERT_EQ(run("check corpus/fig2.prog --no-templates --trace " + tr.string()).code, 0);
  std::istringstream in(slurp(tr));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration\tresult\tsigma_hat\tsigma_all\tbound\tproof_lemmas\tinvariants\tpolyhedra");
  size_t rows = 0, last_iter = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    size_t iter, sh, sa, bound, lemmas, invs, polys;
    std::string result;
    ASSERT_TRUE(row >> iter >> result >> sh >> sa >> bound >> lemmas >> invs >> polys) << line;
    EXPECT_EQ(iter, last_iter + 1);
    last_iter = iter;
    EXPECT_TRUE(result == "safe" || result == "spurious" || result == "unsafe" || result == "unknown") << result;
    EXPECT_LE(sh, sa);
    ++rows;
  }
  EXPECT_GT(rows, 1u);
}

TEST(Cli, InstrumentPrintsOrderAndParsableProgram) {
  auto r = run("instrument corpus/nested.prog");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("; wto: l0 (l1 (l2) l3) le\n", 0), 0u) << r.out;
  auto out = scratch("nested-inst.prog");
  spit(out, r.out);
  EXPECT_EQ(run("check " + out.string() + " --max-bound 2").code, 0);
}

TEST(Cli, StrategiesSelectable) {
  for (const char* s : {"spacer", "pba", "concrete"})
    EXPECT_EQ(run(std::string("check corpus/fig2-unsafe.prog --strategy ") + s).code, 10) << s;
  EXPECT_EQ(run("check corpus/fig2.prog --granularity statevar").code, 0);
}
