#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "spacer/check/check.hpp"
#include "spacer/engine/engine.hpp"
#include "spacer/textfmt/textfmt.hpp"

using namespace spacer;

namespace {

constexpr int kOk = 0, kViolation = 1, kUsage = 2, kUnsafe = 10, kUnknown = 20;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void report(const std::string& file, const textfmt::ParseError& e) {
  std::cerr << file << ":" << e.span().line << ":" << e.span().column << ": " << textfmt::to_string(e.kind())
            << " error: " << e.detail() << "\n";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Usage("cannot write " + path);
  out << text;
}

struct CheckArgs {
  std::string file;
  std::string strategy = "spacer";
  std::string granularity = "conjunct";
  uint32_t max_bound = 64;
  std::string solver = "internal";
  std::string emit_proof, emit_cex, trace;
  double limit_seconds = 0;
  size_t limit_polyhedra = 50000;
  bool no_templates = false;
};

int run_check(const CheckArgs& a) {
  std::string stage = a.file;
  ir::Program p;
  try {
    p = textfmt::parse_program(textfmt::read_file(a.file));
  } catch (const textfmt::ParseError& e) {
    report(a.file, e);
    return kUsage;
  }
  engine::EngineConfig cfg;
  cfg.strategy = a.strategy == "pba" ? engine::Strategy::Pba
                 : a.strategy == "concrete" ? engine::Strategy::Concrete
                                            : engine::Strategy::Spacer;
  cfg.granularity = a.granularity == "statevar" ? instrument::Granularity::StateVar : instrument::Granularity::Conjunct;
  cfg.max_bound = a.max_bound;
  cfg.limit_polyhedra = a.limit_polyhedra;
  cfg.templates = !a.no_templates;
  if (a.limit_seconds > 0) cfg.limit_seconds = a.limit_seconds;
  std::unique_ptr<arith::Backend> backend;
  if (a.solver.rfind("smtlib:", 0) == 0) {
    backend = arith::smtlib_backend(a.solver.substr(7));
    cfg.arith.backend = backend.get();
  } else if (a.solver != "internal") {
    throw Usage("unknown solver " + a.solver);
  }
  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace);
    if (!trace) throw Usage("cannot write " + a.trace);
    cfg.trace = &trace;
  }

  auto v = engine::run(p, cfg);
  std::cout << engine::to_string(v.outcome) << "\n";
  std::cout << "iterations " << v.history.size() << "\n";
  std::cout << "bound " << v.bound << "\n";
  std::cout << "abstraction " << v.sigma_hat << "/" << v.sigma_all;
  if (v.sigma_all) std::cout << " (" << (100 * v.sigma_hat / v.sigma_all) << "%)";
  std::cout << "\n";
  std::cout << "seconds " << v.seconds << "\n";
  std::cout << "peak-polyhedra " << v.peak_polyhedra << "\n";
  if (v.outcome == engine::Outcome::Unknown) std::cout << "reason " << v.reason << "\n";

  if (v.outcome == engine::Outcome::Safe && !a.emit_proof.empty()) write_file(a.emit_proof, textfmt::print_proof(v.proof, p));
  if (v.outcome == engine::Outcome::Unsafe && !a.emit_cex.empty()) write_file(a.emit_cex, textfmt::print_cex(v.cex, p));
  switch (v.outcome) {
    case engine::Outcome::Safe: return kOk;
    case engine::Outcome::Unsafe: return kUnsafe;
    case engine::Outcome::Unknown: return kUnknown;
  }
  return kUnknown;
}

template <typename Load, typename Check>
int run_verify(const std::string& file, const std::string& artifact, Load load, Check chk) {
  ir::Program p;
  std::string current = file;
  try {
    p = textfmt::parse_program(textfmt::read_file(file));
    current = artifact;
    auto obj = load(textfmt::read_file(artifact), p);
    check::Report r = chk(p, obj);
    std::cout << r.describe(p);
    return r.ok ? kOk : kViolation;
  } catch (const textfmt::ParseError& e) {
    report(current, e);
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety verification by abstraction of bounded under-approximations"};
  app.require_subcommand(1);

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check", "decide safety of a program");
  check_cmd->add_option("FILE", ca.file)->required();
  check_cmd->add_option("--strategy", ca.strategy)->check(CLI::IsMember({"spacer", "pba", "concrete"}));
  check_cmd->add_option("--granularity", ca.granularity)->check(CLI::IsMember({"conjunct", "statevar"}));
  check_cmd->add_option("--max-bound", ca.max_bound);
  check_cmd->add_option("--solver", ca.solver, "internal or smtlib:CMD");
  check_cmd->add_option("--emit-proof", ca.emit_proof);
  check_cmd->add_option("--emit-cex", ca.emit_cex);
  check_cmd->add_option("--trace", ca.trace);
  check_cmd->add_option("--limit-seconds", ca.limit_seconds);
  check_cmd->add_option("--limit-polyhedra", ca.limit_polyhedra);
  check_cmd->add_flag("--no-templates", ca.no_templates, "only program-text terms as bound candidates");

  std::string ifile;
  auto* inst_cmd = app.add_subcommand("instrument", "print the loop-counter instrumented program");
  inst_cmd->add_option("FILE", ifile)->required();

  std::string vfile, vart;
  auto* vp_cmd = app.add_subcommand("verify-proof", "check a safety proof");
  vp_cmd->add_option("FILE", vfile)->required();
  vp_cmd->add_option("PROOF", vart)->required();
  auto* vc_cmd = app.add_subcommand("verify-cex", "check a counterexample");
  vc_cmd->add_option("FILE", vfile)->required();
  vc_cmd->add_option("CEX", vart)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*check_cmd) return run_check(ca);
    if (*inst_cmd) {
      try {
        auto p = textfmt::parse_program(textfmt::read_file(ifile));
        auto bp = instrument::instrument(p);
        std::cout << "; wto: " << bp.wto.render(p) << "\n" << textfmt::print_program(bp.base);
        return kOk;
      } catch (const textfmt::ParseError& e) {
        report(ifile, e);
        return kUsage;
      }
    }
    if (*vp_cmd)
      return run_verify(vfile, vart, textfmt::parse_proof,
                        [](const ir::Program& p, const ir::Proof& pf) { return check::check_proof(p, pf); });
    if (*vc_cmd)
      return run_verify(vfile, vart, textfmt::parse_cex,
                        [](const ir::Program& p, const ir::Counterexample& c) { return check::check_cex(p, c); });
  } catch (const Usage& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
