#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "invsyn/ir.hpp"
#include "invsyn/solve.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace invsyn;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sampling::Rat64 parse_rat(const std::string& s) {
  size_t slash = s.find('/');
  sampling::Rat64 r;
  if (slash == std::string::npos) {
    // accept decimals like 0.9 with a power-of-ten denominator
    size_t dot = s.find('.');
    if (dot == std::string::npos) {
      r.num = std::stoll(s);
      r.den = 1;
    } else {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      r.num = std::stoll(digits);
      r.den = 1;
      for (size_t i = dot + 1; i < s.size(); ++i) r.den *= 10;
    }
  } else {
    r.num = std::stoll(s.substr(0, slash));
    r.den = std::stoll(s.substr(slash + 1));
  }
  if (r.den <= 0 || r.num <= 0) throw CLI::ValidationError("rational must be positive");
  return r;
}

std::string default_solver_path(const char* argv0) {
  if (const char* env = std::getenv("INVSYN_SOLVER")) return env;
  fs::path self(argv0);
  fs::path candidate = self.parent_path() / "liasmt";
  if (fs::exists(candidate)) return candidate.string();
  return "liasmt"; // hope for PATH
}

struct Options {
  std::string input;
  std::string solver_path;
  std::vector<std::string> solver_args;
  bool solver_reuse = false;
  std::string mirror_dir;
  std::string trace_path;
  std::string telemetry_path;
  bool json_out = false;
  std::string eps0 = "1/2", delta0 = "9/10";
  std::string k_list = "1,2,3,5";
  solve::SolveConfig cfg;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("input", opt.input, "input .chc file")->required();
  cmd->add_option("--solver", opt.solver_path, "SMT solver executable (SMT-LIB 2 on stdio)");
  cmd->add_option("--solver-arg", opt.solver_args, "extra solver argument (repeatable)");
  cmd->add_flag("--solver-reuse", opt.solver_reuse,
                "keep one solver process, (reset) between queries");
  cmd->add_option("--mirror-dir", opt.mirror_dir, "mirror emitted SMT scripts to this directory");
  cmd->add_flag("--json", opt.json_out, "machine-readable JSON result record");
  cmd->add_option("--seed", opt.cfg.seed, "RNG seed");
  cmd->add_option("--d", opt.cfg.d, "invariant cube count");
  cmd->add_option("--c", opt.cfg.c, "predicates per cube");
  cmd->add_option("--eps0", opt.eps0, "initial epsilon (rational, default 1/2)");
  cmd->add_option("--delta0", opt.delta0, "net confidence delta (rational, default 9/10)");
  cmd->add_option("--t-refine", opt.cfg.t_refine, "refinement period");
  cmd->add_option("--ds-t-max", opt.cfg.ds_t_max, "outer loop iteration cap");
  cmd->add_option("--t-max", opt.cfg.anneal.t_max, "SA iteration cap per worker");
  cmd->add_option("--t-check", opt.cfg.anneal.t_check, "SA stop-signal polling period");
  cmd->add_option("--a0", opt.cfg.anneal.a0, "target initial acceptance ratio");
  cmd->add_option("--eps-T", opt.cfg.anneal.eps_T, "temperature fixed-point tolerance");
  cmd->add_option("--t-rw", opt.cfg.anneal.t_rw, "random-walk length for T0");
  cmd->add_option("--l0", opt.cfg.anneal.l0, "initial-invariant trials");
  cmd->add_option("--alpha", opt.cfg.anneal.alpha, "normalizer alpha");
  cmd->add_option("--beta", opt.cfg.anneal.beta, "normalizer beta");
  cmd->add_option("--workers", opt.cfg.anneal.workers, "SA worker count");
  cmd->add_option("--k-list", opt.k_list, "comma-separated k per worker");
  cmd->add_flag("--serial-workers", opt.cfg.serial_workers, "run SA workers sequentially");
  cmd->add_option("--cex-max", opt.cfg.verify.cex_max, "counterexamples per clause");
  cmd->add_option("--d0", opt.cfg.verify.d0, "L1 dispersion radius");
  cmd->add_option("--k0", opt.cfg.verify.k0, "iterated implication depth");
  cmd->add_option("--solver-timeout-ms", opt.cfg.verify.solver_timeout_ms, "solver timeout");
  cmd->add_option("--oracle-limit", opt.cfg.verify.oracle_limit, "brute-force box cap");
  cmd->add_option("--diag-C", opt.cfg.diag_C, "diagnostic bound constant C");
  cmd->add_option("--trace", opt.trace_path, "write per-iteration JSON lines here");
  cmd->add_option("--telemetry", opt.telemetry_path, "write SA telemetry JSON lines here");
  cmd->set_config("--config")->configurable(false);
}

void finalize(Options& opt, const char* argv0) {
  opt.cfg.eps0 = parse_rat(opt.eps0);
  opt.cfg.delta0 = parse_rat(opt.delta0);
  opt.cfg.anneal.k_list.clear();
  std::stringstream ss(opt.k_list);
  std::string part;
  while (std::getline(ss, part, ',')) opt.cfg.anneal.k_list.push_back(std::stoll(part));
  opt.cfg.anneal.workers = static_cast<int>(opt.cfg.anneal.k_list.size());
  if (opt.solver_path.empty()) opt.solver_path = default_solver_path(argv0);
  opt.cfg.verify.mirror_dir = opt.mirror_dir;
}

smt::SmtSolver make_solver(const Options& opt) {
  smt::SolverConfig scfg;
  scfg.path = opt.solver_path;
  scfg.args = opt.solver_args;
  scfg.fresh_per_query = !opt.solver_reuse;
  scfg.timeout_ms = opt.cfg.verify.solver_timeout_ms;
  scfg.mirror_dir = opt.mirror_dir;
  return smt::SmtSolver(scfg);
}

json config_echo(const Options& opt) {
  return json{{"seed", opt.cfg.seed},
              {"d", opt.cfg.d},
              {"c", opt.cfg.c},
              {"eps0", opt.eps0},
              {"delta0", opt.delta0},
              {"t_refine", opt.cfg.t_refine},
              {"ds_t_max", opt.cfg.ds_t_max},
              {"t_max", opt.cfg.anneal.t_max},
              {"t_check", opt.cfg.anneal.t_check},
              {"a0", opt.cfg.anneal.a0},
              {"t_rw", opt.cfg.anneal.t_rw},
              {"l0", opt.cfg.anneal.l0},
              {"alpha", opt.cfg.anneal.alpha},
              {"beta", opt.cfg.anneal.beta},
              {"workers", opt.cfg.anneal.workers},
              {"k_list", opt.cfg.anneal.k_list},
              {"cex_max", opt.cfg.verify.cex_max},
              {"d0", opt.cfg.verify.d0},
              {"k0", opt.cfg.verify.k0},
              {"solver", opt.solver_path}};
}

json cex_json(const smt::CexDataset& cex) {
  json j;
  j["plus"] = json::array();
  for (const StateVector& s : cex.plus_cex) j["plus"].push_back(s);
  j["minus"] = json::array();
  for (const StateVector& s : cex.minus_cex) j["minus"].push_back(s);
  j["implications"] = json::array();
  for (const StatePair& p : cex.ice_cex) j["implications"].push_back({p.first, p.second});
  return j;
}

struct LoadedSystem {
  ir::ChcDocument doc;
  ChcSystem sys;
  std::vector<std::string> warnings;
};

LoadedSystem load_system(const std::string& path) {
  LoadedSystem out;
  out.doc = ir::parse_chc(read_file(path), &out.warnings);
  ir::Lowered low = ir::lower_document(out.doc);
  out.sys = low.sys;
  out.warnings.insert(out.warnings.end(), low.warnings.begin(), low.warnings.end());
  return out;
}

int exit_code(solve::Status s) {
  switch (s) {
    case solve::Status::Invariant: return 0;
    case solve::Status::SaFail:
    case solve::Status::Exhausted: return 2;
    case solve::Status::SolverError: return 3;
  }
  return 3;
}

int run_solve(Options& opt) {
  LoadedSystem loaded = load_system(opt.input);
  for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << "\n";

  std::ofstream telemetry_file;
  std::mutex telemetry_mutex;
  sa::TelemetrySink sink;
  const sa::TelemetrySink* sink_ptr = nullptr;
  if (!opt.telemetry_path.empty()) {
    telemetry_file.open(opt.telemetry_path);
    sink = [&](const sa::TelemetryRecord& r) {
      std::lock_guard<std::mutex> lock(telemetry_mutex);
      telemetry_file << json{{"worker", r.worker},
                             {"t", r.t},
                             {"temperature", r.temperature},
                             {"cost", r.cost},
                             {"accept_rate", r.accept_rate_window}}
                     << "\n";
    };
    sink_ptr = &sink;
  }

  if (opt.cfg.c > 0 && std::pow(opt.cfg.c, opt.cfg.d) > kDefaultDnfCap)
    std::cerr << "warning: c^d exceeds the negation cube cap (" << kDefaultDnfCap
              << "); cost evaluation will fail\n";

  smt::SmtSolver solver = make_solver(opt);
  solve::SolveOutcome outcome = solve::solve(loaded.sys, opt.cfg, solver, sink_ptr);

  if (!opt.trace_path.empty()) {
    std::ofstream trace(opt.trace_path);
    for (const solve::IterationRecord& r : outcome.trace)
      trace << json{{"t", r.t},
                    {"eps", std::to_string(r.eps.num) + "/" + std::to_string(r.eps.den)},
                    {"plus", r.plus},
                    {"minus", r.minus},
                    {"implications", r.implications},
                    {"cex_plus", r.cex_plus},
                    {"cex_ice", r.cex_ice},
                    {"cex_minus", r.cex_minus},
                    {"kappa_inf", r.kappa_inf},
                    {"lambda", r.lambda_arrow},
                    {"sa_steps", r.sa_steps},
                    {"sa_worker", r.sa_worker},
                    {"seconds", r.seconds}}
            << "\n";
  }

  if (opt.json_out) {
    json j;
    j["status"] = solve::status_name(outcome.status);
    j["iterations"] = outcome.iterations;
    j["seed"] = opt.cfg.seed;
    j["config"] = config_echo(opt);
    if (outcome.invariant) {
      j["invariant"] = {
          {"dnf_text",
           ir::serialize_invariant(*outcome.invariant, loaded.doc.variables, ir::InvFormat::DnfText)},
          {"smtlib", ir::serialize_invariant(*outcome.invariant, loaded.doc.variables,
                                             ir::InvFormat::SmtLibTerm)}};
    } else {
      j["invariant"] = nullptr;
    }
    if (!outcome.error.empty()) j["error"] = outcome.error;
    json jt = json::array();
    for (const solve::IterationRecord& r : outcome.trace)
      jt.push_back({{"t", r.t},
                    {"eps", std::to_string(r.eps.num) + "/" + std::to_string(r.eps.den)},
                    {"plus", r.plus},
                    {"minus", r.minus},
                    {"implications", r.implications},
                    {"cex_plus", r.cex_plus},
                    {"cex_ice", r.cex_ice},
                    {"cex_minus", r.cex_minus},
                    {"sa_steps", r.sa_steps},
                    {"seconds", r.seconds}});
    j["trace"] = jt;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "status: " << solve::status_name(outcome.status) << "\n";
    if (outcome.invariant) {
      std::cout << "invariant (dnf): "
                << ir::serialize_invariant(*outcome.invariant, loaded.doc.variables,
                                           ir::InvFormat::DnfText)
                << "\n";
      std::cout << "invariant (smtlib): "
                << ir::serialize_invariant(*outcome.invariant, loaded.doc.variables,
                                           ir::InvFormat::SmtLibTerm)
                << "\n";
    }
    if (!outcome.error.empty()) std::cout << "error: " << outcome.error << "\n";
    std::cout << solve::diagnostics_report(outcome, loaded.sys, opt.cfg);
  }
  return exit_code(outcome.status);
}

DnfFormula load_invariant(const std::string& path, const LoadedSystem& loaded) {
  ir::SurfaceFormula f = ir::parse_formula_text(read_file(path), loaded.doc.variables);
  return ir::to_dnf(f, loaded.sys.space.dim);
}

int run_verify(Options& opt, const std::string& inv_path, bool oracle) {
  LoadedSystem loaded = load_system(opt.input);
  DnfFormula inv = load_invariant(inv_path, loaded);
  bool correct;
  smt::CexDataset cex;
  if (oracle) {
    std::tie(correct, cex) = smt::brute_force_verify(inv, loaded.sys, opt.cfg.verify);
  } else {
    smt::SmtSolver solver = make_solver(opt);
    Rng rng(opt.cfg.seed);
    std::tie(correct, cex) = smt::verifier(inv, loaded.sys, opt.cfg.verify, solver, rng);
  }
  if (opt.json_out) {
    std::cout << json{{"correct", correct}, {"cex", cex_json(cex)}}.dump(2) << "\n";
  } else {
    std::cout << (correct ? "correct" : "incorrect") << "\n";
    if (!correct) std::cout << cex_json(cex).dump(2) << "\n";
  }
  return correct ? 0 : 2;
}

int run_sample_net(Options& opt, const std::string& which) {
  LoadedSystem loaded = load_system(opt.input);
  const ChcSystem& sys = loaded.sys;
  DnfFormula target;
  if (which == "pre")
    target = sys.pre;
  else if (which == "guard")
    target = sys.guard;
  else if (which == "not-post")
    target = negate_dnf(sys.post, sys.space.dim);
  else
    throw CLI::ValidationError("--formula must be pre, guard, or not-post");
  sampling::NetParams p{opt.cfg.eps0, opt.cfg.delta0, sampling::ellipsoid_vc(sys.space.dim)};
  Rng rng(opt.cfg.seed);
  std::vector<std::string> warnings;
  std::set<StateVector> net = sampling::randomized_epsilon_net(target, p, sys.space, rng, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  for (const StateVector& s : net) {
    for (size_t i = 0; i < s.size(); ++i) std::cout << (i ? " " : "") << s[i];
    std::cout << "\n";
  }
  return 0;
}

int run_parse(Options& opt) {
  std::vector<std::string> warnings;
  ir::ChcDocument doc = ir::parse_chc(read_file(opt.input), &warnings);
  ir::Lowered low = ir::lower_document(doc);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  for (const std::string& w : low.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << ir::print_chc(doc);
  return 0;
}

int run_bench(Options& opt) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(opt.input))
    if (entry.path().extension() == ".chc") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::cout << "benchmark,status,iterations,seconds,seed\n";
  int worst = 0;
  for (const fs::path& f : files) {
    auto started = std::chrono::steady_clock::now();
    std::string status;
    long iterations = 0;
    try {
      Options local = opt;
      local.input = f.string();
      LoadedSystem loaded = load_system(local.input);
      smt::SmtSolver solver = make_solver(local);
      solve::SolveOutcome outcome = solve::solve(loaded.sys, local.cfg, solver, nullptr);
      status = solve::status_name(outcome.status);
      iterations = outcome.iterations;
      worst = std::max(worst, exit_code(outcome.status));
    } catch (const std::exception& e) {
      status = "Error";
      std::cerr << f.filename().string() << ": " << e.what() << "\n";
      worst = std::max(worst, 1);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << f.filename().string() << "," << status << "," << iterations << "," << secs << ","
              << opt.cfg.seed << "\n";
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loop invariant synthesis for bounded-integer single-loop CHC systems"};
  app.require_subcommand(1);

  Options opt;
  std::string inv_path, net_formula = "pre";

  CLI::App* solve_cmd = app.add_subcommand("solve", "run the full synthesis loop");
  add_common(solve_cmd, opt);
  CLI::App* verify_cmd = app.add_subcommand("verify", "check an invariant with the SMT verifier");
  add_common(verify_cmd, opt);
  verify_cmd->add_option("--invariant", inv_path, "file holding the invariant formula")->required();
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle-verify", "check an invariant by bounded enumeration");
  add_common(oracle_cmd, opt);
  oracle_cmd->add_option("--invariant", inv_path, "file holding the invariant formula")->required();
  CLI::App* net_cmd = app.add_subcommand("sample-net", "emit an epsilon-net, one state per line");
  add_common(net_cmd, opt);
  net_cmd->add_option("--formula", net_formula, "pre | guard | not-post");
  CLI::App* bench_cmd = app.add_subcommand("bench", "solve every .chc in a directory, CSV summary");
  add_common(bench_cmd, opt);
  CLI::App* parse_cmd = app.add_subcommand("parse", "parse, check, and reprint a document");
  add_common(parse_cmd, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    finalize(opt, argv[0]);
    if (solve_cmd->parsed()) return run_solve(opt);
    if (verify_cmd->parsed()) return run_verify(opt, inv_path, false);
    if (oracle_cmd->parsed()) return run_verify(opt, inv_path, true);
    if (net_cmd->parsed()) return run_sample_net(opt, net_formula);
    if (bench_cmd->parsed()) return run_bench(opt);
    if (parse_cmd->parsed()) return run_parse(opt);
  } catch (const ir::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const smt::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
