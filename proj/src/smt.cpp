#include "invsyn/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace invsyn::smt {

namespace {

std::string num(int64_t v) {
  if (v < 0) return "(- " + std::to_string(-v) + ")";
  return std::to_string(v);
}

std::string var_name(const char* prefix, size_t i) { return prefix + std::to_string(i); }

std::string lin_term(const std::vector<int64_t>& coeffs, int64_t constant, const char* prefix) {
  std::vector<std::string> parts;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    if (coeffs[i] == 1)
      parts.push_back(var_name(prefix, i));
    else
      parts.push_back("(* " + num(coeffs[i]) + " " + var_name(prefix, i) + ")");
  }
  if (constant != 0 || parts.empty()) parts.push_back(num(constant));
  if (parts.size() == 1) return parts[0];
  std::string out = "(+";
  for (const std::string& p : parts) out += " " + p;
  return out + ")";
}

std::string dnf_term(const DnfFormula& f, const char* prefix) {
  if (f.cubes.empty()) return "false";
  std::string out = "(or";
  for (const Cube& c : f.cubes) {
    out += " (and";
    for (const LinearPredicate& p : c.predicates)
      out += " (<= " + lin_term(p.coeffs, 0, prefix) + " " + num(p.bound) + ")";
    out += ")";
  }
  return out + ")";
}

std::string trans_term(const TransitionRelation& t) {
  std::string out = "(or";
  for (const TransitionRelation::Block& b : t.blocks) {
    out += " (and " + dnf_term(b.guard, "s") + " (or";
    for (const LinearMap& m : b.maps) {
      out += " (and";
      for (size_t i = 0; i < m.offset.size(); ++i)
        out += " (= " + var_name("sp", i) + " " + lin_term(m.matrix[i], m.offset[i], "s") + ")";
      out += ")";
    }
    out += "))";
  }
  return out + ")";
}

void declare_state(std::ostream& out, const char* prefix, int n, const StateSpace& space) {
  for (int i = 0; i < n; ++i) {
    std::string v = var_name(prefix, static_cast<size_t>(i));
    out << "(declare-const " << v << " Int)\n";
    out << "(assert (and (>= " << v << " " << num(space.lo()) << ") (<= " << v << " "
        << num(space.hi()) << ")))\n";
  }
}

}  // namespace

std::string encode_clause(ClauseKind kind, const DnfFormula& inv, const ChcSystem& sys) {
  std::ostringstream out;
  int n = sys.space.dim;
  out << "(set-logic QF_LIA)\n";
  declare_state(out, "s", n, sys.space);
  if (kind == ClauseKind::Inductive) declare_state(out, "sp", n, sys.space);
  switch (kind) {
    case ClauseKind::Fact:
      out << "(assert " << dnf_term(sys.pre, "s") << ")\n";
      out << "(assert (not " << dnf_term(inv, "s") << "))\n";
      break;
    case ClauseKind::Inductive:
      out << "(assert " << dnf_term(inv, "s") << ")\n";
      out << "(assert " << dnf_term(sys.guard, "s") << ")\n";
      out << "(assert " << trans_term(sys.trans) << ")\n";
      out << "(assert (not " << dnf_term(inv, "sp") << "))\n";
      break;
    case ClauseKind::Query:
      out << "(assert " << dnf_term(inv, "s") << ")\n";
      out << "(assert (not " << dnf_term(sys.post, "s") << "))\n";
      break;
  }
  return out.str();
}

// ---------------- solver transport ----------------

struct SmtSolver::Process {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string buf;

  ~Process() {
    if (to_child >= 0) close(to_child);
    if (from_child >= 0) close(from_child);
    if (pid > 0) {
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
    }
  }
};

SmtSolver::SmtSolver(SolverConfig cfg) : cfg_(std::move(cfg)) {}

SmtSolver::~SmtSolver() = default;

void SmtSolver::shutdown() { proc_.reset(); }

void SmtSolver::ensure_process() {
  if (proc_) return;
  int to_pipe[2], from_pipe[2];
  if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0)
    throw SolverError("failed to create solver pipes");
  pid_t pid = fork();
  if (pid < 0) throw SolverError("failed to fork solver process");
  if (pid == 0) {
    dup2(to_pipe[0], STDIN_FILENO);
    dup2(from_pipe[1], STDOUT_FILENO);
    close(to_pipe[0]);
    close(to_pipe[1]);
    close(from_pipe[0]);
    close(from_pipe[1]);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(cfg_.path.c_str()));
    for (const std::string& a : cfg_.args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execvp(cfg_.path.c_str(), argv.data());
    _exit(127);
  }
  close(to_pipe[0]);
  close(from_pipe[1]);
  proc_ = std::make_unique<Process>();
  proc_->pid = pid;
  proc_->to_child = to_pipe[1];
  proc_->from_child = from_pipe[0];
}

namespace {

void write_all(int fd, const std::string& data) {
  size_t off = 0;
  while (off < data.size()) {
    ssize_t w = write(fd, data.data() + off, data.size() - off);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw SolverError("failed to write to solver process");
    }
    off += static_cast<size_t>(w);
  }
}

std::string read_line_timeout(int fd, std::string& buf, int timeout_ms) {
  for (;;) {
    size_t nl = buf.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      return line;
    }
    struct pollfd pfd{fd, POLLIN, 0};
    int rc = poll(&pfd, 1, timeout_ms);
    if (rc == 0) throw SolverError("solver timeout");
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw SolverError("poll failed on solver pipe");
    }
    char chunk[4096];
    ssize_t r = read(fd, chunk, sizeof chunk);
    if (r <= 0) throw SolverError("solver process closed its output (protocol error)");
    buf.append(chunk, static_cast<size_t>(r));
  }
}

std::vector<int64_t> parse_values(const std::string& resp, const std::vector<std::string>& symbols) {
  // response shape: ((name val) (name val) ...), val = int or (- int)
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : resp) {
    if (c == '(' || c == ')') {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
      tokens.push_back(std::string(1, c));
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(cur);

  std::map<std::string, int64_t> values;
  for (size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i] != "(") continue;
    const std::string& name = tokens[i + 1];
    if (name == "(" || name == ")" || name == "-") continue;
    if (i + 2 >= tokens.size()) break;
    if (tokens[i + 2] == "(") {
      if (i + 4 < tokens.size() && tokens[i + 3] == "-")
        values[name] = -std::stoll(tokens[i + 4]);
    } else if (tokens[i + 2] != ")") {
      values[name] = std::stoll(tokens[i + 2]);
    }
  }
  std::vector<int64_t> out;
  for (const std::string& s : symbols) {
    auto it = values.find(s);
    if (it == values.end()) throw SolverError("model missing symbol '" + s + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

bool SmtSolver::check_sat(const std::string& script, const std::vector<std::string>& symbols,
                          std::vector<int64_t>* values) {
  ++query_count_;
  if (!cfg_.mirror_dir.empty()) {
    std::ofstream mirror(cfg_.mirror_dir + "/query_" + std::to_string(query_count_) + ".smt2");
    mirror << script << "(check-sat)\n";
  }
  if (cfg_.fresh_per_query) shutdown();
  bool spawned = !proc_;
  ensure_process();
  try {
    if (!spawned) write_all(proc_->to_child, "(reset)\n");
    write_all(proc_->to_child, script);
    write_all(proc_->to_child, "(check-sat)\n");
    std::string line = read_line_timeout(proc_->from_child, proc_->buf, cfg_.timeout_ms);
    if (line.rfind("(error", 0) == 0) throw SolverError("solver error: " + line);
    bool sat;
    if (line == "sat")
      sat = true;
    else if (line == "unsat")
      sat = false;
    else
      throw SolverError("unexpected solver token: '" + line + "'");
    if (sat && !symbols.empty() && values) {
      std::string q = "(get-value (";
      for (size_t i = 0; i < symbols.size(); ++i) q += (i ? " " : "") + symbols[i];
      q += "))\n";
      write_all(proc_->to_child, q);
      std::string resp = read_line_timeout(proc_->from_child, proc_->buf, cfg_.timeout_ms);
      if (resp.rfind("(error", 0) == 0) throw SolverError("solver error: " + resp);
      *values = parse_values(resp, symbols);
    }
    if (cfg_.fresh_per_query) {
      write_all(proc_->to_child, "(exit)\n");
      shutdown();
    }
    return sat;
  } catch (...) {
    shutdown();
    throw;
  }
}

// ---------------- clause verification ----------------

namespace {

// L1 dispersion from a previous model's head: sum |s_i - t_i| >= d0, with
// |u| spelled via an auxiliary a >= u, a >= -u and (a = u or a = -u)
std::string dispersion_assert(const StateVector& t, size_t cex_index, int64_t d0) {
  std::ostringstream out;
  std::string sum = "(+";
  for (size_t i = 0; i < t.size(); ++i) {
    std::string a = "a" + std::to_string(cex_index) + "_" + std::to_string(i);
    std::string u = "(- " + var_name("s", i) + " " + num(t[i]) + ")";
    out << "(declare-const " << a << " Int)\n";
    out << "(assert (>= " << a << " " << u << "))\n";
    out << "(assert (>= " << a << " (- " << u << ")))\n";
    out << "(assert (or (= " << a << " " << u << ") (= " << a << " (- " << u << "))))\n";
    sum += " " + a;
  }
  sum += ")";
  out << "(assert (>= " << sum << " " << num(d0) << "))\n";
  return out.str();
}

}  // namespace

std::pair<bool, ClauseCex> chc_verify_clause(ClauseKind kind, const DnfFormula& inv,
                                             const ChcSystem& sys, const VerifierConfig& cfg,
                                             SmtSolver& solver) {
  std::string base = encode_clause(kind, inv, sys);
  int n = sys.space.dim;
  std::vector<std::string> symbols;
  for (int i = 0; i < n; ++i) symbols.push_back(var_name("s", static_cast<size_t>(i)));
  if (kind == ClauseKind::Inductive)
    for (int i = 0; i < n; ++i) symbols.push_back(var_name("sp", static_cast<size_t>(i)));

  ClauseCex cex;
  std::vector<StateVector> heads; // dispersion anchors
  bool valid = true;
  for (int round = 0; round < cfg.cex_max; ++round) {
    std::string script = base;
    for (size_t j = 0; j < heads.size(); ++j) script += dispersion_assert(heads[j], j, cfg.d0);
    std::vector<int64_t> model;
    if (!solver.check_sat(script, symbols, &model)) {
      break; // valid on the first round, or dispersion space exhausted
    }
    valid = false;
    StateVector head(model.begin(), model.begin() + n);
    if (kind == ClauseKind::Inductive) {
      StateVector tail(model.begin() + n, model.end());
      cex.pairs.push_back({head, tail});
    } else {
      cex.states.push_back(head);
    }
    heads.push_back(std::move(head));
  }
  return {valid, cex};
}

std::vector<StatePair> iterated_implication_pairs(const TransitionRelation& trans,
                                                  const StateSpace& space, const DnfFormula& guard,
                                                  const std::vector<StatePair>& ice, int k0,
                                                  Rng& rng) {
  std::vector<StatePair> out;
  for (const StatePair& pair : ice) {
    StateVector tail = pair.second;
    for (int j = 1; j < k0; ++j) {
      std::set<StateVector> tails = apply_transition(trans, space, tail);
      if (tails.empty()) break;
      std::vector<StateVector> choices(tails.begin(), tails.end());
      const StateVector& next = rng.pick(choices);
      if (!eval_dnf(guard, next)) break;
      tail = next;
    }
    out.push_back({pair.first, tail});
  }
  return out;
}

std::pair<bool, CexDataset> verifier(const DnfFormula& inv, const ChcSystem& sys,
                                     const VerifierConfig& cfg, SmtSolver& solver, Rng& rng) {
  CexDataset cex;
  auto [fact_ok, fact_cex] = chc_verify_clause(ClauseKind::Fact, inv, sys, cfg, solver);
  for (StateVector& s : fact_cex.states) cex.plus_cex.insert(std::move(s));

  auto [ind_ok, ind_cex] = chc_verify_clause(ClauseKind::Inductive, inv, sys, cfg, solver);
  for (const StatePair& p : ind_cex.pairs) cex.ice_cex.insert(p);
  if (!ind_ok) {
    for (StatePair& p :
         iterated_implication_pairs(sys.trans, sys.space, sys.guard, ind_cex.pairs, cfg.k0, rng))
      cex.ice_cex.insert(std::move(p));
  }

  auto [query_ok, query_cex] = chc_verify_clause(ClauseKind::Query, inv, sys, cfg, solver);
  for (StateVector& s : query_cex.states) cex.minus_cex.insert(std::move(s));

  return {fact_ok && ind_ok && query_ok, cex};
}

namespace {

template <class Fn>
void enumerate_box(const StateSpace& space, Fn&& fn) {
  StateVector s(static_cast<size_t>(space.dim), space.lo());
  for (;;) {
    fn(s);
    int i = 0;
    while (i < space.dim) {
      if (++s[i] <= space.hi()) break;
      s[i] = space.lo();
      ++i;
    }
    if (i == space.dim) return;
  }
}

}  // namespace

std::pair<bool, CexDataset> brute_force_verify(const DnfFormula& inv, const ChcSystem& sys,
                                               const VerifierConfig& cfg) {
  double card = sys.space.box_cardinality();
  double inductive_work = card * std::max(1, sys.trans.r_T());
  if (card > cfg.oracle_limit || inductive_work > cfg.oracle_limit)
    throw std::invalid_argument("brute_force_verify: state box exceeds oracle limit");

  CexDataset cex;
  enumerate_box(sys.space, [&](const StateVector& s) {
    bool in_inv = eval_dnf(inv, s);
    if (!in_inv && eval_dnf(sys.pre, s)) cex.plus_cex.insert(s);
    if (in_inv && !eval_dnf(sys.post, s)) cex.minus_cex.insert(s);
    if (in_inv && eval_dnf(sys.guard, s))
      for (const StateVector& t : apply_transition(sys.trans, sys.space, s))
        if (!eval_dnf(inv, t)) cex.ice_cex.insert({s, t});
  });
  return {cex.empty(), cex};
}

}  // namespace invsyn::smt
