#include "invsyn/smtlia.hpp"

#include <cctype>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "invsyn/ratlp.hpp"

namespace invsyn::smtlia {

namespace {

using ratlp::Constraint;
using ratlp::Rat;

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
};

// streaming s-expression reader (blocks until a full expression is available)
std::optional<SExpr> read_sexpr(std::istream& in) {
  auto skip = [&]() {
    for (;;) {
      int c = in.peek();
      if (c == ';') {
        while (c != EOF && c != '\n') c = in.get();
      } else if (c != EOF && std::isspace(c)) {
        in.get();
      } else {
        return;
      }
    }
  };
  std::function<std::optional<SExpr>()> rd = [&]() -> std::optional<SExpr> {
    skip();
    int c = in.peek();
    if (c == EOF) return std::nullopt;
    SExpr e;
    if (c == '(') {
      in.get();
      e.is_list = true;
      for (;;) {
        skip();
        c = in.peek();
        if (c == EOF) return std::nullopt; // truncated input
        if (c == ')') {
          in.get();
          return e;
        }
        auto child = rd();
        if (!child) return std::nullopt;
        e.items.push_back(std::move(*child));
      }
    }
    while (c != EOF && !std::isspace(c) && c != '(' && c != ')' && c != ';') {
      e.atom.push_back(static_cast<char>(in.get()));
      c = in.peek();
    }
    return e;
  };
  return rd();
}

struct SmtError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinExpr {
  std::map<int, int64_t> coeffs; // var index -> coefficient
  int64_t constant = 0;

  void add(const LinExpr& o, int64_t scale) {
    for (auto& [v, c] : o.coeffs) coeffs[v] += scale * c;
    constant += scale * o.constant;
  }
};

// atoms normalized to lhs <= 0 or lhs == 0 over integer variables
struct TheoryAtom {
  LinExpr lhs;
  bool eq = false;
};

struct Formula {
  enum class Kind { True, False, And, Or, Not, Atom } kind = Kind::True;
  std::vector<Formula> children;
  size_t atom = 0; // index into the atom table
};

struct Solver {
  std::map<std::string, int> vars;
  std::vector<std::string> var_names;
  std::vector<TheoryAtom> atoms;
  std::vector<Formula> assertions;
  std::optional<std::vector<int64_t>> model;

  void reset() {
    vars.clear();
    var_names.clear();
    atoms.clear();
    assertions.clear();
    model.reset();
  }

  int declare(const std::string& name) {
    auto [it, fresh] = vars.emplace(name, static_cast<int>(var_names.size()));
    if (fresh) var_names.push_back(name);
    return it->second;
  }

  bool is_number(const std::string& s) {
    if (s.empty()) return false;
    size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  }

  LinExpr parse_term(const SExpr& e) {
    LinExpr out;
    if (!e.is_list) {
      if (is_number(e.atom)) {
        out.constant = std::stoll(e.atom);
        return out;
      }
      auto it = vars.find(e.atom);
      if (it == vars.end()) throw SmtError("unknown symbol '" + e.atom + "'");
      out.coeffs[it->second] = 1;
      return out;
    }
    if (e.items.empty()) throw SmtError("empty term");
    const std::string& op = e.items[0].atom;
    if (op == "+") {
      for (size_t i = 1; i < e.items.size(); ++i) out.add(parse_term(e.items[i]), 1);
      return out;
    }
    if (op == "-") {
      if (e.items.size() == 2) {
        out.add(parse_term(e.items[1]), -1);
        return out;
      }
      out = parse_term(e.items[1]);
      for (size_t i = 2; i < e.items.size(); ++i) out.add(parse_term(e.items[i]), -1);
      return out;
    }
    if (op == "*") {
      // linear products only: exactly one non-constant factor
      LinExpr acc;
      acc.constant = 1;
      for (size_t i = 1; i < e.items.size(); ++i) {
        LinExpr f = parse_term(e.items[i]);
        if (f.coeffs.empty()) {
          for (auto& [v, c] : acc.coeffs) c *= f.constant;
          acc.constant *= f.constant;
        } else if (acc.coeffs.empty()) {
          int64_t k = acc.constant;
          acc = f;
          for (auto& [v, c] : acc.coeffs) c *= k;
          acc.constant *= k;
        } else {
          throw SmtError("non-linear multiplication");
        }
      }
      return acc;
    }
    throw SmtError("unknown term operator '" + op + "'");
  }

  size_t intern_atom(LinExpr lhs, bool eq) {
    TheoryAtom a{std::move(lhs), eq};
    for (size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i].eq == a.eq && atoms[i].lhs.constant == a.lhs.constant &&
          atoms[i].lhs.coeffs == a.lhs.coeffs)
        return i;
    atoms.push_back(std::move(a));
    return atoms.size() - 1;
  }

  Formula atom_leq(LinExpr lhs) { // lhs <= 0
    Formula f;
    f.kind = Formula::Kind::Atom;
    f.atom = intern_atom(std::move(lhs), false);
    return f;
  }

  Formula parse_formula(const SExpr& e) {
    Formula f;
    if (!e.is_list) {
      if (e.atom == "true") return f;
      if (e.atom == "false") {
        f.kind = Formula::Kind::False;
        return f;
      }
      throw SmtError("expected formula, got '" + e.atom + "'");
    }
    if (e.items.empty()) throw SmtError("empty formula");
    const std::string& op = e.items[0].atom;
    if (op == "and" || op == "or") {
      f.kind = op == "and" ? Formula::Kind::And : Formula::Kind::Or;
      for (size_t i = 1; i < e.items.size(); ++i) f.children.push_back(parse_formula(e.items[i]));
      return f;
    }
    if (op == "not") {
      if (e.items.size() != 2) throw SmtError("'not' arity");
      f.kind = Formula::Kind::Not;
      f.children.push_back(parse_formula(e.items[1]));
      return f;
    }
    if (op == "=>") {
      if (e.items.size() != 3) throw SmtError("'=>' arity");
      f.kind = Formula::Kind::Or;
      Formula neg;
      neg.kind = Formula::Kind::Not;
      neg.children.push_back(parse_formula(e.items[1]));
      f.children.push_back(std::move(neg));
      f.children.push_back(parse_formula(e.items[2]));
      return f;
    }
    if (op == "<=" || op == "<" || op == ">=" || op == ">" || op == "=") {
      if (e.items.size() != 3) throw SmtError("comparison arity");
      LinExpr a = parse_term(e.items[1]);
      LinExpr b = parse_term(e.items[2]);
      LinExpr d = a;
      d.add(b, -1); // d = a - b
      if (op == "<=") return atom_leq(std::move(d));
      if (op == "<") {
        d.constant += 1;
        return atom_leq(std::move(d)); // a - b + 1 <= 0 over Int
      }
      if (op == ">=") {
        LinExpr n;
        n.add(d, -1);
        return atom_leq(std::move(n));
      }
      if (op == ">") {
        LinExpr n;
        n.add(d, -1);
        n.constant += 1;
        return atom_leq(std::move(n));
      }
      // equality becomes a conjunction so its negation stays convex per branch
      Formula conj;
      conj.kind = Formula::Kind::And;
      LinExpr n;
      n.add(d, -1);
      conj.children.push_back(atom_leq(std::move(d)));
      conj.children.push_back(atom_leq(std::move(n)));
      return conj;
    }
    throw SmtError("unknown formula operator '" + op + "'");
  }

  // ---- search ----

  enum class Tri { Unknown, True, False };

  Tri eval_formula(const Formula& f, const std::vector<Tri>& assign) const {
    switch (f.kind) {
      case Formula::Kind::True: return Tri::True;
      case Formula::Kind::False: return Tri::False;
      case Formula::Kind::Atom: return assign[f.atom];
      case Formula::Kind::Not: {
        Tri t = eval_formula(f.children[0], assign);
        if (t == Tri::Unknown) return t;
        return t == Tri::True ? Tri::False : Tri::True;
      }
      case Formula::Kind::And: {
        bool unknown = false;
        for (const Formula& ch : f.children) {
          Tri t = eval_formula(ch, assign);
          if (t == Tri::False) return Tri::False;
          if (t == Tri::Unknown) unknown = true;
        }
        return unknown ? Tri::Unknown : Tri::True;
      }
      case Formula::Kind::Or: {
        bool unknown = false;
        for (const Formula& ch : f.children) {
          Tri t = eval_formula(ch, assign);
          if (t == Tri::True) return Tri::True;
          if (t == Tri::Unknown) unknown = true;
        }
        return unknown ? Tri::Unknown : Tri::False;
      }
    }
    return Tri::Unknown;
  }

  std::vector<Constraint> literal_constraints(const std::vector<Tri>& assign) const {
    std::vector<Constraint> cons;
    size_t n = var_names.size();
    for (size_t i = 0; i < atoms.size(); ++i) {
      if (assign[i] == Tri::Unknown) continue;
      const TheoryAtom& a = atoms[i];
      Constraint c;
      c.a.assign(n, Rat(0));
      if (assign[i] == Tri::True) {
        // lhs <= 0
        for (auto& [v, k] : a.lhs.coeffs) c.a[static_cast<size_t>(v)] = static_cast<long>(k);
        c.b = static_cast<long>(-a.lhs.constant);
      } else {
        // lhs > 0, i.e. -lhs <= -1 over integers
        for (auto& [v, k] : a.lhs.coeffs) c.a[static_cast<size_t>(v)] = static_cast<long>(-k);
        c.b = static_cast<long>(a.lhs.constant - 1);
      }
      cons.push_back(std::move(c));
    }
    return cons;
  }

  static bool rational_feasible(const std::vector<Constraint>& cons, int nvars) {
    return ratlp::feasible_point(cons, nvars).has_value();
  }

  // branch-and-bound integer feasibility; writes the witness into out
  bool integer_feasible(std::vector<Constraint> cons, std::vector<int64_t>& out,
                        long& node_budget) const {
    if (--node_budget < 0) throw SmtError("branch-and-bound node budget exhausted");
    auto pt = ratlp::feasible_point(cons, static_cast<int>(var_names.size()));
    if (!pt) return false;
    for (size_t v = 0; v < pt->size(); ++v) {
      const Rat& r = (*pt)[v];
      if (r.get_den() == 1) continue;
      mpz_class fl;
      mpz_fdiv_q(fl.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
      for (int side = 0; side < 2; ++side) {
        Constraint c;
        c.a.assign(var_names.size(), Rat(0));
        if (side == 0) {
          c.a[v] = 1;
          c.b = Rat(fl);
        } else {
          c.a[v] = -1;
          c.b = Rat(-(fl + 1));
        }
        std::vector<Constraint> sub = cons;
        sub.push_back(std::move(c));
        if (integer_feasible(std::move(sub), out, node_budget)) return true;
      }
      return false;
    }
    out.assign(var_names.size(), 0);
    for (size_t v = 0; v < pt->size(); ++v) out[v] = static_cast<int64_t>((*pt)[v].get_num().get_si());
    return true;
  }

  bool dpll(std::vector<Tri>& assign) {
    Tri all = Tri::True;
    for (const Formula& f : assertions) {
      Tri t = eval_formula(f, assign);
      if (t == Tri::False) return false;
      if (t == Tri::Unknown) all = Tri::Unknown;
    }
    if (!rational_feasible(literal_constraints(assign), static_cast<int>(var_names.size())))
      return false;
    if (all == Tri::True) {
      std::vector<int64_t> witness;
      long budget = 200000;
      if (integer_feasible(literal_constraints(assign), witness, budget)) {
        model = std::move(witness);
        return true;
      }
      return false;
    }
    size_t pick = assign.size();
    for (size_t i = 0; i < assign.size(); ++i)
      if (assign[i] == Tri::Unknown) {
        pick = i;
        break;
      }
    if (pick == assign.size()) return false; // all assigned yet skeleton unknown: impossible
    for (Tri t : {Tri::True, Tri::False}) {
      assign[pick] = t;
      if (dpll(assign)) return true;
    }
    assign[pick] = Tri::Unknown;
    return false;
  }

  bool check_sat() {
    model.reset();
    std::vector<Tri> assign(atoms.size(), Tri::Unknown);
    return dpll(assign);
  }
};

std::string print_value(int64_t v) {
  if (v < 0) return "(- " + std::to_string(-v) + ")";
  return std::to_string(v);
}

}  // namespace

int run_repl(std::istream& in, std::ostream& out) {
  Solver solver;
  for (;;) {
    std::optional<SExpr> cmd = read_sexpr(in);
    if (!cmd) return 0; // end of input
    try {
      if (!cmd->is_list || cmd->items.empty()) throw SmtError("expected command");
      const std::string& op = cmd->items[0].atom;
      if (op == "set-logic" || op == "set-option" || op == "set-info") {
        continue; // QF_LIA assumed
      } else if (op == "declare-const") {
        if (cmd->items.size() != 3 || cmd->items[2].atom != "Int")
          throw SmtError("declare-const expects an Int symbol");
        solver.declare(cmd->items[1].atom);
      } else if (op == "declare-fun") {
        if (cmd->items.size() != 4 || !cmd->items[2].is_list || !cmd->items[2].items.empty() ||
            cmd->items[3].atom != "Int")
          throw SmtError("only zero-ary Int declare-fun supported");
        solver.declare(cmd->items[1].atom);
      } else if (op == "assert") {
        if (cmd->items.size() != 2) throw SmtError("assert arity");
        solver.assertions.push_back(solver.parse_formula(cmd->items[1]));
      } else if (op == "check-sat") {
        out << (solver.check_sat() ? "sat" : "unsat") << "\n" << std::flush;
      } else if (op == "get-value") {
        if (!solver.model) throw SmtError("no model available");
        if (cmd->items.size() != 2 || !cmd->items[1].is_list) throw SmtError("get-value arity");
        out << "(";
        for (size_t i = 0; i < cmd->items[1].items.size(); ++i) {
          const std::string& name = cmd->items[1].items[i].atom;
          auto it = solver.vars.find(name);
          if (it == solver.vars.end()) throw SmtError("unknown symbol '" + name + "'");
          if (i) out << " ";
          out << "(" << name << " " << print_value((*solver.model)[static_cast<size_t>(it->second)])
              << ")";
        }
        out << ")\n" << std::flush;
      } else if (op == "reset") {
        solver.reset();
      } else if (op == "exit") {
        return 0;
      } else {
        throw SmtError("unsupported command '" + op + "'");
      }
    } catch (const std::exception& e) {
      out << "(error \"" << e.what() << "\")\n" << std::flush;
    }
  }
}

}  // namespace invsyn::smtlia
