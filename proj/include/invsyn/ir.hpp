#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "invsyn/core.hpp"

namespace invsyn::ir {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error(msg + " at " + std::to_string(l) + ":" + std::to_string(c)),
        line(l),
        col(c) {}
};

enum class Cmp { Le, Lt, Gt, Ge, Eq };

// a linear atom normalized to coeffs.x cmp bound over the document variables
struct Atom {
  Cmp cmp = Cmp::Le;
  std::vector<int64_t> coeffs;
  int64_t bound = 0;
  bool operator==(const Atom&) const = default;
};

struct SurfaceFormula {
  enum class Kind { True, False, And, Or, Not, Atom } kind = Kind::True;
  std::vector<SurfaceFormula> children;
  Atom atom;
  bool operator==(const SurfaceFormula&) const = default;
};

// one simultaneous update: per variable, a linear term over unprimed variables
struct AssignSet {
  // row i gives new value of variable i: coeffs.x + constant
  std::vector<std::vector<int64_t>> coeffs;
  std::vector<int64_t> constants;
  bool operator==(const AssignSet&) const = default;
};

struct TransBlock {
  SurfaceFormula guard;
  std::vector<AssignSet> assign_sets; // one per nondeterministic map
  bool operator==(const TransBlock&) const = default;
};

struct ChcDocument {
  std::vector<std::string> variables;
  int64_t int_bound = 1000;
  bool bound_defaulted = false;
  SurfaceFormula pre, guard, post;
  std::vector<TransBlock> trans;
  bool operator==(const ChcDocument&) const = default;
};

ChcDocument parse_chc(const std::string& text, std::vector<std::string>* warnings = nullptr);

// parses a standalone formula (same grammar as document formulas) over the
// given variable list; used for invariant files and round-trip checks
SurfaceFormula parse_formula_text(const std::string& text, const std::vector<std::string>& vars);

// canonical printer; parse(print_chc(doc)) reproduces the document AST
std::string print_chc(const ChcDocument& doc);

std::vector<LinearPredicate> desugar_atom(const Atom& a);

DnfFormula to_dnf(const SurfaceFormula& f, int dim, int cap = kDefaultDnfCap);

bool eval_surface(const SurfaceFormula& f, const StateVector& s);

struct Lowered {
  ChcSystem sys;
  std::vector<std::string> warnings;
};

// oracle-checks guard disjointness/containment by enumeration when the box is
// small enough, otherwise defers with a warning
Lowered lower_document(const ChcDocument& doc, double overlap_check_limit = double(1 << 22));

enum class InvFormat { DnfText, SmtLibTerm };

std::string serialize_invariant(const DnfFormula& inv, const std::vector<std::string>& vars,
                                InvFormat format);

}  // namespace invsyn::ir
