#include "invsyn/ir.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace invsyn::ir {

namespace {

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 0, col = 0;
};

struct Reader {
  const std::string& text;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Reader(const std::string& t) : text(t) {}

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {
        while (pos < text.size() && text[pos] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  SExpr read() {
    skip_ws();
    if (pos >= text.size()) throw ParseError("unexpected end of input", line, col);
    SExpr e;
    e.line = line;
    e.col = col;
    char c = text[pos];
    if (c == '(') {
      advance();
      e.is_list = true;
      for (;;) {
        skip_ws();
        if (pos >= text.size()) throw ParseError("unclosed '('", e.line, e.col);
        if (text[pos] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    if (c == ')') throw ParseError("unexpected ')'", line, col);
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')' && text[pos] != ';') {
      e.atom.push_back(text[pos]);
      advance();
    }
    return e;
  }
};

bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

struct DocContext {
  std::map<std::string, int> var_index;
  int dim = 0;
};

struct LinTerm {
  std::vector<int64_t> coeffs;
  int64_t constant = 0;
};

[[noreturn]] void fail(const SExpr& at, const std::string& msg) {
  throw ParseError(msg, at.line, at.col);
}

int64_t parse_int(const SExpr& e) {
  if (e.is_list || !is_integer(e.atom)) fail(e, "expected integer");
  try {
    return std::stoll(e.atom);
  } catch (const std::exception&) {
    fail(e, "integer out of range");
  }
}

LinTerm parse_linterm(const SExpr& e, const DocContext& ctx) {
  LinTerm t;
  t.coeffs.assign(static_cast<size_t>(ctx.dim), 0);
  if (!e.is_list) {
    if (is_integer(e.atom)) {
      t.constant = parse_int(e);
      return t;
    }
    auto it = ctx.var_index.find(e.atom);
    if (it == ctx.var_index.end()) fail(e, "unknown variable '" + e.atom + "'");
    t.coeffs[static_cast<size_t>(it->second)] = 1;
    return t;
  }
  if (e.items.empty()) fail(e, "empty term");
  const std::string& op = e.items[0].atom;
  if (op == "+") {
    if (e.items.size() < 2) fail(e, "'+' needs at least one operand");
    for (size_t i = 1; i < e.items.size(); ++i) {
      LinTerm part = parse_linterm(e.items[i], ctx);
      for (int j = 0; j < ctx.dim; ++j) t.coeffs[j] += part.coeffs[j];
      t.constant += part.constant;
    }
    return t;
  }
  if (op == "-") {
    if (e.items.size() != 2 && e.items.size() != 3) fail(e, "'-' takes one or two operands");
    LinTerm a = parse_linterm(e.items[1], ctx);
    if (e.items.size() == 2) {
      for (int j = 0; j < ctx.dim; ++j) t.coeffs[j] = -a.coeffs[j];
      t.constant = -a.constant;
      return t;
    }
    LinTerm b = parse_linterm(e.items[2], ctx);
    for (int j = 0; j < ctx.dim; ++j) t.coeffs[j] = a.coeffs[j] - b.coeffs[j];
    t.constant = a.constant - b.constant;
    return t;
  }
  if (op == "*") {
    if (e.items.size() != 3) fail(e, "'*' takes an integer and a variable");
    if (e.items[1].is_list || !is_integer(e.items[1].atom))
      fail(e.items[1], "multiplication is only by integer literals");
    int64_t k = parse_int(e.items[1]);
    const SExpr& v = e.items[2];
    if (v.is_list || is_integer(v.atom)) fail(v, "non-linear term: '*' needs a variable");
    auto it = ctx.var_index.find(v.atom);
    if (it == ctx.var_index.end()) fail(v, "unknown variable '" + v.atom + "'");
    t.coeffs[static_cast<size_t>(it->second)] = k;
    return t;
  }
  fail(e, "unknown term operator '" + op + "'");
}

Cmp parse_cmp(const SExpr& e) {
  const std::string& s = e.atom;
  if (s == "<=") return Cmp::Le;
  if (s == "<") return Cmp::Lt;
  if (s == ">") return Cmp::Gt;
  if (s == ">=") return Cmp::Ge;
  if (s == "=") return Cmp::Eq;
  fail(e, "unknown comparison '" + s + "'");
}

bool is_cmp(const std::string& s) {
  return s == "<=" || s == "<" || s == ">" || s == ">=" || s == "=";
}

SurfaceFormula parse_formula(const SExpr& e, const DocContext& ctx) {
  SurfaceFormula f;
  if (!e.is_list) {
    if (e.atom == "true") {
      f.kind = SurfaceFormula::Kind::True;
      return f;
    }
    if (e.atom == "false") {
      f.kind = SurfaceFormula::Kind::False;
      return f;
    }
    fail(e, "expected formula");
  }
  if (e.items.empty()) fail(e, "empty formula");
  const std::string& op = e.items[0].atom;
  if (op == "and" || op == "or" || op == "not") {
    if (e.items.size() < 2) fail(e, "'" + op + "' needs at least one operand");
    if (op == "not" && e.items.size() != 2) fail(e, "'not' takes exactly one operand");
    f.kind = op == "and"  ? SurfaceFormula::Kind::And
             : op == "or" ? SurfaceFormula::Kind::Or
                          : SurfaceFormula::Kind::Not;
    for (size_t i = 1; i < e.items.size(); ++i) f.children.push_back(parse_formula(e.items[i], ctx));
    return f;
  }
  if (is_cmp(op)) {
    if (e.items.size() != 3) fail(e, "comparison takes two terms");
    LinTerm lhs = parse_linterm(e.items[1], ctx);
    LinTerm rhs = parse_linterm(e.items[2], ctx);
    f.kind = SurfaceFormula::Kind::Atom;
    f.atom.cmp = parse_cmp(e.items[0]);
    f.atom.coeffs.assign(static_cast<size_t>(ctx.dim), 0);
    for (int j = 0; j < ctx.dim; ++j) f.atom.coeffs[j] = lhs.coeffs[j] - rhs.coeffs[j];
    f.atom.bound = rhs.constant - lhs.constant;
    return f;
  }
  fail(e, "unknown formula operator '" + op + "'");
}

const SExpr& expect_section(const SExpr& doc, size_t idx, const std::string& name) {
  if (idx >= doc.items.size()) fail(doc, "missing '" + name + "' section");
  const SExpr& s = doc.items[idx];
  if (!s.is_list || s.items.empty() || s.items[0].atom != name)
    fail(s, "expected '(" + name + " ...)'");
  return s;
}

AssignSet parse_assign_set(const SExpr& e, const DocContext& ctx) {
  AssignSet as;
  as.coeffs.assign(static_cast<size_t>(ctx.dim), std::vector<int64_t>());
  as.constants.assign(static_cast<size_t>(ctx.dim), 0);
  // unassigned variables keep their value
  for (int i = 0; i < ctx.dim; ++i) {
    as.coeffs[i].assign(static_cast<size_t>(ctx.dim), 0);
    as.coeffs[i][i] = 1;
  }
  std::vector<bool> seen(static_cast<size_t>(ctx.dim), false);
  for (const SExpr& a : e.items) {
    if (!a.is_list || a.items.size() != 2) fail(a, "expected '(var term)' assignment");
    auto it = ctx.var_index.find(a.items[0].atom);
    if (it == ctx.var_index.end()) fail(a.items[0], "unknown variable '" + a.items[0].atom + "'");
    size_t vi = static_cast<size_t>(it->second);
    if (seen[vi]) fail(a, "variable assigned twice in one assign set");
    seen[vi] = true;
    LinTerm t = parse_linterm(a.items[1], ctx);
    as.coeffs[vi] = t.coeffs;
    as.constants[vi] = t.constant;
  }
  return as;
}

}  // namespace

ChcDocument parse_chc(const std::string& text, std::vector<std::string>* warnings) {
  Reader r(text);
  SExpr top = r.read();
  if (!r.at_end()) throw ParseError("trailing input after document", r.line, r.col);
  if (!top.is_list || top.items.empty() || top.items[0].atom != "chc")
    throw ParseError("expected '(chc ...)'", top.line, top.col);

  ChcDocument doc;
  size_t idx = 1;

  const SExpr& vars = expect_section(top, idx++, "vars");
  if (vars.items.size() < 2) fail(vars, "at least one variable required");
  DocContext ctx;
  for (size_t i = 1; i < vars.items.size(); ++i) {
    const SExpr& v = vars.items[i];
    if (v.is_list || is_integer(v.atom)) fail(v, "expected variable name");
    if (ctx.var_index.count(v.atom)) fail(v, "duplicate variable '" + v.atom + "'");
    ctx.var_index[v.atom] = static_cast<int>(doc.variables.size());
    doc.variables.push_back(v.atom);
  }
  ctx.dim = static_cast<int>(doc.variables.size());

  // bound is optional; default 1000 with a warning
  if (idx < top.items.size() && top.items[idx].is_list && !top.items[idx].items.empty() &&
      top.items[idx].items[0].atom == "bound") {
    const SExpr& b = top.items[idx++];
    if (b.items.size() != 2) fail(b, "'bound' takes one positive integer");
    doc.int_bound = parse_int(b.items[1]);
    if (doc.int_bound <= 0) fail(b.items[1], "bound must be positive");
  } else {
    doc.int_bound = 1000;
    doc.bound_defaulted = true;
    if (warnings) warnings->push_back("no (bound N) section; defaulting int_bound to 1000");
  }

  const SExpr& pre = expect_section(top, idx++, "pre");
  if (pre.items.size() != 2) fail(pre, "'pre' takes one formula");
  doc.pre = parse_formula(pre.items[1], ctx);

  const SExpr& guard = expect_section(top, idx++, "guard");
  if (guard.items.size() != 2) fail(guard, "'guard' takes one formula");
  doc.guard = parse_formula(guard.items[1], ctx);

  const SExpr& trans = expect_section(top, idx++, "trans");
  if (trans.items.size() < 2) fail(trans, "'trans' needs at least one block");
  for (size_t i = 1; i < trans.items.size(); ++i) {
    const SExpr& b = trans.items[i];
    if (!b.is_list || b.items.size() < 3 || b.items[0].atom != "block")
      fail(b, "expected '(block formula assign-set+)'");
    TransBlock blk;
    blk.guard = parse_formula(b.items[1], ctx);
    for (size_t j = 2; j < b.items.size(); ++j) {
      if (!b.items[j].is_list) fail(b.items[j], "expected assign set");
      blk.assign_sets.push_back(parse_assign_set(b.items[j], ctx));
    }
    doc.trans.push_back(std::move(blk));
  }

  const SExpr& post = expect_section(top, idx++, "post");
  if (post.items.size() != 2) fail(post, "'post' takes one formula");
  doc.post = parse_formula(post.items[1], ctx);

  if (idx != top.items.size()) fail(top.items[idx], "unexpected extra section");
  return doc;
}

SurfaceFormula parse_formula_text(const std::string& text, const std::vector<std::string>& vars) {
  Reader r(text);
  SExpr e = r.read();
  if (!r.at_end()) throw ParseError("trailing input after formula", r.line, r.col);
  DocContext ctx;
  for (size_t i = 0; i < vars.size(); ++i) ctx.var_index[vars[i]] = static_cast<int>(i);
  ctx.dim = static_cast<int>(vars.size());
  return parse_formula(e, ctx);
}

namespace {

std::string print_linterm(const std::vector<int64_t>& coeffs, int64_t constant,
                          const std::vector<std::string>& vars) {
  std::vector<std::string> parts;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    if (coeffs[i] == 1)
      parts.push_back(vars[i]);
    else
      parts.push_back("(* " + std::to_string(coeffs[i]) + " " + vars[i] + ")");
  }
  if (constant != 0 || parts.empty()) parts.push_back(std::to_string(constant));
  if (parts.size() == 1) return parts[0];
  std::string out = "(+";
  for (const std::string& p : parts) out += " " + p;
  return out + ")";
}

std::string cmp_str(Cmp c) {
  switch (c) {
    case Cmp::Le: return "<=";
    case Cmp::Lt: return "<";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
    case Cmp::Eq: return "=";
  }
  return "<=";
}

std::string print_formula(const SurfaceFormula& f, const std::vector<std::string>& vars) {
  switch (f.kind) {
    case SurfaceFormula::Kind::True: return "true";
    case SurfaceFormula::Kind::False: return "false";
    case SurfaceFormula::Kind::Atom:
      return "(" + cmp_str(f.atom.cmp) + " " + print_linterm(f.atom.coeffs, 0, vars) + " " +
             std::to_string(f.atom.bound) + ")";
    case SurfaceFormula::Kind::And:
    case SurfaceFormula::Kind::Or:
    case SurfaceFormula::Kind::Not: {
      std::string out = "(";
      out += f.kind == SurfaceFormula::Kind::And ? "and"
             : f.kind == SurfaceFormula::Kind::Or ? "or"
                                                  : "not";
      for (const SurfaceFormula& ch : f.children) out += " " + print_formula(ch, vars);
      return out + ")";
    }
  }
  return "false";
}

}  // namespace

std::string print_chc(const ChcDocument& doc) {
  std::ostringstream out;
  out << "(chc\n  (vars";
  for (const std::string& v : doc.variables) out << " " << v;
  out << ")\n  (bound " << doc.int_bound << ")\n";
  out << "  (pre " << print_formula(doc.pre, doc.variables) << ")\n";
  out << "  (guard " << print_formula(doc.guard, doc.variables) << ")\n";
  out << "  (trans\n";
  for (const TransBlock& b : doc.trans) {
    out << "    (block " << print_formula(b.guard, doc.variables) << "\n";
    for (const AssignSet& as : b.assign_sets) {
      out << "      (";
      bool first = true;
      for (size_t i = 0; i < doc.variables.size(); ++i) {
        out << (first ? "" : " ") << "(" << doc.variables[i] << " "
            << print_linterm(as.coeffs[i], as.constants[i], doc.variables) << ")";
        first = false;
      }
      out << ")\n";
    }
    out << "    )\n";
  }
  out << "  )\n";
  out << "  (post " << print_formula(doc.post, doc.variables) << ")\n)\n";
  return out.str();
}

std::vector<LinearPredicate> desugar_atom(const Atom& a) {
  std::vector<LinearPredicate> out;
  std::vector<int64_t> neg(a.coeffs.size());
  for (size_t i = 0; i < a.coeffs.size(); ++i) neg[i] = -a.coeffs[i];
  switch (a.cmp) {
    case Cmp::Le:
      out.push_back({a.coeffs, a.bound});
      break;
    case Cmp::Lt:
      out.push_back({a.coeffs, a.bound - 1});
      break;
    case Cmp::Gt:
      out.push_back({neg, -a.bound - 1});
      break;
    case Cmp::Ge:
      out.push_back({neg, -a.bound});
      break;
    case Cmp::Eq:
      out.push_back({a.coeffs, a.bound});
      out.push_back({neg, -a.bound});
      break;
  }
  return out;
}

namespace {

// negation-normal form: push negations to atoms; negated atoms flip the
// comparison (integer complements land in desugar_atom), negated equalities
// split into a disjunction
SurfaceFormula to_nnf(const SurfaceFormula& f, bool negate) {
  SurfaceFormula out;
  switch (f.kind) {
    case SurfaceFormula::Kind::True:
      out.kind = negate ? SurfaceFormula::Kind::False : SurfaceFormula::Kind::True;
      return out;
    case SurfaceFormula::Kind::False:
      out.kind = negate ? SurfaceFormula::Kind::True : SurfaceFormula::Kind::False;
      return out;
    case SurfaceFormula::Kind::Not:
      return to_nnf(f.children[0], !negate);
    case SurfaceFormula::Kind::And:
    case SurfaceFormula::Kind::Or: {
      bool is_and = (f.kind == SurfaceFormula::Kind::And) != negate;
      out.kind = is_and ? SurfaceFormula::Kind::And : SurfaceFormula::Kind::Or;
      for (const SurfaceFormula& ch : f.children) out.children.push_back(to_nnf(ch, negate));
      return out;
    }
    case SurfaceFormula::Kind::Atom: {
      if (!negate) return f;
      Atom a = f.atom;
      switch (a.cmp) {
        case Cmp::Le: a.cmp = Cmp::Gt; break;
        case Cmp::Lt: a.cmp = Cmp::Ge; break;
        case Cmp::Gt: a.cmp = Cmp::Le; break;
        case Cmp::Ge: a.cmp = Cmp::Lt; break;
        case Cmp::Eq: {
          out.kind = SurfaceFormula::Kind::Or;
          SurfaceFormula lt, gt;
          lt.kind = gt.kind = SurfaceFormula::Kind::Atom;
          lt.atom = a;
          lt.atom.cmp = Cmp::Lt;
          gt.atom = a;
          gt.atom.cmp = Cmp::Gt;
          out.children = {lt, gt};
          return out;
        }
      }
      out.kind = SurfaceFormula::Kind::Atom;
      out.atom = a;
      return out;
    }
  }
  return out;
}

std::vector<Cube> dnf_cubes(const SurfaceFormula& nnf, int dim, int cap) {
  switch (nnf.kind) {
    case SurfaceFormula::Kind::True: {
      return {dnf_true(dim).cubes[0]};
    }
    case SurfaceFormula::Kind::False:
      return {};
    case SurfaceFormula::Kind::Atom: {
      Cube c;
      c.predicates = desugar_atom(nnf.atom);
      return {c};
    }
    case SurfaceFormula::Kind::Or: {
      std::vector<Cube> out;
      for (const SurfaceFormula& ch : nnf.children) {
        std::vector<Cube> part = dnf_cubes(ch, dim, cap);
        out.insert(out.end(), part.begin(), part.end());
        if (static_cast<int>(out.size()) > cap)
          throw SizeCapExceeded("to_dnf: cube cap exceeded");
      }
      return out;
    }
    case SurfaceFormula::Kind::And: {
      std::vector<Cube> acc = {Cube{}};
      for (const SurfaceFormula& ch : nnf.children) {
        std::vector<Cube> part = dnf_cubes(ch, dim, cap);
        std::vector<Cube> next;
        for (const Cube& a : acc)
          for (const Cube& b : part) {
            Cube merged = a;
            merged.predicates.insert(merged.predicates.end(), b.predicates.begin(),
                                     b.predicates.end());
            next.push_back(std::move(merged));
            if (static_cast<int>(next.size()) > cap)
              throw SizeCapExceeded("to_dnf: cube cap exceeded");
          }
        acc = std::move(next);
      }
      // an empty conjunction is "true"
      for (Cube& c : acc)
        if (c.predicates.empty()) c = dnf_true(dim).cubes[0];
      return acc;
    }
    case SurfaceFormula::Kind::Not:
      break; // unreachable after NNF
  }
  throw std::logic_error("to_dnf: NOT survived NNF");
}

}  // namespace

DnfFormula to_dnf(const SurfaceFormula& f, int dim, int cap) {
  SurfaceFormula nnf = to_nnf(f, false);
  DnfFormula out{dnf_cubes(nnf, dim, cap)};
  return canonicalize_dnf(std::move(out), dim);
}

bool eval_surface(const SurfaceFormula& f, const StateVector& s) {
  switch (f.kind) {
    case SurfaceFormula::Kind::True: return true;
    case SurfaceFormula::Kind::False: return false;
    case SurfaceFormula::Kind::Not: return !eval_surface(f.children[0], s);
    case SurfaceFormula::Kind::And:
      for (const SurfaceFormula& ch : f.children)
        if (!eval_surface(ch, s)) return false;
      return true;
    case SurfaceFormula::Kind::Or:
      for (const SurfaceFormula& ch : f.children)
        if (eval_surface(ch, s)) return true;
      return false;
    case SurfaceFormula::Kind::Atom: {
      i128 v = dot(f.atom.coeffs, s);
      i128 b = f.atom.bound;
      switch (f.atom.cmp) {
        case Cmp::Le: return v <= b;
        case Cmp::Lt: return v < b;
        case Cmp::Gt: return v > b;
        case Cmp::Ge: return v >= b;
        case Cmp::Eq: return v == b;
      }
    }
  }
  return false;
}

namespace {

void enumerate_box(const StateSpace& space, const std::function<void(const StateVector&)>& fn) {
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

Lowered lower_document(const ChcDocument& doc, double overlap_check_limit) {
  Lowered out;
  ChcSystem& sys = out.sys;
  sys.space.dim = static_cast<int>(doc.variables.size());
  sys.space.int_bound = doc.int_bound;
  int dim = sys.space.dim;

  sys.pre = to_dnf(doc.pre, dim);
  sys.guard = to_dnf(doc.guard, dim);
  sys.post = to_dnf(doc.post, dim);

  for (const TransBlock& b : doc.trans) {
    TransitionRelation::Block blk;
    blk.guard = to_dnf(b.guard, dim);
    for (const AssignSet& as : b.assign_sets) {
      LinearMap m;
      m.matrix = as.coeffs;
      m.offset = as.constants;
      blk.maps.push_back(std::move(m));
    }
    sys.trans.blocks.push_back(std::move(blk));
  }

  if (sys.space.box_cardinality() <= overlap_check_limit) {
    bool overlap = false, outside = false;
    enumerate_box(sys.space, [&](const StateVector& s) {
      int fired = 0;
      for (const TransitionRelation::Block& blk : sys.trans.blocks)
        if (eval_dnf(blk.guard, s)) ++fired;
      if (fired > 1) overlap = true;
      if (fired > 0 && !eval_dnf(sys.guard, s)) outside = true;
    });
    if (overlap)
      throw std::runtime_error("transition guard blocks overlap on the state box");
    if (outside)
      throw std::runtime_error("a transition guard block is not contained in the loop guard");
  } else {
    out.warnings.push_back(
        "state box too large for guard partition check; deferred to the verifier");
  }
  return out;
}

std::string serialize_invariant(const DnfFormula& inv, const std::vector<std::string>& vars,
                                InvFormat format) {
  if (inv.cubes.empty()) return "false";
  if (format == InvFormat::DnfText) {
    std::string out;
    for (size_t i = 0; i < inv.cubes.size(); ++i) {
      if (i) out += " || ";
      out += "(";
      const Cube& c = inv.cubes[i];
      for (size_t j = 0; j < c.predicates.size(); ++j) {
        if (j) out += " && ";
        const LinearPredicate& p = c.predicates[j];
        std::string lhs;
        for (size_t v = 0; v < p.coeffs.size(); ++v) {
          if (p.coeffs[v] == 0) continue;
          if (!lhs.empty()) lhs += " + ";
          lhs += (p.coeffs[v] == 1 ? "" : std::to_string(p.coeffs[v]) + "*") + vars[v];
        }
        if (lhs.empty()) lhs = "0";
        out += lhs + " <= " + std::to_string(p.bound);
      }
      out += ")";
    }
    return out;
  }
  // smtlib-term
  auto term = [&](const LinearPredicate& p) {
    std::vector<std::string> parts;
    for (size_t v = 0; v < p.coeffs.size(); ++v) {
      if (p.coeffs[v] == 0) continue;
      if (p.coeffs[v] == 1)
        parts.push_back(vars[v]);
      else
        parts.push_back("(* " + std::to_string(p.coeffs[v]) + " " + vars[v] + ")");
    }
    if (parts.empty()) return std::string("0");
    if (parts.size() == 1) return parts[0];
    std::string out = "(+";
    for (const std::string& s : parts) out += " " + s;
    return out + ")";
  };
  std::string out = "(or";
  for (const Cube& c : inv.cubes) {
    out += " (and";
    for (const LinearPredicate& p : c.predicates)
      out += " (<= " + term(p) + " " + std::to_string(p.bound) + ")";
    out += ")";
  }
  return out + ")";
}

}  // namespace invsyn::ir
