#pragma once

#include <gmpxx.h>

#include <optional>
#include <vector>

namespace invsyn::ratlp {

using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

struct Constraint {
  std::vector<Rat> a;
  Rat b;
  bool eq = false; // a.x == b when set, else a.x <= b
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Rat value;              // objective at optimum
  std::vector<Rat> point; // length nvars
};

// maximize obj.x subject to the constraints; variables are free (unrestricted
// sign).  Two-phase dense simplex with Bland's rule over exact rationals.
LpResult optimize(const std::vector<Constraint>& cons, const std::vector<Rat>& obj, int nvars);

std::optional<std::vector<Rat>> feasible_point(const std::vector<Constraint>& cons, int nvars);

}  // namespace invsyn::ratlp
