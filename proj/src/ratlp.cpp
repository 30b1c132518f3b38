#include "invsyn/ratlp.hpp"

#include <cassert>
#include <cstddef>

namespace invsyn::ratlp {

namespace {

// Dense tableau simplex, minimization form.  Columns: structural variables
// (each free variable split into positive/negative parts), slacks, then
// artificials; rows carry an identity in the artificial columns initially.
struct Tableau {
  size_t m, ncols;                     // rows, columns excluding rhs
  std::vector<std::vector<Rat>> a;     // m x (ncols + 1), last column = rhs
  std::vector<Rat> z;                  // reduced-cost row, length ncols + 1
  std::vector<size_t> basis;           // basic variable per row

  Tableau(size_t rows, size_t cols) : m(rows), ncols(cols) {
    a.assign(m, std::vector<Rat>(ncols + 1, Rat(0)));
    z.assign(ncols + 1, Rat(0));
    basis.assign(m, 0);
  }

  void pivot(size_t r, size_t col) {
    Rat p = a[r][col];
    for (Rat& v : a[r]) v /= p;
    for (size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      Rat f = a[i][col];
      if (f == 0) continue;
      for (size_t j = 0; j <= ncols; ++j) a[i][j] -= f * a[r][j];
    }
    Rat f = z[col];
    if (f != 0)
      for (size_t j = 0; j <= ncols; ++j) z[j] -= f * a[r][j];
    basis[r] = col;
  }

  // Bland's rule; returns false on unboundedness
  bool iterate(size_t usable_cols) {
    for (;;) {
      size_t enter = usable_cols;
      for (size_t j = 0; j < usable_cols; ++j)
        if (z[j] < 0) {
          enter = j;
          break;
        }
      if (enter == usable_cols) return true;
      size_t leave = m;
      for (size_t i = 0; i < m; ++i) {
        if (a[i][enter] <= 0) continue;
        if (leave == m) {
          leave = i;
          continue;
        }
        Rat cur = a[i][ncols] / a[i][enter];
        Rat best = a[leave][ncols] / a[leave][enter];
        if (cur < best || (cur == best && basis[i] < basis[leave])) leave = i;
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  }

  // install cost vector c (minimization) and zero it on basic columns
  void set_cost(const std::vector<Rat>& c) {
    for (size_t j = 0; j <= ncols; ++j) z[j] = j < c.size() ? c[j] : Rat(0);
    for (size_t i = 0; i < m; ++i) {
      Rat f = z[basis[i]];
      if (f != 0)
        for (size_t j = 0; j <= ncols; ++j) z[j] -= f * a[i][j];
    }
  }
};

}  // namespace

LpResult optimize(const std::vector<Constraint>& cons, const std::vector<Rat>& obj, int nvars) {
  size_t m = cons.size();
  size_t nv = static_cast<size_t>(nvars);
  size_t nstruct = 2 * nv; // x_j = y_{2j} - y_{2j+1}
  size_t nslack = 0;
  for (const Constraint& c : cons)
    if (!c.eq) ++nslack;
  size_t nart = m;
  size_t ncols = nstruct + nslack + nart;

  Tableau t(m, ncols);
  size_t slack_at = nstruct;
  for (size_t i = 0; i < m; ++i) {
    const Constraint& c = cons[i];
    bool flip = c.b < 0;
    for (size_t j = 0; j < nv && j < c.a.size(); ++j) {
      Rat v = flip ? -c.a[j] : c.a[j];
      t.a[i][2 * j] = v;
      t.a[i][2 * j + 1] = -v;
    }
    if (!c.eq) {
      t.a[i][slack_at] = flip ? Rat(-1) : Rat(1);
      ++slack_at;
    }
    t.a[i][ncols] = flip ? -c.b : c.b;
    t.a[i][nstruct + nslack + i] = 1;
    t.basis[i] = nstruct + nslack + i;
  }

  // phase 1: minimize artificial sum
  {
    std::vector<Rat> c1(ncols, Rat(0));
    for (size_t j = nstruct + nslack; j < ncols; ++j) c1[j] = 1;
    t.set_cost(c1);
    t.iterate(ncols); // bounded below by 0, cannot be unbounded
    if (t.z[ncols] != 0) return {LpStatus::Infeasible, Rat(0), {}};
    // pivot lingering zero-valued artificials out where possible
    for (size_t i = 0; i < m; ++i) {
      if (t.basis[i] < nstruct + nslack) continue;
      size_t col = nstruct + nslack;
      for (size_t j = 0; j < nstruct + nslack; ++j)
        if (t.a[i][j] != 0) {
          col = j;
          break;
        }
      if (col < nstruct + nslack) t.pivot(i, col);
      // else: redundant row, harmless to keep with its zero artificial
    }
  }

  // phase 2: minimize -obj over non-artificial columns
  {
    std::vector<Rat> c2(ncols, Rat(0));
    for (size_t j = 0; j < nv && j < obj.size(); ++j) {
      c2[2 * j] = -obj[j];
      c2[2 * j + 1] = obj[j];
    }
    t.set_cost(c2);
    if (!t.iterate(nstruct + nslack)) return {LpStatus::Unbounded, Rat(0), {}};
  }

  LpResult res;
  res.status = LpStatus::Optimal;
  std::vector<Rat> y(ncols, Rat(0));
  for (size_t i = 0; i < m; ++i) y[t.basis[i]] = t.a[i][ncols];
  res.point.resize(nv);
  for (size_t j = 0; j < nv; ++j) res.point[j] = y[2 * j] - y[2 * j + 1];
  res.value = 0;
  for (size_t j = 0; j < nv && j < obj.size(); ++j) res.value += obj[j] * res.point[j];
  return res;
}

std::optional<std::vector<Rat>> feasible_point(const std::vector<Constraint>& cons, int nvars) {
  std::vector<Rat> zero(static_cast<size_t>(nvars), Rat(0));
  LpResult r = optimize(cons, zero, nvars);
  if (r.status == LpStatus::Infeasible) return std::nullopt;
  return r.point;
}

}  // namespace invsyn::ratlp
