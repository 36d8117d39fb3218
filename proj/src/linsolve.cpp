#include "dcinv/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "dcinv/errors.hpp"
#include "dcinv/geometry.hpp"

namespace dcinv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

// How each original variable maps into the nonnegative standard form.
struct VarMap {
  enum Kind { ShiftLow, ShiftHighNegated, Split } kind;
  int col = -1;       // primary column
  int col_neg = -1;   // negative part for Split
  double offset = 0;  // additive offset after unscaling
};

// Performs one full pivot (row r, column j) on body/rhs.
void pivot_inplace(Matrix& body, Vector& rhs, std::vector<int>& basis, int r,
                   int j) {
  const double piv = body(r, j);
  body.row(r) /= piv;
  rhs(r) /= piv;
  for (int i = 0; i < body.rows(); ++i) {
    if (i == r) continue;
    const double factor = body(i, j);
    if (factor == 0.0) continue;
    body.row(i) -= factor * body.row(r);
    rhs(i) -= factor * rhs(r);
  }
  basis[r] = j;
}

// Reduced costs for the current basis: c - c_B^T (B^{-1} E).
Vector reduced_costs(const Matrix& body, const std::vector<int>& basis,
                     const Vector& cost) {
  Vector r = cost;
  for (int row = 0; row < body.rows(); ++row) {
    const double cb = cost(basis[row]);
    if (cb != 0.0) r -= cb * body.row(row).transpose();
  }
  return r;
}

struct SimplexCore {
  Matrix body;
  Vector rhs;
  std::vector<int> basis;
  std::vector<char> banned;

  enum class Outcome { Optimal, Unbounded };

  // Minimizes cost.y from the current basis. On Unbounded, ray_col/ray hold
  // the entering column and the recession direction in y-space.
  Outcome minimize(const Vector& cost, int& ray_col, Vector& ray) {
    const int m = static_cast<int>(body.rows());
    const int n = static_cast<int>(body.cols());
    Vector red = reduced_costs(body, basis, cost);
    const int bland_after = 3 * (m + n) + 100;
    const int hard_cap = 30 * (m + n) + 1000;
    for (int iter = 0; iter < hard_cap; ++iter) {
      const bool bland = iter >= bland_after;
      int enter = -1;
      double best = -kCostTol;
      for (int j = 0; j < n; ++j) {
        if (banned[j]) continue;
        const double rj = red(j);
        if (rj < best) {
          enter = j;
          if (bland) break;  // first (lowest-index) improving column
          best = rj;
        } else if (bland && rj < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Outcome::Optimal;

      int leave = -1;
      double best_ratio = kInf;
      for (int r = 0; r < m; ++r) {
        const double a = body(r, enter);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && leave >= 0 &&
             basis[r] < basis[leave])) {
          best_ratio = ratio;
          leave = r;
        }
      }
      if (leave < 0) {
        ray = Vector::Zero(n);
        ray(enter) = 1.0;
        for (int r = 0; r < m; ++r) ray(basis[r]) = -body(r, enter);
        ray_col = enter;
        return Outcome::Unbounded;
      }
      pivot_inplace(body, rhs, basis, leave, enter);
      red = reduced_costs(body, basis, cost);
    }
    throw SolverBreakdown("simplex failed to terminate within iteration cap");
  }
};

}  // namespace

LpProblem LpProblem::with_rows(bool maximize, Vector objective, Matrix rows,
                               Vector rhs) {
  LpProblem p;
  p.maximize = maximize;
  p.objective = std::move(objective);
  p.constraints = std::move(rows);
  p.rhs = std::move(rhs);
  const int n = p.num_vars();
  p.lower = Vector::Constant(n, -kInf);
  p.upper = Vector::Constant(n, kInf);
  return p;
}

LpSolution solve_lp(const LpProblem& p) {
  const int n = p.num_vars();
  const int m0 = static_cast<int>(p.constraints.rows());
  if (m0 > 0 && static_cast<int>(p.constraints.cols()) != n)
    throw Error("solve_lp: constraint matrix width does not match objective");
  if (static_cast<int>(p.rhs.size()) != m0)
    throw Error("solve_lp: rhs length does not match constraint rows");

  // Map variables to nonnegative columns.
  std::vector<VarMap> vmap(n);
  int ncols = 0;
  std::vector<std::pair<int, double>> upper_rows;  // (var, width) extra rows
  for (int i = 0; i < n; ++i) {
    const double lo = p.lower.size() ? p.lower(i) : -kInf;
    const double hi = p.upper.size() ? p.upper(i) : kInf;
    if (lo > hi) return {LpStatus::Infeasible, Vector(), 0.0, Vector()};
    if (std::isfinite(lo)) {
      vmap[i] = {VarMap::ShiftLow, ncols++, -1, lo};
      if (std::isfinite(hi)) upper_rows.push_back({i, hi - lo});
    } else if (std::isfinite(hi)) {
      vmap[i] = {VarMap::ShiftHighNegated, ncols++, -1, hi};
    } else {
      vmap[i] = {VarMap::Split, ncols, ncols + 1, 0.0};
      ncols += 2;
    }
  }
  const int m = m0 + static_cast<int>(upper_rows.size());
  const int n_struct = ncols;

  // Rows in terms of the standard-form columns.
  Matrix rows = Matrix::Zero(m, n_struct);
  Vector rhs = Vector::Zero(m);
  auto emit_coeff = [&](int r, int var, double coeff) {
    const VarMap& vm = vmap[var];
    switch (vm.kind) {
      case VarMap::ShiftLow:
        rows(r, vm.col) += coeff;
        rhs(r) -= coeff * vm.offset;
        break;
      case VarMap::ShiftHighNegated:
        rows(r, vm.col) -= coeff;
        rhs(r) -= coeff * vm.offset;
        break;
      case VarMap::Split:
        rows(r, vm.col) += coeff;
        rows(r, vm.col_neg) -= coeff;
        break;
    }
  };
  for (int r = 0; r < m0; ++r) {
    rhs(r) = p.rhs(r);
    for (int i = 0; i < n; ++i) {
      const double a = p.constraints(r, i);
      if (a != 0.0) emit_coeff(r, i, a);
    }
  }
  for (size_t k = 0; k < upper_rows.size(); ++k) {
    const int r = m0 + static_cast<int>(k);
    rows(r, vmap[upper_rows[k].first].col) = 1.0;
    rhs(r) = upper_rows[k].second;
  }

  // Row scaling for conditioning: divide by the coefficient magnitude only,
  // so pivot candidates stay O(1) even when offsets are large.
  for (int r = 0; r < m; ++r) {
    const double s = rows.row(r).cwiseAbs().maxCoeff();
    if (s > 0) {
      rows.row(r) /= s;
      rhs(r) /= s;
    }
  }

  // Slack + artificial columns; negative-rhs rows are negated and get an
  // artificial so the identity basis exists.
  std::vector<int> art_rows;
  for (int r = 0; r < m; ++r)
    if (rhs(r) < 0) art_rows.push_back(r);
  const int n_slack = m;
  const int n_art = static_cast<int>(art_rows.size());
  const int N = n_struct + n_slack + n_art;

  SimplexCore core;
  core.body = Matrix::Zero(m, N);
  core.body.leftCols(n_struct) = rows;
  core.rhs = rhs;
  core.basis.assign(m, -1);
  core.banned.assign(N, 0);
  for (int r = 0; r < m; ++r) core.body(r, n_struct + r) = 1.0;
  for (int k = 0; k < n_art; ++k) {
    const int r = art_rows[k];
    core.body.row(r) = -core.body.row(r);
    core.rhs(r) = -core.rhs(r);
    core.body(r, n_struct + n_slack + k) = 1.0;
    core.basis[r] = n_struct + n_slack + k;
  }
  for (int r = 0; r < m; ++r)
    if (core.basis[r] < 0) core.basis[r] = n_struct + r;

  int ray_col = -1;
  Vector ray;

  if (n_art > 0) {
    Vector phase1 = Vector::Zero(N);
    for (int k = 0; k < n_art; ++k) phase1(n_struct + n_slack + k) = 1.0;
    const auto out = core.minimize(phase1, ray_col, ray);
    if (out != SimplexCore::Outcome::Optimal)
      throw SolverBreakdown("phase-1 simplex reported an unbounded objective");
    double infeas = 0.0;
    for (int r = 0; r < m; ++r)
      if (core.basis[r] >= n_struct + n_slack) infeas += core.rhs(r);
    if (infeas > 1e-7)
      return {LpStatus::Infeasible, Vector(), 0.0, Vector()};
    // Pivot artificials out of the basis, dropping dependent rows.
    for (int r = static_cast<int>(core.basis.size()) - 1; r >= 0; --r) {
      if (core.basis[r] < n_struct + n_slack) continue;
      int j_sub = -1;
      for (int j = 0; j < n_struct + n_slack; ++j) {
        if (std::abs(core.body(r, j)) > 1e-7) {
          j_sub = j;
          break;
        }
      }
      if (j_sub >= 0) {
        pivot_inplace(core.body, core.rhs, core.basis, r, j_sub);
      } else {
        // Redundant row: remove it.
        const int last = static_cast<int>(core.body.rows()) - 1;
        if (r != last) {
          core.body.row(r) = core.body.row(last);
          core.rhs(r) = core.rhs(last);
          core.basis[r] = core.basis[last];
        }
        core.body.conservativeResize(last, Eigen::NoChange);
        core.rhs.conservativeResize(last);
        core.basis.pop_back();
      }
    }
    for (int k = 0; k < n_art; ++k) core.banned[n_struct + n_slack + k] = 1;
  }

  // Phase 2.
  Vector cost = Vector::Zero(N);
  const double sense = p.maximize ? -1.0 : 1.0;
  for (int i = 0; i < n; ++i) {
    const double c = sense * p.objective(i);
    const VarMap& vm = vmap[i];
    switch (vm.kind) {
      case VarMap::ShiftLow:
        cost(vm.col) += c;
        break;
      case VarMap::ShiftHighNegated:
        cost(vm.col) -= c;
        break;
      case VarMap::Split:
        cost(vm.col) += c;
        cost(vm.col_neg) -= c;
        break;
    }
  }
  const auto out = core.minimize(cost, ray_col, ray);

  auto unmap = [&](const Vector& y) {
    Vector x = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      const VarMap& vm = vmap[i];
      switch (vm.kind) {
        case VarMap::ShiftLow:
          x(i) = vm.offset + y(vm.col);
          break;
        case VarMap::ShiftHighNegated:
          x(i) = vm.offset - y(vm.col);
          break;
        case VarMap::Split:
          x(i) = y(vm.col) - y(vm.col_neg);
          break;
      }
    }
    return x;
  };
  auto unmap_direction = [&](const Vector& d) {
    Vector x = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      const VarMap& vm = vmap[i];
      switch (vm.kind) {
        case VarMap::ShiftLow:
          x(i) = d(vm.col);
          break;
        case VarMap::ShiftHighNegated:
          x(i) = -d(vm.col);
          break;
        case VarMap::Split:
          x(i) = d(vm.col) - d(vm.col_neg);
          break;
      }
    }
    return x;
  };

  if (out == SimplexCore::Outcome::Unbounded) {
    LpSolution sol;
    sol.status = LpStatus::Unbounded;
    sol.ray = unmap_direction(ray);
    return sol;
  }

  Vector y = Vector::Zero(N);
  for (size_t r = 0; r < core.basis.size(); ++r)
    y(core.basis[r]) = core.rhs(static_cast<int>(r));
  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.point = unmap(y);
  sol.value = p.objective.size() ? p.objective.dot(sol.point) : 0.0;

  // Feasibility re-check against the original data.
  const double scale = 1.0 + (m0 ? p.rhs.cwiseAbs().maxCoeff() : 0.0);
  if (m0 > 0) {
    const Vector resid = p.constraints * sol.point - p.rhs;
    if (resid.maxCoeff() > 1e-6 * scale)
      throw SolverBreakdown("simplex optimum violates original constraints");
  }
  for (int i = 0; i < n; ++i) {
    if (p.lower.size() && sol.point(i) < p.lower(i) - 1e-8 * scale)
      throw SolverBreakdown("simplex optimum violates a lower bound");
    if (p.upper.size() && sol.point(i) > p.upper(i) + 1e-8 * scale)
      throw SolverBreakdown("simplex optimum violates an upper bound");
  }
  return sol;
}

// ---- Nonnegative minimum-norm solve ---------------------------------------

namespace {

// Lawson-Hanson nonnegative least squares: min ||A z - b||_2 s.t. z >= 0.
Vector nnls(const Matrix& A, const Vector& b, int max_outer, double wtol) {
  const int ncols = static_cast<int>(A.cols());
  Vector z = Vector::Zero(ncols);
  std::vector<char> passive(ncols, 0);
  Vector w = A.transpose() * (b - A * z);

  auto solve_passive = [&](const std::vector<char>& mask) {
    std::vector<int> idx;
    for (int j = 0; j < ncols; ++j)
      if (mask[j]) idx.push_back(j);
    Vector zp = Vector::Zero(ncols);
    if (idx.empty()) return zp;
    Matrix Ap(A.rows(), static_cast<int>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
    const Vector sol = Ap.colPivHouseholderQr().solve(b);
    for (size_t k = 0; k < idx.size(); ++k) zp(idx[k]) = sol(k);
    return zp;
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    int enter = -1;
    double best = wtol;
    for (int j = 0; j < ncols; ++j) {
      if (passive[j]) continue;
      if (w(j) > best) {
        best = w(j);
        enter = j;
      }
    }
    if (enter < 0) break;
    passive[enter] = 1;
    Vector zp = solve_passive(passive);
    int guard = 0;
    while (true) {
      double zmin = 0.0;
      for (int j = 0; j < ncols; ++j)
        if (passive[j]) zmin = std::min(zmin, zp(j));
      if (zmin > -1e-12) break;
      double alpha = 1.0;
      for (int j = 0; j < ncols; ++j) {
        if (!passive[j] || zp(j) > -1e-12) continue;
        alpha = std::min(alpha, z(j) / (z(j) - zp(j)));
      }
      z += alpha * (zp - z);
      for (int j = 0; j < ncols; ++j)
        if (passive[j] && z(j) <= 1e-12) passive[j] = 0;
      zp = solve_passive(passive);
      if (++guard > 4 * ncols)
        throw SolverBreakdown("nonnegative least squares failed to settle");
    }
    z = zp;
    w = A.transpose() * (b - A * z);
  }
  return z;
}

}  // namespace

Vector nonneg_min_norm(const Matrix& A, const Vector& b, double feas_tol) {
  if (A.rows() != b.size())
    throw Error("nonneg_min_norm: matrix/vector size mismatch");
  const int k = static_cast<int>(A.rows());
  const int ncols = static_cast<int>(A.cols());
  // Tiny Tikhonov block steers the solver to the minimum-norm solution of
  // A z = b. The stationarity tolerance sits well below mu^2 so the
  // norm-reduction signal is never mistaken for noise, while the equality
  // perturbation it causes (~mu^2 relative) stays under feas_tol.
  const double mu = 3e-5 * std::max(1.0, A.cwiseAbs().maxCoeff());
  const double wtol = 1e-3 * mu * mu;
  Matrix As(k + ncols, ncols);
  As.topRows(k) = A;
  As.bottomRows(ncols) = mu * Matrix::Identity(ncols, ncols);
  Vector bs = Vector::Zero(k + ncols);
  bs.head(k) = b;

  const Vector z = nnls(As, bs, 12 * std::max(ncols, 8), wtol);
  const Vector resid = A * z - b;
  if (resid.cwiseAbs().maxCoeff() > feas_tol)
    throw OutsideHull("no nonnegative solution reproduces the target within "
                      "tolerance");
  return z;
}

// ---- Input regions --------------------------------------------------------

InputRegion::InputRegion(const Box& box)
    : is_box_(true), hrep_(box.to_hpolytope()) {
  lower_ = box.center - box.half_widths;
  upper_ = box.center + box.half_widths;
}

InputRegion::InputRegion(const HPolytope& poly) : is_box_(false), hrep_(poly) {
  const Box hull = bounding_box(poly);  // throws if unbounded/empty
  lower_ = hull.center - hull.half_widths;
  upper_ = hull.center + hull.half_widths;
}

bool InputRegion::contains(const Vector& u, double tol) const {
  if (is_box_) {
    for (int i = 0; i < dim(); ++i)
      if (u(i) < lower_(i) - tol || u(i) > upper_(i) + tol) return false;
    return true;
  }
  return dcinv::contains(hrep_, u, tol);
}

// ---- Convex feasibility and maximization ----------------------------------

namespace {

double worst_value(const std::vector<ConvexConstraint>& constraints,
                   const Vector& z, int* arg = nullptr) {
  double worst = -kInf;
  for (size_t i = 0; i < constraints.size(); ++i) {
    const double v = constraints[i].value(z);
    if (v > worst) {
      worst = v;
      if (arg) *arg = static_cast<int>(i);
    }
  }
  return worst;
}

// Golden-section minimization of a unimodal function on [lo, hi].
std::pair<double, double> golden_min(const std::function<double(double)>& f,
                                     double lo, double hi) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, bnd = hi;
  double c = bnd - inv_phi * (bnd - a);
  double d = a + inv_phi * (bnd - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (bnd - a) > 1e-13 * (1.0 + std::abs(a));
       ++it) {
    if (fc <= fd) {
      bnd = d;
      d = c;
      fd = fc;
      c = bnd - inv_phi * (bnd - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (bnd - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + bnd);
  return {f(mid), mid};
}

}  // namespace

std::pair<double, Vector> minimize_max_constraint(
    const std::vector<ConvexConstraint>& constraints,
    const InputRegion& region) {
  const int m = region.dim();
  if (constraints.empty()) {
    Vector mid = 0.5 * (region.lower() + region.upper());
    return {-kInf, mid};
  }
  if (m == 1) {
    auto h = [&](double u) {
      Vector z(1);
      z(0) = u;
      return worst_value(constraints, z);
    };
    auto lohi = std::pair<double, double>(region.lower()(0),
                                          region.upper()(0));
    const auto [hval, u] = golden_min(h, lohi.first, lohi.second);
    // Endpoints can win when the minimum sits on the boundary.
    double best_v = hval, best_u = u;
    for (double cand : {lohi.first, lohi.second}) {
      const double v = h(cand);
      if (v < best_v) {
        best_v = v;
        best_u = cand;
      }
    }
    Vector out(1);
    out(0) = best_u;
    return {best_v, out};
  }

  // Epigraph cutting planes: min t s.t. cut_k(u) <= t, u in region.
  // Decision vector (u, t).
  std::vector<Vector> cut_grad;  // in u
  std::vector<double> cut_off;   // value - grad.u at anchor
  Vector best_u = 0.5 * (region.lower() + region.upper());
  double best_val = worst_value(constraints, best_u);
  Vector anchor = best_u;
  for (int iter = 0; iter < 200; ++iter) {
    int arg = -1;
    const double val = worst_value(constraints, anchor, &arg);
    if (val < best_val) {
      best_val = val;
      best_u = anchor;
    }
    const Vector g = constraints[arg].gradient(anchor);
    cut_grad.push_back(g);
    cut_off.push_back(val - g.dot(anchor));

    const int rows_extra = region.is_box() ? 0 : region.hrep().num_rows();
    Matrix rows(static_cast<int>(cut_grad.size()) + rows_extra, m + 1);
    Vector rhs(rows.rows());
    for (size_t k = 0; k < cut_grad.size(); ++k) {
      rows.row(static_cast<int>(k)).head(m) = cut_grad[k].transpose();
      rows(static_cast<int>(k), m) = -1.0;
      rhs(static_cast<int>(k)) = -cut_off[k];
    }
    if (rows_extra) {
      rows.bottomRows(rows_extra).leftCols(m) = region.hrep().normals();
      rows.bottomRows(rows_extra).col(m).setZero();
      rhs.tail(rows_extra) = region.hrep().offsets();
    }
    LpProblem lp;
    lp.maximize = false;
    lp.objective = Vector::Zero(m + 1);
    lp.objective(m) = 1.0;
    lp.constraints = rows;
    lp.rhs = rhs;
    lp.lower = Vector::Constant(m + 1, -kInf);
    lp.upper = Vector::Constant(m + 1, kInf);
    lp.lower.head(m) = region.lower();
    lp.upper.head(m) = region.upper();
    // t stays free: the cut rows bound it from below, and minimization
    // presses onto them, so the relaxation is always bounded.
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal)
      throw SolverBreakdown("epigraph relaxation did not solve");
    anchor = sol.point.head(m);
    const double lower_bound = sol.value;
    if (best_val - lower_bound < 1e-10 * (1.0 + std::abs(best_val))) {
      const double final_val = worst_value(constraints, anchor);
      if (final_val < best_val) {
        best_val = final_val;
        best_u = anchor;
      }
      break;
    }
  }
  return {best_val, best_u};
}

std::optional<Vector> find_feasible_input(
    const std::vector<ConvexConstraint>& constraints, const InputRegion& region,
    double tol) {
  const auto [val, u] = minimize_max_constraint(constraints, region);
  if (val <= tol) return u;
  return std::nullopt;
}

std::optional<std::pair<Vector, double>> maximize_linear_over_convex(
    const Vector& objective, const Vector& lower, const Vector& upper,
    const std::vector<ConvexConstraint>& constraints, double feas_tol) {
  const int dim = static_cast<int>(objective.size());
  std::vector<Vector> cut_grad;
  std::vector<double> cut_off;
  Vector last_point;
  double last_violation = kInf;
  double last_value = 0.0;

  for (int iter = 0; iter < 1200; ++iter) {
    Matrix rows(static_cast<int>(cut_grad.size()), dim);
    Vector rhs(rows.rows());
    for (size_t k = 0; k < cut_grad.size(); ++k) {
      rows.row(static_cast<int>(k)) = cut_grad[k].transpose();
      rhs(static_cast<int>(k)) = -cut_off[k];
    }
    LpProblem lp;
    lp.maximize = true;
    lp.objective = objective;
    lp.constraints = rows;
    lp.rhs = rhs;
    lp.lower = lower;
    lp.upper = upper;
    const LpSolution sol = solve_lp(lp);
    // Cuts are valid outer approximations, so LP infeasibility certifies
    // the original system infeasible; nothing else may report that.
    if (sol.status == LpStatus::Infeasible) return std::nullopt;
    if (sol.status != LpStatus::Optimal)
      throw SolverBreakdown("cutting-plane relaxation unbounded over a box");

    bool added = false;
    double violation = 0.0;
    for (const ConvexConstraint& con : constraints) {
      const double v = con.value(sol.point);
      violation = std::max(violation, v);
      if (v > feas_tol) {
        const Vector g = con.gradient(sol.point);
        cut_grad.push_back(g);
        cut_off.push_back(v - g.dot(sol.point));
        added = true;
      }
    }
    if (!added) return std::make_pair(sol.point, sol.value);
    if (violation < last_violation) {
      last_violation = violation;
      last_point = sol.point;
      last_value = sol.value;
    }
  }
  // The LP solves to finite precision, so cut violations can hover just
  // above a tolerance the relaxation cannot resolve. A near-feasible
  // incumbent is still useful to callers whose downstream checks enforce
  // their own hard bounds; anything worse is a genuine breakdown.
  if (last_violation <= 1000.0 * feas_tol)
    return std::make_pair(last_point, last_value);
  throw SolverBreakdown(
      "cutting planes failed to reach feasibility within the iteration cap");
}

GammaResult maximize_gamma(const ConvexProgram& cp, double tol) {
  const int m = cp.input.dim();
  const int dim = 1 + m;
  Vector objective = Vector::Zero(dim);
  objective(0) = 1.0;
  Vector lower(dim), upper(dim);
  lower(0) = cp.gamma_min;
  upper(0) = cp.gamma_max;
  lower.tail(m) = cp.input.lower();
  upper.tail(m) = cp.input.upper();

  std::vector<ConvexConstraint> all_constraints = cp.constraints;
  if (!cp.input.is_box()) {
    const Matrix& H = cp.input.hrep().normals();
    const Vector& b = cp.input.hrep().offsets();
    for (int r = 0; r < H.rows(); ++r) {
      Vector g = Vector::Zero(dim);
      g.tail(m) = H.row(r).transpose();
      const double off = b(r);
      all_constraints.push_back(ConvexConstraint{
          [g, off](const Vector& z) { return g.dot(z) - off; },
          [g](const Vector&) { return g; }});
    }
  }

  const auto res =
      maximize_linear_over_convex(objective, lower, upper, all_constraints, 1e-9);
  if (!res.has_value())
    throw InfeasibleAtMinimum(
        "no feasible scaling anywhere in [gamma_min, gamma_max]");

  GammaResult out;
  out.gamma = res->first(0);
  out.u = res->first.tail(m);
  out.hit_gamma_max = out.gamma >= cp.gamma_max - 10.0 * tol;
  out.worst_constraint = worst_value(cp.constraints, res->first);
  return out;
}

}  // namespace dcinv
