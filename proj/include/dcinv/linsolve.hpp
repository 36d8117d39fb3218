#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dcinv/geometry.hpp"
#include "dcinv/types.hpp"

namespace dcinv {

// ---- Dense linear programming --------------------------------------------

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// max/min objective.x subject to constraints*x <= rhs and lower <= x <= upper
/// (+-infinity bounds allowed).
struct LpProblem {
  bool maximize = false;
  Vector objective;
  Matrix constraints;
  Vector rhs;
  Vector lower;
  Vector upper;

  /// Free-variable problem (no bounds) with <= rows.
  static LpProblem with_rows(bool maximize, Vector objective, Matrix rows,
                             Vector rhs);

  int num_vars() const { return static_cast<int>(objective.size()); }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector point;   // valid when Optimal
  double value = 0.0;
  Vector ray;     // valid when Unbounded: improving recession direction
};

/// Two-phase dense simplex, Dantzig pricing with Bland's rule fallback for
/// anti-cycling. Deterministic. Throws SolverBreakdown if the final basis
/// fails the feasibility re-check.
LpSolution solve_lp(const LpProblem& p);

/// min ||z||_2 s.t. A z = b, z >= 0 (primal active-set on the strictly
/// convex QP). Equalities are accepted up to feas_tol (infinity norm);
/// beyond that throws OutsideHull.
Vector nonneg_min_norm(const Matrix& A, const Vector& b,
                       double feas_tol = 1e-8);

// ---- Convex subproblem engine --------------------------------------------

/// One convex inequality psi(z) <= 0 with value and subgradient access.
struct ConvexConstraint {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

/// Input set U, either a box or a bounded H-polytope. Caches the box hull
/// for interval-based search.
class InputRegion {
 public:
  explicit InputRegion(const Box& box);
  explicit InputRegion(const HPolytope& poly);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  bool contains(const Vector& u, double tol) const;
  bool is_box() const { return is_box_; }
  const HPolytope& hrep() const { return hrep_; }

 private:
  bool is_box_;
  HPolytope hrep_;
  Vector lower_, upper_;
};

/// max gamma over gamma in [gamma_min, gamma_max], u in U, subject to
/// constraints(gamma, u) <= 0; decision vector is (gamma, u) in R^{1+m}.
struct ConvexProgram {
  std::vector<ConvexConstraint> constraints;
  InputRegion input;
  double gamma_min = 1e-6;
  double gamma_max = 1e3;
};

struct GammaResult {
  double gamma = 0.0;
  Vector u;
  bool hit_gamma_max = false;
  double worst_constraint = 0.0;  // re-evaluated at (gamma, u)
};

/// Maximizes gamma over the jointly convex feasible set in (gamma, u).
///
/// Joint convexity makes the feasible gamma set an interval, which need not
/// reach down to gamma_min; accumulated subgradient cuts on the joint
/// program either pin its upper end or prove the whole box infeasible, so
/// narrow intervals cannot be skipped over. Throws InfeasibleAtMinimum when
/// the program is infeasible everywhere in [gamma_min, gamma_max].
GammaResult maximize_gamma(const ConvexProgram& cp, double tol = 1e-6);

/// Some u in U with every constraint value <= tol, or nullopt if none is
/// found at the solver's termination tolerance. Constraints are functions
/// of u alone. Golden-section on the max-constraint for dim 1, Kelley
/// cutting planes above.
std::optional<Vector> find_feasible_input(
    const std::vector<ConvexConstraint>& constraints, const InputRegion& region,
    double tol);

/// min over u in region of max_i constraints_i(u), with a minimizer.
/// The backbone of find_feasible_input, exposed for reuse.
std::pair<double, Vector> minimize_max_constraint(
    const std::vector<ConvexConstraint>& constraints, const InputRegion& region);

/// max objective.z over z in [lower, upper] subject to convex
/// constraints(z) <= 0, by LP relaxations with accumulated subgradient cuts.
/// Returns nullopt when the constraint system is infeasible over the box at
/// the termination tolerance.
std::optional<std::pair<Vector, double>> maximize_linear_over_convex(
    const Vector& objective, const Vector& lower, const Vector& upper,
    const std::vector<ConvexConstraint>& constraints, double feas_tol = 1e-8);

}  // namespace dcinv
