#include <cmath>
#include <limits>
#include <vector>

#include "dcinv/errors.hpp"
#include "dcinv/geometry.hpp"
#include "dcinv/linsolve.hpp"
#include "dcinv/rng.hpp"
#include "doctest.h"

using namespace dcinv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Brute-force LP oracle: enumerate the vertices of the (bounded) feasible
// region and take the best objective value there. Valid because a bounded
// feasible LP attains its optimum at a vertex.
double vertex_enumeration_lp_oracle(const LpProblem& p) {
  Matrix rows(p.constraints.rows() + 2 * p.num_vars(), p.num_vars());
  Vector rhs(rows.rows());
  rows.topRows(p.constraints.rows()) = p.constraints;
  rhs.head(p.constraints.rows()) = p.rhs;
  for (int j = 0; j < p.num_vars(); ++j) {
    Vector e = Vector::Zero(p.num_vars());
    e(j) = 1.0;
    rows.row(p.constraints.rows() + 2 * j) = e.transpose();
    rhs(p.constraints.rows() + 2 * j) = p.upper(j);
    rows.row(p.constraints.rows() + 2 * j + 1) = -e.transpose();
    rhs(p.constraints.rows() + 2 * j + 1) = -p.lower(j);
  }
  const VPolytope verts = enumerate_vertices(HPolytope(rows, rhs));
  double best = p.maximize ? -kInf : kInf;
  for (int v = 0; v < verts.size(); ++v) {
    const double val = p.objective.dot(verts.vertex(v));
    best = p.maximize ? std::max(best, val) : std::min(best, val);
  }
  return best;
}

}  // namespace

TEST_CASE("simplex agrees with vertex enumeration on random bounded LPs") {
  CounterRng rng(2024, 0);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 5.0);  // 2..6
    const int m = n + 1 + static_cast<int>(rng.uniform() * 4.0);
    LpProblem p;
    p.maximize = trial % 2 == 0;
    p.objective = Vector(n);
    for (int j = 0; j < n; ++j) p.objective(j) = rng.symmetric(1.0);
    p.constraints = Matrix(m, n);
    p.rhs = Vector(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) p.constraints(i, j) = rng.symmetric(1.0);
      p.rhs(i) = 0.5 + rng.uniform();  // keeps the origin strictly feasible
    }
    p.lower = Vector::Constant(n, -2.0);
    p.upper = Vector::Constant(n, 2.0);

    const LpSolution sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    const double oracle = vertex_enumeration_lp_oracle(p);
    CHECK(std::abs(sol.value - oracle) <= 1e-7 * std::max(1.0, std::abs(oracle)));
    ++solved;
  }
  CHECK(solved == 60);
}

TEST_CASE("simplex reports infeasibility and unboundedness") {
  LpProblem p;
  p.maximize = true;
  p.objective = Vector::Ones(1);
  p.constraints = Matrix(2, 1);
  p.constraints << 1, -1;
  p.rhs = Vector(2);
  p.rhs << -3, 2;  // x <= -3 and x >= -2: empty
  p.lower = Vector::Constant(1, -kInf);
  p.upper = Vector::Constant(1, kInf);
  CHECK(solve_lp(p).status == LpStatus::Infeasible);

  p.rhs << 5, 2;  // x <= 5, x >= -2, maximize x: optimal 5
  const LpSolution sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.value == doctest::Approx(5.0));

  p.constraints = Matrix(1, 1);
  p.constraints << -1;
  p.rhs = Vector::Constant(1, 2.0);  // x >= -2, maximize x: unbounded
  CHECK(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("minimax of two shifted parabolas lands at their crossing") {
  std::vector<ConvexConstraint> cons;
  cons.push_back(ConvexConstraint{
      [](const Vector& u) { return u(0) * u(0); },
      [](const Vector& u) { return Vector::Constant(1, 2.0 * u(0)); }});
  cons.push_back(ConvexConstraint{
      [](const Vector& u) { return (u(0) - 1.0) * (u(0) - 1.0); },
      [](const Vector& u) { return Vector::Constant(1, 2.0 * (u(0) - 1.0)); }});
  const auto [val, u] = minimize_max_constraint(cons, InputRegion(Box::cube(1, 5.0)));
  CHECK(val == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(u(0) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("feasible-input search respects the tolerance contract") {
  std::vector<ConvexConstraint> cons;
  cons.push_back(ConvexConstraint{
      [](const Vector& u) { return u(0) * u(0) - 1.0; },
      [](const Vector& u) { return Vector::Constant(1, 2.0 * u(0)); }});
  CHECK(find_feasible_input(cons, InputRegion(Box::cube(1, 3.0)), 1e-9));
  cons.push_back(ConvexConstraint{
      [](const Vector& u) { return (u(0) - 10.0) * (u(0) - 10.0) - 1.0; },
      [](const Vector& u) {
        return Vector::Constant(1, 2.0 * (u(0) - 10.0));
      }});
  CHECK(!find_feasible_input(cons, InputRegion(Box::cube(1, 3.0)), 1e-9));
}

TEST_CASE("scaling maximization matches a fine feasibility grid") {
  // gamma feasible iff some |u| <= 1 has gamma * a + (u - b)^2 - c <= 0;
  // largest gamma = (c - max(0, |b|-1)^2-ish) / a with u clamped to the box.
  struct Case {
    double a, b, c;
  };
  const std::vector<Case> cases = {
      {1.0, 0.0, 0.8}, {0.5, 2.0, 1.2}, {2.0, -1.5, 3.0}, {1.5, 0.7, 0.9},
      {0.8, 3.0, 4.5}};
  for (const Case& cs : cases) {
    std::vector<ConvexConstraint> cons;
    cons.push_back(ConvexConstraint{
        [cs](const Vector& z) {
          const double du = z(1) - cs.b;
          return cs.a * z(0) + du * du - cs.c;
        },
        [cs](const Vector& z) {
          Vector g(2);
          g << cs.a, 2.0 * (z(1) - cs.b);
          return g;
        }});
    const ConvexProgram cp{cons, InputRegion(Box::cube(1, 1.0)), 1e-6, 50.0};
    const GammaResult res = maximize_gamma(cp, 1e-6);

    // Independent oracle: scan gamma on a 1e-4 grid, checking feasibility
    // over a fine u grid at each step.
    const double clamp = std::max(0.0, std::abs(cs.b) - 1.0);
    const double exact = (cs.c - clamp * clamp) / cs.a;
    double best = 0.0;
    for (double g = exact - 0.05; g <= exact + 0.05; g += 1e-4) {
      bool ok = false;
      for (double u = -1.0; u <= 1.0 + 1e-12 && !ok; u += 1e-3) {
        const double du = u - cs.b;
        ok = cs.a * g + du * du - cs.c <= 0.0;
      }
      if (ok) best = g;
    }
    CHECK(std::abs(res.gamma - best) <= 1e-3);
  }
}

TEST_CASE("scaling maximization proves infeasibility soundly") {
  std::vector<ConvexConstraint> cons;
  cons.push_back(ConvexConstraint{
      [](const Vector& z) { return z(0) * 0.0 + z(1) * z(1) + 1.0; },
      [](const Vector& z) {
        Vector g(2);
        g << 0.0, 2.0 * z(1);
        return g;
      }});
  const ConvexProgram cp{cons, InputRegion(Box::cube(1, 1.0)), 1e-6, 10.0};
  CHECK_THROWS_AS(maximize_gamma(cp, 1e-6), InfeasibleAtMinimum);
}
