// Polynomial models and difference-of-convex decompositions.
//
// Oracles: monomials and basis evaluations are checked against hand-written
// arithmetic; the decomposition is checked against the exact identity
// g - h = row value; the majorant is checked against direct evaluation of
// c . f on random points; gradients are checked against central finite
// differences.

#include <cmath>
#include <vector>

#include <doctest.h>

#include "dcinv/dcmodel.hpp"
#include "dcinv/errors.hpp"
#include "dcinv/rng.hpp"

using namespace dcinv;

namespace {

// Benchmark-shaped basis: n = 2 states, m = 1 input, atoms
// (x1, x2, u, x1*u, x2*u).
PolyBasis bench_basis() {
  const int n = 2, m = 1;
  std::vector<Monomial> atoms;
  atoms.push_back(state_linear(n, m, 0));
  atoms.push_back(state_linear(n, m, 1));
  atoms.push_back(input_linear(n, m, 0));
  atoms.push_back(state_input_bilinear(n, m, 0, 0));
  atoms.push_back(state_input_bilinear(n, m, 1, 0));
  return PolyBasis(n, m, atoms);
}

Vector random_vec(CounterRng& rng, int dim, double half_width) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.symmetric(half_width);
  return v;
}

Matrix random_mat(CounterRng& rng, int rows, int cols, double half_width) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.symmetric(half_width);
  return m;
}

}  // namespace

TEST_CASE("monomials evaluate as plain products") {
  // z = (x1, x2, u)
  Vector z(3);
  z << 1.5, -2.0, 0.5;
  CHECK(state_linear(2, 1, 0).evaluate(z) == doctest::Approx(1.5));
  CHECK(state_linear(2, 1, 1).evaluate(z) == doctest::Approx(-2.0));
  CHECK(input_linear(2, 1, 0).evaluate(z) == doctest::Approx(0.5));
  CHECK(state_input_bilinear(2, 1, 0, 0).evaluate(z) ==
        doctest::Approx(1.5 * 0.5));
  CHECK(state_input_bilinear(2, 1, 1, 0).evaluate(z) ==
        doctest::Approx(-2.0 * 0.5));
  CHECK(state_quadratic(2, 1, 1).evaluate(z) == doctest::Approx(4.0));
  CHECK(input_quadratic(2, 1, 0).evaluate(z) == doctest::Approx(0.25));
  CHECK(state_linear(2, 1, 0).degree() == 1);
  CHECK(state_input_bilinear(2, 1, 0, 0).degree() == 2);
  CHECK(state_quadratic(2, 1, 0).degree() == 2);
}

TEST_CASE("basis evaluation stacks atoms in order") {
  const PolyBasis basis = bench_basis();
  CHECK(basis.size() == 5);
  Vector x(2), u(1);
  x << 0.3, -1.2;
  u << 0.7;
  const Vector phi = basis.evaluate(x, u);
  REQUIRE(phi.size() == 5);
  CHECK(phi(0) == doctest::Approx(0.3));
  CHECK(phi(1) == doctest::Approx(-1.2));
  CHECK(phi(2) == doctest::Approx(0.7));
  CHECK(phi(3) == doctest::Approx(0.3 * 0.7));
  CHECK(phi(4) == doctest::Approx(-1.2 * 0.7));
  // evaluate_z agrees with evaluate on the stacked variable.
  Vector z(3);
  z << x, u;
  CHECK((basis.evaluate_z(z) - phi).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("evaluate_f multiplies coefficients with the dictionary") {
  const PolyBasis basis = bench_basis();
  CounterRng rng(404, 0);
  const Matrix theta = random_mat(rng, 2, 5, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_vec(rng, 2, 3.0);
    const Vector u = random_vec(rng, 1, 2.0);
    const Vector f = evaluate_f(theta, basis, x, u);
    const Vector expect = theta * basis.evaluate(x, u);
    CHECK((f - expect).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("coefficient flattening round-trips row-major") {
  Matrix theta(2, 3);
  theta << 1, 2, 3, 4, 5, 6;
  const Vector flat = flatten_coefficients(theta);
  REQUIRE(flat.size() == 6);
  CHECK(flat(0) == doctest::Approx(1));
  CHECK(flat(2) == doctest::Approx(3));
  CHECK(flat(3) == doctest::Approx(4));
  const Matrix back = unflatten_coefficients(flat, 2, 3);
  CHECK((back - theta).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("convex quadratic value and gradient agree with finite differences") {
  CounterRng rng(405, 0);
  ConvexQuadratic q = ConvexQuadratic::zero(3);
  q.linear = random_vec(rng, 3, 1.0);
  for (int k = 0; k < 4; ++k)
    q.squares.emplace_back(rng.uniform() + 0.1, random_vec(rng, 3, 1.0));
  for (int t = 0; t < 10; ++t) {
    const Vector z = random_vec(rng, 3, 2.0);
    // Direct value oracle.
    double expect = q.linear.dot(z);
    for (const auto& [w, d] : q.squares) {
      const double s = d.dot(z);
      expect += w * s * s;
    }
    CHECK(q.value(z) == doctest::Approx(expect).epsilon(1e-12));
    // Central finite differences for the gradient.
    const Vector grad = q.gradient(z);
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
      Vector zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      const double fd = (q.value(zp) - q.value(zm)) / (2.0 * h);
      CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  // q(0) = 0 by construction.
  CHECK(q.value(Vector::Zero(3)) == doctest::Approx(0.0));
  // add_scaled composes values linearly.
  ConvexQuadratic r = ConvexQuadratic::zero(3);
  r.linear = random_vec(rng, 3, 1.0);
  r.squares.emplace_back(0.5, random_vec(rng, 3, 1.0));
  ConvexQuadratic sum = q;
  sum.add_scaled(r, 2.0);
  const Vector z = random_vec(rng, 3, 1.0);
  CHECK(sum.value(z) == doctest::Approx(q.value(z) + 2.0 * r.value(z)));
}

TEST_CASE("shifted decomposition reproduces each row exactly") {
  const PolyBasis basis = bench_basis();
  CounterRng rng(406, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix theta = random_mat(rng, 2, 5, 1.5);
    Vector caps(5);
    for (int j = 0; j < 5; ++j)
      caps(j) = theta.col(j).cwiseAbs().maxCoeff() + rng.uniform();
    const DcDecomposition dc = DcDecomposition::shifted(basis, caps);
    const std::vector<DcPair> rows = dc.decompose(theta);
    REQUIRE(static_cast<int>(rows.size()) == 2);
    for (int t = 0; t < 50; ++t) {
      const Vector z = random_vec(rng, 3, 3.0);
      const Vector phi = basis.evaluate_z(z);
      for (int r = 0; r < 2; ++r) {
        const double truth = theta.row(r).dot(phi);
        const double split = rows[r].g.value(z) - rows[r].h.value(z);
        CHECK(split == doctest::Approx(truth).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("decomposition parts are midpoint convex and h has no linear term") {
  const PolyBasis basis = bench_basis();
  CounterRng rng(407, 0);
  const Matrix theta = random_mat(rng, 2, 5, 1.0);
  Vector caps = Vector::Constant(5, 2.0);
  const DcDecomposition dc = DcDecomposition::shifted(basis, caps);
  const std::vector<DcPair> rows = dc.decompose(theta);
  for (const DcPair& pair : rows) {
    CHECK(pair.h.linear.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    for (int t = 0; t < 100; ++t) {
      const Vector a = random_vec(rng, 3, 3.0);
      const Vector b = random_vec(rng, 3, 3.0);
      const Vector mid = 0.5 * (a + b);
      CHECK(pair.g.value(mid) <=
            0.5 * (pair.g.value(a) + pair.g.value(b)) + 1e-10);
      CHECK(pair.h.value(mid) <=
            0.5 * (pair.h.value(a) + pair.h.value(b)) + 1e-10);
    }
  }
}

TEST_CASE("bound majorizes the directional model value and is exact at zero") {
  const PolyBasis basis = bench_basis();
  CounterRng rng(408, 0);
  const Matrix theta = random_mat(rng, 2, 5, 1.2);
  Vector caps(5);
  for (int j = 0; j < 5; ++j)
    caps(j) = theta.col(j).cwiseAbs().maxCoeff() * 1.3 + 0.1;
  const DcDecomposition dc = DcDecomposition::shifted(basis, caps);
  const std::vector<DcPair> rows = dc.decompose(theta);
  for (int t = 0; t < 200; ++t) {
    const Vector c = random_vec(rng, 2, 2.0);
    const Vector z = random_vec(rng, 3, 3.0);
    const double truth = c.dot(theta * basis.evaluate_z(z));
    const double bound = bound_value(rows, c, z);
    CHECK(bound >= truth - 1e-9);
    // Exact at the origin (both values are zero there).
    CHECK(bound_value(rows, c, Vector::Zero(3)) == doctest::Approx(0.0));
  }
}

TEST_CASE("bound is midpoint convex in z and positively homogeneous in c") {
  const PolyBasis basis = bench_basis();
  CounterRng rng(409, 0);
  const Matrix theta = random_mat(rng, 2, 5, 1.0);
  const DcDecomposition dc =
      DcDecomposition::shifted(basis, Vector(Vector::Constant(5, 2.0)));
  const std::vector<DcPair> rows = dc.decompose(theta);
  for (int t = 0; t < 100; ++t) {
    const Vector c = random_vec(rng, 2, 2.0);
    const Vector a = random_vec(rng, 3, 3.0);
    const Vector b = random_vec(rng, 3, 3.0);
    const Vector mid = 0.5 * (a + b);
    CHECK(bound_value(rows, c, mid) <=
          0.5 * (bound_value(rows, c, a) + bound_value(rows, c, b)) + 1e-9);
    const double scale = rng.uniform() * 4.0 + 0.25;
    CHECK(bound_value(rows, scale * c, a) ==
          doctest::Approx(scale * bound_value(rows, c, a)).epsilon(1e-10));
  }
}

TEST_CASE("bound gradient matches finite differences of the bound") {
  const PolyBasis basis = bench_basis();
  CounterRng rng(410, 0);
  const Matrix theta = random_mat(rng, 2, 5, 1.0);
  const DcDecomposition dc =
      DcDecomposition::shifted(basis, Vector(Vector::Constant(5, 2.0)));
  const std::vector<DcPair> rows = dc.decompose(theta);
  for (int t = 0; t < 10; ++t) {
    const Vector c = random_vec(rng, 2, 2.0);
    const Vector z = random_vec(rng, 3, 2.0);
    const Vector grad = bound_gradient(rows, c, z);
    // convex_bound builds the same function; spot-check agreement.
    const ConvexQuadratic q = convex_bound(rows, c);
    CHECK(q.value(z) == doctest::Approx(bound_value(rows, c, z)).epsilon(1e-12));
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
      Vector zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      const double fd =
          (bound_value(rows, c, zp) - bound_value(rows, c, zm)) / (2.0 * h);
      CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("shifted bound is affine in the coefficient matrix") {
  const PolyBasis basis = bench_basis();
  CounterRng rng(411, 0);
  const Vector caps = Vector::Constant(5, 3.0);
  const DcDecomposition dc = DcDecomposition::shifted(basis, caps);
  for (int t = 0; t < 50; ++t) {
    const Matrix t1 = random_mat(rng, 2, 5, 1.0);
    const Matrix t2 = random_mat(rng, 2, 5, 1.0);
    const double lam = rng.uniform();
    const Matrix mix = lam * t1 + (1.0 - lam) * t2;
    const auto r1 = dc.decompose(t1);
    const auto r2 = dc.decompose(t2);
    const auto rm = dc.decompose(mix);
    const Vector c = random_vec(rng, 2, 2.0);
    const Vector z = random_vec(rng, 3, 3.0);
    const double combo = lam * bound_value(r1, c, z) +
                         (1.0 - lam) * bound_value(r2, c, z);
    CHECK(bound_value(rm, c, z) == doctest::Approx(combo).epsilon(1e-10));
  }
}

TEST_CASE("cap violations are rejected") {
  const PolyBasis basis = bench_basis();
  Matrix theta = Matrix::Zero(2, 5);
  theta(0, 3) = 1.5;  // bilinear atom coefficient above the cap below
  Vector caps = Vector::Constant(5, 1.0);
  const DcDecomposition dc = DcDecomposition::shifted(basis, caps);
  CHECK_THROWS_AS(dc.decompose(theta), DegenerateInput);
  theta(0, 3) = 0.5;
  CHECK_NOTHROW(dc.decompose(theta));
}

TEST_CASE("per-row cap table admits rows a shared cap would reject") {
  const PolyBasis basis = bench_basis();
  // Row 0 carries a large bilinear coefficient, row 1 a tiny one.
  Matrix theta = Matrix::Zero(2, 5);
  theta(0, 3) = 2.0;
  theta(1, 3) = 0.01;
  Matrix cap_table = Matrix::Zero(2, 5);
  cap_table.row(0).setConstant(2.0);
  cap_table.row(1).setConstant(0.01);
  const DcDecomposition per_row = DcDecomposition::shifted(basis, cap_table);
  const std::vector<DcPair> rows = per_row.decompose(theta);
  // Identity still holds row by row.
  CounterRng rng(412, 0);
  for (int t = 0; t < 30; ++t) {
    const Vector z = random_vec(rng, 3, 2.0);
    const Vector phi = basis.evaluate_z(z);
    for (int r = 0; r < 2; ++r) {
      CHECK(rows[r].g.value(z) - rows[r].h.value(z) ==
            doctest::Approx(theta.row(r).dot(phi)).epsilon(1e-11));
    }
  }
  // The tight row-1 cap makes the row-1 split strictly less conservative
  // than the shared cap (which must cover row 0's magnitude): the h part
  // of row 1 shrinks by the cap ratio.
  const DcDecomposition shared =
      DcDecomposition::shifted(basis, Vector(Vector::Constant(5, 2.0)));
  const std::vector<DcPair> shared_rows = shared.decompose(theta);
  Vector z(3);
  z << 1.0, 1.0, 1.0;
  CHECK(rows[1].h.value(z) < shared_rows[1].h.value(z) - 1e-6);
  // A row-asymmetric table whose row-1 entry is below row 0's coefficient
  // is legal per-row but would reject as a shared per-atom cap.
  const DcDecomposition shared_tight =
      DcDecomposition::shifted(basis, Vector(Vector::Constant(5, 0.01)));
  CHECK_THROWS_AS(shared_tight.decompose(theta), DegenerateInput);
}

TEST_CASE("cap helpers take elementwise maxima over a family") {
  Matrix a(2, 3), b(2, 3);
  a << 1, -2, 0.5, 0, 1, -1;
  b << -3, 1, 0.25, 2, -0.5, 0.5;
  const std::vector<Matrix> family{a, b};
  const Vector caps = atom_caps_over(family);
  REQUIRE(caps.size() == 3);
  CHECK(caps(0) == doctest::Approx(3.0));
  CHECK(caps(1) == doctest::Approx(2.0));
  CHECK(caps(2) == doctest::Approx(1.0));
  const Matrix table = atom_cap_table_over(family);
  REQUIRE(table.rows() == 2);
  REQUIRE(table.cols() == 3);
  CHECK(table(0, 0) == doctest::Approx(3.0));
  CHECK(table(1, 0) == doctest::Approx(2.0));
  CHECK(table(0, 1) == doctest::Approx(2.0));
  CHECK(table(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("sign-split placement accepts matching signs and rejects flips") {
  const PolyBasis basis = bench_basis();
  Matrix theta = Matrix::Zero(2, 5);
  theta(0, 3) = 0.8;
  theta(1, 4) = -0.6;
  const DcDecomposition dc = DcDecomposition::sign_split(basis, theta);
  const std::vector<DcPair> rows = dc.decompose(theta);
  CounterRng rng(413, 0);
  for (int t = 0; t < 30; ++t) {
    const Vector z = random_vec(rng, 3, 2.0);
    const Vector phi = basis.evaluate_z(z);
    for (int r = 0; r < 2; ++r) {
      CHECK(rows[r].g.value(z) - rows[r].h.value(z) ==
            doctest::Approx(theta.row(r).dot(phi)).epsilon(1e-11));
    }
  }
  Matrix flipped = theta;
  flipped(0, 3) = -0.8;
  CHECK_THROWS_AS(dc.decompose(flipped), DegenerateInput);
}
