// Data-consistency sets, identifiability, and vertex families.
//
// Oracles: the true coefficient matrix must lie in every set built from its
// own (bounded-noise) data; block vertex products are checked against a
// joint enumeration of the stacked inequality system on a tiny instance;
// rank reports are checked on constructed full-rank and rank-deficient
// datasets.

#include <algorithm>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "dcinv/consistency.hpp"
#include "dcinv/errors.hpp"
#include "dcinv/geometry.hpp"
#include "dcinv/harness.hpp"
#include "dcinv/rng.hpp"

using namespace dcinv;

namespace {

// Sort matrix rows lexicographically so vertex sets can be compared as sets.
Matrix sorted_rows(Matrix m) {
  std::vector<int> order(m.rows());
  for (int i = 0; i < m.rows(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int c = 0; c < m.cols(); ++c) {
      if (m(a, c) < m(b, c) - 1e-9) return true;
      if (m(a, c) > m(b, c) + 1e-9) return false;
    }
    return false;
  });
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) out.row(i) = m.row(order[i]);
  return out;
}

}  // namespace

TEST_CASE("true coefficients stay consistent with their own noisy data") {
  const TrueSystem sys = example_system(0.004);
  const Dataset data = generate_dataset(sys, 30, 77);
  const ConsistencySet cs = build_consistency_set(data, sys.basis, 0.004);
  CHECK(cs.num_components() == 2);
  CHECK(cs.coeff_dim() == 5);
  CHECK(cs.epsilon() == doctest::Approx(0.004));
  // Injected noise is bounded by epsilon, so the generating matrix must be
  // a member, and each block must contain the matching coefficient row.
  const MembershipReport rep = membership(cs, sys.theta);
  CHECK(rep.member);
  CHECK(rep.residual <= 0.004 + 1e-12);
  for (int j = 0; j < 2; ++j) {
    const Vector row = sys.theta.row(j).transpose();
    CHECK(contains(cs.block(j), row, 1e-12));
  }
  // A clearly wrong matrix is rejected with a residual above epsilon.
  Matrix wrong = sys.theta;
  wrong(0, 0) += 0.5;
  const MembershipReport bad = membership(cs, wrong);
  CHECK_FALSE(bad.member);
  CHECK(bad.residual > 0.004);
}

TEST_CASE("block rows reproduce the per-record residual inequalities") {
  // Two hand-written records, one state, two atoms (x, u): block rows must
  // be +/- phi with offsets eps -/+ x_next.
  const int n = 1, m = 1;
  std::vector<Monomial> atoms{state_linear(n, m, 0), input_linear(n, m, 0)};
  const PolyBasis basis(n, m, atoms);
  Dataset data;
  Transition t1;
  t1.x = Vector::Constant(1, 2.0);
  t1.u = Vector::Constant(1, 0.5);
  t1.x_next = Vector::Constant(1, 1.9);
  Transition t2;
  t2.x = Vector::Constant(1, -1.0);
  t2.u = Vector::Constant(1, 1.0);
  t2.x_next = Vector::Constant(1, -0.8);
  data.records = {t1, t2};
  const double eps = 0.1;
  const ConsistencySet cs = build_consistency_set(data, basis, eps);
  const HPolytope& blk = cs.block(0);
  REQUIRE(blk.num_rows() == 4);
  // theta = (a, b) must satisfy |x_next - a*x - b*u| <= eps per record.
  // Check a point inside and one outside by direct substitution.
  Vector inside(2);
  inside << 0.95, 0.0;  // residuals: |1.9-1.9|=0, |-0.8+0.95|=0.15 > eps
  CHECK_FALSE(contains(blk, inside, 1e-12));
  Vector good(2);
  good << 0.9, 0.1;  // residuals: |1.9-1.85|=0.05, |-0.8+0.8|=0.1... compute
  // record1: 0.9*2 + 0.1*0.5 = 1.85 -> |1.9-1.85| = 0.05 <= 0.1
  // record2: 0.9*(-1) + 0.1*1 = -0.8 -> 0 <= 0.1
  CHECK(contains(blk, good, 1e-12));
}

TEST_CASE("identifiability rank is full on rich data and drops on thin data") {
  const TrueSystem sys = example_system(0.004);
  const Dataset rich = generate_dataset(sys, 30, 91);
  const RankReport full = check_identifiability(rich, sys.basis);
  CHECK(full.rank == 5);
  CHECK(full.cols == 5);
  CHECK(full.identifiable);
  CHECK(full.singular_values.size() == 5);

  // Zero-input records kill every input-dependent atom: rank collapses to
  // the number of state-linear atoms.
  Dataset thin = rich;
  for (Transition& t : thin.records) t.u.setZero();
  const RankReport def = check_identifiability(thin, sys.basis);
  CHECK(def.rank == 2);
  CHECK_FALSE(def.identifiable);
}

TEST_CASE("unbounded blocks are reported instead of silently enumerated") {
  // Zero-input data that is still consistent with the true system: the
  // input-dependent atoms are never excited, so their coefficients are
  // unconstrained and the blocks are unbounded.
  const TrueSystem sys = example_system(0.004);
  Dataset thin = generate_dataset(sys, 30, 91);
  for (Transition& t : thin.records) {
    t.u.setZero();
    t.x_next = evaluate_f(sys.theta, sys.basis, t.x, t.u);
  }
  const ConsistencySet cs = build_consistency_set(thin, sys.basis, 0.004);
  CHECK_THROWS_AS(enumerate_parameter_vertices(cs), UnboundedSet);
}

TEST_CASE("block product matches a joint enumeration of the stacked system") {
  // Tiny instance: n = 2 states, d = 2 atoms (x1, u), T = 3 records. The
  // joint feasible set in R^{n*d} is the product of the two blocks; its
  // vertex list must equal all block-vertex combinations.
  const int n = 2, m = 1;
  std::vector<Monomial> atoms{state_linear(n, m, 0), input_linear(n, m, 0)};
  const PolyBasis basis(n, m, atoms);
  Dataset data;
  CounterRng rng(515, 0);
  Matrix theta(2, 2);
  theta << 0.9, 0.2, -0.3, 0.7;
  for (int k = 0; k < 3; ++k) {
    Transition t;
    t.x = Vector(2);
    t.x(0) = rng.symmetric(2.0);
    t.x(1) = rng.symmetric(2.0);
    t.u = Vector::Constant(1, rng.symmetric(1.0));
    const Vector phi = basis.evaluate(t.x, t.u);
    t.x_next = theta * phi;
    t.x_next(0) += rng.symmetric(0.05);
    t.x_next(1) += rng.symmetric(0.05);
    data.records.push_back(t);
  }
  const double eps = 0.05;
  const ConsistencySet cs = build_consistency_set(data, basis, eps);
  const ThetaVertexFamily fam = enumerate_parameter_vertices(cs);
  REQUIRE(fam.block_vertices.size() == 2);

  // Joint oracle: stack both blocks into one system over R^4 with
  // block-diagonal structure and enumerate directly.
  const HPolytope& b0 = cs.block(0);
  const HPolytope& b1 = cs.block(1);
  Matrix joint_n(b0.num_rows() + b1.num_rows(), 4);
  joint_n.setZero();
  Vector joint_o(joint_n.rows());
  joint_n.topLeftCorner(b0.num_rows(), 2) = b0.normals();
  joint_o.head(b0.num_rows()) = b0.offsets();
  joint_n.bottomRightCorner(b1.num_rows(), 2) = b1.normals();
  joint_o.tail(b1.num_rows()) = b1.offsets();
  const VPolytope joint = enumerate_vertices(HPolytope(joint_n, joint_o));

  REQUIRE(fam.count() == joint.size());
  // Flatten each family combo row-major to compare against joint vertices.
  Matrix combos(fam.count(), 4);
  for (int i = 0; i < fam.count(); ++i)
    combos.row(i) = flatten_coefficients(fam.combos[i]).transpose();
  const Matrix a = sorted_rows(combos);
  const Matrix b = sorted_rows(joint.vertices());
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);

  // Product bookkeeping: count equals the product of block counts.
  const std::vector<int> counts = fam.block_counts();
  REQUIRE(counts.size() == 2);
  CHECK(fam.count() == counts[0] * counts[1]);
}

TEST_CASE("family from explicit matrices covers the originals") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 1;
  b << 0.5, 0.2, -0.1, 0.9;
  const ThetaVertexFamily fam = ThetaVertexFamily::from_matrices({a, b});
  CHECK(fam.count() >= 2);
  // Every original matrix appears among the combos.
  for (const Matrix& want : {a, b}) {
    bool found = false;
    for (const Matrix& got : fam.combos)
      if ((got - want).cwiseAbs().maxCoeff() <= 1e-12) found = true;
    CHECK(found);
  }
}

TEST_CASE("tighter epsilon shrinks the consistency set") {
  const TrueSystem sys = example_system(0.004);
  const Dataset data = generate_dataset(sys, 30, 123);
  const ConsistencySet wide = build_consistency_set(data, sys.basis, 0.008);
  const ConsistencySet tight = build_consistency_set(data, sys.basis, 0.004);
  // Same rows, different offsets: every tight vertex is inside the wide set.
  const ThetaVertexFamily fam = enumerate_parameter_vertices(tight);
  for (int j = 0; j < 2; ++j) {
    const Matrix& verts = fam.block_vertices[j];
    for (int v = 0; v < verts.rows(); ++v) {
      const Vector p = verts.row(v).transpose();
      CHECK(contains(wide.block(j), p, 1e-9));
    }
  }
  // Degenerate epsilon is rejected.
  CHECK_THROWS_AS(build_consistency_set(data, sys.basis, -1.0), Error);
}
