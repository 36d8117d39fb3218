// Ground-truth harness: the example system, dataset generation, and
// certificate verification against the true dynamics.
//
// Oracles: the example step map is checked against hand-written arithmetic;
// dataset noise is checked against the declared bound record by record;
// verification is checked both on a sound certificate (zero violations) and
// a deliberately corrupted one (violations reported).

#include <cmath>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "dcinv/errors.hpp"
#include "dcinv/geometry.hpp"
#include "dcinv/harness.hpp"
#include "dcinv/rng.hpp"
#include "dcinv/synthesis.hpp"

using namespace dcinv;

namespace {

RobustModel known_model(const TrueSystem& sys) {
  return RobustModel{sys.basis,
                     ThetaVertexFamily::from_matrices({sys.theta}),
                     Box::cube(2, 0.004),
                     InputRegion(sys.input_box),
                     sys.state_box,
                     DcScheme::Shifted,
                     std::nullopt};
}

ContractionSettings bench_settings() {
  ContractionSettings s;
  s.lambda_w = 1.0;
  s.gamma_max = 50.0;
  return s;
}

// Axis box of half-width 0.1 cut by the diagonal slab |x1+x2|/sqrt(2) <=
// 0.035: a shape this plant can certify (a plain square cannot — its corner
// scaling floors exceed the opposite corners' ceilings).
CandidatePolytope diagonal_hexagon_candidate() {
  const double diag = std::sqrt(2.0) * 0.035;
  Matrix normals(6, 2);
  normals << 1.0 / 0.1, 0, -1.0 / 0.1, 0, 0, 1.0 / 0.1, 0, -1.0 / 0.1,
      1.0 / diag, 1.0 / diag, -1.0 / diag, -1.0 / diag;
  return make_candidate(HPolytope(normals, Vector::Ones(6)), "initial");
}

}  // namespace

TEST_CASE("example step map matches the written dynamics") {
  const TrueSystem sys = example_system(0.004);
  Vector x(2), u(1), w(2);
  x << 1.2, -0.7;
  u << 0.9;
  w << 0.003, -0.001;
  const Vector next = sys.step(x, u, w);
  const double x1 =
      1.2 + 0.01 * (-0.7) + 0.009 * 0.9 + 0.001 * 1.2 * 0.9 + 0.003;
  const double x2 =
      0.01 * 1.2 + (-0.7) + 0.009 * 0.9 - 0.004 * (-0.7) * 0.9 - 0.001;
  CHECK(next(0) == doctest::Approx(x1).epsilon(1e-14));
  CHECK(next(1) == doctest::Approx(x2).epsilon(1e-14));
  // Step agrees with the coefficient form plus noise.
  const Vector via_theta = evaluate_f(sys.theta, sys.basis, x, u) + w;
  CHECK((next - via_theta).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("example system boxes and sign pattern are as declared") {
  const TrueSystem sys = example_system(0.004);
  CHECK(sys.noise_half_width == doctest::Approx(0.004));
  CHECK(sys.state_box.dim() == 2);
  CHECK(sys.state_box.half_widths(0) == doctest::Approx(4.0));
  CHECK(sys.state_box.half_widths(1) == doctest::Approx(4.0));
  CHECK(sys.input_box.dim() == 1);
  CHECK(sys.input_box.half_widths(0) == doctest::Approx(2.0));
  CHECK(sys.basis.size() == 5);
  // The published sign placement accepts the true coefficients.
  const Matrix pattern = example_sign_pattern();
  const DcDecomposition dc = DcDecomposition::sign_split(sys.basis, pattern);
  CHECK_NOTHROW(dc.decompose(sys.theta));
  // Bilinear coefficients: +0.001 on x1*u (row 0), -0.004 on x2*u (row 1).
  CHECK(pattern(0, 3) >= 0.0);
  CHECK(pattern(1, 4) < 0.0);
}

TEST_CASE("datasets are reproducible, box-bounded, and noise-bounded") {
  const TrueSystem sys = example_system(0.004);
  const Dataset a = generate_dataset(sys, 30, 42);
  const Dataset b = generate_dataset(sys, 30, 42);
  const Dataset c = generate_dataset(sys, 30, 43);
  REQUIRE(a.size() == 30);
  CHECK(a.seed == 42);
  CHECK(a.state_dim() == 2);
  CHECK(a.input_dim() == 1);
  bool identical = true;
  bool differs_from_c = false;
  for (int k = 0; k < 30; ++k) {
    identical = identical &&
                (a.records[k].x - b.records[k].x).cwiseAbs().maxCoeff() == 0 &&
                (a.records[k].u - b.records[k].u).cwiseAbs().maxCoeff() == 0 &&
                (a.records[k].x_next - b.records[k].x_next)
                        .cwiseAbs()
                        .maxCoeff() == 0;
    differs_from_c =
        differs_from_c ||
        (a.records[k].x - c.records[k].x).cwiseAbs().maxCoeff() > 0;
    // Sampling boxes respected.
    CHECK(sys.state_box.contains(a.records[k].x, 0.0));
    CHECK(sys.input_box.contains(a.records[k].u, 0.0));
    // Injected noise never exceeds the declared half-width.
    const Vector noise_free =
        evaluate_f(sys.theta, sys.basis, a.records[k].x, a.records[k].u);
    const double w = (a.records[k].x_next - noise_free).cwiseAbs().maxCoeff();
    CHECK(w <= 0.004 + 1e-15);
  }
  CHECK(identical);
  CHECK(differs_from_c);
}

TEST_CASE("noise-free systems generate exact transitions") {
  const TrueSystem sys = example_system(0.0);
  const Dataset data = generate_dataset(sys, 10, 7);
  for (const Transition& t : data.records) {
    const Vector expect = evaluate_f(sys.theta, sys.basis, t.x, t.u);
    CHECK((t.x_next - expect).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("verification passes a sound certificate and flags a corrupt one") {
  const TrueSystem sys = example_system(0.004);
  const RobustModel model = known_model(sys);
  const ContractionSettings settings = bench_settings();
  const SynthesisOutput out = compute_contractive_set(
      diagonal_hexagon_candidate(), model, settings);
  const Certificate& cert = out.certificate;

  const VerificationReport rep = monte_carlo_verify(cert, sys, 2000, 99);
  CHECK(rep.samples == 2000);
  CHECK(rep.violations == 0);
  CHECK(rep.max_margin <= 0.0);
  // Facet noise column equals the exact box support along each normal.
  REQUIRE(rep.facet_noise.size() == cert.polytope.num_facets());
  const Vector oracle = facet_noise_support(
      cert.polytope.hrep, Box::cube(2, sys.noise_half_width));
  CHECK((rep.facet_noise - oracle).cwiseAbs().maxCoeff() <= 1e-12);

  // Corruption: keep the set and inputs but claim a much stronger
  // contraction rate than they deliver. Sampling must expose the overclaim.
  Certificate overclaimed = cert;
  overclaimed.lambda_w = 0.5;
  const VerificationReport bad = monte_carlo_verify(overclaimed, sys, 2000, 99);
  CHECK(bad.violations > 0);
  CHECK(bad.max_margin > 0.0);
}

TEST_CASE("closed-loop rollouts stay in the scaled sets") {
  const TrueSystem sys = example_system(0.004);
  const RobustModel model = known_model(sys);
  const ContractionSettings settings = bench_settings();
  const SynthesisOutput out = compute_contractive_set(
      diagonal_hexagon_candidate(), model, settings);
  const Certificate& cert = out.certificate;

  TrajectorySimulator sim(cert, model, sys, settings);
  CounterRng rng(777, 0);
  for (int traj = 0; traj < 5; ++traj) {
    const Vector x0 = sample_point(cert.polytope.vrep, rng);
    const std::vector<TrajectoryRow> rows = sim.run(x0, 10, 1000 + traj);
    REQUIRE(static_cast<int>(rows.size()) == 11);
    CHECK((rows[0].state - x0).cwiseAbs().maxCoeff() == 0.0);
    for (int k = 0; k <= 10; ++k) {
      CHECK(rows[k].k == k);
      CHECK(rows[k].set_scale ==
            doctest::Approx(std::pow(settings.lambda_w, k)));
      CHECK(rows[k].membership <= rows[k].set_scale + 1e-8);
      // Membership column is the raw facet evaluation of the state.
      const double direct =
          (cert.polytope.hrep.normals() * rows[k].state).maxCoeff();
      CHECK(rows[k].membership == doctest::Approx(direct).epsilon(1e-12));
    }
  }
  // Starting outside the certified set is refused.
  Vector outside(2);
  outside << 1.0, 1.0;
  CHECK_THROWS_AS(sim.run(outside, 3, 5), OutsideHull);
}
