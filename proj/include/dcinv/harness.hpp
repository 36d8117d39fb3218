#pragma once

#include <cstdint>
#include <vector>

#include "dcinv/consistency.hpp"
#include "dcinv/dcmodel.hpp"
#include "dcinv/geometry.hpp"
#include "dcinv/synthesis.hpp"
#include "dcinv/types.hpp"

namespace dcinv {

// ---- Ground-truth system --------------------------------------------------

/// The system that generates data and later judges certificates. The
/// toolkit under test never reads theta directly; only the harness does.
struct TrueSystem {
  Matrix theta;  // n x d over basis
  PolyBasis basis;
  double noise_half_width = 0.0;  // actual injected |w|_inf bound
  Box state_box;                  // X
  Box input_box;                  // U

  Vector step(const Vector& x, const Vector& u, const Vector& w) const;
};

/// Two-state benchmark: coupled double integrator-like pair with bilinear
/// control effectiveness,
///   x1+ = x1 + 0.01 x2 + 0.009 u + 0.001 x1 u
///   x2+ = 0.01 x1 + x2 + 0.009 u - 0.004 x2 u
/// over basis (x1, x2, u, x1*u, x2*u), X = ||x||_inf <= 4, U = [-2, 2].
TrueSystem example_system(double noise_half_width);

/// Sign placement matrix matching the published hand decomposition of the
/// example system (x1*u split with the + placement, x2*u with the -).
Matrix example_sign_pattern();

/// T independent transitions: x uniform in X, u uniform in U, w uniform in
/// the noise box, one counter-based stream per record, x+ from the true
/// dynamics.
Dataset generate_dataset(const TrueSystem& sys, int T, std::uint64_t seed);

// ---- Certificate verification against the truth ---------------------------

struct VerificationReport {
  int samples = 0;
  int violations = 0;
  double max_margin = 0.0;  // max over samples, facets of
                            // H_i f(x,u) + phi_W(H_i) - lambda_w
  Vector facet_noise;       // phi_W per facet (worst-case noise, exact)
};

/// Samples N states in the certified set, applies the interpolated vertex
/// control, and checks every facet against the true dynamics with exact
/// worst-case noise. Conservative with respect to the disturbance box: no
/// noise sampling is involved.
VerificationReport monte_carlo_verify(const Certificate& cert,
                                      const TrueSystem& sys, int n_samples,
                                      std::uint64_t seed);

struct TrajectoryRow {
  int k = 0;
  double set_scale = 1.0;   // lambda_w^k
  double membership = 0.0;  // max_i H_i x_k (must be <= set_scale + 1e-8)
  Vector state;
};

/// Closed-loop rollouts under the certified controller with random
/// admissible noise. At step k the state must lie in the lambda_w^k-scaled
/// set; controls for the scaled sets are re-solved per step (the optimal
/// input does not scale with the set) and cached, so repeated rollouts
/// reuse them.
class TrajectorySimulator {
 public:
  TrajectorySimulator(const Certificate& cert, const RobustModel& model,
                      const TrueSystem& sys, ContractionSettings settings);

  /// Simulates K steps from x0 (which must lie in the certified set).
  /// Rows 0..K; row 0 records x0.
  std::vector<TrajectoryRow> run(const Vector& x0, int steps,
                                 std::uint64_t seed);

 private:
  const Certificate& cert_;
  const RobustModel& model_;
  const TrueSystem& sys_;
  ContractionSettings settings_;
  DcDecomposition dc_;          // one decomposition serving the whole family
  WorstCaseMajorant majorant_;  // row-separable family worst case
  // per step k >= 0: vertices of the lambda_w^k-scaled set and their inputs
  std::vector<std::vector<Vector>> cached_controls_;
  std::vector<VPolytope> cached_vertices_;
  void ensure_step(int k);
};

}  // namespace dcinv
