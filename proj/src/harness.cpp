#include "dcinv/harness.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "dcinv/errors.hpp"
#include "dcinv/linsolve.hpp"
#include "dcinv/rng.hpp"

namespace dcinv {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

double membership_margin(const HPolytope& h, const Vector& x) {
  return (h.normals() * x).maxCoeff();
}

}  // namespace

// ---- Ground-truth system --------------------------------------------------

Vector TrueSystem::step(const Vector& x, const Vector& u,
                        const Vector& w) const {
  require(x.size() == theta.rows(), "state dimension mismatch");
  require(w.size() == theta.rows(), "noise dimension mismatch");
  return evaluate_f(theta, basis, x, u) + w;
}

TrueSystem example_system(double noise_half_width) {
  const int n = 2;
  const int m = 1;
  std::vector<Monomial> atoms = {
      state_linear(n, m, 0),          // x1
      state_linear(n, m, 1),          // x2
      input_linear(n, m, 0),          // u
      state_input_bilinear(n, m, 0, 0),  // x1*u
      state_input_bilinear(n, m, 1, 0),  // x2*u
  };
  PolyBasis basis(n, m, std::move(atoms));

  Matrix theta(2, 5);
  theta.row(0) << 1.0, 0.01, 0.009, 0.001, 0.0;
  theta.row(1) << 0.01, 1.0, 0.009, 0.0, -0.004;

  TrueSystem sys{std::move(theta), std::move(basis), noise_half_width,
                 Box::cube(2, 4.0), Box::cube(1, 2.0)};
  return sys;
}

Matrix example_sign_pattern() {
  Matrix placement = Matrix::Zero(2, 5);
  placement(0, 3) = 1.0;   // x1*u split with the + placement
  placement(1, 4) = -1.0;  // x2*u split with the - placement
  return placement;
}

Dataset generate_dataset(const TrueSystem& sys, int T, std::uint64_t seed) {
  require(T >= 0, "dataset size must be nonnegative");
  Dataset data;
  data.seed = seed;
  data.source = "simulated";
  data.records.reserve(static_cast<size_t>(T));
  const int n = static_cast<int>(sys.theta.rows());
  for (int k = 0; k < T; ++k) {
    CounterRng rng(seed, static_cast<std::uint64_t>(k));
    Transition rec;
    rec.x = sys.state_box.sample(rng);
    rec.u = sys.input_box.sample(rng);
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.symmetric(sys.noise_half_width);
    rec.x_next = sys.step(rec.x, rec.u, w);
    data.records.push_back(std::move(rec));
  }
  return data;
}

// ---- Certificate verification against the truth ---------------------------

VerificationReport monte_carlo_verify(const Certificate& cert,
                                      const TrueSystem& sys, int n_samples,
                                      std::uint64_t seed) {
  require(n_samples >= 0, "sample count must be nonnegative");
  const HPolytope& h = cert.polytope.hrep;
  const int n = static_cast<int>(sys.theta.rows());
  const Box noise = Box::cube(n, sys.noise_half_width);

  VerificationReport report;
  report.samples = n_samples;
  report.facet_noise = facet_noise_support(h, noise);
  report.max_margin = -std::numeric_limits<double>::infinity();

  for (int s = 0; s < n_samples; ++s) {
    CounterRng rng(seed, static_cast<std::uint64_t>(s));
    const Vector x = sample_point(cert.polytope.vrep, rng);
    const Vector u = vertex_control_law(cert, x);
    const Vector f = evaluate_f(sys.theta, sys.basis, x, u);
    const Vector margins =
        h.normals() * f + report.facet_noise -
        Vector::Constant(h.num_rows(), cert.lambda_w);
    const double worst = margins.maxCoeff();
    if (worst > report.max_margin) report.max_margin = worst;
    if (worst > 1e-8) ++report.violations;
  }
  if (n_samples == 0) report.max_margin = 0.0;
  return report;
}

// ---- Closed-loop rollouts -------------------------------------------------

TrajectorySimulator::TrajectorySimulator(const Certificate& cert,
                                         const RobustModel& model,
                                         const TrueSystem& sys,
                                         ContractionSettings settings)
    : cert_(cert),
      model_(model),
      sys_(sys),
      settings_(settings),
      dc_(model.decomposition()),
      majorant_(dc_, model.family) {
  require(cert.polytope.dim() == static_cast<int>(sys.theta.rows()),
          "certificate/system dimension mismatch");
}

void TrajectorySimulator::ensure_step(int k) {
  while (static_cast<int>(cached_controls_.size()) <= k) {
    const int j = static_cast<int>(cached_controls_.size());
    const double scale = std::pow(cert_.lambda_w, j);
    const double next_scale = scale * cert_.lambda_w;
    const VPolytope scaled(Matrix(scale * cert_.polytope.vrep.vertices()));
    std::vector<Vector> controls(scaled.size());
    for (int p = 0; p < scaled.size(); ++p) {
      // Contract the lambda_w^j-scaled set into the lambda_w^(j+1)-scaled
      // one: worst-case F(v, u, H_i) + phi_W(i) <= lambda_w^(j+1). If no
      // input achieves that, keep the best effort; the membership column
      // of the rollout exposes the consequence instead of hiding it.
      const std::vector<ConvexConstraint> cons = facet_admission_constraints(
          majorant_, cert_.polytope.hrep, cert_.noise_support, next_scale,
          scaled.vertex(p));
      controls[p] = minimize_max_constraint(cons, model_.inputs).second;
    }
    cached_vertices_.push_back(scaled);
    cached_controls_.push_back(std::move(controls));
  }
}

std::vector<TrajectoryRow> TrajectorySimulator::run(const Vector& x0,
                                                    int steps,
                                                    std::uint64_t seed) {
  require(steps >= 0, "step count must be nonnegative");
  const HPolytope& h = cert_.polytope.hrep;
  const int n = cert_.polytope.dim();
  require(x0.size() == n, "initial state dimension mismatch");
  const double margin0 = membership_margin(h, x0);
  if (margin0 > 1.0 + 1e-8)
    throw OutsideHull("initial state lies outside the certified set");

  std::vector<TrajectoryRow> rows;
  rows.reserve(static_cast<size_t>(steps) + 1);
  rows.push_back(TrajectoryRow{0, 1.0, margin0, x0});

  Vector x = x0;
  for (int k = 0; k < steps; ++k) {
    ensure_step(k);
    const double scale = std::pow(cert_.lambda_w, k);

    // Interpolate the cached vertex inputs at x. When the state sits
    // marginally outside the scaled hull (roundoff), pull the
    // interpolation point just inside; the dynamics still act on the
    // true state.
    Vector xi = x;
    const double margin = membership_margin(h, x);
    if (margin > scale && margin > 0.0)
      xi = x * (scale / margin) * (1.0 - 1e-12);
    const Vector beta = barycentric_coefficients(cached_vertices_[k], xi);
    const std::vector<Vector>& controls = cached_controls_[k];
    Vector u = Vector::Zero(controls.front().size());
    for (int p = 0; p < static_cast<int>(controls.size()); ++p)
      u += beta(p) * controls[p];

    CounterRng rng(seed, static_cast<std::uint64_t>(k));
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.symmetric(sys_.noise_half_width);

    x = sys_.step(x, u, w);
    rows.push_back(TrajectoryRow{k + 1, scale * cert_.lambda_w,
                                 membership_margin(h, x), x});
  }
  return rows;
}

}  // namespace dcinv
