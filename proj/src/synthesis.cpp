#include "dcinv/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "dcinv/errors.hpp"

namespace dcinv {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw Error(msg);
}

Vector stack_state_input(const Vector& x, const Vector& u) {
  Vector z(x.size() + u.size());
  z.head(x.size()) = x;
  z.tail(u.size()) = u;
  return z;
}

std::pair<double, int> worst_row_term(double cj,
                                      const std::vector<DcPair>& pairs,
                                      const Vector& z) {
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (size_t r = 0; r < pairs.size(); ++r) {
    const DcPair& pair = pairs[r];
    const double v = cj >= 0
                         ? cj * (pair.g.value(z) - pair.h.linear.dot(z))
                         : cj * (pair.g.linear.dot(z) - pair.h.value(z));
    if (v > best) {
      best = v;
      arg = static_cast<int>(r);
    }
  }
  return {best, arg};
}

}  // namespace

// ---- WorstCaseMajorant ----------------------------------------------------

WorstCaseMajorant::WorstCaseMajorant(const DcDecomposition& dc,
                                     const ThetaVertexFamily& family) {
  const PolyBasis& basis = dc.basis();
  const int n = basis.state_dim();
  const int d = basis.size();
  require(static_cast<int>(family.block_vertices.size()) == n,
          "family/basis state dimension mismatch");
  row_pairs_.resize(n);
  for (int j = 0; j < n; ++j) {
    const Matrix& block = family.block_vertices[j];
    require(static_cast<int>(block.cols()) == d,
            "family/basis dictionary width mismatch");
    row_pairs_[j].reserve(block.rows());
    for (int r = 0; r < block.rows(); ++r) {
      Matrix padded = Matrix::Zero(n, d);
      padded.row(j) = block.row(r);
      row_pairs_[j].push_back(dc.decompose(padded)[j]);
    }
  }
}

double WorstCaseMajorant::value(const Vector& c, const Vector& z) const {
  double total = 0.0;
  for (size_t j = 0; j < row_pairs_.size(); ++j)
    total += worst_row_term(c(static_cast<int>(j)), row_pairs_[j], z).first;
  return total;
}

Vector WorstCaseMajorant::gradient(const Vector& c, const Vector& z) const {
  Vector g = Vector::Zero(z.size());
  for (size_t j = 0; j < row_pairs_.size(); ++j) {
    const double cj = c(static_cast<int>(j));
    const int best = worst_row_term(cj, row_pairs_[j], z).second;
    const DcPair& pair = row_pairs_[j][best];
    if (cj >= 0)
      g += cj * (pair.g.gradient(z) - pair.h.linear);
    else
      g += cj * (pair.g.linear - pair.h.gradient(z));
  }
  return g;
}

Vector facet_noise_support(const HPolytope& h, const Box& noise) {
  Vector out(h.num_rows());
  for (int i = 0; i < h.num_rows(); ++i)
    out(i) = support_function(noise, h.normals().row(i).transpose());
  return out;
}

std::vector<ConvexConstraint> facet_admission_constraints(
    const WorstCaseMajorant& majorant, const HPolytope& h, const Vector& phi_w,
    double threshold, const Vector& x) {
  std::vector<ConvexConstraint> out;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < h.num_rows(); ++i) {
    const Vector c = h.normals().row(i).transpose();
    const double offset = phi_w(i) - threshold;
    out.push_back(ConvexConstraint{
        [&majorant, c, offset, x](const Vector& u) {
          return majorant.value(c, stack_state_input(x, u)) + offset;
        },
        [&majorant, c, x, n](const Vector& u) {
          const Vector g = majorant.gradient(c, stack_state_input(x, u));
          return Vector(g.tail(g.size() - n));
        }});
  }
  return out;
}

// ---- Candidate sets -------------------------------------------------------

CandidatePolytope make_candidate(const HPolytope& h, std::string provenance) {
  HPolytope normalized = [&]() {
    if (h.is_normalized()) return h;
    if ((h.offsets().array() <= 0).any())
      throw OriginNotInterior(
          "candidate polytope must contain the origin strictly inside");
    Matrix scaled = h.normals();
    for (int r = 0; r < h.num_rows(); ++r) scaled.row(r) /= h.offsets()(r);
    return HPolytope::normalized(scaled);
  }();
  VPolytope verts = enumerate_vertices(normalized);
  // Mutual consistency: every vertex on the boundary, none outside.
  const Matrix margins =
      normalized.normals() * verts.vertices().transpose();  // rows x verts
  for (int p = 0; p < verts.size(); ++p) {
    const double worst = margins.col(p).maxCoeff();
    if (worst > 1.0 + 1e-7 || worst < 1.0 - 1e-7)
      throw Error(
          "candidate polytope representations disagree: a vertex misses the "
          "boundary");
  }
  return CandidatePolytope{std::move(normalized), std::move(verts),
                           std::move(provenance)};
}

CandidatePolytope regular_polygon_candidate(int n_v, double radius) {
  require(n_v >= 3, "regular polygon needs at least three vertices");
  require(radius > 0, "regular polygon needs a positive radius");
  Matrix pts(n_v, 2);
  for (int i = 0; i < n_v; ++i) {
    const double angle = M_PI / n_v + 2.0 * M_PI * i / n_v;
    pts(i, 0) = radius * std::cos(angle);
    pts(i, 1) = radius * std::sin(angle);
  }
  const VPolytope vrep(pts);
  HPolytope hrep = facet_representation(vrep);
  return CandidatePolytope{std::move(hrep), vrep, "initial"};
}

// ---- RobustModel ----------------------------------------------------------

DcDecomposition RobustModel::decomposition() const {
  if (scheme == DcScheme::Shifted) {
    if (cap_override) return DcDecomposition::shifted(basis, *cap_override);
    return DcDecomposition::shifted(basis, atom_cap_table_over(family.combos));
  }
  // Sign placement derived from the family: first nonzero sign seen per
  // entry (zero means the convex side).
  Matrix reference = Matrix::Zero(basis.state_dim(), basis.size());
  for (const Matrix& theta : family.combos) {
    for (int r = 0; r < reference.rows(); ++r) {
      for (int j = 0; j < reference.cols(); ++j) {
        if (reference(r, j) == 0.0 && theta(r, j) != 0.0)
          reference(r, j) = theta(r, j) > 0 ? 1.0 : -1.0;
      }
    }
  }
  return DcDecomposition::sign_split(basis, reference);
}

// ---- Scaling subproblems --------------------------------------------------

SubproblemResult vertex_subproblem(const DcDecomposition& dc,
                                   const Matrix& theta, const Vector& vertex,
                                   const HPolytope& omega, const Box& noise,
                                   const InputRegion& inputs,
                                   const ContractionSettings& settings) {
  require(omega.is_normalized(),
          "vertex_subproblem: candidate set must be normalized");
  require(settings.lambda_w > 0 && settings.lambda_w <= 1,
          "vertex_subproblem: contraction factor must lie in (0, 1]");
  const int n = static_cast<int>(vertex.size());
  const int m = inputs.dim();
  const std::vector<DcPair> rows = dc.decompose(theta);
  const Vector phi_w = facet_noise_support(omega, noise);

  std::vector<ConvexConstraint> constraints;
  constraints.reserve(omega.num_rows());
  for (int i = 0; i < omega.num_rows(); ++i) {
    const ConvexQuadratic bound =
        convex_bound(rows, omega.normals().row(i).transpose());
    const double offset = phi_w(i);
    const double lambda = settings.lambda_w;
    constraints.push_back(ConvexConstraint{
        [bound, vertex, offset, lambda, n, m](const Vector& gu) {
          const Vector z = stack_state_input(gu(0) * vertex, gu.tail(m));
          return bound.value(z) - lambda * gu(0) + offset;
        },
        [bound, vertex, lambda, n, m](const Vector& gu) {
          const Vector z = stack_state_input(gu(0) * vertex, gu.tail(m));
          const Vector gz = bound.gradient(z);
          Vector g(1 + m);
          g(0) = gz.head(n).dot(vertex) - lambda;
          g.tail(m) = gz.tail(m);
          return g;
        }});
  }

  ConvexProgram cp{std::move(constraints), inputs, settings.gamma_min,
                   settings.gamma_max};
  SubproblemResult out;
  try {
    const GammaResult r = maximize_gamma(cp, settings.gamma_tol);
    out.alpha = r.gamma;
    out.u = r.u;
    out.feasible = true;
    out.hit_gamma_max = r.hit_gamma_max;
  } catch (const InfeasibleAtMinimum&) {
    out.alpha = 0.0;
    out.u = Vector::Zero(m);
    out.feasible = false;
  }
  return out;
}

SubproblemResult family_vertex_subproblem(const WorstCaseMajorant& majorant,
                                          const Vector& vertex,
                                          const HPolytope& omega,
                                          const Box& noise,
                                          const InputRegion& inputs,
                                          const ContractionSettings& settings) {
  require(omega.is_normalized(),
          "family_vertex_subproblem: candidate set must be normalized");
  require(settings.lambda_w > 0 && settings.lambda_w <= 1,
          "family_vertex_subproblem: contraction factor must lie in (0, 1]");
  const int n = static_cast<int>(vertex.size());
  const int m = inputs.dim();
  const Vector phi_w = facet_noise_support(omega, noise);

  std::vector<ConvexConstraint> constraints;
  constraints.reserve(omega.num_rows());
  for (int i = 0; i < omega.num_rows(); ++i) {
    const Vector c = omega.normals().row(i).transpose();
    const double offset = phi_w(i);
    const double lambda = settings.lambda_w;
    constraints.push_back(ConvexConstraint{
        [&majorant, c, vertex, offset, lambda, m](const Vector& gu) {
          const Vector z = stack_state_input(gu(0) * vertex, gu.tail(m));
          return majorant.value(c, z) - lambda * gu(0) + offset;
        },
        [&majorant, c, vertex, lambda, n, m](const Vector& gu) {
          const Vector z = stack_state_input(gu(0) * vertex, gu.tail(m));
          const Vector gz = majorant.gradient(c, z);
          Vector g(1 + m);
          g(0) = gz.head(n).dot(vertex) - lambda;
          g.tail(m) = gz.tail(m);
          return g;
        }});
  }

  ConvexProgram cp{std::move(constraints), inputs, settings.gamma_min,
                   settings.gamma_max};
  SubproblemResult out;
  try {
    const GammaResult r = maximize_gamma(cp, settings.gamma_tol);
    out.alpha = r.gamma;
    out.u = r.u;
    out.feasible = true;
    out.hit_gamma_max = r.hit_gamma_max;
  } catch (const InfeasibleAtMinimum&) {
    out.alpha = 0.0;
    out.u = Vector::Zero(m);
    out.feasible = false;
  }
  return out;
}

ScalingResult scaling_table(const CandidatePolytope& omega0,
                            const RobustModel& model,
                            const ContractionSettings& settings) {
  const int q = model.family.count();
  const int n_v = omega0.num_vertices();
  require(q > 0, "scaling_table: empty coefficient family");
  const DcDecomposition dc = model.decomposition();

  ScalingResult result;
  result.alpha_table = Matrix::Zero(q, n_v);
  std::vector<std::vector<SubproblemResult>> cells(
      q, std::vector<SubproblemResult>(n_v));

  std::vector<std::exception_ptr> errors(std::max(1, settings.jobs));
  auto run_range = [&](int worker, int stride) {
    try {
      for (int s = worker; s < q; s += stride) {
        for (int p = 0; p < n_v; ++p) {
          cells[s][p] = vertex_subproblem(dc, model.family.combos[s],
                                          omega0.vrep.vertex(p), omega0.hrep,
                                          model.noise, model.inputs, settings);
        }
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  const int workers = std::max(1, std::min(settings.jobs, q));
  if (workers == 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(run_range, w, workers);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  double alpha_min = std::numeric_limits<double>::infinity();
  for (int s = 0; s < q; ++s) {
    for (int p = 0; p < n_v; ++p) {
      const SubproblemResult& cell = cells[s][p];
      if (!cell.feasible) {
        result.infeasible_pairs.emplace_back(s, p);
        continue;
      }
      result.alpha_table(s, p) = cell.alpha;
      if (cell.hit_gamma_max) result.capped_pairs.emplace_back(s, p);
      if (cell.alpha < alpha_min) {
        alpha_min = cell.alpha;
        result.argmin_theta = s;
        result.argmin_vertex = p;
      }
    }
  }
  if (!std::isfinite(alpha_min)) alpha_min = 0.0;
  result.alpha_unclipped = alpha_min;

  // Clip so the scaled set stays inside the state box.
  double alpha_box = std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.state_box.dim(); ++i) {
    Vector e = Vector::Zero(model.state_box.dim());
    e(i) = 1.0;
    const double up = support_function(omega0.vrep, e);
    const double dn = support_function(omega0.vrep, Vector(-e));
    const double hi = model.state_box.center(i) + model.state_box.half_widths(i);
    const double lo = model.state_box.center(i) - model.state_box.half_widths(i);
    if (up > 0) alpha_box = std::min(alpha_box, hi / up);
    if (dn > 0) alpha_box = std::min(alpha_box, -lo / dn);
  }
  result.alpha = std::min(alpha_min, alpha_box);
  result.clipped_to_state_box = alpha_box < alpha_min;
  result.alpha_box = alpha_box;
  return result;
}

// ---- Certificates ---------------------------------------------------------

SynthesisOutput compute_contractive_set(const CandidatePolytope& omega0,
                                        const RobustModel& model,
                                        const ContractionSettings& settings) {
  ScalingResult scaling = scaling_table(omega0, model, settings);
  if (!scaling.infeasible_pairs.empty()) {
    const auto [s, p] = scaling.infeasible_pairs.front();
    std::ostringstream os;
    os << "no feasible scaling for coefficient vertex " << s
       << " at candidate vertex " << p << " (" << scaling.infeasible_pairs.size()
       << " infeasible pair(s) in total); the candidate shape cannot contract "
          "under the worst-case model";
    throw InfeasibleAtMinimum(os.str());
  }
  require(scaling.alpha > 0, "compute_contractive_set: zero scaling");

  const DcDecomposition dc = model.decomposition();
  const WorstCaseMajorant worst(dc, model.family);

  // The table lets every family member pick its own input, so its minimum
  // only bounds the certifiable scaling from above; a certificate needs one
  // input per vertex serving every member at a common scaling. Each vertex's
  // scaling is re-maximized against the family-wide worst case, limited only
  // by the configured range and the state box: a vertex's family-wide
  // optimum may legitimately exceed table entries contributed by other
  // vertices.
  ContractionSettings family_settings = settings;
  family_settings.gamma_max = std::min(settings.gamma_max, scaling.alpha_box);
  double alpha_applied = family_settings.gamma_max;
  for (int p = 0; p < omega0.num_vertices(); ++p) {
    const SubproblemResult r = family_vertex_subproblem(
        worst, omega0.vrep.vertex(p), omega0.hrep, model.noise, model.inputs,
        family_settings);
    if (!r.feasible) {
      std::ostringstream os;
      os << "no single input serves the whole coefficient family at candidate "
            "vertex "
         << p << " for any scaling up to " << family_settings.gamma_max
         << "; the candidate shape cannot contract under the worst-case model";
      throw InfeasibleAtMinimum(os.str());
    }
    alpha_applied = std::min(alpha_applied, r.alpha);
  }
  scaling.alpha = alpha_applied;

  const HPolytope scaled_h = scale(omega0.hrep, scaling.alpha);
  const VPolytope scaled_v(Matrix(scaling.alpha * omega0.vrep.vertices()));
  CandidatePolytope scaled{scaled_h, scaled_v, "scaled"};
  const Vector phi_w = facet_noise_support(scaled.hrep, model.noise);
  const int n_v = scaled.num_vertices();
  const int n_h = scaled.num_facets();
  const int q = model.family.count();

  // One input per scaled vertex, valid for the whole family at once.
  std::vector<Vector> controls(n_v);
  for (int p = 0; p < n_v; ++p) {
    const std::vector<ConvexConstraint> cons = facet_admission_constraints(
        worst, scaled.hrep, phi_w, settings.lambda_w, scaled.vrep.vertex(p));
    const auto [val, u] = minimize_max_constraint(cons, model.inputs);
    controls[p] = u;
    (void)val;
  }

  // Residual tensor over every family member, vertex, and facet.
  Certificate cert{scaled,
                   settings.lambda_w,
                   controls,
                   {},
                   -std::numeric_limits<double>::infinity(),
                   {-1, -1, -1},
                   phi_w,
                   scaling.alpha,
                   0};
  cert.residual_tensor.reserve(q);
  for (int s = 0; s < q; ++s) {
    const std::vector<DcPair> rows = dc.decompose(model.family.combos[s]);
    Matrix r(n_v, n_h);
    for (int p = 0; p < n_v; ++p) {
      const Vector z = stack_state_input(scaled.vrep.vertex(p), controls[p]);
      for (int i = 0; i < n_h; ++i) {
        const Vector c = scaled.hrep.normals().row(i).transpose();
        r(p, i) = bound_value(rows, c, z) - settings.lambda_w + phi_w(i);
        if (r(p, i) > cert.max_residual) {
          cert.max_residual = r(p, i);
          cert.argmax_residual = {s, p, i};
        }
      }
    }
    cert.residual_tensor.push_back(std::move(r));
  }
  if (cert.max_residual > settings.residual_tol) {
    std::ostringstream os;
    os << "certificate residual " << cert.max_residual
       << " exceeds the acceptance threshold " << settings.residual_tol
       << " at family member " << cert.argmax_residual[0] << ", vertex "
       << cert.argmax_residual[1] << ", facet " << cert.argmax_residual[2];
    throw Error(os.str());
  }
  return SynthesisOutput{std::move(scaling), std::move(cert)};
}

CertificateCheck check_certificate(const Certificate& cert,
                                   const RobustModel& model, double tol) {
  const DcDecomposition dc = model.decomposition();
  const Vector phi_w = facet_noise_support(cert.polytope.hrep, model.noise);
  const int n_v = cert.polytope.num_vertices();
  const int n_h = cert.polytope.num_facets();
  require(static_cast<int>(cert.controls.size()) == n_v,
          "check_certificate: control count mismatch");

  CertificateCheck check;
  check.max_residual = -std::numeric_limits<double>::infinity();
  check.controls_feasible = true;
  for (const Vector& u : cert.controls)
    if (!model.inputs.contains(u, 1e-9)) check.controls_feasible = false;

  for (int s = 0; s < model.family.count(); ++s) {
    const std::vector<DcPair> rows = dc.decompose(model.family.combos[s]);
    for (int p = 0; p < n_v; ++p) {
      const Vector z =
          stack_state_input(cert.polytope.vrep.vertex(p), cert.controls[p]);
      for (int i = 0; i < n_h; ++i) {
        const Vector c = cert.polytope.hrep.normals().row(i).transpose();
        const double r = bound_value(rows, c, z) - cert.lambda_w + phi_w(i);
        if (r > check.max_residual) {
          check.max_residual = r;
          check.argmax = {s, p, i};
        }
      }
    }
  }
  check.pass = check.controls_feasible && check.max_residual <= tol;
  return check;
}

Vector vertex_control_law(const Certificate& cert, const Vector& x) {
  const Vector alpha = barycentric_coefficients(cert.polytope.vrep, x);
  const int m = static_cast<int>(cert.controls.front().size());
  Vector u = Vector::Zero(m);
  for (int p = 0; p < static_cast<int>(cert.controls.size()); ++p)
    u += alpha(p) * cert.controls[p];
  return u;
}

// ---- Enlarging ------------------------------------------------------------

EnlargeResult enlarge_random(const Certificate& cert, const RobustModel& model,
                             int n_candidates, std::uint64_t seed,
                             const ContractionSettings& settings) {
  require(n_candidates >= 0, "enlarge_random: negative candidate count");
  const DcDecomposition dc = model.decomposition();
  const WorstCaseMajorant worst(dc, model.family);
  const Vector phi_w = facet_noise_support(cert.polytope.hrep, model.noise);

  std::vector<AdmittedPoint> admitted;
  std::vector<double> areas;
  VPolytope hull = cert.polytope.vrep;
  CounterRng rng(seed, 0);
  const bool planar = cert.polytope.dim() == 2;
  (void)settings;

  // Admissible points live near the certified set, not across the whole
  // state box: sample a doubled copy of the hull's bounding box, clipped
  // to the state box, so candidates have a real chance of admission.
  const int n = cert.polytope.dim();
  Vector sample_hw(n);
  for (int i = 0; i < n; ++i) {
    const double extent =
        cert.polytope.vrep.vertices().col(i).cwiseAbs().maxCoeff();
    const double box_hi =
        model.state_box.center(i) + model.state_box.half_widths(i);
    sample_hw(i) = std::min(2.0 * extent, box_hi);
  }
  const Box sample_box(sample_hw);

  for (int k = 0; k < n_candidates; ++k) {
    const Vector xhat = sample_box.sample(rng);
    const std::vector<ConvexConstraint> cons = facet_admission_constraints(
        worst, cert.polytope.hrep, phi_w, cert.lambda_w, xhat);
    const auto [val, u] = minimize_max_constraint(cons, model.inputs);
    if (val > 1e-9) continue;
    admitted.push_back(AdmittedPoint{xhat, u, val});
    hull = convex_hull_add(hull, xhat);
    if (planar) areas.push_back(polygon_area(hull));
  }

  return EnlargeResult{
      CandidatePolytope{facet_representation(hull), hull, "enlarged"},
      std::move(admitted), std::move(areas), n_candidates};
}

std::vector<DirectionalPoint> enlarge_directional(
    const Certificate& cert, const RobustModel& model,
    const std::vector<Vector>& directions,
    const ContractionSettings& settings) {
  const DcDecomposition dc = model.decomposition();
  const WorstCaseMajorant worst(dc, model.family);
  const Vector phi_w = facet_noise_support(cert.polytope.hrep, model.noise);
  const int n = model.state_box.dim();
  const int m = model.inputs.dim();

  std::vector<DirectionalPoint> out;
  out.reserve(directions.size());
  for (const Vector& c : directions) {
    DirectionalPoint point;
    point.direction = c;
    require(c.size() == n, "enlarge_directional: direction dimension");
    if (c.cwiseAbs().maxCoeff() <= 1e-12) {
      point.degenerate = true;
      out.push_back(std::move(point));
      continue;
    }

    Vector objective = Vector::Zero(n + m);
    objective.head(n) = c;
    Vector lower(n + m), upper(n + m);
    lower.head(n) = model.state_box.center - model.state_box.half_widths;
    upper.head(n) = model.state_box.center + model.state_box.half_widths;
    lower.tail(m) = model.inputs.lower();
    upper.tail(m) = model.inputs.upper();

    std::vector<ConvexConstraint> cons;
    for (int i = 0; i < cert.polytope.num_facets(); ++i) {
      const Vector h = cert.polytope.hrep.normals().row(i).transpose();
      const double offset = phi_w(i) - cert.lambda_w;
      cons.push_back(ConvexConstraint{
          [&worst, h, offset](const Vector& z) {
            return worst.value(h, z) + offset;
          },
          [&worst, h](const Vector& z) { return worst.gradient(h, z); }});
    }
    if (!model.inputs.is_box()) {
      const Matrix& H = model.inputs.hrep().normals();
      const Vector& b = model.inputs.hrep().offsets();
      for (int r = 0; r < H.rows(); ++r) {
        Vector g = Vector::Zero(n + m);
        g.tail(m) = H.row(r).transpose();
        const double off = b(r);
        cons.push_back(ConvexConstraint{
            [g, off](const Vector& z) { return g.dot(z) - off; },
            [g](const Vector&) { return g; }});
      }
    }

    const auto res =
        maximize_linear_over_convex(objective, lower, upper, cons, 1e-9);
    if (res.has_value()) {
      point.feasible = true;
      point.point = res->first.head(n);
      point.control = res->first.tail(m);
      point.objective = res->second;
    }
    out.push_back(std::move(point));
  }
  (void)settings;
  return out;
}

}  // namespace dcinv
