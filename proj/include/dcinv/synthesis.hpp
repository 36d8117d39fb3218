#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcinv/consistency.hpp"
#include "dcinv/dcmodel.hpp"
#include "dcinv/geometry.hpp"
#include "dcinv/linsolve.hpp"
#include "dcinv/types.hpp"

namespace dcinv {

// ---- Candidate sets -------------------------------------------------------

/// A polytope carried in both representations, normalized to Hx <= 1 with
/// the origin strictly interior.
struct CandidatePolytope {
  HPolytope hrep;
  VPolytope vrep;
  std::string provenance;  // "initial" | "scaled" | "enlarged"

  int dim() const { return hrep.dim(); }
  int num_vertices() const { return vrep.size(); }
  int num_facets() const { return hrep.num_rows(); }
};

/// Builds both representations from an H-polytope (normalizes offsets,
/// enumerates vertices) and checks mutual consistency.
CandidatePolytope make_candidate(const HPolytope& h, std::string provenance);

/// Regular n_v-gon inscribed in the radius-r Euclidean circle (2-D),
/// first vertex at angle pi/n_v, as a normalized candidate.
CandidatePolytope regular_polygon_candidate(int n_v, double radius);

// ---- Problem data ---------------------------------------------------------

/// Everything the contraction conditions need besides the candidate set:
/// the basis, the coefficient vertex family, the disturbance box, the input
/// set, the state box, and the decomposition scheme.
struct RobustModel {
  PolyBasis basis;
  ThetaVertexFamily family;
  Box noise;        // disturbance set W; support eps_w * ||c||_1 for a box
  InputRegion inputs;
  Box state_box;    // X
  DcScheme scheme = DcScheme::Shifted;
  std::optional<Vector> cap_override;  // per-atom magnitude caps (shifted)

  /// Decomposition serving every matrix in the family (caps from the family
  /// unless overridden).
  DcDecomposition decomposition() const;
};

struct ContractionSettings {
  double lambda_w = 0.99;     // contraction factor in (0, 1]
  double gamma_min = 1e-6;
  double gamma_max = 1e3;
  double gamma_tol = 1e-6;    // bisection tolerance on the scaling
  double residual_tol = 1e-6; // certificate acceptance threshold
  int jobs = 1;               // subproblem worker threads
};

// ---- Worst case over the family -------------------------------------------

/// max over the coefficient family of the majorant F(z; c), exploiting the
/// product structure: the majorant is a sum of per-state-row terms, each
/// depending on one coefficient row only, so the family-wide maximum is a
/// sum of per-row maxima over the block vertex lists (q_1 + ... + q_n
/// evaluations instead of the q_1 * ... * q_n product).
class WorstCaseMajorant {
 public:
  WorstCaseMajorant(const DcDecomposition& dc,
                    const ThetaVertexFamily& family);

  double value(const Vector& c, const Vector& z) const;
  /// Subgradient at z: the argmax rows' gradients summed.
  Vector gradient(const Vector& c, const Vector& z) const;
  int state_dim() const { return static_cast<int>(row_pairs_.size()); }

 private:
  std::vector<std::vector<DcPair>> row_pairs_;  // [state row][block vertex]
};

/// phi_W per facet: support of the disturbance box along each facet normal.
Vector facet_noise_support(const HPolytope& h, const Box& noise);

/// Constraints over the input alone, at a fixed state x: for every facet i,
///   max_family F(x, u, H_i) + phi_w(i) - threshold <= 0.
/// The closures keep a reference to the majorant, which must outlive them.
std::vector<ConvexConstraint> facet_admission_constraints(
    const WorstCaseMajorant& majorant, const HPolytope& h, const Vector& phi_w,
    double threshold, const Vector& x);

// ---- Scaling subproblems (Algorithm core) ---------------------------------

struct SubproblemResult {
  double alpha = 0.0;   // largest certified scaling for this pair; 0 if none
  Vector u;             // feasible input at that scaling
  bool feasible = false;
  bool hit_gamma_max = false;
};

/// Largest gamma such that some u in U satisfies, for every facet i,
///   F(gamma * v, u, H_i; theta) <= lambda_w * gamma - phi_W(H_i).
/// This is the contraction condition of the gamma-scaled set evaluated at
/// its vertex gamma*v (the two forms agree by positive homogeneity of F
/// in its direction argument). Infeasibility is reported, not thrown.
SubproblemResult vertex_subproblem(const DcDecomposition& dc,
                                   const Matrix& theta, const Vector& vertex,
                                   const HPolytope& omega, const Box& noise,
                                   const InputRegion& inputs,
                                   const ContractionSettings& settings);

/// Family-wide variant: the same program with the worst case over the whole
/// coefficient family on the left-hand side, so the maximizing input is
/// valid for every member at once. Each per-member maximum bounds this from
/// above (a member-specific input may beat the shared one), which is why
/// the applied scaling comes from here while the table stays diagnostic.
SubproblemResult family_vertex_subproblem(const WorstCaseMajorant& majorant,
                                          const Vector& vertex,
                                          const HPolytope& omega,
                                          const Box& noise,
                                          const InputRegion& inputs,
                                          const ContractionSettings& settings);

struct ScalingResult {
  Matrix alpha_table;  // q x n_v; flagged-infeasible entries are 0
  double alpha = 0.0;  // min over the table (after X-clipping: applied value)
  int argmin_theta = -1;
  int argmin_vertex = -1;
  bool clipped_to_state_box = false;
  double alpha_unclipped = 0.0;
  double alpha_box = 0.0;  // largest scaling keeping the set inside the state box
  std::vector<std::pair<int, int>> infeasible_pairs;
  std::vector<std::pair<int, int>> capped_pairs;  // hit gamma_max
};

/// Runs the full q x n_v subproblem table for the candidate.
ScalingResult scaling_table(const CandidatePolytope& omega0,
                            const RobustModel& model,
                            const ContractionSettings& settings);

// ---- Certificates ---------------------------------------------------------

/// The contraction witness for a polytope P = {Hx <= 1}: per-vertex inputs
/// u^p such that for every coefficient vertex s, polytope vertex p, facet i
///   r[s][p][i] = F(v^p, u^p, H_i; theta_s) - lambda_w + phi_W(H_i) <= tol.
struct Certificate {
  CandidatePolytope polytope;
  double lambda_w = 0.0;
  std::vector<Vector> controls;        // one per vertex of polytope
  std::vector<Matrix> residual_tensor; // [s](p, i)
  double max_residual = 0.0;
  std::array<int, 3> argmax_residual = {-1, -1, -1};  // (s, p, i)
  Vector noise_support;                // phi_W per facet
  double alpha = 0.0;                  // scaling applied to reach this set
  std::uint64_t consistency_digest = 0;
};

struct SynthesisOutput {
  ScalingResult scaling;
  Certificate certificate;
};

/// Full pipeline step: scaling table -> alpha = min -> clip so the scaled
/// set stays inside the state box -> re-solve per-vertex controls at the
/// scaled vertices against the whole family -> residual tensor.
/// Throws InfeasibleAtMinimum when any subproblem pair is infeasible, and
/// Error when the final residuals exceed settings.residual_tol.
SynthesisOutput compute_contractive_set(const CandidatePolytope& omega0,
                                        const RobustModel& model,
                                        const ContractionSettings& settings);

struct CertificateCheck {
  bool pass = false;
  double max_residual = 0.0;
  std::array<int, 3> argmax = {-1, -1, -1};
  bool controls_feasible = false;  // every stored control lies in U
};

/// Recomputes the whole residual tensor from scratch (full triple loop)
/// and revalidates the stored controls.
CertificateCheck check_certificate(const Certificate& cert,
                                   const RobustModel& model,
                                   double tol = 1e-6);

/// Interpolated vertex control: u = sum_p alpha_p u^p with alpha the
/// barycentric coefficients of x in the certified polytope. Throws
/// OutsideHull when x is not in the set.
Vector vertex_control_law(const Certificate& cert, const Vector& x);

// ---- Enlarging ------------------------------------------------------------

struct AdmittedPoint {
  Vector point;
  Vector control;
  double worst_residual = 0.0;
};

struct EnlargeResult {
  CandidatePolytope enlarged;          // hull after all admissions
  std::vector<AdmittedPoint> admitted;
  std::vector<double> areas;           // 2-D: hull area after each admission
  int candidates_tested = 0;
};

/// Draws candidates uniformly in the state box; admits x_hat when some
/// u_hat in U keeps it mapping into lambda_w * (certified set) under every
/// coefficient vertex and worst-case noise:
///   F(x_hat, u_hat, H_i; theta_s) <= lambda_w - phi_W(H_i)  for all i, s,
/// with H fixed to the certified facets throughout. Admitted points are
/// hull-added in draw order.
EnlargeResult enlarge_random(const Certificate& cert, const RobustModel& model,
                             int n_candidates, std::uint64_t seed,
                             const ContractionSettings& settings);

struct DirectionalPoint {
  Vector direction;
  bool feasible = false;
  bool degenerate = false;  // zero direction
  Vector point;
  Vector control;
  double objective = 0.0;   // direction . point
};

/// Per direction c: maximize c . x_hat over (x_hat, u_hat) in X x U subject
/// to the same admission constraints as enlarge_random (imposed at x_hat).
std::vector<DirectionalPoint> enlarge_directional(
    const Certificate& cert, const RobustModel& model,
    const std::vector<Vector>& directions, const ContractionSettings& settings);

}  // namespace dcinv
