#include "dcinv/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "dcinv/linsolve.hpp"

namespace dcinv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw Error(msg);
}
}  // namespace

// ---- HPolytope ------------------------------------------------------------

HPolytope::HPolytope(Matrix normals, Vector offsets)
    : normals_(std::move(normals)), offsets_(std::move(offsets)) {
  require(normals_.rows() == offsets_.size(),
          "HPolytope: row count does not match offset count");
  require(normals_.rows() > 0, "HPolytope: at least one halfspace required");
  require(normals_.allFinite() && offsets_.allFinite(),
          "HPolytope: non-finite entries");
}

HPolytope HPolytope::normalized(Matrix normals) {
  const int m = static_cast<int>(normals.rows());
  return HPolytope(std::move(normals), Vector::Ones(m));
}

bool HPolytope::is_normalized() const {
  return (offsets_.array() - 1.0).abs().maxCoeff() <= 1e-12;
}

// ---- VPolytope ------------------------------------------------------------

VPolytope::VPolytope(Matrix vertices) : vertices_(std::move(vertices)) {
  require(vertices_.rows() > 0, "VPolytope: empty vertex list");
  require(vertices_.allFinite(), "VPolytope: non-finite vertex");
}

VPolytope VPolytope::from_points(const Matrix& points) {
  require(points.rows() > 0, "VPolytope: empty point cloud");
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());

  // Deduplicate relative to the cloud diameter.
  double diam = 0.0;
  for (int j = 0; j < d; ++j)
    diam = std::max(diam, points.col(j).maxCoeff() - points.col(j).minCoeff());
  const double dedup_tol = 1e-9 * std::max(1.0, diam);
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    bool dup = false;
    for (int k : keep) {
      if ((points.row(i) - points.row(k)).cwiseAbs().maxCoeff() <= dedup_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }

  // Drop points expressible as convex combinations of the other survivors.
  std::vector<char> extreme(keep.size(), 1);
  if (keep.size() > 1) {
    for (size_t i = 0; i < keep.size(); ++i) {
      Matrix A(d + 1, static_cast<int>(keep.size()) - 1);
      int col = 0;
      for (size_t k = 0; k < keep.size(); ++k) {
        if (k == i) continue;
        A.col(col).head(d) = points.row(keep[k]).transpose();
        A(d, col) = 1.0;
        ++col;
      }
      Vector b(d + 1);
      b.head(d) = points.row(keep[i]).transpose();
      b(d) = 1.0;
      try {
        nonneg_min_norm(A, b, 1e-8 * std::max(1.0, diam));
        extreme[i] = 0;  // representable without itself
      } catch (const OutsideHull&) {
        extreme[i] = 1;
      }
    }
  }
  int count = 0;
  for (char e : extreme) count += e;
  require(count > 0, "VPolytope: no extreme points survived reduction");
  Matrix out(count, d);
  int r = 0;
  for (size_t i = 0; i < keep.size(); ++i)
    if (extreme[i]) out.row(r++) = points.row(keep[i]);
  return VPolytope(std::move(out));
}

// ---- Box ------------------------------------------------------------------

Box::Box(Vector hw) : half_widths(std::move(hw)) {
  require(half_widths.size() > 0, "Box: zero-dimensional");
  require((half_widths.array() >= 0).all(), "Box: negative half-width");
  center = Vector::Zero(half_widths.size());
}

Box::Box(Vector hw, Vector c) : half_widths(std::move(hw)), center(std::move(c)) {
  require(half_widths.size() > 0, "Box: zero-dimensional");
  require(half_widths.size() == center.size(), "Box: size mismatch");
  require((half_widths.array() >= 0).all(), "Box: negative half-width");
}

Box Box::cube(int dim, double half_width) {
  require(dim > 0 && half_width >= 0, "Box::cube: bad arguments");
  return Box(Vector::Constant(dim, half_width));
}

bool Box::contains(const Vector& x, double tol) const {
  require(x.size() == dim(), "Box::contains: dimension mismatch");
  return ((x - center).cwiseAbs() - half_widths).maxCoeff() <= tol;
}

Vector Box::sample(CounterRng& rng) const {
  Vector x(dim());
  for (int i = 0; i < dim(); ++i)
    x(i) = center(i) + rng.symmetric(half_widths(i));
  return x;
}

HPolytope Box::to_hpolytope() const {
  const int d = dim();
  Matrix H(2 * d, d);
  Vector b(2 * d);
  H.topRows(d) = Matrix::Identity(d, d);
  H.bottomRows(d) = -Matrix::Identity(d, d);
  b.head(d) = center + half_widths;
  b.tail(d) = half_widths - center;
  return HPolytope(std::move(H), std::move(b));
}

VPolytope Box::corners() const {
  const int d = dim();
  require(d <= 24, "Box::corners: dimension too large to enumerate");
  const int n = 1 << d;
  Matrix v(n, d);
  for (int mask = 0; mask < n; ++mask)
    for (int j = 0; j < d; ++j)
      v(mask, j) = center(j) +
                   (((mask >> j) & 1) ? half_widths(j) : -half_widths(j));
  return VPolytope(std::move(v));
}

// ---- Support functions ----------------------------------------------------

double support_function(const Box& b, const Vector& c) {
  require(c.size() == b.dim(), "support_function: dimension mismatch");
  return c.dot(b.center) + b.half_widths.dot(c.cwiseAbs());
}

double support_function(const VPolytope& v, const Vector& c) {
  require(c.size() == v.dim(), "support_function: dimension mismatch");
  return (v.vertices() * c).maxCoeff();
}

double support_function(const HPolytope& p, const Vector& c) {
  require(c.size() == p.dim(), "support_function: dimension mismatch");
  LpProblem lp = LpProblem::with_rows(true, c, p.normals(), p.offsets());
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::Infeasible)
    throw EmptySet("support function of an empty halfspace intersection");
  if (sol.status == LpStatus::Unbounded) {
    std::ostringstream os;
    os << "support function unbounded along direction [";
    for (int i = 0; i < sol.ray.size(); ++i)
      os << (i ? ", " : "") << sol.ray(i);
    os << "]";
    throw UnboundedSet(os.str());
  }
  return sol.value;
}

// ---- Bounding box ---------------------------------------------------------

Box bounding_box(const HPolytope& p) {
  const int d = p.dim();
  Vector lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    Vector c = Vector::Zero(d);
    c(i) = 1.0;
    LpProblem lp = LpProblem::with_rows(true, c, p.normals(), p.offsets());
    LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::Infeasible)
      throw EmptySet("bounding box of an empty halfspace intersection");
    if (sol.status == LpStatus::Unbounded) {
      std::ostringstream os;
      os << "set unbounded: coordinate " << i << " has no upper bound";
      throw UnboundedSet(os.str());
    }
    hi(i) = sol.value;
    lp.objective = -c;
    sol = solve_lp(lp);
    if (sol.status == LpStatus::Unbounded) {
      std::ostringstream os;
      os << "set unbounded: coordinate " << i << " has no lower bound";
      throw UnboundedSet(os.str());
    }
    lo(i) = -sol.value;
  }
  return Box(0.5 * (hi - lo), 0.5 * (hi + lo));
}

// ---- Vertex enumeration (double description) ------------------------------

namespace {

struct DdVertex {
  Vector x;
  std::vector<int> active;  // sorted indices into the inserted-row list
};

std::vector<int> common_active(const std::vector<int>& a,
                               const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

int matrix_rank(const Matrix& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(rel_tol);
  return static_cast<int>(qr.rank());
}

// Recomputes each vertex's active set against rows [0, n_rows).
void refresh_active_sets(std::vector<DdVertex>& verts, const Matrix& rows,
                         const Vector& rhs, int n_rows) {
  for (DdVertex& v : verts) {
    v.active.clear();
    for (int r = 0; r < n_rows; ++r) {
      const double lhs = rows.row(r).dot(v.x);
      const double tol = 1e-9 * (1.0 + std::abs(rhs(r)) + std::abs(lhs));
      if (std::abs(lhs - rhs(r)) <= tol) v.active.push_back(r);
    }
  }
}

}  // namespace

VPolytope enumerate_vertices(const HPolytope& p) {
  const int d = p.dim();
  const Box bb = bounding_box(p);  // throws UnboundedSet / EmptySet

  // Strictly containing start box so no true vertex touches it.
  const Box big(2.0 * bb.half_widths + Vector::Ones(d), bb.center);

  const int m = p.num_rows();
  Matrix rows(2 * d + m, d);
  Vector rhs(2 * d + m);
  {
    const HPolytope boxh = big.to_hpolytope();
    rows.topRows(2 * d) = boxh.normals();
    rhs.head(2 * d) = boxh.offsets();
  }
  // Deterministic lexicographic insertion order for the input rows.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int j = 0; j < d; ++j) {
      if (p.normals()(a, j) != p.normals()(b, j))
        return p.normals()(a, j) < p.normals()(b, j);
    }
    return p.offsets()(a) < p.offsets()(b);
  });
  for (int k = 0; k < m; ++k) {
    rows.row(2 * d + k) = p.normals().row(order[k]);
    rhs(2 * d + k) = p.offsets()(order[k]);
  }

  std::vector<DdVertex> verts;
  {
    const VPolytope corners = big.corners();
    for (int i = 0; i < corners.size(); ++i)
      verts.push_back({corners.vertex(i), {}});
  }
  refresh_active_sets(verts, rows, rhs, 2 * d);

  const double rank_tol = 1e-8;
  for (int k = 0; k < m; ++k) {
    const int gidx = 2 * d + k;
    const Vector h = rows.row(gidx).transpose();
    const double boff = rhs(gidx);

    std::vector<double> margin(verts.size());
    double max_abs = 0.0;
    for (size_t i = 0; i < verts.size(); ++i) {
      margin[i] = h.dot(verts[i].x) - boff;
      max_abs = std::max(max_abs, std::abs(margin[i] + boff));
    }
    const double tol_on = 1e-9 * (1.0 + std::abs(boff) + max_abs);

    std::vector<int> in_idx, out_idx;
    for (size_t i = 0; i < verts.size(); ++i) {
      if (margin[i] > tol_on)
        out_idx.push_back(static_cast<int>(i));
      else if (margin[i] < -tol_on)
        in_idx.push_back(static_cast<int>(i));
    }
    if (out_idx.empty()) {
      refresh_active_sets(verts, rows, rhs, gidx + 1);
      continue;
    }

    std::vector<DdVertex> next;
    for (size_t i = 0; i < verts.size(); ++i)
      if (margin[i] <= tol_on) next.push_back(verts[i]);

    for (int i : in_idx) {
      for (int j : out_idx) {
        const std::vector<int> common =
            common_active(verts[i].active, verts[j].active);
        if (static_cast<int>(common.size()) < d - 1) continue;
        if (d >= 2) {
          Matrix sub(static_cast<int>(common.size()), d);
          for (size_t c = 0; c < common.size(); ++c)
            sub.row(static_cast<int>(c)) = rows.row(common[c]);
          if (matrix_rank(sub, rank_tol) != d - 1) continue;
        }
        const double t = -margin[i] / (margin[j] - margin[i]);
        DdVertex nv;
        nv.x = verts[i].x + t * (verts[j].x - verts[i].x);
        next.push_back(std::move(nv));
      }
    }
    verts = std::move(next);
    refresh_active_sets(verts, rows, rhs, gidx + 1);
    if (verts.size() > 1000000)
      throw Error("vertex enumeration exceeded the safety cap");
    if (verts.empty())
      throw EmptySet("halfspace insertion emptied the vertex set");
  }

  // Deduplicate relative to the diameter.
  double diam = 0.0;
  for (const DdVertex& a : verts)
    for (const DdVertex& b : verts)
      diam = std::max(diam, (a.x - b.x).cwiseAbs().maxCoeff());
  const double dedup_tol = 1e-9 * std::max(1.0, diam);
  std::vector<Vector> unique;
  for (const DdVertex& v : verts) {
    bool dup = false;
    for (const Vector& u : unique) {
      if ((u - v.x).cwiseAbs().maxCoeff() <= dedup_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(v.x);
  }

  // Keep genuine vertices: d independent active input rows, strict
  // feasibility for every input row, and no contact with the start box.
  std::vector<Vector> final_pts;
  for (const Vector& x : unique) {
    bool on_box = false;
    for (int r = 0; r < 2 * d; ++r) {
      const double lhs = rows.row(r).dot(x);
      if (std::abs(lhs - rhs(r)) <= 1e-7 * (1.0 + std::abs(rhs(r)))) {
        on_box = true;
        break;
      }
    }
    if (on_box)
      throw SolverBreakdown(
          "vertex enumeration: a candidate touched the bounding start box");
    std::vector<int> act;
    double worst = -kInf;
    for (int r = 2 * d; r < rows.rows(); ++r) {
      const double lhs = rows.row(r).dot(x);
      const double tol = 1e-8 * (1.0 + std::abs(rhs(r)) + std::abs(lhs));
      worst = std::max(worst, lhs - rhs(r));
      if (std::abs(lhs - rhs(r)) <= tol) act.push_back(r);
    }
    if (worst > 1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()))
      throw SolverBreakdown(
          "vertex enumeration: infeasible candidate survived insertion");
    Matrix sub(static_cast<int>(act.size()), d);
    for (size_t c = 0; c < act.size(); ++c)
      sub.row(static_cast<int>(c)) = rows.row(act[c]);
    if (matrix_rank(sub, rank_tol) == d) final_pts.push_back(x);
  }
  if (final_pts.empty())
    throw DegenerateInput(
        "vertex enumeration found no full-rank vertices; the set appears "
        "lower-dimensional");

  std::sort(final_pts.begin(), final_pts.end(),
            [](const Vector& a, const Vector& b) {
              for (int j = 0; j < a.size(); ++j) {
                if (a(j) != b(j)) return a(j) < b(j);
              }
              return false;
            });
  Matrix out(static_cast<int>(final_pts.size()), d);
  for (size_t i = 0; i < final_pts.size(); ++i)
    out.row(static_cast<int>(i)) = final_pts[i].transpose();
  return VPolytope(std::move(out));
}

// ---- Facet representation (polar dual) ------------------------------------

HPolytope facet_representation(const VPolytope& v) {
  const int d = v.dim();
  const int n = v.size();
  if (n < d + 1)
    throw DegenerateInput(
        "facet representation needs a full-dimensional vertex set");
  const Vector centroid = v.vertices().colwise().mean().transpose();
  Matrix centered = v.vertices();
  centered.rowwise() -= centroid.transpose();
  Eigen::JacobiSVD<Matrix> svd(centered);
  const double smax = svd.singularValues()(0);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10 * std::max(1.0, smax)) ++rank;
  if (rank < d)
    throw DegenerateInput(
        "facet representation needs a full-dimensional vertex set");

  const HPolytope polar = HPolytope::normalized(v.vertices());
  VPolytope polar_vertices = [&]() {
    try {
      return enumerate_vertices(polar);
    } catch (const UnboundedSet&) {
      throw OriginNotInterior(
          "facet representation requires the origin strictly inside the "
          "hull");
    }
  }();
  return HPolytope::normalized(polar_vertices.vertices());
}

// ---- Scaling, membership, hull operations ---------------------------------

HPolytope scale(const HPolytope& p, double a) {
  if (!(a > 0)) throw DegenerateInput("scale: factor must be positive");
  if (!p.is_normalized())
    throw DegenerateInput("scale: input must be in normalized form");
  return HPolytope::normalized(p.normals() / a);
}

bool contains(const HPolytope& p, const Vector& x, double tol) {
  require(x.size() == p.dim(), "contains: dimension mismatch");
  return (p.normals() * x - p.offsets()).maxCoeff() <= tol;
}

VPolytope convex_hull_add(const VPolytope& v, const Vector& xhat) {
  require(xhat.size() == v.dim(), "convex_hull_add: dimension mismatch");
  const int d = v.dim();
  Matrix A(d + 1, v.size());
  A.topRows(d) = v.vertices().transpose();
  A.bottomRows(1).setOnes();
  Vector b(d + 1);
  b.head(d) = xhat;
  b(d) = 1.0;
  try {
    nonneg_min_norm(A, b, 1e-8);
    return v;  // already inside
  } catch (const OutsideHull&) {
  }
  Matrix stacked(v.size() + 1, d);
  stacked.topRows(v.size()) = v.vertices();
  stacked.bottomRows(1) = xhat.transpose();
  return VPolytope::from_points(stacked);
}

Vector barycentric_coefficients(const VPolytope& v, const Vector& x) {
  require(x.size() == v.dim(), "barycentric_coefficients: dimension mismatch");
  const int d = v.dim();
  Matrix A(d + 1, v.size());
  A.topRows(d) = v.vertices().transpose();
  A.bottomRows(1).setOnes();
  Vector b(d + 1);
  b.head(d) = x;
  b(d) = 1.0;
  return nonneg_min_norm(A, b, 1e-8);
}

Vector sample_point(const VPolytope& v, CounterRng& rng) {
  Vector w(v.size());
  for (int i = 0; i < v.size(); ++i)
    w(i) = -std::log(1.0 - rng.uniform());
  w /= w.sum();
  return v.vertices().transpose() * w;
}

Vector sample_point(const VPolytope& v, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  return sample_point(v, rng);
}

VPolytope cartesian_product(const VPolytope& a, const VPolytope& b) {
  Matrix out(a.size() * b.size(), a.dim() + b.dim());
  int r = 0;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < b.size(); ++j) {
      out.row(r).head(a.dim()) = a.vertices().row(i);
      out.row(r).tail(b.dim()) = b.vertices().row(j);
      ++r;
    }
  }
  return VPolytope(std::move(out));
}

HPolytope remove_redundant_rows(const HPolytope& p) {
  const int m = p.num_rows();
  std::vector<char> kept(m, 1);
  for (int r = 0; r < m; ++r) {
    std::vector<int> others;
    for (int i = 0; i < m; ++i)
      if (i != r && kept[i]) others.push_back(i);
    if (others.empty()) continue;
    Matrix rows(static_cast<int>(others.size()) + 1, p.dim());
    Vector rhs(rows.rows());
    for (size_t i = 0; i < others.size(); ++i) {
      rows.row(static_cast<int>(i)) = p.normals().row(others[i]);
      rhs(static_cast<int>(i)) = p.offsets()(others[i]);
    }
    // Keeps the test LP bounded along the row's own direction.
    rows.bottomRows(1) = p.normals().row(r);
    rhs(rows.rows() - 1) = p.offsets()(r) + 1.0;
    LpProblem lp = LpProblem::with_rows(
        true, p.normals().row(r).transpose(), rows, rhs);
    LpSolution sol;
    try {
      sol = solve_lp(lp);
    } catch (const SolverBreakdown&) {
      continue;  // keep the row when in doubt
    }
    if (sol.status == LpStatus::Optimal &&
        sol.value <= p.offsets()(r) + 1e-9 * (1.0 + std::abs(p.offsets()(r))))
      kept[r] = 0;
  }
  int count = 0;
  for (char k : kept) count += k;
  require(count > 0, "remove_redundant_rows: all rows removed");
  Matrix H(count, p.dim());
  Vector b(count);
  int w = 0;
  for (int r = 0; r < m; ++r) {
    if (!kept[r]) continue;
    H.row(w) = p.normals().row(r);
    b(w) = p.offsets()(r);
    ++w;
  }
  return HPolytope(std::move(H), std::move(b));
}

std::vector<int> ccw_order_2d(const VPolytope& v) {
  if (v.dim() != 2)
    throw DegenerateInput("counterclockwise ordering requires dimension 2");
  const Vector c = v.vertices().colwise().mean().transpose();
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> ang(v.size()), rad(v.size());
  for (int i = 0; i < v.size(); ++i) {
    const Vector p = v.vertex(i) - c;
    ang[i] = std::atan2(p(1), p(0));
    rad[i] = p.norm();
  }
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (ang[a] != ang[b]) return ang[a] < ang[b];
    if (rad[a] != rad[b]) return rad[a] < rad[b];
    return a < b;
  });
  return idx;
}

double polygon_area(const VPolytope& v) {
  if (v.dim() != 2)
    throw DegenerateInput("polygon area requires dimension 2");
  const std::vector<int> order = ccw_order_2d(v);
  double twice = 0.0;
  const int n = static_cast<int>(order.size());
  for (int i = 0; i < n; ++i) {
    const Vector a = v.vertex(order[i]);
    const Vector b = v.vertex(order[(i + 1) % n]);
    twice += a(0) * b(1) - b(0) * a(1);
  }
  return 0.5 * std::abs(twice);
}

}  // namespace dcinv
