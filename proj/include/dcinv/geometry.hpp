#pragma once

#include <cstdint>
#include <vector>

#include "dcinv/errors.hpp"
#include "dcinv/rng.hpp"
#include "dcinv/types.hpp"

namespace dcinv {

/// Convex polytope in halfspace form {x : normals * x <= offsets}.
///
/// A polytope is "normalized" when every offset equals 1 (form Hx <= 1),
/// which requires the origin strictly inside.
class HPolytope {
 public:
  HPolytope(Matrix normals, Vector offsets);

  /// Hx <= 1 form.
  static HPolytope normalized(Matrix normals);

  const Matrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }
  int dim() const { return static_cast<int>(normals_.cols()); }
  int num_rows() const { return static_cast<int>(normals_.rows()); }
  bool is_normalized() const;

 private:
  Matrix normals_;
  Vector offsets_;
};

/// Convex polytope as a vertex list (one point per row).
///
/// Producers in this module return minimal representations: no vertex is a
/// convex combination of the others. The plain constructor trusts its input;
/// use from_points() to reduce an arbitrary point cloud.
class VPolytope {
 public:
  explicit VPolytope(Matrix vertices);

  /// Deduplicates and drops non-extreme points (LP test per point).
  static VPolytope from_points(const Matrix& points);

  const Matrix& vertices() const { return vertices_; }
  int dim() const { return static_cast<int>(vertices_.cols()); }
  int size() const { return static_cast<int>(vertices_.rows()); }
  Vector vertex(int p) const { return vertices_.row(p).transpose(); }

 private:
  Matrix vertices_;
};

/// Axis-aligned box {x : |x_i - center_i| <= half_widths_i}.
struct Box {
  Vector half_widths;
  Vector center;

  explicit Box(Vector hw);
  Box(Vector hw, Vector c);

  /// Cube of a given half-width centered at the origin.
  static Box cube(int dim, double half_width);

  int dim() const { return static_cast<int>(half_widths.size()); }
  bool contains(const Vector& x, double tol = 0.0) const;
  Vector sample(CounterRng& rng) const;
  HPolytope to_hpolytope() const;
  VPolytope corners() const;
};

// ---- Support functions: sup_{x in set} c.x -------------------------------

double support_function(const Box& b, const Vector& c);
double support_function(const VPolytope& v, const Vector& c);
/// LP-based; throws UnboundedSet / EmptySet.
double support_function(const HPolytope& p, const Vector& c);

// ---- Halfspace <-> vertex conversions ------------------------------------

/// Bounding box of an H-polytope via 2*dim support LPs.
/// Throws UnboundedSet (naming a coordinate recession direction) or EmptySet.
Box bounding_box(const HPolytope& p);

/// Exact vertex set of a bounded H-polytope.
///
/// Double-description run with deterministic (lexicographic) constraint
/// insertion; boundedness is verified up front so degenerate data fails
/// cleanly. Vertices are deduplicated at 1e-9 relative to the diameter and
/// returned in lexicographic order.
VPolytope enumerate_vertices(const HPolytope& p);

/// Minimal normalized H-representation (Hx <= 1) of a full-dimensional
/// vertex set with the origin strictly inside. Computed as the vertex
/// enumeration of the polar dual.
HPolytope facet_representation(const VPolytope& v);

/// {x : (H/a) x <= 1}; vertices scale by exactly a. Requires a > 0 and a
/// normalized input.
HPolytope scale(const HPolytope& p, double a);

bool contains(const HPolytope& p, const Vector& x, double tol);

/// Minimal vertex set of co(v ∪ {xhat}); returns v unchanged when xhat is
/// already inside.
VPolytope convex_hull_add(const VPolytope& v, const Vector& xhat);

/// Coefficients alpha >= 0, sum alpha = 1, sum alpha_p v^p = x (within 1e-8).
/// Among all valid coefficient vectors the minimum-Euclidean-norm one is
/// returned, so ties break deterministically. Throws OutsideHull.
Vector barycentric_coefficients(const VPolytope& v, const Vector& x);

/// Random point of co(v): a convex combination with weights from normalized
/// independent exponentials. Not uniform over the polytope; deterministic
/// per rng state.
Vector sample_point(const VPolytope& v, CounterRng& rng);
Vector sample_point(const VPolytope& v, std::uint64_t seed);

/// All |a|*|b| concatenated vertex pairs, a-major order.
VPolytope cartesian_product(const VPolytope& a, const VPolytope& b);

/// Drops rows that cannot be active (LP test per row). The set is unchanged.
HPolytope remove_redundant_rows(const HPolytope& p);

/// Counterclockwise vertex order around the centroid (2-D only).
std::vector<int> ccw_order_2d(const VPolytope& v);

/// Area of the convex hull of a 2-D vertex set (shoelace over the
/// counterclockwise ordering). Throws DegenerateInput when dim != 2.
double polygon_area(const VPolytope& v);

}  // namespace dcinv
