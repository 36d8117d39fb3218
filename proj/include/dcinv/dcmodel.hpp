#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dcinv/types.hpp"

namespace dcinv {

// ---- Polynomial model f(x, u) = Theta * phi(x, u) ------------------------

/// One monomial over the stacked variable z = (x; u), total degree 1 or 2.
struct Monomial {
  Eigen::VectorXi exponents;  // size n + m, entries >= 0, sum in {1, 2}

  int degree() const { return exponents.sum(); }
  double evaluate(const Vector& z) const;

  static Monomial linear(int dim, int index);
  static Monomial quadratic(int dim, int index);
  static Monomial bilinear(int dim, int first, int second);
};

// Named atom constructors over state dimension n and input dimension m.
// Indices are zero-based within their own group.
Monomial state_linear(int n, int m, int j);
Monomial input_linear(int n, int m, int l);
Monomial state_input_bilinear(int n, int m, int j, int l);
Monomial state_quadratic(int n, int m, int j);
Monomial input_quadratic(int n, int m, int l);

/// Ordered monomial dictionary defining phi : R^n x R^m -> R^{d}.
class PolyBasis {
 public:
  PolyBasis(int state_dim, int input_dim, std::vector<Monomial> atoms);

  int state_dim() const { return state_dim_; }
  int input_dim() const { return input_dim_; }
  int size() const { return static_cast<int>(atoms_.size()); }
  const Monomial& atom(int j) const { return atoms_[j]; }

  /// phi(x, u), stacking z = (x; u).
  Vector evaluate(const Vector& x, const Vector& u) const;
  Vector evaluate_z(const Vector& z) const;

 private:
  int state_dim_;
  int input_dim_;
  std::vector<Monomial> atoms_;
};

/// f(x, u) = theta * phi(x, u); theta is n x d.
Vector evaluate_f(const Matrix& theta, const PolyBasis& basis, const Vector& x,
                  const Vector& u);

/// Row-major flattening (row j of the matrix = coefficients of component j);
/// the inverse reshapes a length n*d vector back to n x d.
Vector flatten_coefficients(const Matrix& theta);
Matrix unflatten_coefficients(const Vector& theta_vec, int rows, int cols);

// ---- Convex quadratic functions ------------------------------------------

/// q(z) = linear.z + sum_k weight_k * (direction_k . z)^2 with weight_k >= 0.
/// Closed under nonnegative scaling and addition; q(0) = 0 always.
struct ConvexQuadratic {
  Vector linear;                                    // size of z
  std::vector<std::pair<double, Vector>> squares;   // (weight, direction)

  double value(const Vector& z) const;
  Vector gradient(const Vector& z) const;

  /// First-order expansion at z = 0; equals the linear part since q(0) = 0.
  const Vector& linearized_at_origin() const { return linear; }

  void add_scaled(const ConvexQuadratic& other, double factor);  // factor >= 0
  static ConvexQuadratic zero(int dim);
};

/// One row f_j = g - h with both parts convex.
struct DcPair {
  ConvexQuadratic g;
  ConvexQuadratic h;
};

// ---- Difference-of-convex decompositions ---------------------------------

enum class DcScheme { Shifted, SignSplit };

/// Splits every row of a coefficient matrix into convex g and h parts.
///
/// Shifted: each degree-2 atom with coefficient a and magnitude cap M >= |a|
/// contributes
///   a*s*t : g += ((M+a)/4)(s+t)^2 + ((M-a)/4)(s-t)^2,
///           h += (M/4)(s+t)^2 + (M/4)(s-t)^2
///   a*s^2 : g += ((M+a)/2) s^2,  h += ((M-a)/2) s^2
/// so both parts depend affinely on the coefficients, and h has no linear
/// term. Linear atoms go to g.
///
/// SignSplit: placement of each degree-2 atom is fixed up front by a sign
/// pattern (per row and atom); a coefficient of the opposite sign is
/// rejected. Placement + puts a*s^2 (and the (s+t)^2 half of a bilinear
/// atom) into g; placement - mirrors into h. Not affine in the coefficients
/// across sign changes, hence the fixed pattern.
class DcDecomposition {
 public:
  /// atom_caps: per-atom M, one entry per basis atom, applied to every
  /// state row (entries for linear atoms are ignored). Every coefficient
  /// matrix later decomposed must obey |theta(r, j)| <= atom_caps(j).
  static DcDecomposition shifted(const PolyBasis& basis, Vector atom_caps);

  /// Per-row caps: cap_table is state_dim x size; row r of a decomposed
  /// matrix must obey |theta(r, j)| <= cap_table(r, j). Strictly tighter
  /// than a shared per-atom cap when coefficient magnitudes differ across
  /// rows, and sound for exactly the same reason: each row's split only
  /// needs to cover that row's coefficients.
  static DcDecomposition shifted(const PolyBasis& basis, Matrix cap_table);

  /// sign_reference: n x d matrix whose signs fix the placement (0 counts
  /// as +). Entries for linear atoms are ignored.
  static DcDecomposition sign_split(const PolyBasis& basis,
                                    Matrix sign_reference);

  DcScheme scheme() const { return scheme_; }
  const PolyBasis& basis() const { return basis_; }

  /// Per-row convex splits for one coefficient matrix. Throws
  /// DegenerateInput on a cap or sign-placement violation.
  std::vector<DcPair> decompose(const Matrix& theta) const;

 private:
  DcDecomposition(DcScheme scheme, PolyBasis basis);

  DcScheme scheme_;
  PolyBasis basis_;
  Matrix atom_caps_;      // Shifted: state_dim x size cap table
  Matrix sign_reference_; // SignSplit
};

/// Elementwise max of |theta| over a family, per atom column: the tightest
/// shared cap vector for DcDecomposition::shifted.
Vector atom_caps_over(const std::vector<Matrix>& thetas);

/// Elementwise max of |theta| over a family, per row and atom: the tightest
/// per-row cap table for DcDecomposition::shifted.
Matrix atom_cap_table_over(const std::vector<Matrix>& thetas);

/// Convex majorant of z -> c . (theta * phi(z)) built from the row splits:
///   F(z) = sum_{c_j >= 0} c_j (g_j(z) - hL_j(z))
///        + sum_{c_j <  0} c_j (gL_j(z) - h_j(z))
/// with gL, hL the origin linearizations. Equals c.f at z = 0, majorizes
/// c.f everywhere, is convex in z, positively homogeneous in c, and (for
/// the shifted scheme) affine in the coefficient matrix.
ConvexQuadratic convex_bound(const std::vector<DcPair>& rows, const Vector& c);

/// Direct evaluations of the majorant and its z-gradient without building
/// the combined quadratic (convenience for tests and one-off queries).
double bound_value(const std::vector<DcPair>& rows, const Vector& c,
                   const Vector& z);
Vector bound_gradient(const std::vector<DcPair>& rows, const Vector& c,
                      const Vector& z);

}  // namespace dcinv
