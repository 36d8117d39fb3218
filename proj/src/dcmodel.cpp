#include "dcinv/dcmodel.hpp"

#include <cmath>
#include <sstream>

#include "dcinv/errors.hpp"

namespace dcinv {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw Error(msg);
}

// Indices of the variables a degree-2 monomial touches: (i, i) for s^2,
// (i, j) with i < j for s*t.
std::pair<int, int> quad_indices(const Monomial& mono) {
  int first = -1, second = -1;
  for (int i = 0; i < mono.exponents.size(); ++i) {
    if (mono.exponents(i) == 2) return {i, i};
    if (mono.exponents(i) == 1) {
      if (first < 0)
        first = i;
      else
        second = i;
    }
  }
  return {first, second};
}

int linear_index(const Monomial& mono) {
  for (int i = 0; i < mono.exponents.size(); ++i)
    if (mono.exponents(i) == 1) return i;
  throw Error("monomial has no linear variable");
}

}  // namespace

// ---- Monomial -------------------------------------------------------------

double Monomial::evaluate(const Vector& z) const {
  require(z.size() == exponents.size(), "Monomial: dimension mismatch");
  double out = 1.0;
  for (int i = 0; i < exponents.size(); ++i) {
    switch (exponents(i)) {
      case 0:
        break;
      case 1:
        out *= z(i);
        break;
      case 2:
        out *= z(i) * z(i);
        break;
      default:
        throw Error("Monomial: exponent above 2");
    }
  }
  return out;
}

Monomial Monomial::linear(int dim, int index) {
  require(index >= 0 && index < dim, "Monomial::linear: index out of range");
  Monomial m;
  m.exponents = Eigen::VectorXi::Zero(dim);
  m.exponents(index) = 1;
  return m;
}

Monomial Monomial::quadratic(int dim, int index) {
  require(index >= 0 && index < dim, "Monomial::quadratic: index out of range");
  Monomial m;
  m.exponents = Eigen::VectorXi::Zero(dim);
  m.exponents(index) = 2;
  return m;
}

Monomial Monomial::bilinear(int dim, int first, int second) {
  require(first >= 0 && first < dim && second >= 0 && second < dim &&
              first != second,
          "Monomial::bilinear: bad index pair");
  Monomial m;
  m.exponents = Eigen::VectorXi::Zero(dim);
  m.exponents(first) = 1;
  m.exponents(second) = 1;
  return m;
}

Monomial state_linear(int n, int m, int j) {
  require(j >= 0 && j < n, "state_linear: index out of range");
  return Monomial::linear(n + m, j);
}

Monomial input_linear(int n, int m, int l) {
  require(l >= 0 && l < m, "input_linear: index out of range");
  return Monomial::linear(n + m, n + l);
}

Monomial state_input_bilinear(int n, int m, int j, int l) {
  require(j >= 0 && j < n && l >= 0 && l < m,
          "state_input_bilinear: index out of range");
  return Monomial::bilinear(n + m, j, n + l);
}

Monomial state_quadratic(int n, int m, int j) {
  require(j >= 0 && j < n, "state_quadratic: index out of range");
  return Monomial::quadratic(n + m, j);
}

Monomial input_quadratic(int n, int m, int l) {
  require(l >= 0 && l < m, "input_quadratic: index out of range");
  return Monomial::quadratic(n + m, n + l);
}

// ---- PolyBasis ------------------------------------------------------------

PolyBasis::PolyBasis(int state_dim, int input_dim, std::vector<Monomial> atoms)
    : state_dim_(state_dim), input_dim_(input_dim), atoms_(std::move(atoms)) {
  require(state_dim_ > 0 && input_dim_ >= 0, "PolyBasis: bad dimensions");
  require(!atoms_.empty(), "PolyBasis: empty dictionary");
  for (const Monomial& a : atoms_) {
    require(a.exponents.size() == state_dim_ + input_dim_,
            "PolyBasis: atom dimension mismatch");
    require((a.exponents.array() >= 0).all(), "PolyBasis: negative exponent");
    const int deg = a.degree();
    require(deg == 1 || deg == 2, "PolyBasis: atom degree must be 1 or 2");
  }
}

Vector PolyBasis::evaluate(const Vector& x, const Vector& u) const {
  require(x.size() == state_dim_ && u.size() == input_dim_,
          "PolyBasis::evaluate: dimension mismatch");
  Vector z(state_dim_ + input_dim_);
  z.head(state_dim_) = x;
  z.tail(input_dim_) = u;
  return evaluate_z(z);
}

Vector PolyBasis::evaluate_z(const Vector& z) const {
  Vector out(size());
  for (int j = 0; j < size(); ++j) out(j) = atoms_[j].evaluate(z);
  return out;
}

Vector evaluate_f(const Matrix& theta, const PolyBasis& basis, const Vector& x,
                  const Vector& u) {
  require(theta.rows() == basis.state_dim() && theta.cols() == basis.size(),
          "evaluate_f: coefficient shape mismatch");
  return theta * basis.evaluate(x, u);
}

Vector flatten_coefficients(const Matrix& theta) {
  const int rows = static_cast<int>(theta.rows());
  const int cols = static_cast<int>(theta.cols());
  Vector out(rows * cols);
  for (int r = 0; r < rows; ++r)
    out.segment(r * cols, cols) = theta.row(r).transpose();
  return out;
}

Matrix unflatten_coefficients(const Vector& theta_vec, int rows, int cols) {
  require(theta_vec.size() == rows * cols,
          "unflatten_coefficients: length mismatch");
  Matrix out(rows, cols);
  for (int r = 0; r < rows; ++r)
    out.row(r) = theta_vec.segment(r * cols, cols).transpose();
  return out;
}

// ---- ConvexQuadratic ------------------------------------------------------

double ConvexQuadratic::value(const Vector& z) const {
  double out = linear.dot(z);
  for (const auto& [w, dir] : squares) {
    const double s = dir.dot(z);
    out += w * s * s;
  }
  return out;
}

Vector ConvexQuadratic::gradient(const Vector& z) const {
  Vector g = linear;
  for (const auto& [w, dir] : squares) g += 2.0 * w * dir.dot(z) * dir;
  return g;
}

void ConvexQuadratic::add_scaled(const ConvexQuadratic& other, double factor) {
  require(factor >= 0, "ConvexQuadratic::add_scaled: negative factor");
  require(other.linear.size() == linear.size(),
          "ConvexQuadratic::add_scaled: dimension mismatch");
  if (factor == 0.0) return;
  linear += factor * other.linear;
  for (const auto& [w, dir] : other.squares)
    squares.emplace_back(factor * w, dir);
}

ConvexQuadratic ConvexQuadratic::zero(int dim) {
  ConvexQuadratic q;
  q.linear = Vector::Zero(dim);
  return q;
}

// ---- DcDecomposition ------------------------------------------------------

DcDecomposition::DcDecomposition(DcScheme scheme, PolyBasis basis)
    : scheme_(scheme), basis_(std::move(basis)) {}

DcDecomposition DcDecomposition::shifted(const PolyBasis& basis,
                                         Vector atom_caps) {
  require(atom_caps.size() == basis.size(),
          "shifted decomposition: one cap per atom required");
  return shifted(basis, Matrix(atom_caps.transpose().replicate(
                            basis.state_dim(), 1)));
}

DcDecomposition DcDecomposition::shifted(const PolyBasis& basis,
                                         Matrix cap_table) {
  require(cap_table.rows() == basis.state_dim() &&
              cap_table.cols() == basis.size(),
          "shifted decomposition: cap table must be state_dim x atom count");
  for (int j = 0; j < basis.size(); ++j) {
    if (basis.atom(j).degree() == 2)
      require(cap_table.col(j).minCoeff() >= 0,
              "shifted decomposition: negative cap");
  }
  DcDecomposition d(DcScheme::Shifted, basis);
  d.atom_caps_ = std::move(cap_table);
  return d;
}

DcDecomposition DcDecomposition::sign_split(const PolyBasis& basis,
                                            Matrix sign_reference) {
  require(sign_reference.rows() == basis.state_dim() &&
              sign_reference.cols() == basis.size(),
          "sign-split decomposition: reference shape mismatch");
  DcDecomposition d(DcScheme::SignSplit, basis);
  d.sign_reference_ = std::move(sign_reference);
  return d;
}

std::vector<DcPair> DcDecomposition::decompose(const Matrix& theta) const {
  require(theta.rows() == basis_.state_dim() &&
              theta.cols() == basis_.size(),
          "decompose: coefficient shape mismatch");
  const int dim = basis_.state_dim() + basis_.input_dim();
  std::vector<DcPair> rows;
  rows.reserve(theta.rows());

  for (int r = 0; r < theta.rows(); ++r) {
    DcPair pair{ConvexQuadratic::zero(dim), ConvexQuadratic::zero(dim)};
    for (int j = 0; j < basis_.size(); ++j) {
      const double a = theta(r, j);
      const Monomial& atom = basis_.atom(j);
      if (atom.degree() == 1) {
        pair.g.linear(linear_index(atom)) += a;
        continue;
      }
      const auto [i1, i2] = quad_indices(atom);
      const bool is_square = (i1 == i2);

      if (scheme_ == DcScheme::Shifted) {
        const double cap = atom_caps_(r, j);
        if (std::abs(a) > cap + 1e-12 * std::max(1.0, cap)) {
          std::ostringstream os;
          os << "coefficient " << a << " for atom " << j << " in row " << r
             << " exceeds its cap " << cap
             << "; rebuild the decomposition with caps covering every "
                "coefficient matrix in play";
          throw DegenerateInput(os.str());
        }
        if (is_square) {
          Vector dir = Vector::Zero(dim);
          dir(i1) = 1.0;
          pair.g.squares.emplace_back(std::max(0.0, 0.5 * (cap + a)), dir);
          pair.h.squares.emplace_back(std::max(0.0, 0.5 * (cap - a)), dir);
        } else {
          Vector plus = Vector::Zero(dim), minus = Vector::Zero(dim);
          plus(i1) = 1.0;
          plus(i2) = 1.0;
          minus(i1) = 1.0;
          minus(i2) = -1.0;
          pair.g.squares.emplace_back(std::max(0.0, 0.25 * (cap + a)), plus);
          pair.g.squares.emplace_back(std::max(0.0, 0.25 * (cap - a)), minus);
          pair.h.squares.emplace_back(0.25 * cap, plus);
          pair.h.squares.emplace_back(0.25 * cap, minus);
        }
      } else {
        const bool plus_placement = sign_reference_(r, j) >= 0;
        const double tol = 1e-14 * (1.0 + std::abs(a));
        if (plus_placement && a < -tol) {
          std::ostringstream os;
          os << "coefficient " << a << " for atom " << j << " in row " << r
             << " is negative but the sign pattern places it convex-side";
          throw DegenerateInput(os.str());
        }
        if (!plus_placement && a > tol) {
          std::ostringstream os;
          os << "coefficient " << a << " for atom " << j << " in row " << r
             << " is positive but the sign pattern places it concave-side";
          throw DegenerateInput(os.str());
        }
        const double mag = std::abs(a) <= tol ? 0.0 : std::abs(a);
        if (mag == 0.0) continue;
        if (is_square) {
          Vector dir = Vector::Zero(dim);
          dir(i1) = 1.0;
          if (plus_placement)
            pair.g.squares.emplace_back(mag, dir);
          else
            pair.h.squares.emplace_back(mag, dir);
        } else {
          Vector plus = Vector::Zero(dim), minus = Vector::Zero(dim);
          plus(i1) = 1.0;
          plus(i2) = 1.0;
          minus(i1) = 1.0;
          minus(i2) = -1.0;
          if (plus_placement) {
            pair.g.squares.emplace_back(0.25 * mag, plus);
            pair.h.squares.emplace_back(0.25 * mag, minus);
          } else {
            pair.g.squares.emplace_back(0.25 * mag, minus);
            pair.h.squares.emplace_back(0.25 * mag, plus);
          }
        }
      }
    }
    rows.push_back(std::move(pair));
  }
  return rows;
}

Vector atom_caps_over(const std::vector<Matrix>& thetas) {
  if (thetas.empty()) throw Error("atom_caps_over: empty family");
  const int cols = static_cast<int>(thetas.front().cols());
  Vector caps = Vector::Zero(cols);
  for (const Matrix& t : thetas) {
    require(t.cols() == cols, "atom_caps_over: inconsistent widths");
    for (int j = 0; j < cols; ++j)
      caps(j) = std::max(caps(j), t.col(j).cwiseAbs().maxCoeff());
  }
  return caps;
}

Matrix atom_cap_table_over(const std::vector<Matrix>& thetas) {
  if (thetas.empty()) throw Error("atom_cap_table_over: empty family");
  Matrix caps = Matrix::Zero(thetas.front().rows(), thetas.front().cols());
  for (const Matrix& t : thetas) {
    require(t.rows() == caps.rows() && t.cols() == caps.cols(),
            "atom_cap_table_over: inconsistent shapes");
    caps = caps.cwiseMax(t.cwiseAbs());
  }
  return caps;
}

// ---- Convex majorant of c . f ---------------------------------------------

ConvexQuadratic convex_bound(const std::vector<DcPair>& rows, const Vector& c) {
  require(!rows.empty(), "convex_bound: no rows");
  require(c.size() == static_cast<int>(rows.size()),
          "convex_bound: direction length mismatch");
  const int dim = static_cast<int>(rows.front().g.linear.size());
  ConvexQuadratic out = ConvexQuadratic::zero(dim);
  for (size_t j = 0; j < rows.size(); ++j) {
    const double cj = c(static_cast<int>(j));
    out.linear += cj * (rows[j].g.linear - rows[j].h.linear);
    if (cj >= 0) {
      for (const auto& [w, dir] : rows[j].g.squares)
        out.squares.emplace_back(cj * w, dir);
    } else {
      for (const auto& [w, dir] : rows[j].h.squares)
        out.squares.emplace_back(-cj * w, dir);
    }
  }
  return out;
}

double bound_value(const std::vector<DcPair>& rows, const Vector& c,
                   const Vector& z) {
  require(c.size() == static_cast<int>(rows.size()),
          "bound_value: direction length mismatch");
  double out = 0.0;
  for (size_t j = 0; j < rows.size(); ++j) {
    const double cj = c(static_cast<int>(j));
    if (cj >= 0)
      out += cj * (rows[j].g.value(z) - rows[j].h.linear.dot(z));
    else
      out += cj * (rows[j].g.linear.dot(z) - rows[j].h.value(z));
  }
  return out;
}

Vector bound_gradient(const std::vector<DcPair>& rows, const Vector& c,
                      const Vector& z) {
  require(c.size() == static_cast<int>(rows.size()),
          "bound_gradient: direction length mismatch");
  const int dim = static_cast<int>(z.size());
  Vector out = Vector::Zero(dim);
  for (size_t j = 0; j < rows.size(); ++j) {
    const double cj = c(static_cast<int>(j));
    if (cj >= 0)
      out += cj * (rows[j].g.gradient(z) - rows[j].h.linear);
    else
      out += cj * (rows[j].g.linear - rows[j].h.gradient(z));
  }
  return out;
}

}  // namespace dcinv
