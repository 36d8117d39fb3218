#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcinv/dcmodel.hpp"
#include "dcinv/geometry.hpp"
#include "dcinv/types.hpp"

namespace dcinv {

// ---- Logged transitions ---------------------------------------------------

struct Transition {
  Vector x;
  Vector u;
  Vector x_next;
};

struct Dataset {
  std::vector<Transition> records;
  std::uint64_t seed = 0;
  std::string source;

  int size() const { return static_cast<int>(records.size()); }
  int state_dim() const {
    return records.empty() ? 0 : static_cast<int>(records.front().x.size());
  }
  int input_dim() const {
    return records.empty() ? 0 : static_cast<int>(records.front().u.size());
  }
};

// ---- Data-consistent coefficient sets -------------------------------------

/// All coefficient matrices Theta that explain every logged transition with
/// residual at most epsilon per component:
///   |x_next(j) - theta_row_j . phi(x, u)| <= epsilon  for every record.
/// The constraints decouple by row, so the set is a Cartesian product of
/// one polytope per state component, each over R^{d} with 2T rows.
class ConsistencySet {
 public:
  ConsistencySet(PolyBasis basis, std::vector<HPolytope> blocks,
                 double epsilon, std::uint64_t data_digest);

  int num_components() const { return static_cast<int>(blocks_.size()); }
  int coeff_dim() const { return basis_.size(); }
  const HPolytope& block(int j) const { return blocks_[j]; }
  double epsilon() const { return epsilon_; }
  std::uint64_t data_digest() const { return data_digest_; }
  const PolyBasis& basis() const { return basis_; }

 private:
  PolyBasis basis_;
  std::vector<HPolytope> blocks_;
  double epsilon_;
  std::uint64_t data_digest_;
};

/// Block j gets, per record k, the row pair
///   +phi_k . theta_j <= eps + x_next(j),   -phi_k . theta_j <= eps - x_next(j).
/// Rows are kept unreduced so membership residuals reproduce the data
/// residuals exactly; enumeration drops redundant rows internally.
ConsistencySet build_consistency_set(const Dataset& data,
                                     const PolyBasis& basis, double eps);

struct RankReport {
  int rank = 0;
  int cols = 0;
  Vector singular_values;
  double tolerance = 0.0;
  bool identifiable = false;  // rank == cols <=> every block is bounded
};

/// Rank of the T x d matrix of basis rows phi(x_k, u_k), via SVD with
/// threshold 1e-10 * largest singular value. Report only; enumeration
/// raises its own error on unbounded blocks.
RankReport check_identifiability(const Dataset& data, const PolyBasis& basis);

struct MembershipReport {
  bool member = false;
  double residual = 0.0;  // max_k ||x_next - Theta phi_k||_inf
};

/// Membership test against the block inequalities; residual restated in
/// data units (<= epsilon + 1e-9 iff member).
MembershipReport membership(const ConsistencySet& cs, const Matrix& theta);

// ---- Vertex families ------------------------------------------------------

/// Vertices of the consistency set, kept in product form: per-block vertex
/// lists plus the assembled Cartesian product (block order = component
/// order, row-lexicographic combination order).
struct ThetaVertexFamily {
  std::vector<Matrix> block_vertices;  // per block: q_j x d, rows are vertices
  std::vector<Matrix> combos;          // assembled matrices, each n x d

  int count() const { return static_cast<int>(combos.size()); }
  std::vector<int> block_counts() const;

  /// Family for a hand-picked list of coefficient matrices. block_vertices
  /// holds the distinct rows seen per component; the block product then
  /// covers (possibly strictly contains) the given list, so worst-case
  /// bounds computed per block stay valid for every listed matrix.
  static ThetaVertexFamily from_matrices(const std::vector<Matrix>& thetas);
};

/// Per-block vertex enumeration followed by the Cartesian product.
/// Throws UnboundedSet (citing the data-richness requirement) when a block
/// is unbounded, and Error when the product would exceed max_count.
ThetaVertexFamily enumerate_parameter_vertices(const ConsistencySet& cs,
                                               int max_count = 200000,
                                               int jobs = 1);

}  // namespace dcinv
