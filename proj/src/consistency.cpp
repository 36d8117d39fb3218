#include "dcinv/consistency.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "dcinv/errors.hpp"
#include "dcinv/serialize.hpp"

namespace dcinv {

namespace {
void require(bool cond, const char* msg) {
  if (!cond) throw Error(msg);
}
}  // namespace

ConsistencySet::ConsistencySet(PolyBasis basis, std::vector<HPolytope> blocks,
                               double epsilon, std::uint64_t data_digest)
    : basis_(std::move(basis)),
      blocks_(std::move(blocks)),
      epsilon_(epsilon),
      data_digest_(data_digest) {
  require(epsilon_ > 0, "ConsistencySet: residual bound must be positive");
  require(static_cast<int>(blocks_.size()) == basis_.state_dim(),
          "ConsistencySet: one block per state component required");
  for (const HPolytope& b : blocks_)
    require(b.dim() == basis_.size(),
            "ConsistencySet: block dimension must match the dictionary");
}

ConsistencySet build_consistency_set(const Dataset& data,
                                     const PolyBasis& basis, double eps) {
  require(eps > 0, "build_consistency_set: residual bound must be positive");
  require(data.size() >= 1, "build_consistency_set: empty dataset");
  require(data.state_dim() == basis.state_dim() &&
              data.input_dim() == basis.input_dim(),
          "build_consistency_set: dataset dimensions do not match the "
          "dictionary");

  const int T = data.size();
  const int d = basis.size();
  const int n = basis.state_dim();

  Matrix phi(T, d);
  for (int k = 0; k < T; ++k)
    phi.row(k) =
        basis.evaluate(data.records[k].x, data.records[k].u).transpose();

  std::vector<HPolytope> blocks;
  blocks.reserve(n);
  for (int j = 0; j < n; ++j) {
    Matrix H(2 * T, d);
    Vector b(2 * T);
    for (int k = 0; k < T; ++k) {
      const double y = data.records[k].x_next(j);
      H.row(2 * k) = phi.row(k);
      b(2 * k) = eps + y;
      H.row(2 * k + 1) = -phi.row(k);
      b(2 * k + 1) = eps - y;
    }
    blocks.emplace_back(std::move(H), std::move(b));
  }
  return ConsistencySet(basis, std::move(blocks), eps, dataset_digest(data));
}

RankReport check_identifiability(const Dataset& data, const PolyBasis& basis) {
  RankReport report;
  report.cols = basis.size();
  if (data.size() == 0) return report;
  require(data.state_dim() == basis.state_dim() &&
              data.input_dim() == basis.input_dim(),
          "check_identifiability: dataset dimensions do not match the "
          "dictionary");
  Matrix phi(data.size(), basis.size());
  for (int k = 0; k < data.size(); ++k)
    phi.row(k) =
        basis.evaluate(data.records[k].x, data.records[k].u).transpose();
  Eigen::JacobiSVD<Matrix> svd(phi);
  report.singular_values = svd.singularValues();
  report.tolerance = 1e-10 * report.singular_values(0);
  report.rank = 0;
  for (int i = 0; i < report.singular_values.size(); ++i)
    if (report.singular_values(i) > report.tolerance) ++report.rank;
  report.identifiable = report.rank == report.cols;
  return report;
}

MembershipReport membership(const ConsistencySet& cs, const Matrix& theta) {
  require(theta.rows() == cs.num_components() &&
              theta.cols() == cs.coeff_dim(),
          "membership: coefficient shape mismatch");
  double worst = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < cs.num_components(); ++j) {
    const Vector lhs = cs.block(j).normals() * theta.row(j).transpose();
    worst = std::max(worst, (lhs - cs.block(j).offsets()).maxCoeff());
  }
  MembershipReport report;
  report.residual = cs.epsilon() + worst;
  report.member = report.residual <= cs.epsilon() + 1e-9;
  return report;
}

std::vector<int> ThetaVertexFamily::block_counts() const {
  std::vector<int> out;
  out.reserve(block_vertices.size());
  for (const Matrix& m : block_vertices)
    out.push_back(static_cast<int>(m.rows()));
  return out;
}

ThetaVertexFamily ThetaVertexFamily::from_matrices(
    const std::vector<Matrix>& thetas) {
  if (thetas.empty()) throw Error("ThetaVertexFamily: empty matrix list");
  const int n = static_cast<int>(thetas.front().rows());
  const int d = static_cast<int>(thetas.front().cols());
  for (const Matrix& t : thetas) {
    if (t.rows() != n || t.cols() != d)
      throw Error("ThetaVertexFamily: inconsistent matrix shapes");
  }
  ThetaVertexFamily family;
  family.combos = thetas;
  family.block_vertices.reserve(n);
  for (int r = 0; r < n; ++r) {
    std::vector<Vector> rows;
    for (const Matrix& t : thetas) {
      const Vector candidate = t.row(r).transpose();
      bool seen = false;
      for (const Vector& have : rows) {
        if ((have - candidate).cwiseAbs().maxCoeff() == 0.0) {
          seen = true;
          break;
        }
      }
      if (!seen) rows.push_back(candidate);
    }
    Matrix block(static_cast<int>(rows.size()), d);
    for (size_t i = 0; i < rows.size(); ++i)
      block.row(static_cast<int>(i)) = rows[i].transpose();
    family.block_vertices.push_back(std::move(block));
  }
  return family;
}

ThetaVertexFamily enumerate_parameter_vertices(const ConsistencySet& cs,
                                               int max_count, int jobs) {
  require(max_count >= 1, "enumerate_parameter_vertices: bad max_count");
  const int n = cs.num_components();
  std::vector<Matrix> block_vertices(n);
  std::vector<std::exception_ptr> errors(n);

  auto run_block = [&](int j) {
    try {
      const HPolytope reduced = remove_redundant_rows(cs.block(j));
      const VPolytope verts = [&]() {
        try {
          return enumerate_vertices(reduced);
        } catch (const UnboundedSet&) {
          std::ostringstream os;
          os << "parameter block " << j
             << " is unbounded: the logged data do not excite every "
                "dictionary direction (rank-deficient regressor matrix), so "
                "no finite vertex family exists";
          throw UnboundedSet(os.str());
        } catch (const EmptySet&) {
          std::ostringstream os;
          os << "parameter block " << j
             << " is empty: no coefficient row reproduces the data within "
                "the residual bound";
          throw EmptySet(os.str());
        }
      }();
      block_vertices[j] = verts.vertices();
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };

  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int j = 0; j < n; ++j) run_block(j);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int j = w; j < n; j += workers) run_block(j);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (int j = 0; j < n; ++j)
    if (errors[j]) std::rethrow_exception(errors[j]);

  double product = 1.0;
  for (const Matrix& m : block_vertices) product *= m.rows();
  if (product > static_cast<double>(max_count)) {
    std::ostringstream os;
    os << "vertex family would hold " << product << " matrices, above the cap "
       << max_count << "; tighten the residual bound or raise the cap";
    throw Error(os.str());
  }

  ThetaVertexFamily family;
  family.block_vertices = std::move(block_vertices);
  const int total = static_cast<int>(product);
  const int d = cs.coeff_dim();
  family.combos.reserve(total);
  std::vector<int> idx(n, 0);
  for (int c = 0; c < total; ++c) {
    Matrix theta(n, d);
    for (int j = 0; j < n; ++j)
      theta.row(j) = family.block_vertices[j].row(idx[j]);
    family.combos.push_back(std::move(theta));
    for (int j = n - 1; j >= 0; --j) {
      if (++idx[j] < family.block_vertices[j].rows()) break;
      idx[j] = 0;
    }
  }
  return family;
}

}  // namespace dcinv
