#include "fcdcc/codec.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace fcdcc {

namespace {

void set_block(Matrix& M, std::size_t block_row, std::size_t block_col, const Eigen::Matrix2d& R) {
  M.block<2, 2>(static_cast<Eigen::Index>(2 * block_row), static_cast<Eigen::Index>(2 * block_col)) = R;
}

void require_even_factor(std::size_t k, const char* name) {
  if (k < 2 || k % 2 != 0) {
    throw ParameterError(std::string(name) + " = " + std::to_string(k) +
                         " must be even and at least 2 for the rotation-embedded code");
  }
}

}  // namespace

Eigen::Matrix2d rotation_matrix(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d R;
  R << c, -s, s, c;
  return R;
}

std::size_t next_odd(std::size_t n) { return n % 2 == 1 ? n : n + 1; }

Codebook build_codebook(std::size_t n, std::size_t k_A, std::size_t k_B) {
  require_even_factor(k_A, "k_A");
  require_even_factor(k_B, "k_B");
  if (n == 0) throw ParameterError("worker count must be positive");
  if ((k_A * k_B) % 4 != 0 || k_A * k_B / 4 > n) {
    throw ParameterError("recovery threshold k_A*k_B/4 = " + std::to_string(k_A * k_B / 4) +
                         " exceeds n = " + std::to_string(n));
  }

  Codebook book;
  book.n = n;
  book.q = next_odd(n);
  book.theta = 2.0 * std::numbers::pi / static_cast<double>(book.q);
  book.k_A = k_A;
  book.k_B = k_B;
  book.A = Matrix::Zero(static_cast<Eigen::Index>(k_A), static_cast<Eigen::Index>(2 * n));
  book.B = Matrix::Zero(static_cast<Eigen::Index>(k_B), static_cast<Eigen::Index>(2 * n));

  // R^e depends only on e mod q; reducing the exponent keeps the angle small
  // and avoids accumulating error from repeated products.
  auto power = [&](std::size_t e) {
    return rotation_matrix(book.theta * static_cast<double>(e % book.q));
  };
  const std::size_t half_A = k_A / 2, half_B = k_B / 2;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < half_A; ++i) set_block(book.A, i, j, power(j * i));
    for (std::size_t i = 0; i < half_B; ++i) set_block(book.B, i, j, power(j * half_A * i));
  }
  return book;
}

Matrix build_joint(const Codebook& book) {
  const Eigen::Index rows_A = book.A.rows(), rows_B = book.B.rows();
  Matrix G(rows_A * rows_B, static_cast<Eigen::Index>(4 * book.n));
  for (std::size_t w = 0; w < book.n; ++w) {
    for (Eigen::Index b1 = 0; b1 < 2; ++b1) {
      for (Eigen::Index b2 = 0; b2 < 2; ++b2) {
        const Eigen::Index col = static_cast<Eigen::Index>(4 * w) + 2 * b1 + b2;
        const Eigen::Index ca = static_cast<Eigen::Index>(2 * w) + b1;
        const Eigen::Index cb = static_cast<Eigen::Index>(2 * w) + b2;
        for (Eigen::Index a = 0; a < rows_A; ++a)
          for (Eigen::Index b = 0; b < rows_B; ++b)
            G(a * rows_B + b, col) = book.A(a, ca) * book.B(b, cb);
      }
    }
  }
  return G;
}

BlockLayout crme_layout(std::size_t k_A, std::size_t k_B) {
  BlockLayout layout;
  layout.reserve(k_A * k_B);
  for (std::size_t r = 0; r < k_A * k_B; ++r) layout.push_back({r / k_B, r % k_B});
  return layout;
}

BlockLayout vandermonde_layout(std::size_t k_A, std::size_t k_B) {
  BlockLayout layout;
  layout.reserve(k_A * k_B);
  for (std::size_t e = 0; e < k_A * k_B; ++e) layout.push_back({e % k_A, e / k_A});
  return layout;
}

double condition_number(const Matrix& M) {
  if (M.rows() != M.cols()) throw ShapeError("condition_number needs a square matrix");
  if (M.size() == 0) throw ShapeError("condition_number of an empty matrix");
  Eigen::BDCSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv(0), smin = sv(sv.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

RecoverySet build_recovery(const Matrix& G, std::span<const std::size_t> worker_ids,
                           RecoveryOptions options) {
  const std::size_t bpw = options.blocks_per_worker;
  if (bpw == 0 || static_cast<std::size_t>(G.cols()) % bpw != 0) {
    throw ShapeError("generator column count is not a multiple of blocks per worker");
  }
  const std::size_t n = static_cast<std::size_t>(G.cols()) / bpw;
  const std::size_t q = static_cast<std::size_t>(G.rows());
  if (worker_ids.size() * bpw != q) {
    throw ParameterError("recovery needs " + std::to_string(q / bpw) + " workers, got " +
                         std::to_string(worker_ids.size()));
  }
  std::set<std::size_t> seen;
  for (std::size_t id : worker_ids) {
    if (id >= n) throw ParameterError("worker id " + std::to_string(id) + " out of range");
    if (!seen.insert(id).second) {
      throw ParameterError("duplicate worker id " + std::to_string(id) + " in recovery set");
    }
  }

  RecoverySet rs;
  rs.worker_ids.assign(worker_ids.begin(), worker_ids.end());
  rs.blocks_per_worker = bpw;
  rs.E.resize(G.rows(), G.rows());
  for (std::size_t t = 0; t < worker_ids.size(); ++t) {
    rs.E.middleCols(static_cast<Eigen::Index>(t * bpw), static_cast<Eigen::Index>(bpw)) =
        G.middleCols(static_cast<Eigen::Index>(worker_ids[t] * bpw), static_cast<Eigen::Index>(bpw));
  }
  rs.kappa = condition_number(rs.E);
  if (options.enforce_threshold && !(1.0 / rs.kappa >= kMinInverseCondition)) {
    throw DecodeInfeasibleError(
        "recovery matrix is singular to working precision (kappa = " + std::to_string(rs.kappa) + ")",
        rs.kappa);
  }
  rs.D = Eigen::PartialPivLU<Matrix>(rs.E).inverse();
  return rs;
}

BlockMap decode(std::span<const std::vector<Tensor3>> collected, const RecoverySet& recovery,
                const BlockLayout& layout, Dims3 block_dims) {
  const std::size_t bpw = recovery.blocks_per_worker;
  const std::size_t q = static_cast<std::size_t>(recovery.D.rows());
  if (collected.size() != recovery.worker_ids.size()) {
    throw ShapeError("decode: " + std::to_string(collected.size()) + " results for " +
                     std::to_string(recovery.worker_ids.size()) + " recovery workers");
  }
  if (layout.size() != q) throw ShapeError("decode: layout size does not match decoder");

  const auto len = static_cast<Eigen::Index>(block_dims.size());
  Matrix stacked(len, static_cast<Eigen::Index>(q));
  for (std::size_t t = 0; t < collected.size(); ++t) {
    if (collected[t].size() != bpw) {
      throw ShapeError("decode: worker " + std::to_string(recovery.worker_ids[t]) + " returned " +
                       std::to_string(collected[t].size()) + " blocks, expected " +
                       std::to_string(bpw));
    }
    for (std::size_t b = 0; b < bpw; ++b) {
      const Tensor3& blk = collected[t][b];
      if (blk.dims() != block_dims) throw ShapeError("decode: block dims mismatch");
      stacked.col(static_cast<Eigen::Index>(t * bpw + b)) =
          Eigen::Map<const Eigen::VectorXd>(blk.data().data(), len);
    }
  }

  const Matrix decoded = stacked * recovery.D;

  BlockMap out;
  for (std::size_t r = 0; r < q; ++r) {
    const auto col = decoded.col(static_cast<Eigen::Index>(r));
    std::vector<double> data(col.data(), col.data() + len);
    // Non-finite results mean the decoder blew up; keep them visible as
    // huge values instead of failing the Tensor3 finiteness check.
    for (auto& v : data) {
      if (!std::isfinite(v)) v = std::copysign(std::numeric_limits<double>::max(), v);
    }
    out.emplace(layout[r], Tensor3(block_dims, std::move(data)));
  }
  return out;
}

RealVandermonde build_real_vandermonde(std::size_t n, std::size_t k_A, std::size_t k_B) {
  if (n == 0) throw ParameterError("worker count must be positive");
  std::vector<double> points(n, 0.0);
  for (std::size_t j = 0; j < n && n > 1; ++j) {
    points[j] = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n - 1);
  }
  return build_real_vandermonde(std::move(points), k_A, k_B);
}

RealVandermonde build_real_vandermonde(std::vector<double> points, std::size_t k_A,
                                       std::size_t k_B) {
  const std::size_t n = points.size();
  if (k_A == 0 || k_B == 0) throw ParameterError("partition factors must be positive");
  if (k_A * k_B > n) {
    throw ParameterError("baseline threshold k_A*k_B = " + std::to_string(k_A * k_B) +
                         " exceeds n = " + std::to_string(n));
  }
  {
    std::vector<double> sorted = points;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ParameterError("duplicate evaluation points");
    }
  }

  RealVandermonde code;
  code.n = n;
  code.k_A = k_A;
  code.k_B = k_B;
  code.points = std::move(points);
  const auto rows = static_cast<Eigen::Index>(k_A * k_B);
  code.A.resize(static_cast<Eigen::Index>(k_A), static_cast<Eigen::Index>(n));
  code.B.resize(static_cast<Eigen::Index>(k_B), static_cast<Eigen::Index>(n));
  code.generator.resize(rows, static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    double p = 1.0;
    for (Eigen::Index e = 0; e < rows; ++e) {
      code.generator(e, col) = p;
      p *= code.points[j];
    }
    for (std::size_t a = 0; a < k_A; ++a) code.A(static_cast<Eigen::Index>(a), col) = code.generator(static_cast<Eigen::Index>(a), col);
    for (std::size_t b = 0; b < k_B; ++b) {
      code.B(static_cast<Eigen::Index>(b), col) = code.generator(static_cast<Eigen::Index>(b * k_A), col);
    }
  }
  return code;
}

}  // namespace fcdcc
