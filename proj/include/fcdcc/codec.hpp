#pragma once

// Rotation-matrix embedded polynomial codes for tensor lists, the joint
// (Kronecker) generator, recovery/decoding matrices, and a real-Vandermonde
// polynomial code kept as the numerical-stability baseline.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fcdcc/errors.hpp"
#include "fcdcc/partition.hpp"
#include "fcdcc/tensor.hpp"

namespace fcdcc {

using Matrix = Eigen::MatrixXd;

/// Recovery matrices with sigma_min/sigma_max below this are rejected.
inline constexpr double kMinInverseCondition = 1e-13;

Eigen::Matrix2d rotation_matrix(double theta);

/// Smallest odd integer >= n.
std::size_t next_odd(std::size_t n);

/// Encoding matrices for n workers.
///
/// A is k_A x 2n and B is k_B x 2n, each built from 2x2 blocks: block (i, j)
/// of A is R^(j*i), block (i, j) of B is R^(j*i*k_A/2), with R the rotation by
/// theta = 2*pi/q. Worker j owns columns 2j and 2j+1 of both.
struct Codebook {
  std::size_t n = 0;
  std::size_t q = 0;
  double theta = 0.0;
  std::size_t k_A = 0;
  std::size_t k_B = 0;
  Matrix A;
  Matrix B;

  std::size_t threshold() const { return k_A * k_B / 4; }
};

/// Throws ParameterError unless k_A, k_B are even and k_A*k_B/4 <= n.
Codebook build_codebook(std::size_t n, std::size_t k_A, std::size_t k_B);

namespace detail {
template <class T>
void require_same_dims(std::span<const T> parts) {
  for (const auto& p : parts) {
    if (p.dims() != parts.front().dims()) throw ShapeError("encode: parts differ in shape");
  }
}
}  // namespace detail

/// Tensor-list times matrix: output j = sum_i M(i, j) * parts[i], restricted to
/// the requested columns (all columns when `columns` is empty).
template <class T>
std::vector<T> encode_list(std::span<const T> parts, const Matrix& M,
                           std::span<const std::size_t> columns = {}) {
  if (parts.empty()) throw ShapeError("encode: empty tensor list");
  if (static_cast<std::size_t>(M.rows()) != parts.size()) {
    throw ShapeError("encode: matrix has " + std::to_string(M.rows()) + " rows for " +
                     std::to_string(parts.size()) + " parts");
  }
  detail::require_same_dims(parts);

  std::vector<std::size_t> cols(columns.begin(), columns.end());
  if (cols.empty()) {
    cols.resize(static_cast<std::size_t>(M.cols()));
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
  }

  std::vector<T> out;
  out.reserve(cols.size());
  for (std::size_t j : cols) {
    if (j >= static_cast<std::size_t>(M.cols())) throw ShapeError("encode: column out of range");
    T acc(parts.front().dims());
    auto dst = acc.data();
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const double m = M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      auto src = parts[i].data();
      for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += m * src[e];
    }
    out.push_back(std::move(acc));
  }
  return out;
}

template <class T>
std::vector<T> encode_list(const std::vector<T>& parts, const Matrix& M,
                           std::span<const std::size_t> columns = {}) {
  return encode_list(std::span<const T>(parts), M, columns);
}

/// G =[A_0 (x) B_0 | ... | A_{n-1} (x) B_{n-1}], k_A*k_B x 4n.
/// Row r corresponds to output block (r / k_B, r % k_B); column 4i + 2*b1 + b2
/// is worker i's convolution of coded input b1 with coded filter b2.
Matrix build_joint(const Codebook& book);

/// Maps decoded column r to its output block.
using BlockLayout = std::vector<BlockIndex>;

BlockLayout crme_layout(std::size_t k_A, std::size_t k_B);

struct RecoverySet {
  std::vector<std::size_t> worker_ids;
  std::size_t blocks_per_worker = 0;
  Matrix E;
  Matrix D;
  double kappa = 1.0;
};

struct RecoveryOptions {
  std::size_t blocks_per_worker = 4;
  /// When false, ill-conditioned matrices are inverted anyway (for stability
  /// measurements); singular ones still produce non-finite entries.
  bool enforce_threshold = true;
};

/// Assembles E from the column blocks of `G` for `worker_ids` (in order),
/// inverts it by partial-pivot LU and records its 2-norm condition number.
RecoverySet build_recovery(const Matrix& G, std::span<const std::size_t> worker_ids,
                           RecoveryOptions options = {});

/// Applies D to the vectorized stack of collected blocks. `collected[t]` are
/// the blocks returned by worker `recovery.worker_ids[t]`. Every block must
/// have `block_dims`.
BlockMap decode(std::span<const std::vector<Tensor3>> collected, const RecoverySet& recovery,
                const BlockLayout& layout, Dims3 block_dims);

/// Classical polynomial code with real evaluation points (one coded pair per
/// worker, recovery threshold k_A*k_B).
///
/// Worker j receives sum_a x_j^a X_a and sum_b x_j^(b*k_A) K_b, so its output
/// is sum_e x_j^e Y_(e mod k_A, e / k_A). Generator row e holds x_j^e.
struct RealVandermonde {
  std::size_t n = 0;
  std::size_t k_A = 0;
  std::size_t k_B = 0;
  std::vector<double> points;  // x_j = -1 + 2j/(n-1)
  Matrix A;                    // k_A x n
  Matrix B;                    // k_B x n
  Matrix generator;            // k_A*k_B x n

  std::size_t threshold() const { return k_A * k_B; }
};

RealVandermonde build_real_vandermonde(std::size_t n, std::size_t k_A, std::size_t k_B);

/// Same as build_real_vandermonde but with caller-chosen evaluation points.
/// Throws ParameterError on duplicate points.
RealVandermonde build_real_vandermonde(std::vector<double> points, std::size_t k_A,
                                       std::size_t k_B);

BlockLayout vandermonde_layout(std::size_t k_A, std::size_t k_B);

/// sigma_max / sigma_min. Infinity when sigma_min is zero.
double condition_number(const Matrix& M);

}  // namespace fcdcc
