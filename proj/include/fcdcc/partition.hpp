#pragma once

// Spatial (height-axis) partitioning of the input tensor into overlapping
// slices, output-channel partitioning of the filter bank, and the inverse
// merge of decoded output blocks.

#include <compare>
#include <cstddef>
#include <map>
#include <vector>

#include "fcdcc/tensor.hpp"

namespace fcdcc {

/// Geometry of an adaptive-padding height partition.
///
/// Slice i covers rows [i*slice_stride, i*slice_stride + slice_height) of the
/// padded input. Convolving it with the full filter yields output rows
/// [i*rows_per_part, (i+1)*rows_per_part).
struct ApcpPlan {
  std::size_t k_A = 1;
  std::size_t slice_height = 0;       // Ĥ = (H'_padded/k_A - 1)s + K_H
  std::size_t slice_stride = 0;       // Ŝ = (H'_padded/k_A) s
  std::size_t out_height = 0;         // H' of the unpartitioned convolution
  std::size_t out_height_padded = 0;  // smallest multiple of k_A >= H'
  std::size_t rows_added = 0;         // zero rows appended below the padded input
  std::size_t padded_height = 0;      // H + 2p + rows_added
  std::size_t padded_width = 0;       // W + 2p

  std::size_t rows_per_part() const { return out_height_padded / k_A; }
};

struct ApcpPartition {
  ApcpPlan plan;
  std::vector<Tensor3> slices;
};

struct KccpPlan {
  std::size_t k_B = 1;
  std::size_t channels_per_part = 0;
};

struct KccpPartition {
  KccpPlan plan;
  std::vector<Tensor4> parts;
};

/// Permissible partition factor: 1 or a positive even number.
bool is_permissible_factor(std::size_t k);

/// Plans the partition without touching tensor data.
ApcpPlan plan_apcp(std::size_t height, std::size_t width, std::size_t k_A, ConvParams params,
                   std::size_t kernel_h);

/// Splits the (unpadded) input `x`. Spatial padding `params.padding` is
/// materialized first, then zero rows are appended at the bottom when H' is
/// not a multiple of k_A. Slices are returned in partition order.
ApcpPartition apcp_partition(const Tensor3& x, std::size_t k_A, ConvParams params,
                             std::size_t kernel_h);

KccpPartition kccp_partition(const Tensor4& k, std::size_t k_B);

/// Position of a decoded output block in the (spatial, channel) grid.
struct BlockIndex {
  std::size_t u_A;
  std::size_t u_B;
  auto operator<=>(const BlockIndex&) const = default;
};

using BlockMap = std::map<BlockIndex, Tensor3>;

/// Reassembles k_A*k_B blocks into the N x H' x W' output: height-axis concat
/// within each u_B, channel-axis concat over u_B, then trims the rows that
/// came from divisibility padding.
Tensor3 merge_output(const BlockMap& blocks, std::size_t k_A, std::size_t k_B,
                     const ApcpPlan& plan);

}  // namespace fcdcc
