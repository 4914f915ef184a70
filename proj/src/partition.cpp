#include "fcdcc/partition.hpp"

#include <algorithm>
#include <cassert>
#include <string>

#include "fcdcc/errors.hpp"

namespace fcdcc {

bool is_permissible_factor(std::size_t k) { return k == 1 || (k > 0 && k % 2 == 0); }

ApcpPlan plan_apcp(std::size_t height, std::size_t width, std::size_t k_A, ConvParams params,
                   std::size_t kernel_h) {
  if (!is_permissible_factor(k_A)) {
    throw ParameterError("k_A = " + std::to_string(k_A) + " must be 1 or even");
  }
  // Width only matters for padding; a 1-wide kernel keeps output_dims happy.
  const OutputDims od = output_dims(height, width, params, kernel_h, 1);
  if (od.height < k_A) {
    throw ParameterError("output height " + std::to_string(od.height) +
                         " is smaller than k_A = " + std::to_string(k_A));
  }

  ApcpPlan plan;
  plan.k_A = k_A;
  plan.out_height = od.height;
  plan.out_height_padded = (od.height + k_A - 1) / k_A * k_A;
  const std::size_t rows = plan.out_height_padded / k_A;
  plan.slice_height = (rows - 1) * params.stride + kernel_h;
  plan.slice_stride = rows * params.stride;

  const std::size_t base_height = height + 2 * params.padding;
  const std::size_t needed = (plan.out_height_padded - 1) * params.stride + kernel_h;
  plan.rows_added = needed > base_height ? needed - base_height : 0;
  plan.padded_height = base_height + plan.rows_added;
  plan.padded_width = width + 2 * params.padding;
  assert((k_A - 1) * plan.slice_stride + plan.slice_height == needed);
  assert(needed <= plan.padded_height);
  return plan;
}

ApcpPartition apcp_partition(const Tensor3& x, std::size_t k_A, ConvParams params,
                             std::size_t kernel_h) {
  ApcpPartition out;
  out.plan = plan_apcp(x.height(), x.width(), k_A, params, kernel_h);
  const ApcpPlan& plan = out.plan;

  Tensor3 padded(x.channels(), plan.padded_height, plan.padded_width);
  const std::size_t p = params.padding;
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t h = 0; h < x.height(); ++h)
      std::copy_n(&x(c, h, 0), x.width(), &padded(c, h + p, p));

  out.slices.reserve(k_A);
  for (std::size_t i = 0; i < k_A; ++i) {
    const std::size_t begin = i * plan.slice_stride;
    out.slices.push_back(slice_rows(padded, begin, begin + plan.slice_height));
  }
  return out;
}

KccpPartition kccp_partition(const Tensor4& k, std::size_t k_B) {
  if (!is_permissible_factor(k_B)) {
    throw ParameterError("k_B = " + std::to_string(k_B) + " must be 1 or even");
  }
  if (k.out_channels() % k_B != 0) {
    throw ShapeError("N = " + std::to_string(k.out_channels()) + " is not divisible by k_B = " +
                     std::to_string(k_B));
  }
  KccpPartition out;
  out.plan = {k_B, k.out_channels() / k_B};
  out.parts.reserve(k_B);
  for (std::size_t i = 0; i < k_B; ++i) {
    const std::size_t per = out.plan.channels_per_part;
    out.parts.push_back(slice_out_channels(k, i * per, (i + 1) * per));
  }
  return out;
}

Tensor3 merge_output(const BlockMap& blocks, std::size_t k_A, std::size_t k_B,
                     const ApcpPlan& plan) {
  if (blocks.size() != k_A * k_B) {
    throw ShapeError("merge_output expects " + std::to_string(k_A * k_B) + " blocks, got " +
                     std::to_string(blocks.size()));
  }
  auto find = [&](std::size_t a, std::size_t b) -> const Tensor3& {
    auto it = blocks.find({a, b});
    if (it == blocks.end()) {
      throw ShapeError("missing output block (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    }
    return it->second;
  };

  const Dims3 block_dims = find(0, 0).dims();
  if (block_dims.height * k_A != plan.out_height_padded) {
    throw ShapeError("block height does not match the partition plan");
  }

  std::vector<Tensor3> channel_groups;
  channel_groups.reserve(k_B);
  for (std::size_t b = 0; b < k_B; ++b) {
    std::vector<Tensor3> column;
    column.reserve(k_A);
    for (std::size_t a = 0; a < k_A; ++a) {
      const Tensor3& blk = find(a, b);
      if (blk.dims() != block_dims) throw ShapeError("inconsistent output block dims");
      column.push_back(blk);
    }
    channel_groups.push_back(concat_axis(column, 1));
  }
  Tensor3 merged = concat_axis(channel_groups, 0);
  if (plan.out_height == plan.out_height_padded) return merged;
  return slice_rows(merged, 0, plan.out_height);
}

}  // namespace fcdcc
