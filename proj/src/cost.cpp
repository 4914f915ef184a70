#include "fcdcc/cost.hpp"

#include <cmath>
#include <limits>

#include "fcdcc/errors.hpp"
#include "fcdcc/partition.hpp"

namespace fcdcc {

CostBreakdown total_cost(const LayerDims& dims, const CostCoefficients& coeffs, std::size_t k_A,
                         std::size_t k_B) {
  if (k_A == 0 || k_B == 0) throw ParameterError("partition factors must be positive");
  const OutputDims od = dims.output();
  const double C = static_cast<double>(dims.C), N = static_cast<double>(dims.N);
  const double Hp = static_cast<double>(dims.H + 2 * dims.padding);
  const double Wp = static_cast<double>(dims.W + 2 * dims.padding);
  const double kernel = static_cast<double>(dims.K_H * dims.K_W);
  const double s = static_cast<double>(dims.stride);
  const double Q = static_cast<double>(k_A * k_B);

  CostBreakdown c;
  c.c_comm_up = coeffs.lambda_comm * 4.0 * C * Hp * Wp / static_cast<double>(k_A);
  c.c_comm_down = coeffs.lambda_comm * 4.0 * N * static_cast<double>(od.height * od.width) / Q;
  c.c_comp = coeffs.lambda_comp * 4.0 * C * N * static_cast<double>(dims.H * dims.W) * kernel /
             (s * s * Q);
  c.c_store = coeffs.lambda_store * 2.0 * N * C * kernel / static_cast<double>(k_B);
  c.total = c.c_comm_up + c.c_comm_down + c.c_comp + c.c_store;
  return c;
}

NodeVolumes node_volumes(const LayerDims& dims, std::size_t k_A, std::size_t k_B) {
  if (dims.N % k_B != 0) throw ShapeError("N is not divisible by k_B");
  const ApcpPlan plan = plan_apcp(dims.H, dims.W, k_A, dims.conv(), dims.K_H);
  const OutputDims od = dims.output();
  const std::size_t per = dims.N / k_B;
  NodeVolumes v;
  v.comm_up = 2 * dims.C * plan.slice_height * plan.padded_width;
  v.comm_down = 4 * per * plan.rows_per_part() * od.width;
  v.store = 2 * per * dims.C * dims.K_H * dims.K_W;
  v.comp = v.comm_down * dims.C * dims.K_H * dims.K_W;
  return v;
}

double optimal_continuous(const LayerDims& dims, const CostCoefficients& coeffs, std::size_t Q) {
  const double denom = coeffs.lambda_store * static_cast<double>(dims.N * dims.K_H * dims.K_W);
  if (!(denom > 0.0)) {
    throw ParameterError("lambda_store * N * K_H * K_W must be positive for a bounded optimum");
  }
  const double Hp = static_cast<double>(dims.H + 2 * dims.padding);
  const double Wp = static_cast<double>(dims.W + 2 * dims.padding);
  return std::sqrt(2.0 * coeffs.lambda_comm * Hp * Wp * static_cast<double>(Q) / denom);
}

std::vector<std::pair<std::size_t, std::size_t>> permissible_factor_pairs(std::size_t Q) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 1; a <= Q; ++a) {
    if (Q % a != 0) continue;
    const std::size_t b = Q / a;
    if (is_permissible_factor(a) && is_permissible_factor(b)) pairs.emplace_back(a, b);
  }
  return pairs;
}

DiscreteOptimum optimize_discrete(const LayerDims& dims, const CostCoefficients& coeffs,
                                  std::size_t Q) {
  const auto pairs = permissible_factor_pairs(Q);
  if (Q == 0 || pairs.empty()) {
    throw ParameterError("Q = " + std::to_string(Q) +
                         " has no factorization into permissible partition factors");
  }
  DiscreteOptimum best{pairs.front().first, pairs.front().second,
                       total_cost(dims, coeffs, pairs.front().first, pairs.front().second)};
  for (auto [a, b] : pairs) {
    const CostBreakdown c = total_cost(dims, coeffs, a, b);
    // Relative slack so that mathematically equal costs tie despite rounding.
    if (c.total < best.cost.total - 1e-12 * std::abs(best.cost.total)) best = {a, b, c};
  }
  return best;
}

}  // namespace fcdcc
