#pragma once

// Per-node cost accounting and the partition-factor optimizer.

#include <cstddef>
#include <string>
#include <vector>

#include "fcdcc/tensor.hpp"

namespace fcdcc {

struct CostCoefficients {
  double lambda_comm = 0.0;   // per transmitted tensor entry
  double lambda_comp = 0.0;   // per MAC
  double lambda_store = 0.0;  // per stored tensor entry
};

/// Geometry of one convolutional layer.
struct LayerDims {
  std::size_t C = 1, H = 1, W = 1, N = 1, K_H = 1, K_W = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  ConvParams conv() const { return {stride, padding}; }
  OutputDims output() const { return output_dims(H, W, conv(), K_H, K_W); }
};

/// Closed-form per-node costs:
///   comm_up   = lambda_comm * 4C(H+2p)(W+2p) / k_A
///   comm_down = lambda_comm * 4N H' W' / Q
///   comp      = lambda_comp * 4C N H W K_H K_W / (s^2 Q)
///   store     = lambda_store * 2N C K_H K_W / k_B
struct CostBreakdown {
  double c_comm_up = 0.0;
  double c_comm_down = 0.0;
  double c_comp = 0.0;
  double c_store = 0.0;
  double total = 0.0;
};

CostBreakdown total_cost(const LayerDims& dims, const CostCoefficients& coeffs, std::size_t k_A,
                         std::size_t k_B);

/// Exact per-node entry and MAC counts of the rotation-embedded code with the
/// adaptive-padding geometry (including divisibility padding). These are what
/// the runtime actually ships and computes.
struct NodeVolumes {
  std::size_t comm_up = 0;    // 2 C Ĥ (W+2p)
  std::size_t comm_down = 0;  // 4 (N/k_B) (H'_padded/k_A) W'
  std::size_t store = 0;      // 2 (N/k_B) C K_H K_W
  std::size_t comp = 0;       // comm_down * C K_H K_W
  bool operator==(const NodeVolumes&) const = default;
};

NodeVolumes node_volumes(const LayerDims& dims, std::size_t k_A, std::size_t k_B);

/// Stationary point of U(k_A) = a1 k_A + a2 / k_A + a3 at fixed Q.
/// Throws ParameterError when lambda_store * N K_H K_W is zero.
double optimal_continuous(const LayerDims& dims, const CostCoefficients& coeffs, std::size_t Q);

struct DiscreteOptimum {
  std::size_t k_A = 0;
  std::size_t k_B = 0;
  CostBreakdown cost;
};

/// Factor pairs (k_A, k_B) of Q with both factors 1 or even, ascending k_A.
std::vector<std::pair<std::size_t, std::size_t>> permissible_factor_pairs(std::size_t Q);

/// Exhaustive minimum of U over permissible factor pairs; ties go to the
/// smaller k_A. Throws ParameterError if Q has no permissible factorization.
DiscreteOptimum optimize_discrete(const LayerDims& dims, const CostCoefficients& coeffs,
                                  std::size_t Q);

/// Registry of canonical layer geometries.
struct LayerEntry {
  std::string model;
  std::string layer;
  LayerDims dims;
  std::string source;
};

const std::vector<LayerEntry>& layer_registry();
int layer_registry_version();
/// Throws ParameterError on an unknown model name.
std::vector<LayerEntry> layers_for_model(const std::string& model);
std::vector<std::string> registry_models();

}  // namespace fcdcc
