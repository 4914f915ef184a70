#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fcdcc/cost.hpp"
#include "fcdcc/errors.hpp"
#include "fcdcc/partition.hpp"

using namespace fcdcc;

namespace {

// Closed-form U written out independently of the library.
double U(const LayerDims& d, const CostCoefficients& c, double kA, double Q) {
  const double Hp = static_cast<double>(d.H + 2 * d.padding);
  const double Wp = static_cast<double>(d.W + 2 * d.padding);
  const double Ho = std::floor(static_cast<double>(d.H + 2 * d.padding - d.K_H) /
                               static_cast<double>(d.stride)) + 1;
  const double Wo = std::floor(static_cast<double>(d.W + 2 * d.padding - d.K_W) /
                               static_cast<double>(d.stride)) + 1;
  const double kern = static_cast<double>(d.K_H * d.K_W);
  const double C = static_cast<double>(d.C), N = static_cast<double>(d.N);
  const double s = static_cast<double>(d.stride);
  return c.lambda_comm * (4 * C * Hp * Wp / kA + 4 * N * Ho * Wo / Q) +
         c.lambda_comp * 4 * C * N * static_cast<double>(d.H * d.W) * kern / (s * s * Q) +
         c.lambda_store * 2 * N * C * kern * kA / Q;
}

struct Brute {
  std::size_t k_A = 0, k_B = 0;
  double cost = std::numeric_limits<double>::infinity();
};

Brute brute_force(const LayerDims& d, const CostCoefficients& c, std::size_t Q) {
  Brute best;
  for (std::size_t a = 1; a <= Q; ++a) {
    if (Q % a) continue;
    const std::size_t b = Q / a;
    if ((a != 1 && a % 2) || (b != 1 && b % 2)) continue;
    const double u = U(d, c, static_cast<double>(a), static_cast<double>(Q));
    if (u < best.cost * (1 - 1e-12)) best = {a, b, u};
  }
  return best;
}

LayerDims random_dims(UniformSource& rng) {
  LayerDims d;
  d.C = 1 + rng.next_u64() % 64;
  d.H = d.W = 8 + rng.next_u64() % 200;
  d.N = 1 + rng.next_u64() % 256;
  d.K_H = d.K_W = 1 + 2 * (rng.next_u64() % 3);
  d.stride = 1 + rng.next_u64() % 2;
  d.padding = rng.next_u64() % 3;
  return d;
}

const LayerEntry& find(const std::string& model, const std::string& layer) {
  for (const auto& e : layer_registry())
    if (e.model == model && e.layer == layer) return e;
  throw std::runtime_error("missing registry entry " + model + "/" + layer);
}

const CostCoefficients kTableCoeffs{0.09, 0.0, 0.023};

}  // namespace

TEST(TotalCost, ZeroCoefficients) {
  const LayerDims d{3, 32, 32, 16, 3, 3, 1, 1};
  EXPECT_EQ(total_cost(d, {}, 4, 4).total, 0.0);
}

TEST(TotalCost, FormulaArithmeticExample) {
  const LayerDims d{1, 4, 4, 1, 3, 3, 1, 0};  // H' = W' = 2
  const CostBreakdown c = total_cost(d, {1.0, 0.0, 0.0}, 2, 2);
  EXPECT_DOUBLE_EQ(c.c_comm_up, 32.0);
  EXPECT_DOUBLE_EQ(c.c_comm_down, 4.0);
  EXPECT_DOUBLE_EQ(c.c_comp, 0.0);
  EXPECT_DOUBLE_EQ(c.c_store, 0.0);
  EXPECT_DOUBLE_EQ(c.total, 36.0);
}

TEST(TotalCost, DoublingKAHalvesUploadAndDoublesStore) {
  const LayerDims d{3, 30, 30, 32, 3, 3, 1, 1};
  const CostCoefficients c{0.5, 0.2, 0.3};
  const CostBreakdown a = total_cost(d, c, 4, 8), b = total_cost(d, c, 8, 4);
  EXPECT_DOUBLE_EQ(b.c_comm_up, a.c_comm_up / 2);
  EXPECT_DOUBLE_EQ(b.c_store, a.c_store * 2);
  EXPECT_DOUBLE_EQ(b.c_comm_down, a.c_comm_down);
  EXPECT_DOUBLE_EQ(b.c_comp, a.c_comp);
  EXPECT_DOUBLE_EQ(a.total, a.c_comm_up + a.c_comm_down + a.c_comp + a.c_store);
}

TEST(TotalCost, MatchesIndependentFormulaOnRandomDraws) {
  UniformSource rng(51);
  for (int t = 0; t < 200; ++t) {
    const LayerDims d = random_dims(rng);
    const CostCoefficients c{rng.next01(), rng.next01(), rng.next01()};
    for (auto [a, b] : permissible_factor_pairs(32)) {
      const double want = U(d, c, static_cast<double>(a), 32.0);
      EXPECT_NEAR(total_cost(d, c, a, b).total, want, 1e-12 * want);
    }
  }
}

TEST(OptimalContinuous, Examples) {
  const LayerDims d{1, 32, 32, 16, 3, 3, 1, 0};
  EXPECT_NEAR(optimal_continuous(d, kTableCoeffs, 16),
              std::sqrt(2 * 0.09 * 1024 * 16 / (0.023 * 16 * 9)), 1e-12);
  EXPECT_NEAR(optimal_continuous(d, kTableCoeffs, 16), 29.8, 0.05);
  EXPECT_NEAR(optimal_continuous(d, kTableCoeffs, 64) / optimal_continuous(d, kTableCoeffs, 16), 2.0, 1e-12);

  // Balanced constants: a1 = 4 lambda_comm C Hp Wp, a2 = 2 lambda_store N C K / Q.
  const LayerDims t{1, 1, 1, 2, 1, 1, 1, 0};
  EXPECT_NEAR(optimal_continuous(t, {1.0, 0.0, 1.0}, 1), 1.0, 1e-15);
  EXPECT_THROW(optimal_continuous(d, {0.09, 0.0, 0.0}, 16), ParameterError);
}

TEST(OptimalContinuous, MinimizesUOnLogGrid) {
  UniformSource rng(52);
  for (int t = 0; t < 50; ++t) {
    const LayerDims d = random_dims(rng);
    const CostCoefficients c{rng.next(0.01, 1), rng.next(0, 1), rng.next(0.01, 1)};
    const double Q = 32;
    const double star = optimal_continuous(d, c, 32);
    const double u_star = U(d, c, star, Q);
    for (double k = 1e-3; k < 1e5; k *= 1.07) EXPECT_LE(u_star, U(d, c, k, Q) * (1 + 1e-9));
  }
}

TEST(Optimizer, ConvexSecondDifference) {
  UniformSource rng(53);
  for (int t = 0; t < 100; ++t) {
    const LayerDims d = random_dims(rng);
    const CostCoefficients c{rng.next(0.001, 1), rng.next(0, 1), rng.next(0.001, 1)};
    const double Q = 64;
    for (double a = 2; a + 4 <= 64; a += 2) {
      const double second = U(d, c, a, Q) - 2 * U(d, c, a + 2, Q) + U(d, c, a + 4, Q);
      EXPECT_GT(second, 0.0);
    }
  }
}

TEST(Optimizer, PermissiblePairs) {
  using P = std::vector<std::pair<std::size_t, std::size_t>>;
  EXPECT_EQ(permissible_factor_pairs(16), (P{{1, 16}, {2, 8}, {4, 4}, {8, 2}, {16, 1}}));
  EXPECT_EQ(permissible_factor_pairs(12), (P{{1, 12}, {2, 6}, {6, 2}, {12, 1}}));
  EXPECT_EQ(permissible_factor_pairs(1), (P{{1, 1}}));
  EXPECT_TRUE(permissible_factor_pairs(9).empty());
  EXPECT_THROW(optimize_discrete({}, kTableCoeffs, 9), ParameterError);
  EXPECT_THROW(optimize_discrete({}, kTableCoeffs, 0), ParameterError);
}

TEST(Optimizer, AgreesWithBruteForce) {
  UniformSource rng(54);
  for (std::size_t Q : {4u, 8u, 16u, 32u, 64u})
    for (int t = 0; t < 20; ++t) {
      const LayerDims d = random_dims(rng);
      const CostCoefficients c{rng.next01(), rng.next01(), rng.next01()};
      const DiscreteOptimum got = optimize_discrete(d, c, Q);
      const Brute want = brute_force(d, c, Q);
      EXPECT_EQ(got.k_A, want.k_A);
      EXPECT_EQ(got.k_B, want.k_B);
      EXPECT_NEAR(got.cost.total, want.cost, 1e-9 * want.cost);
    }
}

TEST(Optimizer, ConstructedTieGoesToSmallerKA) {
  // U(1) = 22, U(2) = U(4) = 16.
  const LayerDims d{1, 2, 2, 1, 1, 1, 1, 0};
  const CostCoefficients c{1.0, 0.0, 4.0};
  EXPECT_DOUBLE_EQ(total_cost(d, c, 2, 2).total, total_cost(d, c, 4, 1).total);
  const DiscreteOptimum o = optimize_discrete(d, c, 4);
  EXPECT_EQ(o.k_A, 2u);
  EXPECT_EQ(o.k_B, 2u);
}

TEST(Optimizer, SymmetricToyPicksKAOne) {
  const LayerDims t{1, 1, 1, 2, 1, 1, 1, 0};
  const DiscreteOptimum o = optimize_discrete(t, {1.0, 0.0, 8.0}, 8);
  EXPECT_EQ(o.k_A, 1u);
  EXPECT_EQ(o.k_B, 8u);
  EXPECT_EQ(brute_force(t, {1.0, 0.0, 8.0}, 8).k_A, 1u);
}

TEST(Optimizer, LeNetTable) {
  const auto& c1 = find("lenet5", "conv1").dims;
  const auto& c2 = find("lenet5", "conv2").dims;
  auto pair = [](const DiscreteOptimum& o) { return std::make_pair(o.k_A, o.k_B); };
  EXPECT_EQ(pair(optimize_discrete(c1, kTableCoeffs, 16)), std::make_pair(16ul, 1ul));
  EXPECT_EQ(pair(optimize_discrete(c2, kTableCoeffs, 16)), std::make_pair(8ul, 2ul));
  EXPECT_EQ(pair(optimize_discrete(c1, kTableCoeffs, 32)), std::make_pair(32ul, 1ul));
  EXPECT_EQ(pair(optimize_discrete(c2, kTableCoeffs, 32)), std::make_pair(16ul, 2ul));
}

TEST(Optimizer, AlexNetConv2AtQ32) {
  const auto& d = find("alexnet", "conv2").dims;
  const DiscreteOptimum o = optimize_discrete(d, kTableCoeffs, 32);
  EXPECT_EQ(o.k_A, 8u);
  EXPECT_EQ(o.k_B, 4u);
}

TEST(Optimizer, RegistryRowsMatchOracle) {
  for (const auto& e : layer_registry())
    for (std::size_t Q : {4u, 8u, 16u, 32u, 64u}) {
      const DiscreteOptimum o = optimize_discrete(e.dims, kTableCoeffs, Q);
      const Brute b = brute_force(e.dims, kTableCoeffs, Q);
      EXPECT_EQ(o.k_A, b.k_A) << e.model << "/" << e.layer << " Q=" << Q;
    }
}

TEST(Registry, ContentsAndLookup) {
  EXPECT_GE(layer_registry_version(), 1);
  for (const char* m : {"lenet5", "alexnet", "vgg16"}) EXPECT_FALSE(layers_for_model(m).empty());
  EXPECT_THROW(layers_for_model("resnet-nope"), ParameterError);
  for (const auto& e : layer_registry()) {
    EXPECT_FALSE(e.source.empty());
    EXPECT_NO_THROW(e.dims.output());
  }
  const auto& a1 = find("alexnet", "conv1").dims;
  EXPECT_EQ(a1.C, 3u);
  EXPECT_EQ(a1.N, 96u);
  EXPECT_EQ(a1.K_H, 11u);
  EXPECT_EQ(a1.stride, 4u);
}

TEST(NodeVolumes, ExactCounts) {
  const LayerDims d{3, 13, 7, 8, 3, 3, 2, 1};  // H' = 7 -> padded 8 at k_A = 4
  const NodeVolumes v = node_volumes(d, 4, 4);
  const ApcpPlan p = plan_apcp(13, 7, 4, {2, 1}, 3);
  EXPECT_EQ(v.comm_up, 2u * 3 * p.slice_height * 9);
  EXPECT_EQ(v.comm_down, 4u * 2 * 2 * 4);
  EXPECT_EQ(v.store, 2u * 2 * 3 * 9);
  EXPECT_EQ(v.comp, v.comm_down * 27);
  EXPECT_THROW(node_volumes(d, 4, 3), ShapeError);
}
