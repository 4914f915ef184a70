#include "fcdcc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>

#include "fcdcc/codec.hpp"
#include "fcdcc/config.hpp"
#include "fcdcc/cost.hpp"
#include "fcdcc/experiments.hpp"
#include "fcdcc/partition.hpp"
#include "fcdcc/runtime.hpp"

namespace fcdcc {

namespace {

using Check = std::function<std::string(std::uint64_t)>;  // empty string on success

std::string bilinear_identity(std::uint64_t seed) {
  UniformSource rng(seed);
  const std::size_t n = 5, k_A = 4, k_B = 4;
  const Codebook book = build_codebook(n, k_A, k_B);
  const Matrix G = build_joint(book);
  std::vector<Tensor3> xs;
  std::vector<Tensor4> ks;
  for (std::size_t a = 0; a < k_A; ++a) xs.push_back(random_tensor3({2, 5, 5}, rng));
  for (std::size_t b = 0; b < k_B; ++b) ks.push_back(random_tensor4({2, 2, 3, 3}, rng));
  const auto cx = encode_list(xs, book.A);
  const auto ck = encode_list(ks, book.B);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b1 = 0; b1 < 2; ++b1) {
      for (std::size_t b2 = 0; b2 < 2; ++b2) {
        const Tensor3 lhs = conv3d_ref(cx[2 * i + b1], ck[2 * i + b2], {});
        Tensor3 rhs(lhs.dims());
        for (std::size_t a = 0; a < k_A; ++a) {
          for (std::size_t b = 0; b < k_B; ++b) {
            const double g = G(static_cast<Eigen::Index>(a * k_B + b),
                               static_cast<Eigen::Index>(4 * i + 2 * b1 + b2));
            const Tensor3 y = conv3d_ref(xs[a], ks[b], {});
            for (std::size_t e = 0; e < y.size(); ++e) rhs.data()[e] += g * y.data()[e];
          }
        }
        worst = std::max(worst, max_abs_diff(lhs, rhs));
      }
    }
  }
  return worst <= 1e-10 ? "" : "max deviation " + format_sci(worst);
}

std::string partition_round_trip(std::uint64_t seed) {
  UniformSource rng(seed);
  const Tensor3 x = random_tensor3({3, 14, 9}, rng);
  const Tensor4 k = random_tensor4({8, 3, 3, 3}, rng);
  const ConvParams p{1, 1};
  const Tensor3 ref = conv3d_ref(x, k, p);
  for (std::size_t k_A : {1u, 2u, 4u, 6u}) {
    for (std::size_t k_B : {1u, 2u, 4u}) {
      const ApcpPartition xp = apcp_partition(x, k_A, p, 3);
      const KccpPartition kp = kccp_partition(k, k_B);
      BlockMap blocks;
      for (std::size_t a = 0; a < k_A; ++a)
        for (std::size_t b = 0; b < k_B; ++b)
          blocks.emplace(BlockIndex{a, b}, conv3d_ref(xp.slices[a], kp.parts[b], {1, 0}));
      if (!(merge_output(blocks, k_A, k_B, xp.plan) == ref)) {
        return "merge differs at (" + std::to_string(k_A) + "," + std::to_string(k_B) + ")";
      }
    }
  }
  return "";
}

std::string any_subset_decodes(std::uint64_t seed) {
  RunConfig cfg;
  cfg.layer = {3, 10, 8, 8, 3, 3, 1, 1};
  cfg.n = 6;
  cfg.k_A = cfg.k_B = 4;
  cfg.seed = seed;
  const auto [x, k] = make_inputs(cfg.layer, seed);
  const Tensor3 ref = conv3d_ref(x, k, cfg.layer.conv());
  for (std::size_t a = 0; a < cfg.n; ++a) {
    for (std::size_t b = a + 1; b < cfg.n; ++b) {
      cfg.stragglers.failed = {a, b};
      const RunResult r = run_end_to_end(x, k, cfg.sim());
      const double err = max_abs_diff(r.output, ref);
      if (err > 1e-8) return "subset without {" + std::to_string(a) + "," + std::to_string(b) +
                             "} error " + format_sci(err);
    }
  }
  return "";
}

std::string cost_convexity(std::uint64_t seed) {
  UniformSource rng(seed);
  for (int t = 0; t < 100; ++t) {
    LayerDims d;
    d.C = 1 + rng.next_u64() % 8;
    d.H = d.W = 16 + rng.next_u64() % 64;
    d.N = 1 + rng.next_u64() % 64;
    d.K_H = d.K_W = 1 + rng.next_u64() % 5;
    const CostCoefficients c{rng.next(0.01, 1.0), rng.next(0.0, 1.0), rng.next(0.01, 1.0)};
    const std::size_t Q = 64;
    // k_A-dependent part of the per-node cost as a smooth function of k_A;
    // the remaining terms are constant at fixed Q.
    auto U = [&](double a) {
      const double Hp = static_cast<double>(d.H + 2 * d.padding);
      const double Wp = static_cast<double>(d.W + 2 * d.padding);
      const double kern = static_cast<double>(d.K_H * d.K_W);
      return c.lambda_comm * 4.0 * static_cast<double>(d.C) * Hp * Wp / a +
             c.lambda_store * 2.0 * static_cast<double>(d.N * d.C) * kern * a /
                 static_cast<double>(Q);
    };
    const double rest = total_cost(d, c, 2, Q / 2).total - U(2.0);
    for (std::size_t a : {4u, 8u, 16u, 32u}) {
      const double full = total_cost(d, c, a, Q / a).total;
      if (std::abs(full - (U(static_cast<double>(a)) + rest)) > 1e-9 * full) {
        return "closed form is not affine in the k_A terms";
      }
    }
    for (double a = 2; a + 4 <= static_cast<double>(Q); a += 2) {
      if (!(U(a) - 2 * U(a + 2) + U(a + 4) > 0.0)) return "non-positive second difference";
    }
  }
  return "";
}

std::string volume_accounting(std::uint64_t seed) {
  RunConfig cfg;
  cfg.layer = {3, 13, 7, 8, 3, 3, 2, 1};
  cfg.n = 5;
  cfg.k_A = 4;
  cfg.k_B = 4;
  cfg.seed = seed;
  const auto [x, k] = make_inputs(cfg.layer, seed);
  const SimReport r = run_end_to_end(x, k, cfg.sim()).report;
  const NodeVolumes v = node_volumes(cfg.layer, cfg.k_A, cfg.k_B);
  const NodeVolumes got{r.v_comm_up, r.v_comm_down, r.v_store, r.m_comp};
  return v == got ? "" : "cost-model volumes differ from runtime";
}

std::string determinism(std::uint64_t seed) {
  RunConfig cfg;
  cfg.layer = {2, 12, 6, 4, 3, 3, 1, 0};
  cfg.n = 6;
  cfg.k_A = 4;
  cfg.k_B = 4;
  cfg.seed = seed;
  cfg.stragglers.random_count = 2;
  cfg.stragglers.random_delay_s = 0.5;
  const RunRecord a = run_config(cfg);
  cfg.threads = 1;
  const RunRecord b = run_config(cfg);
  return a.report == b.report ? "" : "reports differ between runs";
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(std::uint64_t seed) {
  const std::vector<std::pair<std::string, Check>> checks = {
      {"bilinear-kronecker-identity", bilinear_identity},
      {"partition-merge-round-trip", partition_round_trip},
      {"any-delta-subset-decodes", any_subset_decodes},
      {"cost-convexity", cost_convexity},
      {"volume-accounting", volume_accounting},
      {"report-determinism", determinism},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : checks) {
    CheckResult r{name, false, ""};
    try {
      r.detail = fn(seed);
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fcdcc
