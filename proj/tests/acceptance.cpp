// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status if
// any criterion fails. Reference values come from the oracles in oracles.hpp,
// not from the library's own convolution.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "fcdcc/codec.hpp"
#include "fcdcc/config.hpp"
#include "fcdcc/cost.hpp"
#include "fcdcc/experiments.hpp"
#include "fcdcc/partition.hpp"
#include "fcdcc/runtime.hpp"
#include "oracles.hpp"

using namespace fcdcc;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Coded exactness at AlexNet conv1 scale.
Outcome end_to_end_exactness() {
  const LayerDims L{3, 227, 227, 96, 11, 11, 4, 0};
  const auto [x, k] = make_inputs(L, 2024);
  SimConfig cfg;
  cfg.n = 18;
  cfg.k_A = 2;
  cfg.k_B = 32;
  cfg.conv = L.conv();
  cfg.threads = 1;
  const RunResult r = run_end_to_end(x, k, cfg);
  const Tensor3 ref = oracle::conv(x, k, 4, 0);
  const double err = oracle::mse_loop(r.output, ref);
  return {r.output.dims() == ref.dims() && err <= 1e-20,
          "mse=" + fmt("%.3e", err) + " kappa=" + fmt("%.3f", r.report.kappa)};
}

// 2. Every delta-subset of n = 6 workers decodes with k_A = k_B = 4.
Outcome any_subset_decodability() {
  const LayerDims L{3, 14, 11, 8, 3, 3, 1, 1};
  const auto [x, k] = make_inputs(L, 77);
  const Tensor3 ref = oracle::conv(x, k, 1, 1);
  double worst = 0.0;
  std::size_t subsets = 0;
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = a + 1; b < 6; ++b) {
      SimConfig cfg;
      cfg.n = 6;
      cfg.k_A = cfg.k_B = 4;
      cfg.conv = L.conv();
      cfg.stragglers.failed = {a, b};
      const RunResult r = run_end_to_end(x, k, cfg);
      std::vector<std::size_t> want;
      for (std::size_t i = 0; i < 6; ++i)
        if (i != a && i != b) want.push_back(i);
      if (r.report.used_workers != want) return {false, "unexpected responder set"};
      worst = std::max(worst, max_abs_diff(r.output, ref));
      ++subsets;
    }
  return {subsets == 15 && worst <= 1e-8,
          std::to_string(subsets) + " subsets, max_abs_err=" + fmt("%.3e", worst)};
}

// 3. CRME vs real-point baseline conditioning and decode error.
Outcome stability_ordering() {
  StabilityRequest req;
  req.trials = 200;
  req.seed = 17;
  std::string detail;
  bool ok = true;
  for (auto [n, kA, kB] : {std::array<std::size_t, 3>{20, 8, 8}, {40, 8, 16}}) {
    req.n = {n};
    req.k = {{kA, kB}};
    const auto rows = stability_rows(req);
    double crme_k = 0.0, base_k = 0.0, base_k_min = INFINITY, crme_mse = 0.0, base_mse = 0.0;
    std::size_t crme_rows = 0, base_rows = 0;
    for (const auto& r : rows) {
      if (r.codec == CodecKind::Crme) {
        crme_k = std::max(crme_k, r.kappa);
        crme_mse = std::max(crme_mse, r.mse);
        ++crme_rows;
      } else {
        base_k = std::max(base_k, r.kappa);
        base_k_min = std::min(base_k_min, r.kappa);
        base_mse = std::max(base_mse, r.mse);
        ++base_rows;
      }
    }
    ok = ok && crme_rows == 200 && base_rows == 200 && rows.front().delta == n * 4 / 5;
    ok = ok && crme_k < base_k && crme_k < base_k_min;
    if (n == 40) ok = ok && base_mse > 1e-3 && crme_mse <= 1e-12;
    detail += "(" + std::to_string(n) + "," + std::to_string(kA * kB / 4) +
              "): crme kappa max " + fmt("%.3e", crme_k) + " mse max " + fmt("%.3e", crme_mse) +
              ", baseline kappa max " + fmt("%.3e", base_k) + " mse max " +
              fmt("%.3e", base_mse) + "; ";
  }
  return {ok, detail};
}

// 4. Makespan is flat up to gamma stragglers and grows past it.
Outcome straggler_robustness() {
  RunConfig cfg;
  cfg.layer = {3, 18, 18, 8, 3, 3, 1, 1};
  cfg.n = 8;
  cfg.k_A = cfg.k_B = 4;
  cfg.seed = 4;
  const auto rows = straggler_sweep(cfg, 5, 1.0);
  bool ok = rows.size() == 6 && rows[0].gamma == 4;
  std::string detail = "makespan:";
  for (const auto& r : rows) {
    detail += " " + fmt("%.6g", r.makespan);
    if (r.stragglers <= 4) ok = ok && r.makespan == rows[0].makespan;
    ok = ok && r.mse <= 1e-20;
  }
  ok = ok && rows[5].makespan > rows[0].makespan &&
       rows[5].makespan - rows[0].makespan >= 1.0 * (1 - 1e-9);
  return {ok, detail};
}

// 5. Optimizer table for LeNet-5 and agreement with exhaustive search.
Outcome optimizer_table() {
  const CostCoefficients c{0.09, 0.0, 0.023};
  const auto rows = optimize_table(layers_for_model("lenet5"), c, {16, 32});
  using P = std::pair<std::size_t, std::size_t>;
  const std::vector<P> want{{16, 1}, {8, 2}, {32, 1}, {16, 2}};
  bool ok = rows.size() == 4;
  std::string detail;
  for (std::size_t i = 0; ok && i < 4; ++i) {
    ok = P{rows[i].k_A, rows[i].k_B} == want[i];
    detail += rows[i].layer + "@Q" + std::to_string(rows[i].Q) + "=(" +
              std::to_string(rows[i].k_A) + "," + std::to_string(rows[i].k_B) + ") ";
  }
  // Exhaustive oracle over every registry layer, written independently.
  std::size_t checked = 0;
  for (const auto& e : layer_registry())
    for (std::size_t Q : {4u, 8u, 16u, 32u, 64u}) {
      const LayerDims& d = e.dims;
      const double Hp = static_cast<double>(d.H + 2 * d.padding);
      const double Wp = static_cast<double>(d.W + 2 * d.padding);
      const double kern = static_cast<double>(d.K_H * d.K_W);
      std::size_t best = 0;
      double best_u = INFINITY;
      for (std::size_t a = 1; a <= Q; ++a) {
        if (Q % a || (a > 1 && a % 2) || (Q / a > 1 && (Q / a) % 2)) continue;
        const double u = c.lambda_comm * 4 * static_cast<double>(d.C) * Hp * Wp /
                             static_cast<double>(a) +
                         c.lambda_store * 2 * static_cast<double>(d.N * d.C) * kern *
                             static_cast<double>(a) / static_cast<double>(Q);
        if (u < best_u * (1 - 1e-12)) {
          best_u = u;
          best = a;
        }
      }
      ok = ok && optimize_discrete(d, c, Q).k_A == best;
      ++checked;
    }
  return {ok, detail + "| oracle agreement on " + std::to_string(checked) + " (layer, Q) rows"};
}

// 6. Scale-independent properties.
Outcome property_suite() {
  UniformSource rng(606);
  std::string failures;

  // Bilinear Kronecker identity.
  {
    const std::size_t n = 6, kA = 4, kB = 4;
    const Codebook book = build_codebook(n, kA, kB);
    const Matrix G = build_joint(book);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<Tensor3> xs;
      std::vector<Tensor4> ks;
      for (std::size_t a = 0; a < kA; ++a) xs.push_back(random_tensor3({2, 6, 6}, rng));
      for (std::size_t b = 0; b < kB; ++b) ks.push_back(random_tensor4({2, 2, 2, 2}, rng));
      const Eigen::MatrixXd A = oracle::crme_matrix(kA, n, book.q, 1);
      const Eigen::MatrixXd B = oracle::crme_matrix(kB, n, book.q, kA / 2);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t b1 = 0; b1 < 2; ++b1)
          for (std::size_t b2 = 0; b2 < 2; ++b2) {
            Tensor3 cx(xs[0].dims());
            Tensor4 ck(ks[0].dims());
            for (std::size_t a = 0; a < kA; ++a)
              for (std::size_t e = 0; e < cx.size(); ++e)
                cx.data()[e] += A(static_cast<long>(a), static_cast<long>(2 * i + b1)) *
                                xs[a].data()[e];
            for (std::size_t b = 0; b < kB; ++b)
              for (std::size_t e = 0; e < ck.size(); ++e)
                ck.data()[e] += B(static_cast<long>(b), static_cast<long>(2 * i + b2)) *
                                ks[b].data()[e];
            const Tensor3 lhs = oracle::conv(cx, ck, 1, 0);
            Tensor3 rhs(lhs.dims());
            for (std::size_t a = 0; a < kA; ++a)
              for (std::size_t b = 0; b < kB; ++b) {
                const Tensor3 y = oracle::conv(xs[a], ks[b], 1, 0);
                const double g =
                    G(static_cast<long>(a * kB + b), static_cast<long>(4 * i + 2 * b1 + b2));
                for (std::size_t e = 0; e < y.size(); ++e) rhs.data()[e] += g * y.data()[e];
              }
            worst = std::max(worst, max_abs_diff(lhs, rhs));
          }
    }
    if (!(worst <= 1e-10)) failures += "kronecker(" + fmt("%.2e", worst) + ") ";
  }

  // Uncoded partition-merge bitwise round trip.
  {
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const std::size_t C = 1 + rng.next_u64() % 3, H = 8 + rng.next_u64() % 9;
      const std::size_t K = 1 + rng.next_u64() % 3, s = 1 + rng.next_u64() % 2;
      const std::size_t p = rng.next_u64() % 2;
      const Tensor3 x = random_tensor3({C, H, H}, rng);
      const Tensor4 k = random_tensor4({8, C, K, K}, rng);
      const Tensor3 ref = conv3d_ref(x, k, {s, p});
      for (std::size_t kA : {1u, 2u, 4u})
        for (std::size_t kB : {1u, 2u, 4u, 8u}) {
          if (ref.height() < kA) continue;
          const ApcpPartition xp = apcp_partition(x, kA, {s, p}, K);
          const KccpPartition kp = kccp_partition(k, kB);
          BlockMap m;
          for (std::size_t a = 0; a < kA; ++a)
            for (std::size_t b = 0; b < kB; ++b)
              m.emplace(BlockIndex{a, b}, conv3d_ref(xp.slices[a], kp.parts[b], {s, 0}));
          ok = ok && merge_output(m, kA, kB, xp.plan) == ref;
        }
    }
    if (!ok) failures += "round-trip ";
  }

  // Cost convexity over the even k_A grid, 100 random draws.
  {
    bool ok = true;
    for (int t = 0; t < 100; ++t) {
      LayerDims d;
      d.C = 1 + rng.next_u64() % 64;
      d.H = d.W = 8 + rng.next_u64() % 200;
      d.N = 1 + rng.next_u64() % 256;
      d.K_H = d.K_W = 1 + 2 * (rng.next_u64() % 3);
      const CostCoefficients c{rng.next(0.001, 1), rng.next(0, 1), rng.next(0.001, 1)};
      const double Q = 64;
      const double Hp = static_cast<double>(d.H + 2 * d.padding);
      const double Wp = static_cast<double>(d.W + 2 * d.padding);
      const OutputDims od = d.output();
      const double kern = static_cast<double>(d.K_H * d.K_W);
      auto U = [&](double kA) {
        return c.lambda_comm * (4 * static_cast<double>(d.C) * Hp * Wp / kA +
                                4 * static_cast<double>(d.N * od.height * od.width) / Q) +
               c.lambda_comp * 4 * static_cast<double>(d.C * d.N * d.H * d.W) * kern / Q +
               c.lambda_store * 2 * static_cast<double>(d.N * d.C) * kern * kA / Q;
      };
      // The library's cost agrees with U wherever k_B = Q / k_A is integral ...
      for (std::size_t a : {2u, 4u, 8u, 16u, 32u}) {
        const double lib = total_cost(d, c, a, 64 / a).total;
        ok = ok && std::abs(lib - U(static_cast<double>(a))) <= 1e-9 * lib;
      }
      // ... and U has positive second differences along the even grid.
      for (double a = 2; a + 4 <= Q; a += 2) ok = ok && U(a) - 2 * U(a + 2) + U(a + 4) > 0;
    }
    if (!ok) failures += "convexity ";
  }

  // Cost-model volumes equal the runtime's reported volumes.
  {
    bool ok = true;
    const std::array<std::array<std::size_t, 9>, 3> cases{{{3, 16, 12, 8, 3, 1, 1, 4, 4},
                                                           {2, 21, 9, 12, 3, 2, 0, 2, 6},
                                                           {1, 13, 13, 4, 5, 1, 2, 6, 2}}};
    for (const auto& cs : cases) {
      const LayerDims d{cs[0], cs[1], cs[2], cs[3], cs[4], cs[4], cs[5], cs[6]};
      const auto [x, k] = make_inputs(d, 8);
      SimConfig cfg;
      cfg.k_A = cs[7];
      cfg.k_B = cs[8];
      cfg.n = cs[7] * cs[8] / 4 + 2;
      cfg.conv = d.conv();
      const SimReport r = run_end_to_end(x, k, cfg).report;
      const NodeVolumes v = node_volumes(d, cs[7], cs[8]);
      ok = ok && r.v_comm_up == v.comm_up && r.v_comm_down == v.comm_down &&
           r.v_store == v.store && r.m_comp == v.comp;
    }
    if (!ok) failures += "accounting ";
  }

  // SimReport determinism under a fixed seed, across thread counts.
  {
    RunConfig cfg;
    cfg.layer = {2, 16, 10, 8, 3, 3, 1, 1};
    cfg.n = 10;
    cfg.k_A = 4;
    cfg.k_B = 8;
    cfg.seed = 12;
    cfg.stragglers.random_count = 3;
    cfg.stragglers.random_delay_s = 0.7;
    const RunRecord first = run_config(cfg);
    bool ok = true;
    for (std::size_t threads : {1u, 2u, 4u, 8u}) {
      cfg.threads = threads;
      ok = ok && run_config(cfg).report == first.report;
    }
    if (!ok) failures += "determinism ";
  }

  return {failures.empty(), failures.empty() ? "all properties hold" : "failed: " + failures};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "end-to-end coded exactness (AlexNet conv1, n=18, (2,32))", 60, end_to_end_exactness},
      {2, "any-delta-subset decodability (n=6, k_A=k_B=4)", 10, any_subset_decodability},
      {3, "numerical-stability ordering ((20,16), (40,32))", 120, stability_ordering},
      {4, "straggler robustness (n=8, delta=4, delay 1 s)", 10, straggler_robustness},
      {5, "optimizer table (LeNet-5, Q=16/32)", 60, optimizer_table},
      {6, "property suite", 120, property_suite},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.passed && in_time;
    failed += !pass;
    std::printf("%s criterion %d: %s [%.2f s / %.0f s limit] %s%s\n", pass ? "PASS" : "FAIL", c.id,
                c.name, secs, c.limit_s, o.detail.c_str(), in_time ? "" : " (time limit exceeded)");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
