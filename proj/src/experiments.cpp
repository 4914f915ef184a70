#include "fcdcc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

#include "fcdcc/errors.hpp"
#include "json.hpp"

namespace fcdcc {

std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

RunRecord run_config(const RunConfig& config) {
  const auto [x, k] = make_inputs(config.layer, config.seed);
  const Tensor3 ref = conv3d_ref(x, k, config.layer.conv());
  RunResult r = run_end_to_end(x, k, config.sim());
  RunRecord rec;
  rec.report = std::move(r.report);
  rec.mse = mse(r.output, ref);
  rec.max_abs_error = max_abs_diff(r.output, ref);
  return rec;
}

std::string run_record_json(const RunRecord& record) {
  const SimReport& r = record.report;
  nlohmann::ordered_json j;
  j["codec"] = std::string(to_string(r.codec));
  j["n"] = r.n;
  j["k_A"] = r.k_A;
  j["k_B"] = r.k_B;
  j["delta"] = r.delta;
  j["gamma"] = r.gamma;
  j["responsive"] = r.responsive;
  j["used_workers"] = r.used_workers;
  j["mse"] = record.mse;
  j["max_abs_error"] = record.max_abs_error;
  j["kappa"] = r.kappa;
  j["makespan"] = r.makespan;
  j["encode_time"] = r.encode_time;
  j["upload_time"] = r.upload_time;
  j["compute_time"] = r.compute_time;
  j["download_time"] = r.download_time;
  j["decode_time"] = r.decode_time;
  j["v_comm_up"] = r.v_comm_up;
  j["v_comm_down"] = r.v_comm_down;
  j["v_store"] = r.v_store;
  j["m_comp"] = r.m_comp;
  return j.dump(2) + "\n";
}

std::pair<std::size_t, std::size_t> matched_baseline_split(std::size_t k_A, std::size_t k_B) {
  const std::size_t delta = k_A * k_B / 4;
  const auto pairs = permissible_factor_pairs(delta);
  if (delta == 0 || pairs.empty()) {
    throw ParameterError("no permissible baseline split for threshold " + std::to_string(delta));
  }
  auto dist = [&](std::pair<std::size_t, std::size_t> p) {
    const auto d = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    return d(p.first, k_A / 2) + d(p.second, k_B / 2);
  };
  auto best = pairs.front();
  for (const auto& p : pairs)
    if (dist(p) < dist(best)) best = p;
  return best;
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = seed ^ 0x9E3779B97F4A7C15ULL;
  for (std::uint64_t v : {a, b, c}) {
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

std::vector<std::size_t> sample_subset(UniformSource& rng, std::size_t n, std::size_t size) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t span = n - i;
    const std::size_t j = i + std::min(span - 1, static_cast<std::size_t>(rng.next01() * span));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct Prepared {
  Dispatch d;
  std::vector<WorkerOutput> outputs;  // indexed by worker id
};

Prepared prepare(const Tensor3& x, const Tensor4& k, const SimConfig& cfg) {
  Prepared p{dispatch(x, k, cfg), {}};
  for (const auto& t : p.d.subtasks) {
    WorkerSpec spec;
    spec.id = t.worker_id;
    p.outputs.push_back(worker_compute(t, cfg.conv.stride, cfg.time, spec));
  }
  return p;
}

std::pair<double, double> decode_subset(const Prepared& p, std::span<const std::size_t> ids,
                                        std::size_t k_A, std::size_t k_B, const Tensor3& ref) {
  std::vector<std::vector<Tensor3>> collected;
  for (std::size_t id : ids) collected.push_back(p.outputs[id].blocks);
  const RecoverySet rs = build_recovery(p.d.G, ids, {p.d.blocks_per_worker, false});
  const BlockMap blocks = decode(collected, rs, p.d.layout, p.d.block_dims);
  const Tensor3 y = merge_output(blocks, k_A, k_B, p.d.apcp);
  return {rs.kappa, mse(y, ref)};
}

}  // namespace

std::vector<StabilityRow> stability_rows(const StabilityRequest& req) {
  std::vector<StabilityRow> rows;
  if (req.trials == 0) return rows;
  for (std::size_t n : req.n) {
    for (auto [k_A, k_B] : req.k) {
      if (k_A % 2 != 0 || k_B % 2 != 0 || k_A == 0 || k_B == 0) {
        throw ParameterError("stability configs need even k_A, k_B");
      }
      const std::size_t delta = k_A * k_B / 4;
      if (delta > n) continue;
      const auto [b_A, b_B] = matched_baseline_split(k_A, k_B);

      // Small synthetic layer whose geometry splits evenly under both codecs.
      LayerDims L;
      L.C = 2;
      L.K_H = L.K_W = 3;
      L.N = std::lcm(k_B, b_B);
      L.H = std::lcm(k_A, b_A) + 2;
      L.W = 6;
      const std::uint64_t s = mix(req.seed, n, k_A, k_B);
      const auto [x, k] = make_inputs(L, s);
      const Tensor3 ref = conv3d_ref(x, k, L.conv());

      SimConfig crme_cfg;
      crme_cfg.n = n;
      crme_cfg.k_A = k_A;
      crme_cfg.k_B = k_B;
      crme_cfg.conv = L.conv();
      crme_cfg.codec = CodecKind::Crme;
      SimConfig base_cfg = crme_cfg;
      base_cfg.k_A = b_A;
      base_cfg.k_B = b_B;
      base_cfg.codec = CodecKind::RealVandermonde;

      const Prepared crme = prepare(x, k, crme_cfg);
      const Prepared base = prepare(x, k, base_cfg);

      UniformSource rng(s ^ 0x5355425345545321ULL);
      std::vector<std::vector<std::size_t>> subsets;
      for (std::size_t t = 0; t < req.trials; ++t) subsets.push_back(sample_subset(rng, n, delta));

      for (std::size_t t = 0; t < req.trials; ++t) {
        const auto [kappa, err] = decode_subset(crme, subsets[t], k_A, k_B, ref);
        rows.push_back({CodecKind::Crme, n, k_A, k_B, delta, t, kappa, err, subsets[t]});
      }
      for (std::size_t t = 0; t < req.trials; ++t) {
        const auto [kappa, err] = decode_subset(base, subsets[t], b_A, b_B, ref);
        rows.push_back(
            {CodecKind::RealVandermonde, n, b_A, b_B, delta, t, kappa, err, subsets[t]});
      }
    }
  }
  return rows;
}

std::string stability_csv(const std::vector<StabilityRow>& rows) {
  std::string out = "codec,n,k_A,k_B,delta,subset_id,kappa,mse\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.codec)) + "," + std::to_string(r.n) + "," +
           std::to_string(r.k_A) + "," + std::to_string(r.k_B) + "," + std::to_string(r.delta) +
           "," + std::to_string(r.subset_id) + "," + format_sci(r.kappa) + "," +
           format_sci(r.mse) + "\n";
  }
  return out;
}

std::vector<StragglerRow> straggler_sweep(const RunConfig& config, std::size_t max_stragglers,
                                          double delay_s) {
  if (!(delay_s >= 0.0) || !std::isfinite(delay_s)) {
    throw ConfigError({"delay_s: expected a finite non-negative number"});
  }
  RunConfig widest = config;
  widest.stragglers.random_count = max_stragglers;
  widest.stragglers.random_delay_s = delay_s;
  validate_run_config(widest);

  const auto [x, k] = make_inputs(config.layer, config.seed);
  const Tensor3 ref = conv3d_ref(x, k, config.layer.conv());
  std::vector<StragglerRow> rows;
  for (std::size_t c = 0; c <= max_stragglers; ++c) {
    RunConfig cfg = config;
    cfg.stragglers.random_count = c;
    cfg.stragglers.random_delay_s = delay_s;
    const RunResult r = run_end_to_end(x, k, cfg.sim());
    rows.push_back({c, delay_s, r.report.makespan, r.report.gamma, mse(r.output, ref)});
  }
  return rows;
}

std::string straggler_csv(const std::vector<StragglerRow>& rows) {
  std::string out = "stragglers,delay_s,makespan,gamma,mse\n";
  for (const auto& r : rows) {
    out += std::to_string(r.stragglers) + "," + format_sci(r.delay_s) + "," +
           format_sci(r.makespan) + "," + std::to_string(r.gamma) + "," + format_sci(r.mse) +
           "\n";
  }
  return out;
}

std::vector<OptimizeRow> optimize_table(const std::vector<LayerEntry>& layers,
                                        const CostCoefficients& coeffs,
                                        const std::vector<std::size_t>& Qs) {
  std::vector<OptimizeRow> rows;
  for (std::size_t Q : Qs) {
    for (const auto& l : layers) {
      const DiscreteOptimum opt = optimize_discrete(l.dims, coeffs, Q);
      double cont = std::numeric_limits<double>::quiet_NaN();
      try {
        cont = optimal_continuous(l.dims, coeffs, Q);
      } catch (const ParameterError&) {
      }
      rows.push_back({l.model, l.layer, Q, opt.k_A, opt.k_B, opt.cost.total, cont});
    }
  }
  return rows;
}

std::string optimize_csv(const std::vector<OptimizeRow>& rows) {
  std::string out = "model,layer,Q,k_A,k_B,U,k_A_continuous\n";
  for (const auto& r : rows) {
    out += r.model + "," + r.layer + "," + std::to_string(r.Q) + "," + std::to_string(r.k_A) +
           "," + std::to_string(r.k_B) + "," + format_sci(r.cost) + "," +
           format_sci(r.k_A_continuous) + "\n";
  }
  return out;
}

}  // namespace fcdcc
