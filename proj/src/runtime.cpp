#include "fcdcc/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include "fcdcc/errors.hpp"

namespace fcdcc {

std::string_view to_string(CodecKind codec) {
  switch (codec) {
    case CodecKind::Crme: return "crme";
    case CodecKind::RealVandermonde: return "real-vandermonde";
    case CodecKind::Uncoded: return "uncoded";
  }
  return "unknown";
}

CodecKind parse_codec(std::string_view name) {
  if (name == "crme") return CodecKind::Crme;
  if (name == "real-vandermonde") return CodecKind::RealVandermonde;
  if (name == "uncoded") return CodecKind::Uncoded;
  throw ParameterError("unknown codec '" + std::string(name) +
                       "' (expected crme, real-vandermonde or uncoded)");
}

std::size_t recovery_threshold(CodecKind codec, std::size_t k_A, std::size_t k_B) {
  return codec == CodecKind::Crme ? k_A * k_B / 4 : k_A * k_B;
}

std::vector<WorkerSpec> resolve_workers(const SimConfig& config) {
  std::vector<WorkerSpec> workers(config.n);
  for (std::size_t i = 0; i < config.n; ++i) workers[i].id = i;

  std::set<std::size_t> touched;
  for (const auto& d : config.stragglers.delayed) {
    if (d.id >= config.n) throw ParameterError("delayed worker id " + std::to_string(d.id) + " >= n");
    if (d.delay_s < 0.0) throw ParameterError("straggler delay must be non-negative");
    workers[d.id].extra_delay += d.delay_s;
    touched.insert(d.id);
  }
  for (std::size_t id : config.stragglers.failed) {
    if (id >= config.n) throw ParameterError("failed worker id " + std::to_string(id) + " >= n");
    workers[id].failed = true;
    touched.insert(id);
  }

  if (config.stragglers.random_count > 0) {
    if (config.stragglers.random_delay_s < 0.0) {
      throw ParameterError("straggler delay must be non-negative");
    }
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < config.n; ++i)
      if (!touched.contains(i)) pool.push_back(i);
    if (config.stragglers.random_count > pool.size()) {
      throw ParameterError("cannot place " + std::to_string(config.stragglers.random_count) +
                           " random stragglers among " + std::to_string(pool.size()) + " workers");
    }
    UniformSource rng(config.seed ^ 0x5354524147474C45ULL);
    for (std::size_t i = 0; i < config.stragglers.random_count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next01() * static_cast<double>(pool.size() - i));
      std::swap(pool[i], pool[std::min(j, pool.size() - 1)]);
      workers[pool[i]].extra_delay += config.stragglers.random_delay_s;
    }
  }
  return workers;
}

Dispatch dispatch(const Tensor3& x, const Tensor4& k, const SimConfig& config) {
  if (config.n == 0) throw ParameterError("worker count must be positive");
  if (x.channels() != k.in_channels()) throw ShapeError("input/filter channel mismatch");

  Dispatch d;
  d.codec = config.codec;
  const std::size_t q = config.k_A * config.k_B;

  // Parameter checks that do not depend on tensor data go first so configs
  // fail fast with the most specific error.
  if (config.codec == CodecKind::Crme) {
    d.book = build_codebook(config.n, config.k_A, config.k_B);
  } else if (config.codec == CodecKind::RealVandermonde) {
    d.baseline = build_real_vandermonde(config.n, config.k_A, config.k_B);
  } else if (q > config.n) {
    throw ParameterError("uncoded mode needs n >= k_A*k_B = " + std::to_string(q));
  }

  ApcpPartition apcp = apcp_partition(x, config.k_A, config.conv, k.kernel_h());
  KccpPartition kccp = kccp_partition(k, config.k_B);
  d.apcp = apcp.plan;
  d.kccp = kccp.plan;
  const OutputDims od = output_dims(x.height(), x.width(), config.conv, k.kernel_h(), k.kernel_w());
  d.block_dims = {kccp.plan.channels_per_part, apcp.plan.rows_per_part(), od.width};
  d.threshold = recovery_threshold(config.codec, config.k_A, config.k_B);
  d.subtasks.resize(config.n);

  switch (config.codec) {
    case CodecKind::Crme: {
      const auto xs = encode_list(apcp.slices, d.book->A);
      const auto ks = encode_list(kccp.parts, d.book->B);
      for (std::size_t i = 0; i < config.n; ++i) {
        Subtask& t = d.subtasks[i];
        t.worker_id = i;
        t.coded_inputs = {xs[2 * i], xs[2 * i + 1]};
        t.coded_filters = {ks[2 * i], ks[2 * i + 1]};
      }
      d.G = build_joint(*d.book);
      d.layout = crme_layout(config.k_A, config.k_B);
      d.blocks_per_worker = 4;
      break;
    }
    case CodecKind::RealVandermonde: {
      const auto xs = encode_list(apcp.slices, d.baseline->A);
      const auto ks = encode_list(kccp.parts, d.baseline->B);
      for (std::size_t i = 0; i < config.n; ++i) {
        d.subtasks[i] = {i, {xs[i]}, {ks[i]}};
      }
      d.G = d.baseline->generator;
      d.layout = vandermonde_layout(config.k_A, config.k_B);
      d.blocks_per_worker = 1;
      break;
    }
    case CodecKind::Uncoded: {
      for (std::size_t i = 0; i < config.n; ++i) {
        const std::size_t t = i % q;
        d.subtasks[i] = {i, {apcp.slices[t / config.k_B]}, {kccp.parts[t % config.k_B]}};
      }
      d.layout = crme_layout(config.k_A, config.k_B);
      d.blocks_per_worker = 1;
      break;
    }
  }
  return d;
}

WorkerOutput worker_compute(const Subtask& task, std::size_t stride, const TimeModel& time,
                            const WorkerSpec& spec, ClockMode clock) {
  if (task.coded_inputs.empty() || task.coded_filters.empty()) {
    throw ShapeError("subtask has no coded partitions");
  }
  const auto start = std::chrono::steady_clock::now();

  WorkerOutput out;
  out.worker_id = task.worker_id;
  out.blocks.reserve(task.coded_inputs.size() * task.coded_filters.size());
  const ConvParams params{stride, 0};
  for (const auto& xin : task.coded_inputs) {
    out.entries_in += xin.size();
    for (const auto& kf : task.coded_filters) {
      Tensor3 blk = conv3d_ref(xin, kf, params);
      out.macs += blk.size() * kf.in_channels() * kf.kernel_h() * kf.kernel_w();
      out.entries_out += blk.size();
      out.blocks.push_back(std::move(blk));
    }
  }

  if (clock == ClockMode::Wall) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    out.completion_time = elapsed.count() + spec.extra_delay;
  } else {
    out.completion_time = time.seconds_per_mac * static_cast<double>(out.macs) +
                          time.seconds_per_entry * static_cast<double>(out.entries_in + out.entries_out) +
                          spec.extra_delay;
  }
  return out;
}

namespace {

bool completion_order(const WorkerOutput& a, const WorkerOutput& b) {
  if (a.completion_time != b.completion_time) return a.completion_time < b.completion_time;
  return a.worker_id < b.worker_id;
}

// Runs every responsive worker. Results land in per-worker slots, so the
// outcome does not depend on thread scheduling.
std::vector<WorkerOutput> run_workers(const Dispatch& d, const std::vector<WorkerSpec>& workers,
                                      const SimConfig& config) {
  std::vector<std::size_t> live;
  for (const auto& w : workers)
    if (!w.failed) live.push_back(w.id);

  std::vector<std::optional<WorkerOutput>> slots(workers.size());
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < live.size(); i = next++) {
      const std::size_t id = live[i];
      slots[id] = worker_compute(d.subtasks[id], config.conv.stride, config.time, workers[id],
                                 config.clock);
    }
  };

  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(live.size(), 1));
  if (threads == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
  }

  std::vector<WorkerOutput> outputs;
  outputs.reserve(live.size());
  for (auto& s : slots)
    if (s) outputs.push_back(std::move(*s));
  return outputs;
}

}  // namespace

std::vector<WorkerOutput> collect_first_delta(std::span<const WorkerOutput> outputs,
                                              std::size_t delta) {
  if (outputs.size() < delta) {
    throw StarvationError("only " + std::to_string(outputs.size()) +
                              " workers responded, recovery needs " + std::to_string(delta),
                          outputs.size(), delta);
  }
  std::vector<WorkerOutput> sorted(outputs.begin(), outputs.end());
  std::stable_sort(sorted.begin(), sorted.end(), completion_order);
  sorted.resize(delta);
  return sorted;
}

RunResult run_end_to_end(const Tensor3& x, const Tensor4& k, const SimConfig& config) {
  const std::vector<WorkerSpec> workers = resolve_workers(config);
  const Dispatch d = dispatch(x, k, config);
  std::vector<WorkerOutput> outputs = run_workers(d, workers, config);

  SimReport rep;
  rep.codec = config.codec;
  rep.n = config.n;
  rep.k_A = config.k_A;
  rep.k_B = config.k_B;
  rep.delta = d.threshold;
  rep.gamma = config.n >= d.threshold ? config.n - d.threshold : 0;
  rep.responsive = outputs.size();

  const std::size_t q = config.k_A * config.k_B;
  std::vector<WorkerOutput> used;
  BlockMap blocks;

  if (config.codec == CodecKind::Uncoded) {
    // Each raw subtask needs one result; take the earliest copy of each.
    std::stable_sort(outputs.begin(), outputs.end(), completion_order);
    std::vector<bool> have(q, false);
    for (auto& o : outputs) {
      const std::size_t t = o.worker_id % q;
      if (have[t]) continue;
      have[t] = true;
      blocks.emplace(d.layout[t], o.blocks.front());
      used.push_back(std::move(o));
    }
    if (used.size() < q) {
      throw StarvationError("uncoded subtasks left without a responsive replica", used.size(), q);
    }
  } else {
    used = collect_first_delta(outputs, d.threshold);
    std::vector<std::size_t> ids;
    std::vector<std::vector<Tensor3>> collected;
    for (auto& o : used) {
      ids.push_back(o.worker_id);
      collected.push_back(o.blocks);
    }
    const RecoverySet rs = build_recovery(d.G, ids, {d.blocks_per_worker, true});
    rep.kappa = rs.kappa;
    blocks = decode(collected, rs, d.layout, d.block_dims);
  }

  for (const auto& o : used) {
    rep.used_workers.push_back(o.worker_id);
    rep.makespan = std::max(rep.makespan, o.completion_time);
  }

  // Per-node volumes. Workers are homogeneous, so worker 0 is representative.
  const Subtask& t0 = d.subtasks.front();
  for (const auto& xin : t0.coded_inputs) rep.v_comm_up += xin.size();
  for (const auto& kf : t0.coded_filters) rep.v_store += kf.size();
  const std::size_t pairs = t0.coded_inputs.size() * t0.coded_filters.size();
  rep.v_comm_down = pairs * d.block_dims.size();
  rep.m_comp = rep.v_comm_down * k.in_channels() * k.kernel_h() * k.kernel_w();

  const double mac = config.time.seconds_per_mac, entry = config.time.seconds_per_entry;
  rep.upload_time = entry * static_cast<double>(rep.v_comm_up);
  rep.compute_time = mac * static_cast<double>(rep.m_comp);
  rep.download_time = entry * static_cast<double>(rep.v_comm_down);
  if (config.codec != CodecKind::Uncoded) {
    // Direct linear-combination encoding of the input slices, then a dense
    // inversion and one stacked matrix product for decoding.
    const double slice = static_cast<double>(t0.coded_inputs.front().size());
    const double qd = static_cast<double>(q);
    rep.encode_time = mac * static_cast<double>(d.subtasks.size() * t0.coded_inputs.size()) *
                      static_cast<double>(config.k_A) * slice;
    rep.decode_time = mac * (qd * qd * qd + qd * qd * static_cast<double>(d.block_dims.size()));
  }

  Tensor3 y = merge_output(blocks, config.k_A, config.k_B, d.apcp);
  return {std::move(y), std::move(rep)};
}

}  // namespace fcdcc
