#pragma once

// Simulated master/worker execution of a coded convolution: dispatch coded
// subtasks, run the worker convolutions, collect the earliest results under
// injected straggling and decode.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fcdcc/codec.hpp"
#include "fcdcc/partition.hpp"
#include "fcdcc/tensor.hpp"

namespace fcdcc {

enum class CodecKind {
  Crme,             // rotation-embedded polynomial code, 2+2 partitions per worker
  RealVandermonde,  // real-point polynomial code, 1+1 partitions per worker
  Uncoded,          // raw subtask (i mod k_A*k_B) per worker, replication only
};

std::string_view to_string(CodecKind codec);
/// Accepts "crme", "real-vandermonde", "uncoded". Throws ParameterError.
CodecKind parse_codec(std::string_view name);

enum class ClockMode { Simulated, Wall };

struct WorkerSpec {
  std::size_t id = 0;
  double extra_delay = 0.0;  // simulated seconds
  bool failed = false;       // never responds
};

struct DelayedWorker {
  std::size_t id = 0;
  double delay_s = 0.0;
};

/// Which workers straggle. Explicit entries are applied first; then
/// `random_count` further workers, drawn with the run seed from those not
/// already failed or delayed, get `random_delay_s`.
struct StragglerSpec {
  std::vector<DelayedWorker> delayed;
  std::vector<std::size_t> failed;
  std::size_t random_count = 0;
  double random_delay_s = 0.0;
};

/// Worker completion time = seconds_per_mac * MACs
///                        + seconds_per_entry * (entries in + entries out)
///                        + extra_delay.
struct TimeModel {
  double seconds_per_mac = 1e-9;
  double seconds_per_entry = 1e-8;
};

struct SimConfig {
  std::size_t n = 0;
  std::size_t k_A = 0;
  std::size_t k_B = 0;
  ConvParams conv;
  CodecKind codec = CodecKind::Crme;
  StragglerSpec stragglers;
  std::uint64_t seed = 0;
  TimeModel time;
  ClockMode clock = ClockMode::Simulated;
  /// Worker threads for the convolution phase; 0 picks hardware concurrency.
  std::size_t threads = 0;
};

/// Number of results the master waits for under `codec`.
std::size_t recovery_threshold(CodecKind codec, std::size_t k_A, std::size_t k_B);

/// Resolves the straggler spec into one WorkerSpec per id 0..n-1.
std::vector<WorkerSpec> resolve_workers(const SimConfig& config);

struct Subtask {
  std::size_t worker_id = 0;
  std::vector<Tensor3> coded_inputs;   // 2 under CRME, 1 otherwise
  std::vector<Tensor4> coded_filters;  // pre-stored on the worker
};

struct WorkerOutput {
  std::size_t worker_id = 0;
  /// Block b1*F + b2 is conv(coded_inputs[b1], coded_filters[b2]) with F the
  /// number of coded filters; under CRME that is 2*b1 + b2.
  std::vector<Tensor3> blocks;
  double completion_time = 0.0;
  std::size_t macs = 0;
  std::size_t entries_in = 0;
  std::size_t entries_out = 0;
};

struct Dispatch {
  CodecKind codec = CodecKind::Crme;
  ApcpPlan apcp;
  KccpPlan kccp;
  std::optional<Codebook> book;
  std::optional<RealVandermonde> baseline;
  /// Joint generator: k_A*k_B rows, blocks_per_worker columns per worker.
  /// Empty for the uncoded mode.
  Matrix G;
  BlockLayout layout;
  std::size_t blocks_per_worker = 0;
  std::size_t threshold = 0;
  Dims3 block_dims{1, 1, 1};
  std::vector<Subtask> subtasks;
};

/// Partitions and encodes x (unpadded input) and k for every worker.
Dispatch dispatch(const Tensor3& x, const Tensor4& k, const SimConfig& config);

/// Runs one worker. Inputs are already spatially padded, so the convolution
/// uses the configured stride and zero padding.
WorkerOutput worker_compute(const Subtask& task, std::size_t stride, const TimeModel& time,
                            const WorkerSpec& spec, ClockMode clock = ClockMode::Simulated);

/// The delta earliest outputs ordered by (completion_time, worker_id).
/// Throws StarvationError when fewer than delta outputs are available.
std::vector<WorkerOutput> collect_first_delta(std::span<const WorkerOutput> outputs,
                                              std::size_t delta);

struct SimReport {
  CodecKind codec = CodecKind::Crme;
  std::size_t n = 0;
  std::size_t k_A = 0;
  std::size_t k_B = 0;
  std::size_t delta = 0;
  std::size_t gamma = 0;
  std::size_t responsive = 0;
  std::vector<std::size_t> used_workers;
  double makespan = 0.0;  // latest completion among used workers
  double encode_time = 0.0;
  double upload_time = 0.0;
  double compute_time = 0.0;
  double download_time = 0.0;
  double decode_time = 0.0;
  double kappa = 1.0;
  std::size_t v_comm_up = 0;
  std::size_t v_comm_down = 0;
  std::size_t v_store = 0;
  std::size_t m_comp = 0;

  bool operator==(const SimReport&) const = default;
};

struct RunResult {
  Tensor3 output;
  SimReport report;
};

/// Full pipeline. Throws StarvationError or DecodeInfeasibleError.
RunResult run_end_to_end(const Tensor3& x, const Tensor4& k, const SimConfig& config);

}  // namespace fcdcc
