#pragma once

// Run configuration documents (JSON) for the command-line driver.
//
// Schema (all sizes are non-negative integers, times in seconds):
//
//   {
//     "layer": {"C": 3, "H": 32, "W": 32, "N": 8, "K_H": 3, "K_W": 3,
//               "stride": 1, "padding": 0},
//     "n": 8, "k_A": 4, "k_B": 4,
//     "seed": 1,
//     "codec": "crme" | "real-vandermonde" | "uncoded",
//     "time_model": {"seconds_per_mac": 1e-9, "seconds_per_entry": 1e-8},
//     "stragglers": {                                   // optional
//       "delayed": [{"id": 0, "delay_s": 1.0}],
//       "failed": [3],
//       "random": {"count": 2, "delay_s": 1.0}
//     },
//     "cost": {"lambda_comm": 0.09, "lambda_comp": 0.0, // optional
//              "lambda_store": 0.023},
//     "clock": "simulated" | "wall",                    // optional
//     "threads": 0                                      // optional
//   }
//
// n, k_A, k_B, seed, the layer block, the codec and the time model are
// required; nothing numeric is defaulted apart from the optional blocks.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fcdcc/cost.hpp"
#include "fcdcc/runtime.hpp"

namespace fcdcc {

struct RunConfig {
  LayerDims layer;
  std::size_t n = 0;
  std::size_t k_A = 0;
  std::size_t k_B = 0;
  std::uint64_t seed = 0;
  CodecKind codec = CodecKind::Crme;
  StragglerSpec stragglers;
  TimeModel time;
  std::optional<CostCoefficients> cost;
  ClockMode clock = ClockMode::Simulated;
  std::size_t threads = 0;

  SimConfig sim() const;
};

/// Parses and validates a configuration document. All schema and
/// precondition violations are gathered into a single ConfigError.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

/// Checks the module preconditions (geometry, permissible factors, codec
/// thresholds, straggler ids) of an already-parsed config. Throws ConfigError.
void validate_run_config(const RunConfig& config);

/// Input tensors for a run, drawn uniformly from [-1, 1) with the config seed.
std::pair<Tensor3, Tensor4> make_inputs(const LayerDims& layer, std::uint64_t seed);

}  // namespace fcdcc
