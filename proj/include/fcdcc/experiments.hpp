#pragma once

// Experiment drivers behind the command-line subcommands. Each driver returns
// plain rows; the *_csv helpers format them locale-independently.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fcdcc/config.hpp"
#include "fcdcc/cost.hpp"
#include "fcdcc/runtime.hpp"

namespace fcdcc {

/// "%.8e": scientific notation with 9 significant digits, '.' separator.
std::string format_sci(double v);

// ---- run ----

struct RunRecord {
  SimReport report;
  double mse = 0.0;
  double max_abs_error = 0.0;
};

/// Runs the configured pipeline on seeded inputs and compares against the
/// reference convolution.
RunRecord run_config(const RunConfig& config);
std::string run_record_json(const RunRecord& record);

// ---- numerical stability ----

struct StabilityRequest {
  std::vector<std::size_t> n;
  std::vector<std::pair<std::size_t, std::size_t>> k;  // CRME (k_A, k_B)
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

struct StabilityRow {
  CodecKind codec = CodecKind::Crme;
  std::size_t n = 0;
  std::size_t k_A = 0;
  std::size_t k_B = 0;
  std::size_t delta = 0;
  std::size_t subset_id = 0;
  double kappa = 0.0;
  double mse = 0.0;
  std::vector<std::size_t> workers;
};

/// The real-point baseline split with the same recovery threshold as CRME at
/// (k_A, k_B): the permissible factor pair of k_A*k_B/4 nearest (k_A/2, k_B/2).
std::pair<std::size_t, std::size_t> matched_baseline_split(std::size_t k_A, std::size_t k_B);

/// For every n and (k_A, k_B) with k_A*k_B/4 <= n: draws `trials` random
/// delta-subsets of the n workers and decodes the same seeded instance with
/// both codecs from each subset. Condition numbers are not thresholded here.
std::vector<StabilityRow> stability_rows(const StabilityRequest& request);
std::string stability_csv(const std::vector<StabilityRow>& rows);

// ---- straggler sweep ----

struct StragglerRow {
  std::size_t stragglers = 0;
  double delay_s = 0.0;
  double makespan = 0.0;
  std::size_t gamma = 0;
  double mse = 0.0;
};

/// Adds 0..max_stragglers seeded random stragglers with `delay_s` on top of
/// the config's own straggler spec. Inputs are drawn once per sweep.
std::vector<StragglerRow> straggler_sweep(const RunConfig& config, std::size_t max_stragglers,
                                          double delay_s);
std::string straggler_csv(const std::vector<StragglerRow>& rows);

// ---- partition optimizer ----

struct OptimizeRow {
  std::string model;
  std::string layer;
  std::size_t Q = 0;
  std::size_t k_A = 0;
  std::size_t k_B = 0;
  double cost = 0.0;
  double k_A_continuous = 0.0;  // NaN when unbounded
};

std::vector<OptimizeRow> optimize_table(const std::vector<LayerEntry>& layers,
                                        const CostCoefficients& coeffs,
                                        const std::vector<std::size_t>& Qs);
std::string optimize_csv(const std::vector<OptimizeRow>& rows);

}  // namespace fcdcc
