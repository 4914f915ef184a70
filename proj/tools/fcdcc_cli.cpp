// fcdcc: command-line driver.
//
//   fcdcc run --config cfg.json [--out rec.json] [--seed S] [--codec C]
//   fcdcc stability --n 20,40 --k 8x8,8x16 --trials 200 [--seed S] [--out f.csv]
//   fcdcc straggler-sweep --config cfg.json --max-stragglers 5 --delay 1 [--out f.csv]
//   fcdcc optimize --model lenet5 --q 16,32 [--lambda-comm .. --lambda-comp .. --lambda-store ..]
//   fcdcc optimize --dims C,H,W,N,K_H,K_W,stride,padding --q 4
//   fcdcc verify [--seed S]
//
// Exit status: 0 success, 1 configuration error, 2 decode infeasible,
// 3 starvation.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fcdcc/config.hpp"
#include "fcdcc/cost.hpp"
#include "fcdcc/errors.hpp"
#include "fcdcc/experiments.hpp"
#include "fcdcc/verify.hpp"

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kDecode = 2, kStarved = 3 };

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw fcdcc::ConfigError({"--out: cannot write " + out_path});
  f << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::size_t to_size(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') {
    throw fcdcc::ConfigError({what + ": expected a non-negative integer, got '" + s + "'"});
  }
  return static_cast<std::size_t>(v);
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> codec;
};

fcdcc::RunConfig load(const Common& c) {
  fcdcc::RunConfig cfg = fcdcc::load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.codec) {
    try {
      cfg.codec = fcdcc::parse_codec(*c.codec);
    } catch (const fcdcc::ParameterError& e) {
      throw fcdcc::ConfigError({std::string("--codec: ") + e.what()});
    }
  }
  fcdcc::validate_run_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded distributed convolution: simulation and experiment driver"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "Run one coded convolution and print a JSON record");
  run->add_option("--config", run_opts.config, "Run configuration (JSON)")->required();
  run->add_option("--out", run_opts.out, "Write the record here instead of stdout");
  run->add_option("--seed", run_opts.seed, "Override the config seed");
  run->add_option("--codec", run_opts.codec, "Override the codec (crme, real-vandermonde, uncoded)");

  std::string st_n, st_k, st_out;
  std::size_t st_trials = 0;
  std::uint64_t st_seed = 0;
  auto* stab = app.add_subcommand("stability", "Recovery-matrix conditioning and decode error");
  stab->add_option("--n", st_n, "Comma-separated worker counts")->required();
  stab->add_option("--k", st_k, "Comma-separated k_AxK_B pairs, e.g. 8x8,8x16")->required();
  stab->add_option("--trials", st_trials, "Sampled worker subsets per configuration")->required();
  stab->add_option("--seed", st_seed, "Seed")->required();
  stab->add_option("--out", st_out, "CSV output path");

  Common sw_opts;
  std::size_t sw_max = 0;
  double sw_delay = 0.0;
  auto* sweep = app.add_subcommand("straggler-sweep", "Makespan versus straggler count");
  sweep->add_option("--config", sw_opts.config, "Run configuration (JSON)")->required();
  sweep->add_option("--max-stragglers", sw_max, "Largest straggler count")->required();
  sweep->add_option("--delay", sw_delay, "Straggler delay in seconds")->required();
  sweep->add_option("--out", sw_opts.out, "CSV output path");
  sweep->add_option("--seed", sw_opts.seed, "Override the config seed");
  sweep->add_option("--codec", sw_opts.codec, "Override the codec");

  std::string op_model, op_dims, op_q, op_out;
  double lc = 0.09, lp = 0.0, ls = 0.023;
  auto* opt = app.add_subcommand("optimize", "Cost-optimal partition factors per layer");
  auto* model_opt = opt->add_option("--model", op_model, "Registry model name");
  auto* dims_opt = opt->add_option("--dims", op_dims, "C,H,W,N,K_H,K_W,stride,padding");
  model_opt->excludes(dims_opt);
  opt->add_option("--q", op_q, "Comma-separated node counts Q")->required();
  opt->add_option("--lambda-comm", lc, "Cost per transmitted entry")->capture_default_str();
  opt->add_option("--lambda-comp", lp, "Cost per MAC")->capture_default_str();
  opt->add_option("--lambda-store", ls, "Cost per stored entry")->capture_default_str();
  opt->add_option("--out", op_out, "CSV output path");

  std::uint64_t vf_seed = 1;
  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--seed", vf_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) {
      const fcdcc::RunConfig cfg = load(run_opts);
      emit(fcdcc::run_record_json(fcdcc::run_config(cfg)), run_opts.out);
    } else if (*stab) {
      fcdcc::StabilityRequest req;
      for (const auto& s : split(st_n, ',')) req.n.push_back(to_size(s, "--n"));
      for (const auto& s : split(st_k, ',')) {
        const auto ab = split(s, 'x');
        if (ab.size() != 2) throw fcdcc::ConfigError({"--k: expected k_AxK_B, got '" + s + "'"});
        req.k.emplace_back(to_size(ab[0], "--k"), to_size(ab[1], "--k"));
      }
      req.trials = st_trials;
      req.seed = st_seed;
      emit(fcdcc::stability_csv(fcdcc::stability_rows(req)), st_out);
    } else if (*sweep) {
      const fcdcc::RunConfig cfg = load(sw_opts);
      emit(fcdcc::straggler_csv(fcdcc::straggler_sweep(cfg, sw_max, sw_delay)), sw_opts.out);
    } else if (*opt) {
      std::vector<fcdcc::LayerEntry> layers;
      if (!op_dims.empty()) {
        const auto f = split(op_dims, ',');
        if (f.size() != 8) throw fcdcc::ConfigError({"--dims: expected 8 comma-separated values"});
        fcdcc::LayerEntry e;
        e.model = "custom";
        e.layer = "layer";
        e.dims = {to_size(f[0], "--dims"), to_size(f[1], "--dims"), to_size(f[2], "--dims"),
                  to_size(f[3], "--dims"), to_size(f[4], "--dims"), to_size(f[5], "--dims"),
                  to_size(f[6], "--dims"), to_size(f[7], "--dims")};
        layers.push_back(e);
      } else if (!op_model.empty()) {
        layers = fcdcc::layers_for_model(op_model);
      } else {
        throw fcdcc::ConfigError({"optimize: one of --model or --dims is required"});
      }
      std::vector<std::size_t> qs;
      for (const auto& s : split(op_q, ',')) qs.push_back(to_size(s, "--q"));
      emit(fcdcc::optimize_csv(fcdcc::optimize_table(layers, {lc, lp, ls}, qs)), op_out);
    } else if (*verify) {
      bool ok = true;
      for (const auto& r : fcdcc::run_invariant_checks(vf_seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.passed) std::cout << ": " << r.detail;
        std::cout << "\n";
        ok = ok && r.passed;
      }
      return ok ? kOk : kConfig;
    }
  } catch (const fcdcc::DecodeInfeasibleError& e) {
    std::cerr << "fcdcc: decode infeasible: " << e.what() << "\n";
    return kDecode;
  } catch (const fcdcc::StarvationError& e) {
    std::cerr << "fcdcc: starvation: " << e.what() << "\n";
    return kStarved;
  } catch (const std::exception& e) {
    std::cerr << "fcdcc: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
