#include "fcdcc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fcdcc/errors.hpp"
#include "fcdcc/partition.hpp"
#include "json.hpp"

namespace fcdcc {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string msg = "invalid configuration:";
  for (const auto& i : issues) msg += "\n  " + i;
  return msg;
}

using nlohmann::json;

class Reader {
 public:
  std::vector<std::string> issues;

  const json* field(const json& obj, const std::string& path, const char* key, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) issues.push_back(path + key + ": missing required field");
      return nullptr;
    }
    return &*it;
  }

  template <typename T>
  std::optional<T> unsigned_at(const json& obj, const std::string& path, const char* key,
                               bool required = true) {
    const json* v = field(obj, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned()) {
      issues.push_back(path + key + ": expected a non-negative integer");
      return std::nullopt;
    }
    return v->get<T>();
  }

  std::optional<double> number_at(const json& obj, const std::string& path, const char* key,
                                  bool required = true) {
    const json* v = field(obj, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number() || !std::isfinite(v->get<double>()) || v->get<double>() < 0.0) {
      issues.push_back(path + key + ": expected a finite non-negative number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  const json* object_at(const json& obj, const std::string& path, const char* key,
                        bool required = true) {
    const json* v = field(obj, path, key, required);
    if (v && !v->is_object()) {
      issues.push_back(path + key + ": expected an object");
      return nullptr;
    }
    return v;
  }
};

void check_unknown(Reader& r, const json& obj, const std::string& path,
                   std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) r.issues.push_back(path + key + ": unknown field");
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

SimConfig RunConfig::sim() const {
  SimConfig s;
  s.n = n;
  s.k_A = k_A;
  s.k_B = k_B;
  s.conv = layer.conv();
  s.codec = codec;
  s.stragglers = stragglers;
  s.seed = seed;
  s.time = time;
  s.clock = clock;
  s.threads = threads;
  return s;
}

RunConfig parse_run_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("<document>: ") + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"<document>: expected a JSON object"});

  Reader r;
  RunConfig cfg;
  check_unknown(r, doc, "",
                {"layer", "n", "k_A", "k_B", "seed", "codec", "time_model", "stragglers",
                 "cost", "clock", "threads"});

  if (const json* layer = r.object_at(doc, "", "layer")) {
    check_unknown(r, *layer, "layer.", {"C", "H", "W", "N", "K_H", "K_W", "stride", "padding"});
    struct Slot {
      const char* key;
      std::size_t* dst;
    } slots[] = {{"C", &cfg.layer.C},     {"H", &cfg.layer.H},        {"W", &cfg.layer.W},
                 {"N", &cfg.layer.N},     {"K_H", &cfg.layer.K_H},    {"K_W", &cfg.layer.K_W},
                 {"stride", &cfg.layer.stride}, {"padding", &cfg.layer.padding}};
    for (const auto& s : slots)
      if (auto v = r.unsigned_at<std::size_t>(*layer, "layer.", s.key)) *s.dst = *v;
  }
  if (auto v = r.unsigned_at<std::size_t>(doc, "", "n")) cfg.n = *v;
  if (auto v = r.unsigned_at<std::size_t>(doc, "", "k_A")) cfg.k_A = *v;
  if (auto v = r.unsigned_at<std::size_t>(doc, "", "k_B")) cfg.k_B = *v;
  if (auto v = r.unsigned_at<std::uint64_t>(doc, "", "seed")) cfg.seed = *v;
  if (auto v = r.unsigned_at<std::size_t>(doc, "", "threads", false)) cfg.threads = *v;

  if (const json* c = r.field(doc, "", "codec", true)) {
    try {
      cfg.codec = parse_codec(c->is_string() ? c->get<std::string>() : std::string("?"));
    } catch (const ParameterError&) {
      r.issues.push_back("codec: expected one of crme, real-vandermonde, uncoded");
    }
  }
  if (const json* c = r.field(doc, "", "clock", false)) {
    if (c->is_string() && c->get<std::string>() == "simulated") {
      cfg.clock = ClockMode::Simulated;
    } else if (c->is_string() && c->get<std::string>() == "wall") {
      cfg.clock = ClockMode::Wall;
    } else {
      r.issues.push_back("clock: expected simulated or wall");
    }
  }

  if (const json* tm = r.object_at(doc, "", "time_model")) {
    check_unknown(r, *tm, "time_model.", {"seconds_per_mac", "seconds_per_entry"});
    if (auto v = r.number_at(*tm, "time_model.", "seconds_per_mac")) cfg.time.seconds_per_mac = *v;
    if (auto v = r.number_at(*tm, "time_model.", "seconds_per_entry"))
      cfg.time.seconds_per_entry = *v;
  }

  if (const json* st = r.object_at(doc, "", "stragglers", false)) {
    check_unknown(r, *st, "stragglers.", {"delayed", "failed", "random"});
    if (const json* d = r.field(*st, "stragglers.", "delayed", false)) {
      if (!d->is_array()) {
        r.issues.push_back("stragglers.delayed: expected an array");
      } else {
        for (std::size_t i = 0; i < d->size(); ++i) {
          const std::string p = "stragglers.delayed[" + std::to_string(i) + "].";
          const json& e = (*d)[i];
          if (!e.is_object()) {
            r.issues.push_back(p.substr(0, p.size() - 1) + ": expected an object");
            continue;
          }
          check_unknown(r, e, p, {"id", "delay_s"});
          auto id = r.unsigned_at<std::size_t>(e, p, "id");
          auto delay = r.number_at(e, p, "delay_s");
          if (id && delay) cfg.stragglers.delayed.push_back({*id, *delay});
        }
      }
    }
    if (const json* f = r.field(*st, "stragglers.", "failed", false)) {
      if (!f->is_array()) {
        r.issues.push_back("stragglers.failed: expected an array");
      } else {
        for (std::size_t i = 0; i < f->size(); ++i) {
          if ((*f)[i].is_number_unsigned()) {
            cfg.stragglers.failed.push_back((*f)[i].get<std::size_t>());
          } else {
            r.issues.push_back("stragglers.failed[" + std::to_string(i) +
                               "]: expected a non-negative integer");
          }
        }
      }
    }
    if (const json* rnd = r.object_at(*st, "stragglers.", "random", false)) {
      check_unknown(r, *rnd, "stragglers.random.", {"count", "delay_s"});
      if (auto v = r.unsigned_at<std::size_t>(*rnd, "stragglers.random.", "count"))
        cfg.stragglers.random_count = *v;
      if (auto v = r.number_at(*rnd, "stragglers.random.", "delay_s"))
        cfg.stragglers.random_delay_s = *v;
    }
  }

  if (const json* c = r.object_at(doc, "", "cost", false)) {
    check_unknown(r, *c, "cost.", {"lambda_comm", "lambda_comp", "lambda_store"});
    auto a = r.number_at(*c, "cost.", "lambda_comm");
    auto b = r.number_at(*c, "cost.", "lambda_comp");
    auto s = r.number_at(*c, "cost.", "lambda_store");
    if (a && b && s) cfg.cost = CostCoefficients{*a, *b, *s};
  }

  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  validate_run_config(cfg);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void validate_run_config(const RunConfig& cfg) {
  std::vector<std::string> issues;
  const LayerDims& L = cfg.layer;
  const struct {
    const char* name;
    std::size_t value;
  } positive[] = {{"layer.C", L.C},     {"layer.H", L.H},     {"layer.W", L.W},
                  {"layer.N", L.N},     {"layer.K_H", L.K_H}, {"layer.K_W", L.K_W},
                  {"layer.stride", L.stride}, {"n", cfg.n},   {"k_A", cfg.k_A},
                  {"k_B", cfg.k_B}};
  bool sizes_ok = true;
  for (const auto& p : positive) {
    if (p.value == 0) {
      issues.push_back(std::string(p.name) + ": must be positive");
      sizes_ok = false;
    }
  }
  if (sizes_ok) {
    if (L.K_H > L.H + 2 * L.padding || L.K_W > L.W + 2 * L.padding) {
      issues.push_back("layer: kernel larger than the padded input");
    } else {
      try {
        plan_apcp(L.H, L.W, cfg.k_A, L.conv(), L.K_H);
      } catch (const Error& e) {
        issues.push_back(std::string("k_A: ") + e.what());
      }
    }
    if (L.N % cfg.k_B != 0) issues.push_back("k_B: must divide layer.N");
    switch (cfg.codec) {
      case CodecKind::Crme: {
        if (cfg.k_A % 2 != 0) issues.push_back("k_A: crme requires an even factor");
        if (cfg.k_B % 2 != 0) issues.push_back("k_B: crme requires an even factor");
        const std::size_t delta = cfg.k_A * cfg.k_B / 4;
        if (delta > cfg.n) {
          issues.push_back("n: crme needs n >= k_A*k_B/4 = " + std::to_string(delta));
        }
        break;
      }
      case CodecKind::RealVandermonde:
      case CodecKind::Uncoded: {
        if (!is_permissible_factor(cfg.k_A)) issues.push_back("k_A: must be 1 or even");
        if (!is_permissible_factor(cfg.k_B)) issues.push_back("k_B: must be 1 or even");
        const std::size_t Q = cfg.k_A * cfg.k_B;
        if (Q > cfg.n) {
          issues.push_back("n: " + std::string(to_string(cfg.codec)) +
                           " needs n >= k_A*k_B = " + std::to_string(Q));
        }
        break;
      }
    }
  }

  std::set<std::size_t> touched;
  for (std::size_t i = 0; i < cfg.stragglers.delayed.size(); ++i) {
    const auto id = cfg.stragglers.delayed[i].id;
    const std::string p = "stragglers.delayed[" + std::to_string(i) + "].id";
    if (id >= cfg.n) issues.push_back(p + ": worker id out of range");
    if (!touched.insert(id).second) issues.push_back(p + ": duplicate worker id");
  }
  for (std::size_t i = 0; i < cfg.stragglers.failed.size(); ++i) {
    const auto id = cfg.stragglers.failed[i];
    const std::string p = "stragglers.failed[" + std::to_string(i) + "]";
    if (id >= cfg.n) issues.push_back(p + ": worker id out of range");
    if (!touched.insert(id).second) issues.push_back(p + ": duplicate worker id");
  }
  if (cfg.n >= touched.size() && cfg.stragglers.random_count > cfg.n - touched.size()) {
    issues.push_back("stragglers.random.count: exceeds the number of unassigned workers");
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::pair<Tensor3, Tensor4> make_inputs(const LayerDims& layer, std::uint64_t seed) {
  UniformSource rng(seed);
  Tensor3 x = random_tensor3({layer.C, layer.H, layer.W}, rng);
  Tensor4 k = random_tensor4({layer.N, layer.C, layer.K_H, layer.K_W}, rng);
  return {std::move(x), std::move(k)};
}

}  // namespace fcdcc
