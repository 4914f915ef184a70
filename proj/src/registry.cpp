#include "json.hpp"
#include <string_view>

#include "fcdcc/cost.hpp"
#include "fcdcc/errors.hpp"

namespace fcdcc {

namespace detail {
extern const std::string_view kLayerRegistryJson;
}

namespace {

struct Registry {
  int version = 0;
  std::vector<LayerEntry> entries;
  std::vector<std::string> models;
};

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    const auto doc = nlohmann::json::parse(detail::kLayerRegistryJson);
    r.version = doc.at("version").get<int>();
    for (const auto& [model, body] : doc.at("models").items()) {
      r.models.push_back(model);
      const std::string source = body.at("source").get<std::string>();
      for (const auto& l : body.at("layers")) {
        LayerEntry e;
        e.model = model;
        e.layer = l.at("name").get<std::string>();
        e.source = source;
        e.dims.C = l.at("C").get<std::size_t>();
        e.dims.H = l.at("H").get<std::size_t>();
        e.dims.W = l.at("W").get<std::size_t>();
        e.dims.N = l.at("N").get<std::size_t>();
        e.dims.K_H = l.at("K_H").get<std::size_t>();
        e.dims.K_W = l.at("K_W").get<std::size_t>();
        e.dims.stride = l.at("stride").get<std::size_t>();
        e.dims.padding = l.at("padding").get<std::size_t>();
        r.entries.push_back(std::move(e));
      }
    }
    return r;
  }();
  return reg;
}

}  // namespace

const std::vector<LayerEntry>& layer_registry() { return registry().entries; }

int layer_registry_version() { return registry().version; }

std::vector<std::string> registry_models() { return registry().models; }

std::vector<LayerEntry> layers_for_model(const std::string& model) {
  std::vector<LayerEntry> out;
  for (const auto& e : layer_registry())
    if (e.model == model) out.push_back(e);
  if (out.empty()) {
    std::string known;
    for (const auto& m : registry_models()) known += (known.empty() ? "" : ", ") + m;
    throw ParameterError("unknown model '" + model + "' (known: " + known + ")");
  }
  return out;
}

}  // namespace fcdcc
