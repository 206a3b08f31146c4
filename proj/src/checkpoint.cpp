#include "edagcn/checkpoint.hpp"

#include <fstream>
#include <map>

#include "edagcn/error.hpp"

namespace edagcn {

using nlohmann::json;

namespace {

const char* mode_name(MixMode m) { return m == MixMode::shared ? "shared" : "per_node"; }

MixMode parse_mode(const std::string& s) {
  if (s == "shared") return MixMode::shared;
  if (s == "per_node") return MixMode::per_node;
  throw ValidationError("unknown mixing mode \"" + s + "\"");
}

}  // namespace

json to_json(const ModelConfig& cfg) {
  return {
      {"widths", cfg.widths},
      {"k_hop", cfg.k_hop},
      {"i_count", cfg.i_count},
      {"n_nodes", cfg.n_nodes},
      {"in_features", cfg.in_features},
      {"n_classes", cfg.n_classes},
      {"r_mode", mode_name(cfg.r_mode)},
      {"w_mode", mode_name(cfg.w_mode)},
      {"residual", cfg.residual},
      {"head", cfg.head == HeadMode::flatten ? "flatten" : "average"},
  };
}

ModelConfig model_config_from_json(const json& j) {
  try {
    ModelConfig cfg;
    cfg.widths = j.at("widths").get<std::vector<std::size_t>>();
    cfg.k_hop = j.at("k_hop").get<std::size_t>();
    cfg.i_count = j.at("i_count").get<std::size_t>();
    cfg.n_nodes = j.at("n_nodes").get<std::size_t>();
    cfg.in_features = j.at("in_features").get<std::size_t>();
    cfg.n_classes = j.at("n_classes").get<std::size_t>();
    cfg.r_mode = parse_mode(j.at("r_mode").get<std::string>());
    cfg.w_mode = parse_mode(j.at("w_mode").get<std::string>());
    cfg.residual = j.at("residual").get<bool>();
    const std::string head = j.value("head", std::string("flatten"));
    if (head != "flatten" && head != "average") throw ValidationError("unknown head \"" + head + "\"");
    cfg.head = head == "flatten" ? HeadMode::flatten : HeadMode::average;
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad model config: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json tensors = json::array();
  ckpt.params.for_each([&](const std::string& name, const Tensor& t) {
    tensors.push_back({{"name", name}, {"shape", t.shape}, {"data", t.data}});
  });
  const json doc = {
      {"format", "edagcn-checkpoint-1"},
      {"config", to_json(ckpt.config)},
      {"config_hash", ckpt.config_hash},
      {"tensors", tensors},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << doc.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  Checkpoint ckpt;
  ckpt.config = model_config_from_json(doc.at("config"));
  ckpt.config_hash = doc.value("config_hash", std::string());
  ckpt.params = ParameterSet::zeros(ckpt.config);

  std::map<std::string, const json*> stored;
  for (const json& t : doc.at("tensors")) stored[t.at("name").get<std::string>()] = &t;
  std::size_t matched = 0;
  ckpt.params.for_each([&](const std::string& name, Tensor& t) {
    auto it = stored.find(name);
    if (it == stored.end()) throw ShapeError("checkpoint is missing tensor " + name);
    const auto shape = it->second->at("shape").get<std::vector<std::size_t>>();
    auto data = it->second->at("data").get<std::vector<double>>();
    if (shape != t.shape || data.size() != t.size()) throw ShapeError("tensor " + name + " has the wrong shape");
    t.data = std::move(data);
    ++matched;
  });
  if (matched != stored.size()) throw ShapeError("checkpoint carries tensors the config does not define");
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (to_json(ckpt.config) != to_json(expected))
    throw ShapeError("checkpoint was saved for a different model configuration");
  return ckpt;
}

}  // namespace edagcn
