#include "gna/model/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gna::model {

using nlohmann::json;

std::string checkpoint_to_string(const Transformer& model, const Rng& rng) {
  const auto& cfg = model.config();
  json j;
  j["format"] = "gna-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config"] = {{"n_vars", cfg.n_vars},
                 {"n_layers", cfg.n_layers},
                 {"hidden", cfg.hidden},
                 {"n_heads", cfg.n_heads},
                 {"vocab", cfg.vocab}};
  json params = json::array();
  const auto& p = model.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto data = p[i].data();
    params.push_back({{"name", p.name(i)},
                      {"shape", p[i].shape()},
                      {"data", std::vector<double>(data.begin(), data.end())}});
  }
  j["params"] = std::move(params);
  j["rng"] = {{"name", kRngName}, {"state", rng_state(rng)}};
  return j.dump();
}

Checkpoint checkpoint_from_string(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "gna-checkpoint") throw std::runtime_error("not a model checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + j.at("version").dump());
  }
  const auto& c = j.at("config");
  ModelConfig cfg{c.at("n_vars").get<std::size_t>(), c.at("n_layers").get<std::size_t>(),
                  c.at("hidden").get<std::size_t>(), c.at("n_heads").get<std::size_t>(),
                  c.at("vocab").get<std::size_t>()};
  Transformer model(cfg);
  nn::ParameterSet values;
  for (const auto& entry : j.at("params")) {
    values.add(entry.at("name").get<std::string>(),
               nn::Tensor(entry.at("shape").get<nn::Shape>(), entry.at("data").get<std::vector<double>>()));
  }
  model.load_params(values);
  if (j.at("rng").at("name").get<std::string>() != kRngName) throw std::runtime_error("unknown RNG in checkpoint");
  Rng rng;
  set_rng_state(rng, j.at("rng").at("state").get<std::string>());
  return Checkpoint{std::move(model), rng};
}

void save_checkpoint(const std::filesystem::path& path, const Transformer& model, const Rng& rng) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_string(model, rng);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace gna::model
