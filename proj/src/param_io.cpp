#include "dwlkit/param_io.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace dwlkit {

static_assert(std::endian::native == std::endian::little, "parameter files assume little-endian doubles");

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"node_dim", c.node_dim},   {"edge_dim", c.edge_dim},   {"time_dim", c.time_dim},
          {"mite_k", c.mite_k},       {"mite_dim", c.mite_dim},   {"align_dim", c.align_dim},
          {"layers", c.layers},       {"heads", c.heads},         {"ffn_dim", c.ffn_dim},
          {"out_dim", c.out_dim},     {"patch_size", c.patch_size}, {"neighbor_limit", c.neighbor_limit},
          {"use_mite", c.use_mite}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.node_dim = j.at("node_dim");
  c.edge_dim = j.at("edge_dim");
  c.time_dim = j.at("time_dim");
  c.mite_k = j.at("mite_k");
  c.mite_dim = j.at("mite_dim");
  c.align_dim = j.at("align_dim");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.ffn_dim = j.at("ffn_dim");
  c.out_dim = j.at("out_dim");
  c.patch_size = j.at("patch_size");
  c.neighbor_limit = j.at("neighbor_limit");
  c.use_mite = j.at("use_mite");
  c.validate();
  return c;
}

void save_params(const std::string& path, const ModelParams& params) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + path);
  nlohmann::json blocks = nlohmann::json::array();
  std::size_t offset = 0;
  params.for_each_block([&](const std::string& name, const Matrix& m) {
    // row-major on disk
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double x = m(r, c);
        bin.write(reinterpret_cast<const char*>(&x), sizeof x);
      }
    }
    blocks.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
    offset += static_cast<std::size_t>(m.size());
  });
  if (!bin) throw std::runtime_error("write failed for " + path);
  std::ofstream manifest(path + ".json");
  if (!manifest) throw std::runtime_error("cannot write " + path + ".json");
  manifest << nlohmann::json{{"config", config_to_json(params.config)}, {"scalars", offset}, {"blocks", blocks}}.dump(2)
           << '\n';
}

ModelParams load_params(const std::string& path) {
  std::ifstream manifest(path + ".json");
  if (!manifest) throw std::runtime_error("cannot read " + path + ".json");
  const nlohmann::json j = nlohmann::json::parse(manifest);
  ModelParams params = ModelParams::zeros(config_from_json(j.at("config")));
  const auto& blocks = j.at("blocks");

  std::ifstream bin(path, std::ios::binary | std::ios::ate);
  if (!bin) throw std::runtime_error("cannot read " + path);
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  if (bytes != params.scalar_count() * sizeof(double)) throw std::runtime_error("parameter file size does not match manifest");
  bin.seekg(0);

  std::size_t i = 0;
  std::size_t offset = 0;
  params.for_each_block([&](const std::string& name, Matrix& m) {
    if (i >= blocks.size()) throw std::runtime_error("manifest is missing block " + name);
    const auto& b = blocks[i++];
    if (b.at("name") != name || b.at("rows") != m.rows() || b.at("cols") != m.cols() || b.at("offset") != offset) {
      throw std::runtime_error("manifest block mismatch at " + name);
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) bin.read(reinterpret_cast<char*>(&m(r, c)), sizeof(double));
    }
    offset += static_cast<std::size_t>(m.size());
  });
  if (i != blocks.size()) throw std::runtime_error("manifest lists extra blocks");
  if (!bin) throw std::runtime_error("short read from " + path);
  return params;
}

}  // namespace dwlkit
