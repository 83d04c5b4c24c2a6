#include "seedling/nn/checkpoint.hpp"

#include "seedling/container.hpp"

namespace seedling::nn {

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path) {
  nlohmann::json header{{"config", model.config()},
                        {"label_names", model.label_names()},
                        {"metadata", model.metadata()}};
  std::vector<NamedTensor> tensors;
  for (const auto& p : model.params()) tensors.push_back({p.name, *p.value});
  write_container(path, kCnnMagic, header, tensors);
}

Model<float> load_checkpoint(const std::filesystem::path& path) {
  const Container c = read_container(path, kCnnMagic);
  using Kind = ContainerError::Kind;
  CnnConfig cfg;
  std::vector<std::string> names;
  try {
    cfg = c.header.at("config").get<CnnConfig>();
    names = c.header.at("label_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::malformed_header, "'" + path.string() + "': " + e.what());
  } catch (const ConfigError& e) {
    throw ContainerError(Kind::malformed_header, "'" + path.string() + "': " + e.what());
  }

  Model<float> model(cfg, names);
  if (c.header.contains("metadata")) model.metadata() = c.header["metadata"];
  auto params = model.params();
  if (params.size() != c.tensors.size()) {
    throw ContainerError(Kind::inconsistent, "'" + path.string() + "' holds " + std::to_string(c.tensors.size()) +
                                                 " tensors, architecture needs " + std::to_string(params.size()));
  }
  for (auto& p : params) {
    const Tensor& t = c.get(p.name);
    if (t.shape() != p.value->shape()) {
      throw ContainerError(Kind::inconsistent, "'" + path.string() + "': tensor '" + p.name + "' has shape " +
                                                   shape_str(t.shape()) + ", config implies " +
                                                   shape_str(p.value->shape()));
    }
    *p.value = t;
  }
  return model;
}

}  // namespace seedling::nn
