#include "macaac/checkpoint.hpp"

#include <cmath>
#include <fstream>

#include "macaac/errors.hpp"

namespace macaac {

const ad::Tensor& Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw SchemaError("checkpoint has no tensor named '" + name + "'");
}

nlohmann::json checkpoint_to_json(const nn::NamedTensors& tensors, const nlohmann::json& meta) {
  nlohmann::json doc;
  doc["format"] = "macaac-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["meta"] = meta;
  auto& list = doc["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : tensors) {
    for (double v : t.data()) {
      if (!std::isfinite(v)) throw NumericError("non-finite value in parameter " + name);
    }
    list.push_back({{"name", name},
                    {"shape", t.shape()},
                    {"data", std::vector<double>(t.data().begin(), t.data().end())}});
  }
  return doc;
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "macaac-checkpoint") {
    throw SchemaError("not a macaac checkpoint");
  }
  if (doc.value("version", 0) != kCheckpointVersion) {
    throw SchemaError("unsupported checkpoint version " + doc.value("version", nlohmann::json()).dump());
  }
  Checkpoint ck;
  ck.meta = doc.value("meta", nlohmann::json::object());
  try {
    for (const auto& e : doc.at("tensors")) {
      ck.tensors.emplace_back(e.at("name").get<std::string>(),
                              ad::Tensor::from(e.at("shape").get<ad::Shape>(),
                                               e.at("data").get<std::vector<double>>()));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError(std::string("malformed checkpoint: ") + ex.what());
  } catch (const DimensionError& ex) {
    throw SchemaError(std::string("malformed checkpoint: ") + ex.what());
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const nn::NamedTensors& tensors,
                     const nlohmann::json& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  os << checkpoint_to_json(tensors, meta).dump() << '\n';
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError("checkpoint " + path.string() + " is not valid JSON: " + ex.what());
  }
  return checkpoint_from_json(doc);
}

void restore(const Checkpoint& ckpt, const nn::NamedTensors& dst) {
  for (const auto& [name, t] : dst) {
    const ad::Tensor& src = ckpt.find(name);
    if (src.shape() != t.shape()) {
      throw ContractError("checkpoint tensor " + name + " has shape " + ad::shape_str(src.shape()) +
                          ", model expects " + ad::shape_str(t.shape()));
    }
    auto d = ad::Tensor(t).mutable_data();
    std::copy(src.data().begin(), src.data().end(), d.begin());
  }
}

}  // namespace macaac
