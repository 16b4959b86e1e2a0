#include "gcm/model_io.hpp"

#include <fstream>
#include <sstream>

#include "gcm/error.hpp"
#include "json.hpp"

namespace gcm {

using nlohmann::json;

std::string to_json(const ModelFile& file) {
  const ModelMetadata& m = file.meta;
  json doc;
  doc["format"] = "gcm-model";
  doc["version"] = kModelFormatVersion;
  doc["algorithm"] = m.algorithm;
  doc["dim"] = file.model.dim();
  doc["weights"] = std::vector<double>(file.model.w.data(), file.model.w.data() + file.model.w.size());
  doc["bias"] = file.model.b;
  doc["hyperparams"] = {{"lambda", m.hyperparams.lambda},
                        {"epsilon", m.hyperparams.epsilon},
                        {"delta", m.hyperparams.delta}};
  doc["features"] = {{"input_dim", m.input_dim},
                     {"expansion_degree", m.expansion_degree},
                     {"monomial_order", m.monomial_order}};
  if (m.scaler) {
    doc["features"]["scaler"] = {{"offset", m.scaler->offset}, {"scale", m.scaler->scale}};
  }
  doc["provenance"] = {{"dataset_digest", m.provenance.dataset_digest},
                       {"training_rows", m.provenance.training_rows},
                       {"iterations", m.provenance.iterations},
                       {"outer_iterations", m.provenance.outer_iterations},
                       {"termination", m.provenance.termination},
                       {"objective", m.provenance.objective}};
  return doc.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(DataErrorKind::kMalformedRecord, std::string("model file is not JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "gcm-model") {
      throw DataError(DataErrorKind::kBadHeader, "not a gcm model file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError(DataErrorKind::kBadHeader,
                      "model format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
    }
    ModelFile file;
    const auto weights = doc.at("weights").get<std::vector<double>>();
    if (weights.size() != doc.at("dim").get<std::size_t>()) {
      throw DataError(DataErrorKind::kMalformedRecord, "weight count disagrees with dim");
    }
    file.model = LinearModel(Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                               static_cast<Eigen::Index>(weights.size())),
                             doc.at("bias").get<double>());
    ModelMetadata& m = file.meta;
    m.algorithm = doc.at("algorithm").get<std::string>();
    const auto& hp = doc.at("hyperparams");
    m.hyperparams = {hp.at("lambda").get<double>(), hp.at("epsilon").get<double>(),
                     hp.at("delta").get<double>()};
    const auto& feat = doc.at("features");
    m.input_dim = feat.at("input_dim").get<std::size_t>();
    m.expansion_degree = feat.at("expansion_degree").get<int>();
    m.monomial_order = feat.at("monomial_order").get<std::string>();
    if (m.monomial_order != kMonomialOrder) {
      throw DataError(DataErrorKind::kBadHeader, "unknown monomial order '" + m.monomial_order + "'");
    }
    if (feat.contains("scaler")) {
      AffineScaler s;
      s.offset = feat["scaler"].at("offset").get<std::vector<double>>();
      s.scale = feat["scaler"].at("scale").get<std::vector<double>>();
      m.scaler = std::move(s);
    }
    const auto& prov = doc.at("provenance");
    m.provenance.dataset_digest = prov.at("dataset_digest").get<std::string>();
    m.provenance.training_rows = prov.at("training_rows").get<std::size_t>();
    m.provenance.iterations = prov.at("iterations").get<int>();
    m.provenance.outer_iterations = prov.at("outer_iterations").get<int>();
    m.provenance.termination = prov.at("termination").get<std::string>();
    m.provenance.objective = prov.at("objective").get<double>();
    if (!file.model.finite()) throw DataError(DataErrorKind::kMalformedRecord, "model has non-finite weights");
    return file;
  } catch (const json::exception& e) {
    throw DataError(DataErrorKind::kMalformedRecord, std::string("model file field error: ") + e.what());
  }
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(DataErrorKind::kIo, "cannot write " + path.string());
  out << to_json(file);
  if (!out) throw DataError(DataErrorKind::kIo, "write failed for " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

Dataset prepare_features(const ModelMetadata& meta, const Dataset& raw) {
  if (raw.dim() != meta.input_dim) throw DimensionError(meta.input_dim, raw.dim());
  Dataset data = meta.scaler ? meta.scaler->apply(raw) : raw;
  if (meta.expansion_degree > 1) data = expand(data, ExpansionSpec{meta.expansion_degree, std::nullopt});
  return data;
}

}  // namespace gcm
