#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gcm/expansion.hpp"
#include "gcm/model.hpp"

namespace gcm {

inline constexpr int kModelFormatVersion = 1;

struct TrainingProvenance {
  std::string dataset_digest;  // hex FNV-1a of the training file, if known
  std::size_t training_rows = 0;
  int iterations = 0;
  int outer_iterations = 1;
  std::string termination;
  double objective = 0.0;
};

// Everything needed to score raw data with a saved model: raw features are
// standardized by `scaler` (when present), then expanded to monomials of
// degree <= expansion_degree in graded lexicographic order.
struct ModelMetadata {
  std::string algorithm;
  Hyperparams hyperparams;
  std::size_t input_dim = 0;
  int expansion_degree = 1;
  std::string monomial_order = kMonomialOrder;
  std::optional<AffineScaler> scaler;
  TrainingProvenance provenance;
};

struct ModelFile {
  LinearModel model;
  ModelMetadata meta;
};

// JSON document. Reals are written with 17 significant digits, so every
// weight survives a save/load round trip bit for bit.
std::string to_json(const ModelFile& file);
// Throws DataError on malformed input and on a version other than
// kModelFormatVersion.
ModelFile model_from_json(const std::string& text);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

// Applies the recorded scaling and expansion to a raw dataset. Throws
// DimensionError when the dataset width differs from meta.input_dim.
Dataset prepare_features(const ModelMetadata& meta, const Dataset& raw);

}  // namespace gcm
