#include "gcm/generator.hpp"

#include <functional>

#include "gcm/dataset_io.hpp"
#include "gcm/error.hpp"
#include "gcm/random.hpp"

namespace gcm {

void GeneratorSpec::validate() const {
  if (n_pos_groups == 0) throw ConfigError("generator needs at least one positive group");
  if (n_neg_groups == 0) throw ConfigError("generator needs at least one negative group");
  if (min_candidates == 0 || min_candidates > max_candidates) {
    throw ConfigError("candidates per group must satisfy 1 <= min <= max");
  }
  if (dim == 0) throw ConfigError("generator needs at least one feature");
  if (!(noise_scale > 0.0)) throw ConfigError("noise_scale must be > 0");
  if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) throw ConfigError("outlier_rate must lie in [0, 1]");
  if (outlier_features > dim) throw ConfigError("outlier_features exceeds the feature count");
  if (decoys_per_positive >= min_candidates) {
    throw ConfigError("decoys_per_positive must leave room for the key row");
  }
}

GeneratorSpec GeneratorSpec::preset(std::string_view name) {
  GeneratorSpec s;
  if (name == "fig5-regime") {
    s.n_pos_groups = 100;
    s.n_neg_groups = 5000;
    s.min_candidates = 150;
    s.max_candidates = 250;
    s.dim = 13;
    s.key_shift = 1.6;
    s.noise_scale = 1.0;
    s.outlier_rate = 0.02;
    s.outlier_shift = 8.0;
    s.outlier_features = 4;
    s.decoys_per_positive = 20;
    s.decoy_shift = 1.6;
    return s;
  }
  if (name == "easy") {
    s.n_pos_groups = 50;
    s.n_neg_groups = 200;
    s.min_candidates = 150;
    s.max_candidates = 250;
    s.dim = 13;
    s.key_shift = 3.0;
    s.noise_scale = 1.0;
    return s;
  }
  throw ConfigError("unknown generator preset '" + std::string(name) + "'");
}

std::vector<std::string> GeneratorSpec::preset_names() { return {"fig5-regime", "easy"}; }

namespace {

using RowSink = std::function<void(std::uint64_t group_id, int label, bool is_key,
                                   std::span<const double> features)>;

void emit_rows(const GeneratorSpec& spec, const RowSink& sink) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<double> x(spec.dim);
  auto background = [&] {
    for (double& v : x) v = spec.noise_scale * rng.normal();
  };
  const std::size_t groups = spec.total_groups();
  for (std::size_t g = 0; g < groups; ++g) {
    const bool positive = g < spec.n_pos_groups;
    const auto size = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(spec.min_candidates), static_cast<std::int64_t>(spec.max_candidates)));
    std::size_t special = kNoKey;
    if (positive) {
      special = static_cast<std::size_t>(rng.uniform_index(size));
    } else if (spec.outlier_rate > 0.0 && rng.bernoulli(spec.outlier_rate)) {
      special = static_cast<std::size_t>(rng.uniform_index(size));
    }
    for (std::size_t r = 0; r < size; ++r) {
      background();
      const bool is_special = r == special;
      // Decoys follow the key cyclically.
      if (positive && (r + size - special) % size - 1 < spec.decoys_per_positive) {
        for (std::size_t j = spec.outlier_features; j < spec.dim; ++j) x[j] += spec.decoy_shift;
      }
      if (is_special && positive) {
        for (double& v : x) v += spec.key_shift;
        for (std::size_t j = 0; j < spec.outlier_features; ++j) x[j] += spec.shared_key_shift;
      } else if (is_special) {
        for (std::size_t j = 0; j < spec.outlier_features; ++j) x[j] += spec.outlier_shift;
      }
      sink(g, positive ? 1 : -1, is_special && positive, x);
    }
  }
}

}  // namespace

Dataset generate(const GeneratorSpec& spec) {
  std::vector<std::uint64_t> gids;
  std::vector<std::int8_t> labels;
  std::vector<std::uint8_t> keys;
  std::vector<double> features;
  emit_rows(spec, [&](std::uint64_t gid, int label, bool key, std::span<const double> x) {
    gids.push_back(gid);
    labels.push_back(static_cast<std::int8_t>(label));
    keys.push_back(key ? 1 : 0);
    features.insert(features.end(), x.begin(), x.end());
  });
  return Dataset(spec.dim, std::move(gids), std::move(labels), std::move(keys), std::move(features));
}

std::uint64_t generate_to_binary(const GeneratorSpec& spec, const std::filesystem::path& path) {
  spec.validate();
  BinaryDatasetWriter writer(path, spec.dim);
  emit_rows(spec, [&](std::uint64_t gid, int label, bool key, std::span<const double> x) {
    writer.write(gid, label, key, x);
  });
  writer.close();
  return writer.rows();
}

}  // namespace gcm
