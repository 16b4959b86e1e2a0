#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gcm/model.hpp"

namespace gcm {

// Synthetic grouped data.
//
// Background rows are N(0, noise_scale^2 I). Each positive group holds one
// key row drawn from N(key_shift * 1, noise_scale^2 I) at a uniformly random
// position; its other rows are background, except for decoys_per_positive
// near-miss rows that share part of the key's shift. Each negative group is background
// except that, with probability outlier_rate, one row is moved by
// outlier_shift along the first outlier_features coordinates, i.e. toward
// the positive region on a subset of the features.
//
// Group ids are 0..n_pos_groups-1 for positive groups followed by the
// negative groups. Output depends only on the spec (including the seed).
struct GeneratorSpec {
  std::uint64_t seed = 0;
  std::size_t n_pos_groups = 100;
  std::size_t n_neg_groups = 1000;
  std::size_t min_candidates = 150;
  std::size_t max_candidates = 250;
  std::size_t dim = 13;
  double key_shift = 1.0;
  // Extra key shift on the first outlier_features coordinates, the
  // directions negative outliers also move along.
  double shared_key_shift = 0.0;
  // Near-miss rows in each positive group: background shifted by
  // decoy_shift on the coordinates outliers leave alone. They are not keys.
  std::size_t decoys_per_positive = 0;
  double decoy_shift = 0.0;
  double noise_scale = 1.0;
  double outlier_rate = 0.0;
  double outlier_shift = 0.0;
  std::size_t outlier_features = 0;

  // Throws ConfigError for unusable specs (no positive or no negative
  // groups, empty candidate range, ...).
  void validate() const;

  std::size_t total_groups() const noexcept { return n_pos_groups + n_neg_groups; }

  // Named configurations: "fig5-regime" (100 positive / 5000 negative groups,
  // ~200 candidates, 2% negative outliers, near-miss decoys) and "easy" (well separated, no
  // outliers).
  static GeneratorSpec preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

Dataset generate(const GeneratorSpec& spec);

// Streams the same rows as generate(spec) straight into a binary dataset
// file without holding them in memory. Returns the row count.
std::uint64_t generate_to_binary(const GeneratorSpec& spec, const std::filesystem::path& path);

}  // namespace gcm
