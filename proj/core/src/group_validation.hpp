#pragma once

#include <cstdint>
#include <string>

#include "gcm/error.hpp"

namespace gcm::detail {

// Incremental check of one group's label homogeneity and key count. Feed
// rows in order, then call finish().
class GroupValidator {
 public:
  void start(std::uint64_t group_id, std::int64_t location) {
    group_id_ = group_id;
    location_ = location;
    label_ = 0;
    keys_ = 0;
    rows_ = 0;
  }

  void add(int label, bool is_key, std::int64_t location) {
    if (label != 1 && label != -1) {
      throw DataError(DataErrorKind::kMalformedRecord,
                      "label must be +1 or -1, got " + std::to_string(label),
                      location, static_cast<std::int64_t>(group_id_));
    }
    if (rows_ == 0) {
      label_ = label;
    } else if (label != label_) {
      throw DataError(DataErrorKind::kMixedLabelGroup,
                      "group " + std::to_string(group_id_) +
                          " mixes positive and negative labels",
                      location, static_cast<std::int64_t>(group_id_));
    }
    if (is_key) {
      if (label < 0) {
        throw DataError(DataErrorKind::kKeyOnNegative,
                        "group " + std::to_string(group_id_) +
                            " is negative but has a key candidate",
                        location, static_cast<std::int64_t>(group_id_));
      }
      if (++keys_ > 1) {
        throw DataError(DataErrorKind::kMultipleKeys,
                        "positive group " + std::to_string(group_id_) +
                            " has more than one key candidate",
                        location, static_cast<std::int64_t>(group_id_));
      }
    }
    ++rows_;
  }

  void finish() const {
    if (rows_ == 0) {
      throw DataError(DataErrorKind::kEmptyGroup,
                      "group " + std::to_string(group_id_) + " is empty",
                      location_, static_cast<std::int64_t>(group_id_));
    }
    if (label_ > 0 && keys_ == 0) {
      throw DataError(DataErrorKind::kMissingKey,
                      "positive group " + std::to_string(group_id_) +
                          " has no key candidate",
                      location_, static_cast<std::int64_t>(group_id_));
    }
  }

  int label() const noexcept { return label_; }

 private:
  std::uint64_t group_id_ = 0;
  std::int64_t location_ = -1;
  int label_ = 0;
  int keys_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace gcm::detail
