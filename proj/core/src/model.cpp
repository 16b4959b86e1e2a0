#include "gcm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gcm/error.hpp"
#include "group_validation.hpp"

namespace gcm {

const char* to_string(DataErrorKind kind) noexcept {
  switch (kind) {
    case DataErrorKind::kMalformedRecord: return "MalformedRecord";
    case DataErrorKind::kMixedLabelGroup: return "MixedLabelGroup";
    case DataErrorKind::kMissingKey: return "MissingKey";
    case DataErrorKind::kMultipleKeys: return "MultipleKeys";
    case DataErrorKind::kKeyOnNegative: return "KeyOnNegative";
    case DataErrorKind::kUnsortedGroups: return "UnsortedGroups";
    case DataErrorKind::kBadHeader: return "BadHeader";
    case DataErrorKind::kEmptyGroup: return "EmptyGroup";
    case DataErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

std::string located(DataErrorKind kind, const std::string& detail,
                    std::int64_t line, std::int64_t group_id) {
  std::string out = std::string(to_string(kind)) + ": " + detail;
  if (line >= 0) out += " (at line/record " + std::to_string(line) + ")";
  if (group_id >= 0 && detail.find(std::to_string(group_id)) == std::string::npos) {
    out += " [group " + std::to_string(group_id) + "]";
  }
  return out;
}

}  // namespace

DataError::DataError(DataErrorKind kind, const std::string& detail,
                     std::int64_t line, std::int64_t group_id)
    : Error(ErrorCategory::kData, located(kind, detail, line, group_id)),
      kind_(kind),
      line_(line),
      group_id_(group_id) {}

Dataset Dataset::from_candidates(std::size_t dim, std::vector<Candidate> candidates) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].group_id < candidates[b].group_id;
  });

  const std::size_t n = candidates.size();
  std::vector<std::uint64_t> group_ids(n);
  std::vector<std::int8_t> labels(n);
  std::vector<std::uint8_t> keys(n);
  std::vector<double> features(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const Candidate& c = candidates[order[i]];
    if (c.features.size() != dim) throw DimensionError(dim, c.features.size());
    if (c.label != 1 && c.label != -1) {
      throw DataError(DataErrorKind::kMalformedRecord,
                      "label must be +1 or -1, got " + std::to_string(c.label),
                      static_cast<std::int64_t>(order[i]),
                      static_cast<std::int64_t>(c.group_id));
    }
    group_ids[i] = c.group_id;
    labels[i] = static_cast<std::int8_t>(c.label);
    keys[i] = c.is_key ? 1 : 0;
    std::copy(c.features.begin(), c.features.end(), features.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  return Dataset(dim, std::move(group_ids), std::move(labels), std::move(keys),
                 std::move(features));
}

Dataset::Dataset(std::size_t dim, std::vector<std::uint64_t> group_ids,
                 std::vector<std::int8_t> labels, std::vector<std::uint8_t> keys,
                 std::vector<double> features)
    : dim_(dim),
      group_ids_(std::move(group_ids)),
      labels_(std::move(labels)),
      keys_(std::move(keys)),
      features_(std::move(features)) {
  const std::size_t n = labels_.size();
  if (group_ids_.size() != n || keys_.size() != n) {
    throw DataError(DataErrorKind::kMalformedRecord,
                    "column lengths disagree");
  }
  if (features_.size() != n * dim_) throw DimensionError(n * dim_, features_.size());
  index_groups();
}

void Dataset::index_groups() {
  groups_.clear();
  n_pos_groups_ = 0;
  n_neg_rows_ = 0;
  detail::GroupValidator validator;
  const std::size_t n = labels_.size();
  std::size_t begin = 0;
  while (begin < n) {
    const std::uint64_t gid = group_ids_[begin];
    if (!groups_.empty() && gid <= groups_.back().group_id) {
      throw DataError(DataErrorKind::kUnsortedGroups,
                      "rows are not grouped by ascending group id",
                      static_cast<std::int64_t>(begin),
                      static_cast<std::int64_t>(gid));
    }
    GroupBlock block;
    block.group_id = gid;
    block.begin = begin;
    validator.start(gid, static_cast<std::int64_t>(begin));
    std::size_t row = begin;
    for (; row < n && group_ids_[row] == gid; ++row) {
      validator.add(labels_[row], keys_[row] != 0, static_cast<std::int64_t>(row));
      if (keys_[row] != 0) block.key_row = row;
    }
    validator.finish();
    block.end = row;
    block.label = validator.label();
    if (block.positive()) {
      ++n_pos_groups_;
    } else {
      n_neg_rows_ += block.size();
    }
    groups_.push_back(block);
    begin = row;
  }
}

Candidate Dataset::candidate(std::size_t row) const {
  Candidate c;
  c.group_id = group_ids_[row];
  c.label = labels_[row];
  c.is_key = keys_[row] != 0;
  auto f = features(row);
  c.features.assign(f.begin(), f.end());
  return c;
}

Dataset Dataset::subset_groups(std::span<const std::size_t> group_indices) const {
  std::vector<std::size_t> picked(group_indices.begin(), group_indices.end());
  std::sort(picked.begin(), picked.end());
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());

  std::size_t total = 0;
  for (std::size_t g : picked) total += groups_.at(g).size();

  std::vector<std::uint64_t> gids;
  std::vector<std::int8_t> labels;
  std::vector<std::uint8_t> keys;
  std::vector<double> feats;
  gids.reserve(total);
  labels.reserve(total);
  keys.reserve(total);
  feats.reserve(total * dim_);
  for (std::size_t g : picked) {
    const GroupBlock& block = groups_[g];
    for (std::size_t row = block.begin; row < block.end; ++row) {
      gids.push_back(group_ids_[row]);
      labels.push_back(labels_[row]);
      keys.push_back(keys_[row]);
      auto f = features(row);
      feats.insert(feats.end(), f.begin(), f.end());
    }
  }
  return Dataset(dim_, std::move(gids), std::move(labels), std::move(keys),
                 std::move(feats));
}

Dataset Dataset::with_features(std::size_t dim, std::vector<double> features) const {
  return Dataset(dim, group_ids_, labels_, keys_, std::move(features));
}

bool LinearModel::finite() const noexcept {
  return std::isfinite(b) && w.allFinite();
}

double LinearModel::score(std::span<const double> x) const {
  if (x.size() != dim()) throw DimensionError(dim(), x.size());
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  return w.dot(xv) + b;
}

Eigen::VectorXd LinearModel::pack() const {
  Eigen::VectorXd packed(w.size() + 1);
  packed.head(w.size()) = w;
  packed(w.size()) = b;
  return packed;
}

LinearModel LinearModel::unpack(const Eigen::VectorXd& packed) {
  const Eigen::Index d = packed.size() - 1;
  return LinearModel(packed.head(d), packed(d));
}

LinearModel operator+(const LinearModel& a, const LinearModel& b) {
  if (a.dim() != b.dim()) throw DimensionError(a.dim(), b.dim());
  return LinearModel(a.w + b.w, a.b + b.b);
}

LinearModel operator*(double s, const LinearModel& m) {
  return LinearModel(s * m.w, s * m.b);
}

void Hyperparams::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("epsilon must be > 0, got " + std::to_string(epsilon));
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw DomainError("delta must be >= 0, got " + std::to_string(delta));
  }
}

double soft_margin(const LinearModel& model, std::span<const double> x, int label) {
  return static_cast<double>(label) * model.score(x);
}

double soft_margin(const LinearModel& model, const Candidate& candidate) {
  return soft_margin(model, candidate.features, candidate.label);
}

}  // namespace gcm
