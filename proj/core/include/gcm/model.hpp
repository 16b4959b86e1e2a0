#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gcm {

// One candidate example: a feature vector belonging to a group.
struct Candidate {
  std::uint64_t group_id = 0;
  int label = -1;  // +1 or -1
  bool is_key = false;
  std::vector<double> features;
};

inline constexpr std::size_t kNoKey = std::numeric_limits<std::size_t>::max();

// A contiguous run of rows sharing one group id.
struct GroupBlock {
  std::uint64_t group_id = 0;
  int label = -1;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t key_row = kNoKey;  // absolute row index; kNoKey for negatives

  std::size_t size() const noexcept { return end - begin; }
  bool positive() const noexcept { return label > 0; }
};

// Immutable collection of candidates, stored row-major with rows of a group
// kept contiguous and groups ordered by ascending group id. Row order inside
// a group is the input order.
//
// Invariants enforced at construction:
//   * every group has a single label;
//   * every positive group has exactly one key row;
//   * negative groups have no key rows.
class Dataset {
 public:
  Dataset() = default;

  // Stable-sorts rows by group id, then validates.
  static Dataset from_candidates(std::size_t dim,
                                 std::vector<Candidate> candidates);

  // Columnar constructor. Rows must already be sorted by group id.
  Dataset(std::size_t dim, std::vector<std::uint64_t> group_ids,
          std::vector<std::int8_t> labels, std::vector<std::uint8_t> keys,
          std::vector<double> features);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return labels_.size(); }

  std::span<const double> features(std::size_t row) const noexcept {
    return {features_.data() + row * dim_, dim_};
  }
  Eigen::Map<const Eigen::VectorXd> feature_vector(std::size_t row) const {
    return Eigen::Map<const Eigen::VectorXd>(features_.data() + row * dim_,
                                             static_cast<Eigen::Index>(dim_));
  }
  int label(std::size_t row) const noexcept { return labels_[row]; }
  bool is_key(std::size_t row) const noexcept { return keys_[row] != 0; }
  std::uint64_t group_id(std::size_t row) const noexcept {
    return group_ids_[row];
  }
  Candidate candidate(std::size_t row) const;

  const std::vector<GroupBlock>& groups() const noexcept { return groups_; }
  std::size_t positive_groups() const noexcept { return n_pos_groups_; }
  std::size_t negative_groups() const noexcept { return groups_.size() - n_pos_groups_; }
  std::size_t key_rows() const noexcept { return n_pos_groups_; }
  std::size_t negative_rows() const noexcept { return n_neg_rows_; }

  const std::vector<double>& feature_matrix() const noexcept { return features_; }
  const std::vector<std::uint64_t>& group_ids() const noexcept { return group_ids_; }
  const std::vector<std::int8_t>& labels() const noexcept { return labels_; }
  const std::vector<std::uint8_t>& keys() const noexcept { return keys_; }

  // New dataset holding the listed groups (indices into groups()), in the
  // order given by ascending group id.
  Dataset subset_groups(std::span<const std::size_t> group_indices) const;

  // Same rows and groups with a replaced feature matrix of width `dim`.
  Dataset with_features(std::size_t dim, std::vector<double> features) const;

 private:
  void index_groups();

  std::size_t dim_ = 0;
  std::vector<std::uint64_t> group_ids_;
  std::vector<std::int8_t> labels_;
  std::vector<std::uint8_t> keys_;
  std::vector<double> features_;
  std::vector<GroupBlock> groups_;
  std::size_t n_pos_groups_ = 0;
  std::size_t n_neg_rows_ = 0;
};

// Candidate-level ground truth used by per-candidate training and by
// candidate-level evaluation: key rows are positives; every other row
// (negative groups and the non-key rows of positive groups) is a negative.
inline int candidate_label(const Dataset& data, std::size_t row) noexcept {
  return data.is_key(row) ? 1 : -1;
}

struct LinearModel {
  Eigen::VectorXd w;
  double b = 0.0;

  LinearModel() = default;
  explicit LinearModel(std::size_t dim) : w(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))) {}
  LinearModel(Eigen::VectorXd weights, double bias) : w(std::move(weights)), b(bias) {}

  std::size_t dim() const noexcept { return static_cast<std::size_t>(w.size()); }
  bool finite() const noexcept;

  // Raw score w'x + b.
  double score(std::span<const double> x) const;

  // Packs (w, b) into one vector of size d + 1 and back, for the solver.
  Eigen::VectorXd pack() const;
  static LinearModel unpack(const Eigen::VectorXd& packed);
};

LinearModel operator+(const LinearModel& a, const LinearModel& b);
LinearModel operator*(double s, const LinearModel& m);

struct Hyperparams {
  double lambda = 0.5;
  double epsilon = 1.0;
  double delta = 0.5;

  // Throws DomainError when a field is out of range.
  void validate() const;
};

enum class Aggregation { kPerCandidate, kGrouped };

struct ObjectiveSpec {
  Hyperparams hyperparams;
  Aggregation aggregation = Aggregation::kGrouped;
};

// y * (w'x + b). Throws DimensionError if sizes differ.
double soft_margin(const LinearModel& model, std::span<const double> x, int label);
double soft_margin(const LinearModel& model, const Candidate& candidate);

}  // namespace gcm
