#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gcm/model.hpp"

namespace gcm {

class BinaryDatasetReader;

// The three summands of a regularized loss objective.
struct ObjectiveValue {
  double total = 0.0;
  double regularization_term = 0.0;
  double positive_loss_term = 0.0;
  double negative_loss_term = 0.0;
};

struct GradientVector {
  Eigen::VectorXd grad_w;
  double grad_b = 0.0;

  Eigen::VectorXd pack() const;
  double inf_norm() const;
};

// Rows whose soft margin falls in the linear (t <= 1 - 2 delta) or quadratic
// (1 - 2 delta < t < 1) part of the smoothed hinge. Sorted ascending.
struct ActiveSets {
  std::vector<std::size_t> linear_set;
  std::vector<std::size_t> quadratic_set;
};

struct EvalOptions {
  // Number of worker threads. Groups are split into this many contiguous
  // chunks and partial sums are reduced in chunk order, so results are
  // reproducible bit for bit for a fixed thread count.
  unsigned threads = 1;
};

// Per-candidate objective:
//   (1-lambda)/d sum_j huber(w_j) + lambda/n+ sum_{i+} L(t_i) + lambda/n- sum_{i-} L(t_i)
// Every row is its own example: i+ are the key rows, i- all other rows
// (including the non-key rows of positive groups); n+ and n- count rows.
ObjectiveValue eval_per_candidate(const LinearModel& model, const Dataset& data,
                                  const Hyperparams& hp, EvalOptions opts = {});

// Grouped (GCM) objective: each positive group contributes the loss of its key
// row, each negative group the maximum loss over its rows; n+ and n- count
// groups.
ObjectiveValue eval_grouped(const LinearModel& model, const Dataset& data,
                            const Hyperparams& hp, EvalOptions opts = {});

// Fully grouped variant where positive groups also take the max loss over
// all their rows. Evaluation only; it is never trained.
ObjectiveValue eval_group_max(const LinearModel& model, const Dataset& data,
                              const Hyperparams& hp, EvalOptions opts = {});

GradientVector gradient_per_candidate(const LinearModel& model, const Dataset& data,
                                      const Hyperparams& hp, EvalOptions opts = {});

// Subgradient of eval_grouped: only the key row of each positive group and the
// first maximal-loss row of each negative group contribute.
GradientVector subgradient_grouped(const LinearModel& model, const Dataset& data,
                                   const Hyperparams& hp, EvalOptions opts = {});

// Value and (sub)gradient in a single pass. `grad` may be null.
ObjectiveValue evaluate(const LinearModel& model, const Dataset& data,
                        const ObjectiveSpec& spec, GradientVector* grad,
                        EvalOptions opts = {});

ActiveSets active_sets(const LinearModel& model, const Dataset& data,
                       const Hyperparams& hp, Aggregation aggregation);

// Row of a negative group selected by the grouped objective: the first row
// attaining the maximal loss.
std::size_t negative_group_argmax(const LinearModel& model, const Dataset& data,
                                  const GroupBlock& group, double delta);

enum class GroupReduction { kMax, kMean };

// Loss of one group from its members' soft margins.
double group_loss(std::span<const double> margins, double delta, GroupReduction reduction);

// Grouped objective computed in one pass over a binary dataset stream, holding
// at most one group in memory. Matches eval_grouped on the same data bit for
// bit (single-threaded).
ObjectiveValue eval_grouped_stream(const LinearModel& model, BinaryDatasetReader& reader,
                                   const Hyperparams& hp);

}  // namespace gcm
