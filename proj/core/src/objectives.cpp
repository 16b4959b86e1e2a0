#include "gcm/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "gcm/dataset_io.hpp"
#include "gcm/error.hpp"
#include "gcm/penalty.hpp"

namespace gcm {

Eigen::VectorXd GradientVector::pack() const {
  Eigen::VectorXd packed(grad_w.size() + 1);
  packed.head(grad_w.size()) = grad_w;
  packed(grad_w.size()) = grad_b;
  return packed;
}

double GradientVector::inf_norm() const {
  double n = std::abs(grad_b);
  if (grad_w.size() > 0) n = std::max(n, grad_w.cwiseAbs().maxCoeff());
  return n;
}

namespace {

enum class Mode { kPerCandidate, kGrouped, kGroupMax };

// Plain loop so that in-memory and streaming evaluation round identically.
inline double raw_score(const double* w, const double* x, std::size_t d, double b) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) s += w[j] * x[j];
  return s + b;
}

struct Partial {
  double pos_loss = 0.0;
  double neg_loss = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  Eigen::VectorXd gw_pos;
  Eigen::VectorXd gw_neg;
  double gb_pos = 0.0;
  double gb_neg = 0.0;
};

// Accumulates loss sums (and optionally loss-gradient sums) group by group.
class Accumulator {
 public:
  Accumulator(const LinearModel& model, double delta, Mode mode, bool want_grad)
      : w_(model.w.data()),
        b_(model.b),
        d_(model.dim()),
        delta_(delta),
        mode_(mode),
        want_grad_(want_grad) {
    if (want_grad_) {
      part_.gw_pos = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d_));
      part_.gw_neg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d_));
    }
  }

  // `features` holds `rows` consecutive rows of width d.
  void add_group(int label, std::size_t rows, std::size_t key_offset, const double* features) {
    const double y = label > 0 ? 1.0 : -1.0;
    const bool positive = label > 0;
    const bool take_max = positive ? mode_ == Mode::kGroupMax : mode_ != Mode::kPerCandidate;

    if (positive && mode_ == Mode::kGrouped) {
      // Only the key candidate carries the positive loss.
      contribute(true, y, features + key_offset * d_);
      return;
    }
    if (positive && !take_max) {
      // Per candidate: the key row is the positive, every other row a negative.
      for (std::size_t r = 0; r < rows; ++r) {
        contribute(r == key_offset, r == key_offset ? 1.0 : -1.0, features + r * d_);
      }
      return;
    }
    if (!take_max) {
      for (std::size_t r = 0; r < rows; ++r) contribute(false, y, features + r * d_);
      return;
    }
    std::size_t best = 0;
    double best_loss = -1.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double t = y * raw_score(w_, features + r * d_, d_, b_);
      const double loss = smoothed_hinge(t, delta_);
      if (loss > best_loss) {
        best_loss = loss;
        best = r;
      }
    }
    contribute(positive, y, features + best * d_);
  }

  Partial& partial() { return part_; }

 private:
  void contribute(bool positive, double y, const double* x) {
    const double t = y * raw_score(w_, x, d_, b_);
    const double loss = smoothed_hinge(t, delta_);
    if (positive) {
      part_.pos_loss += loss;
      ++part_.n_pos;
    } else {
      part_.neg_loss += loss;
      ++part_.n_neg;
    }
    if (!want_grad_) return;
    const double slope = smoothed_hinge_prime(t, delta_);
    if (slope == 0.0) return;
    const double coef = slope * y;
    Eigen::VectorXd& gw = positive ? part_.gw_pos : part_.gw_neg;
    for (std::size_t j = 0; j < d_; ++j) gw[static_cast<Eigen::Index>(j)] += coef * x[j];
    (positive ? part_.gb_pos : part_.gb_neg) += coef;
  }

  const double* w_;
  double b_;
  std::size_t d_;
  double delta_;
  Mode mode_;
  bool want_grad_;
  Partial part_;
};

ObjectiveValue finish(const Partial& p, const LinearModel& model, const Hyperparams& hp,
                      GradientVector* grad) {
  const double lambda = hp.lambda;
  const std::size_t d = model.dim();
  const double reg_scale = d > 0 ? (1.0 - lambda) / static_cast<double>(d) : 0.0;

  double huber_sum = 0.0;
  for (std::size_t j = 0; j < d; ++j) huber_sum += huber(model.w[static_cast<Eigen::Index>(j)], hp.epsilon);

  ObjectiveValue v;
  v.regularization_term = reg_scale * huber_sum;
  double pos_scale = 0.0;
  double neg_scale = 0.0;
  if (lambda > 0.0) {
    if (p.n_pos == 0) throw ConfigError("no positive examples but lambda > 0");
    if (p.n_neg == 0) throw ConfigError("no negative examples but lambda > 0");
    pos_scale = lambda / static_cast<double>(p.n_pos);
    neg_scale = lambda / static_cast<double>(p.n_neg);
    v.positive_loss_term = pos_scale * p.pos_loss;
    v.negative_loss_term = neg_scale * p.neg_loss;
  }
  v.total = v.regularization_term + v.positive_loss_term + v.negative_loss_term;

  if (grad != nullptr) {
    grad->grad_w.resize(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      grad->grad_w[jj] = reg_scale * huber_prime(model.w[jj], hp.epsilon);
    }
    grad->grad_b = 0.0;
    if (lambda > 0.0) {
      grad->grad_w += pos_scale * p.gw_pos + neg_scale * p.gw_neg;
      grad->grad_b = pos_scale * p.gb_pos + neg_scale * p.gb_neg;
    }
  }
  return v;
}

void check_dims(const LinearModel& model, std::size_t dim) {
  if (model.dim() != dim) throw DimensionError(dim, model.dim());
}

ObjectiveValue run(const LinearModel& model, const Dataset& data, const Hyperparams& hp,
                   Mode mode, GradientVector* grad, EvalOptions opts) {
  hp.validate();
  check_dims(model, data.dim());
  const bool want_grad = grad != nullptr;
  const auto& groups = data.groups();
  const double* base = data.feature_matrix().data();
  const std::size_t d = data.dim();

  auto sweep = [&](Accumulator& acc, std::size_t g0, std::size_t g1) {
    for (std::size_t g = g0; g < g1; ++g) {
      const GroupBlock& block = groups[g];
      const std::size_t key = block.key_row == kNoKey ? 0 : block.key_row - block.begin;
      acc.add_group(block.label, block.size(), key, base + block.begin * d);
    }
  };

  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(opts.threads, groups.size()));
  if (chunks == 1) {
    Accumulator acc(model, hp.delta, mode, want_grad);
    sweep(acc, 0, groups.size());
    return finish(acc.partial(), model, hp, grad);
  }

  // Chunk boundaries balance row counts without splitting groups.
  std::vector<std::size_t> bounds{0};
  const std::size_t per_chunk = (data.rows() + chunks - 1) / chunks;
  std::size_t rows_in_chunk = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    rows_in_chunk += groups[g].size();
    if (rows_in_chunk >= per_chunk && bounds.size() < chunks) {
      bounds.push_back(g + 1);
      rows_in_chunk = 0;
    }
  }
  if (bounds.back() != groups.size()) bounds.push_back(groups.size());

  std::vector<Accumulator> accs;
  accs.reserve(bounds.size() - 1);
  for (std::size_t c = 0; c + 1 < bounds.size(); ++c) accs.emplace_back(model, hp.delta, mode, want_grad);
  {
    std::vector<std::jthread> workers;
    for (std::size_t c = 1; c < accs.size(); ++c) {
      workers.emplace_back([&, c] { sweep(accs[c], bounds[c], bounds[c + 1]); });
    }
    sweep(accs[0], bounds[0], bounds[1]);
  }

  Partial total = accs[0].partial();
  for (std::size_t c = 1; c < accs.size(); ++c) {
    const Partial& p = accs[c].partial();
    total.pos_loss += p.pos_loss;
    total.neg_loss += p.neg_loss;
    total.n_pos += p.n_pos;
    total.n_neg += p.n_neg;
    if (want_grad) {
      total.gw_pos += p.gw_pos;
      total.gw_neg += p.gw_neg;
      total.gb_pos += p.gb_pos;
      total.gb_neg += p.gb_neg;
    }
  }
  return finish(total, model, hp, grad);
}

}  // namespace

ObjectiveValue eval_per_candidate(const LinearModel& model, const Dataset& data,
                                  const Hyperparams& hp, EvalOptions opts) {
  return run(model, data, hp, Mode::kPerCandidate, nullptr, opts);
}

ObjectiveValue eval_grouped(const LinearModel& model, const Dataset& data,
                            const Hyperparams& hp, EvalOptions opts) {
  return run(model, data, hp, Mode::kGrouped, nullptr, opts);
}

ObjectiveValue eval_group_max(const LinearModel& model, const Dataset& data,
                              const Hyperparams& hp, EvalOptions opts) {
  return run(model, data, hp, Mode::kGroupMax, nullptr, opts);
}

GradientVector gradient_per_candidate(const LinearModel& model, const Dataset& data,
                                      const Hyperparams& hp, EvalOptions opts) {
  GradientVector g;
  run(model, data, hp, Mode::kPerCandidate, &g, opts);
  return g;
}

GradientVector subgradient_grouped(const LinearModel& model, const Dataset& data,
                                   const Hyperparams& hp, EvalOptions opts) {
  GradientVector g;
  run(model, data, hp, Mode::kGrouped, &g, opts);
  return g;
}

ObjectiveValue evaluate(const LinearModel& model, const Dataset& data,
                        const ObjectiveSpec& spec, GradientVector* grad, EvalOptions opts) {
  const Mode mode =
      spec.aggregation == Aggregation::kGrouped ? Mode::kGrouped : Mode::kPerCandidate;
  return run(model, data, spec.hyperparams, mode, grad, opts);
}

std::size_t negative_group_argmax(const LinearModel& model, const Dataset& data,
                                  const GroupBlock& group, double delta) {
  check_dims(model, data.dim());
  const double y = group.positive() ? 1.0 : -1.0;
  std::size_t best = group.begin;
  double best_loss = -1.0;
  for (std::size_t row = group.begin; row < group.end; ++row) {
    const double t = y * raw_score(model.w.data(), data.features(row).data(), data.dim(), model.b);
    const double loss = smoothed_hinge(t, delta);
    if (loss > best_loss) {
      best_loss = loss;
      best = row;
    }
  }
  return best;
}

ActiveSets active_sets(const LinearModel& model, const Dataset& data, const Hyperparams& hp,
                       Aggregation aggregation) {
  hp.validate();
  check_dims(model, data.dim());
  ActiveSets sets;
  auto classify = [&](std::size_t row) {
    const double t = soft_margin(model, data.features(row), candidate_label(data, row));
    if (t >= 1.0) return;
    if (t <= 1.0 - 2.0 * hp.delta) {
      sets.linear_set.push_back(row);
    } else {
      sets.quadratic_set.push_back(row);
    }
  };
  for (const GroupBlock& group : data.groups()) {
    if (group.positive() && aggregation == Aggregation::kGrouped) {
      classify(group.key_row);
    } else if (!group.positive() && aggregation == Aggregation::kGrouped) {
      classify(negative_group_argmax(model, data, group, hp.delta));
    } else {
      for (std::size_t row = group.begin; row < group.end; ++row) classify(row);
    }
  }
  std::sort(sets.linear_set.begin(), sets.linear_set.end());
  std::sort(sets.quadratic_set.begin(), sets.quadratic_set.end());
  return sets;
}

double group_loss(std::span<const double> margins, double delta, GroupReduction reduction) {
  if (margins.empty()) throw ConfigError("group_loss of an empty group");
  double acc = reduction == GroupReduction::kMax ? -1.0 : 0.0;
  for (double t : margins) {
    const double loss = smoothed_hinge(t, delta);
    acc = reduction == GroupReduction::kMax ? std::max(acc, loss) : acc + loss;
  }
  return reduction == GroupReduction::kMax ? acc : acc / static_cast<double>(margins.size());
}

ObjectiveValue eval_grouped_stream(const LinearModel& model, BinaryDatasetReader& reader,
                                   const Hyperparams& hp) {
  hp.validate();
  check_dims(model, reader.dim());
  Accumulator acc(model, hp.delta, Mode::kGrouped, false);
  GroupBuffer buffer;
  while (reader.next_group(buffer)) {
    acc.add_group(buffer.label, buffer.rows, buffer.key_offset == kNoKey ? 0 : buffer.key_offset,
                  buffer.features.data());
  }
  return finish(acc.partial(), model, hp, nullptr);
}

}  // namespace gcm
