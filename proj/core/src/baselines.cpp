#include "gcm/baselines.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gcm/error.hpp"
#include "gcm/training.hpp"

namespace gcm {

LinearModel train_svm_baseline(const Dataset& data, const Hyperparams& hp,
                               const SolverConfig& cfg, EvalOptions eval) {
  if (data.key_rows() == 0 || data.rows() == data.key_rows()) {
    throw ConfigError("SVM baseline needs both positive and negative candidates");
  }
  return train_objective(data, {hp, Aggregation::kPerCandidate}, cfg, eval).model;
}

void MiSvmConfig::validate() const {
  if (!(c_tradeoff > 0.0) || !std::isfinite(c_tradeoff)) {
    throw DomainError("MI-SVM C must be a finite value > 0");
  }
  if (!(inner_delta >= 0.0)) throw DomainError("MI-SVM inner delta must be >= 0");
  if (!(epsilon > 0.0)) throw DomainError("MI-SVM epsilon must be > 0");
  if (max_outer_iterations < 1) throw DomainError("MI-SVM needs at least one outer iteration");
  inner_solver.validate();
}

namespace {

// Inner training set: one (virtual or selected) key row per positive group,
// followed in group order by every row of each negative group.
// `positive_rows` holds one feature vector per positive group, in group order.
Dataset build_inner(const Dataset& data, const std::vector<double>& positive_rows) {
  const std::size_t d = data.dim();
  const std::size_t n = data.positive_groups() + data.negative_rows();
  std::vector<std::uint64_t> gids;
  std::vector<std::int8_t> labels;
  std::vector<std::uint8_t> keys;
  std::vector<double> features;
  gids.reserve(n);
  labels.reserve(n);
  keys.reserve(n);
  features.reserve(n * d);
  std::size_t pos_index = 0;
  for (const GroupBlock& group : data.groups()) {
    if (group.positive()) {
      gids.push_back(group.group_id);
      labels.push_back(1);
      keys.push_back(1);
      const double* row = positive_rows.data() + pos_index * d;
      features.insert(features.end(), row, row + d);
      ++pos_index;
    } else {
      const auto& all = data.feature_matrix();
      for (std::size_t r = group.begin; r < group.end; ++r) {
        gids.push_back(group.group_id);
        labels.push_back(-1);
        keys.push_back(0);
      }
      features.insert(features.end(), all.begin() + static_cast<std::ptrdiff_t>(group.begin * d),
                      all.begin() + static_cast<std::ptrdiff_t>(group.end * d));
    }
  }
  return Dataset(d, std::move(gids), std::move(labels), std::move(keys), std::move(features));
}

std::vector<double> group_means(const Dataset& data) {
  const std::size_t d = data.dim();
  std::vector<double> means;
  means.reserve(data.positive_groups() * d);
  for (const GroupBlock& group : data.groups()) {
    if (!group.positive()) continue;
    std::vector<double> acc(d, 0.0);
    for (std::size_t r = group.begin; r < group.end; ++r) {
      auto x = data.features(r);
      for (std::size_t j = 0; j < d; ++j) acc[j] += x[j];
    }
    for (double& v : acc) v /= static_cast<double>(group.size());
    means.insert(means.end(), acc.begin(), acc.end());
  }
  return means;
}

std::vector<double> selected_rows(const Dataset& data, const SelectorState& selector) {
  const std::size_t d = data.dim();
  std::vector<double> rows;
  rows.reserve(data.positive_groups() * d);
  for (const GroupBlock& group : data.groups()) {
    if (!group.positive()) continue;
    auto it = selector.selected_row_per_positive_group.find(group.group_id);
    if (it == selector.selected_row_per_positive_group.end()) {
      throw ConfigError("selector has no row for positive group " + std::to_string(group.group_id));
    }
    if (it->second < group.begin || it->second >= group.end) {
      throw ConfigError("selector row for group " + std::to_string(group.group_id) +
                        " lies outside the group");
    }
    auto x = data.features(it->second);
    rows.insert(rows.end(), x.begin(), x.end());
  }
  return rows;
}

}  // namespace

SelectorState select_max_margin(const LinearModel& model, const Dataset& data) {
  if (model.dim() != data.dim()) throw DimensionError(data.dim(), model.dim());
  SelectorState state;
  for (const GroupBlock& group : data.groups()) {
    if (!group.positive()) continue;
    std::size_t best = group.begin;
    double best_margin = model.score(data.features(group.begin));
    for (std::size_t r = group.begin + 1; r < group.end; ++r) {
      const double t = model.score(data.features(r));
      if (t > best_margin) {
        best_margin = t;
        best = r;
      }
    }
    state.selected_row_per_positive_group.emplace(group.group_id, best);
  }
  return state;
}

SelectorState key_selector(const Dataset& data) {
  SelectorState state;
  for (const GroupBlock& group : data.groups()) {
    if (group.positive()) state.selected_row_per_positive_group.emplace(group.group_id, group.key_row);
  }
  return state;
}

ObjectiveValue mi_svm_objective(const LinearModel& model, const Dataset& data,
                                const SelectorState& selector, const Hyperparams& hp) {
  return eval_per_candidate(model, build_inner(data, selected_rows(data, selector)), hp);
}

MiSvmResult train_mi_svm(const Dataset& data, const MiSvmConfig& cfg, EvalOptions eval,
                         const MiSvmObserver& observer) {
  cfg.validate();
  if (data.positive_groups() == 0) throw ConfigError("MI-SVM needs at least one positive group");
  if (data.negative_rows() == 0) throw ConfigError("MI-SVM needs negative candidates");
  const Hyperparams hp = cfg.hyperparams();
  const ObjectiveSpec spec{hp, Aggregation::kPerCandidate};

  MiSvmResult result;
  TrainResult inner = train_objective(build_inner(data, group_means(data)), spec, cfg.inner_solver, eval);
  result.outer_iterations = 1;
  SelectorState selector = select_max_margin(inner.model, data);
  if (observer) observer(result.outer_iterations, inner.model, selector);

  std::optional<SelectorState> previous;
  while (true) {
    if (previous && *previous == selector) {
      result.converged = true;
      break;
    }
    if (result.outer_iterations >= cfg.max_outer_iterations) break;
    previous = selector;
    inner = train_objective(build_inner(data, selected_rows(data, selector)), spec,
                            cfg.inner_solver, eval);
    ++result.outer_iterations;
    selector = select_max_margin(inner.model, data);
    if (observer) observer(result.outer_iterations, inner.model, selector);
  }

  result.model = std::move(inner.model);
  result.selector = std::move(selector);
  result.last_trace = std::move(inner.trace);
  return result;
}

}  // namespace gcm
