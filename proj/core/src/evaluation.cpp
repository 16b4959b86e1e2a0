#include "gcm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "gcm/error.hpp"
#include "gcm/random.hpp"

namespace gcm {

std::vector<ScoredGroup> score_groups(const LinearModel& model, const Dataset& data) {
  if (model.dim() != data.dim()) throw DimensionError(data.dim(), model.dim());
  std::vector<ScoredGroup> out;
  out.reserve(data.groups().size());
  for (const GroupBlock& group : data.groups()) {
    if (group.size() == 0) {
      throw DataError(DataErrorKind::kEmptyGroup, "cannot score an empty group", -1,
                      static_cast<std::int64_t>(group.group_id));
    }
    ScoredGroup sg{group.group_id, group.label, model.score(data.features(group.begin)), group.begin};
    for (std::size_t r = group.begin + 1; r < group.end; ++r) {
      const double s = model.score(data.features(r));
      if (s > sg.group_score) {
        sg.group_score = s;
        sg.argmax_row = r;
      }
    }
    out.push_back(sg);
  }
  return out;
}

RocCurve roc_auc(std::span<const ScoredLabel> scores) {
  std::size_t n_pos = 0;
  for (const auto& s : scores) {
    if (s.label > 0) ++n_pos;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ConfigError("ROC needs both positive and negative examples");

  std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0;
  std::size_t fp = 0;
  double area = 0.0;
  const double P = static_cast<double>(n_pos);
  const double N = static_cast<double>(n_neg);
  for (std::size_t i = 0; i < sorted.size();) {
    const double threshold = sorted[i].score;
    const std::size_t tp0 = tp;
    const std::size_t fp0 = fp;
    for (; i < sorted.size() && sorted[i].score == threshold; ++i) {
      if (sorted[i].label > 0) {
        ++tp;
      } else {
        ++fp;
      }
    }
    // Trapezoid in count units, normalized once at the end.
    area += static_cast<double>(fp - fp0) * 0.5 * static_cast<double>(tp + tp0);
    curve.points.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P, threshold});
  }
  curve.auc = area / (P * N);
  return curve;
}

EvalReport evaluate_model(const LinearModel& model, const Dataset& data) {
  if (model.dim() != data.dim()) throw DimensionError(data.dim(), model.dim());
  std::vector<ScoredLabel> rows;
  rows.reserve(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    rows.push_back({model.score(data.features(r)), candidate_label(data, r)});
  }
  std::vector<ScoredLabel> groups;
  for (const ScoredGroup& g : score_groups(model, data)) groups.push_back({g.group_score, g.label});

  EvalReport report;
  RocCurve c = roc_auc(rows);
  RocCurve g = roc_auc(groups);
  report.candidate_roc = std::move(c.points);
  report.candidate_auc = c.auc;
  report.group_roc = std::move(g.points);
  report.group_auc = g.auc;
  return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "level,fpr,tpr,threshold\n";
  auto dump = [&](const char* level, const std::vector<RocPoint>& roc) {
    for (const RocPoint& p : roc) {
      out << level << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
          << format_double(p.threshold) << '\n';
    }
  };
  dump("candidate", report.candidate_roc);
  dump("group", report.group_roc);
  out << "# summary candidate_auc=" << format_double(report.candidate_auc)
      << " group_auc=" << format_double(report.group_auc) << '\n';
}

void write_groups_csv(const std::vector<ScoredGroup>& groups, std::ostream& out) {
  out << "group_id,label,group_score,argmax_row\n";
  for (const ScoredGroup& g : groups) {
    out << g.group_id << ',' << (g.label > 0 ? "+1" : "-1") << ',' << format_double(g.group_score)
        << ',' << g.argmax_row << '\n';
  }
}

void CvPlan::validate() const {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (lambda_grid.empty()) throw ConfigError("lambda grid is empty");
  for (double l : lambda_grid) {
    if (!(l >= 0.0 && l <= 1.0)) throw DomainError("lambda grid values must lie in [0, 1]");
  }
}

std::vector<double> CvPlan::default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

std::vector<int> assign_folds(const Dataset& data, const CvPlan& plan) {
  plan.validate();
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t g = 0; g < data.groups().size(); ++g) {
    (data.groups()[g].positive() ? pos : neg).push_back(g);
  }
  Rng rng(plan.seed);
  rng.shuffle(std::span<std::size_t>(pos));
  rng.shuffle(std::span<std::size_t>(neg));
  std::vector<int> fold(data.groups().size(), 0);
  for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % plan.folds);
  for (std::size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<int>(i % plan.folds);
  return fold;
}

CvResult cross_validate(const Dataset& data, Algorithm algo, const CvPlan& plan, double epsilon,
                        double delta, const TrainOptions& opts) {
  plan.validate();
  const std::vector<int> fold_of = assign_folds(data, plan);

  std::vector<Dataset> train_sets;
  std::vector<Dataset> valid_sets;
  std::vector<bool> usable;
  CvResult result;
  for (int f = 0; f < plan.folds; ++f) {
    std::vector<std::size_t> tr;
    std::vector<std::size_t> va;
    for (std::size_t g = 0; g < fold_of.size(); ++g) (fold_of[g] == f ? va : tr).push_back(g);
    Dataset train_set = data.subset_groups(tr);
    Dataset valid_set = data.subset_groups(va);
    const bool ok = train_set.positive_groups() > 0 && train_set.negative_groups() > 0 &&
                    valid_set.positive_groups() > 0 && valid_set.negative_groups() > 0;
    if (!ok) {
      result.warnings.push_back("fold " + std::to_string(f) +
                                " lacks a class in its training or validation split; skipped");
    }
    usable.push_back(ok);
    train_sets.push_back(std::move(train_set));
    valid_sets.push_back(std::move(valid_set));
  }
  if (std::find(usable.begin(), usable.end(), true) == usable.end()) {
    throw ConfigError("every cross-validation fold lacks a class; use fewer folds or more groups");
  }

  result.selected_by_group_auc = algo == Algorithm::kGcm || algo == Algorithm::kMiSvm;
  double best = -1.0;
  for (double lambda : plan.lambda_grid) {
    const Hyperparams hp{lambda, epsilon, delta};
    double group_sum = 0.0;
    double cand_sum = 0.0;
    int used = 0;
    for (int f = 0; f < plan.folds; ++f) {
      if (!usable[static_cast<std::size_t>(f)]) continue;
      TrainResult trained = train(algo, train_sets[static_cast<std::size_t>(f)], hp, opts);
      EvalReport rep = evaluate_model(trained.model, valid_sets[static_cast<std::size_t>(f)]);
      group_sum += rep.group_auc;
      cand_sum += rep.candidate_auc;
      ++used;
    }
    const double mg = group_sum / used;
    const double mc = cand_sum / used;
    result.lambdas.push_back(lambda);
    result.mean_group_auc.push_back(mg);
    result.mean_candidate_auc.push_back(mc);
    result.folds_used.push_back(used);
    const double metric = result.selected_by_group_auc ? mg : mc;
    if (metric > best) {
      best = metric;
      result.best_lambda = lambda;
    }
  }
  return result;
}

}  // namespace gcm
