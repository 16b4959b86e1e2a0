#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gcm/format.hpp"
#include "gcm/model.hpp"
#include "gcm/training.hpp"

namespace gcm {

struct ScoredGroup {
  std::uint64_t group_id = 0;
  int label = -1;
  double group_score = 0.0;  // max raw score w'x + b over the group
  std::size_t argmax_row = 0;
};

// Per group, the maximal raw score and the first row attaining it.
std::vector<ScoredGroup> score_groups(const LinearModel& model, const Dataset& data);

struct ScoredLabel {
  double score;
  int label;  // +1 / -1
};

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;  // points predict positive for score >= threshold
};

struct RocCurve {
  std::vector<RocPoint> points;  // starts at (0, 0, +inf), ends at (1, 1)
  double auc = 0.0;
};

// Thresholds sweep the distinct scores in descending order; rows sharing a
// score cross the threshold together, so a tie block contributes a diagonal
// segment. AUC is the trapezoid area under the full curve. Throws
// ConfigError unless both labels are present.
RocCurve roc_auc(std::span<const ScoredLabel> scores);

struct EvalReport {
  std::vector<RocPoint> candidate_roc;
  double candidate_auc = 0.0;
  std::vector<RocPoint> group_roc;
  double group_auc = 0.0;
};

// Candidate level: every row scored, key rows are the positives. Group
// level: group score is the max over the group's rows, group label decides.
EvalReport evaluate_model(const LinearModel& model, const Dataset& data);

// CSV with header `level,fpr,tpr,threshold`, one line per ROC point, then a
// `# summary` line with both AUCs. Numbers use shortest round-trip form.
void write_report_csv(const EvalReport& report, std::ostream& out);

// CSV with header `group_id,label,group_score,argmax_row`.
void write_groups_csv(const std::vector<ScoredGroup>& groups, std::ostream& out);

struct CvPlan {
  int folds = 5;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::uint64_t seed = 0;

  void validate() const;
  // 0.05, 0.10, ..., 0.95
  static std::vector<double> default_lambda_grid();
};

// Fold index of every group (indexed like data.groups()). Positive and
// negative groups are shuffled separately and dealt round-robin, so each
// fold's class counts differ by at most one across folds. Groups are never
// split.
std::vector<int> assign_folds(const Dataset& data, const CvPlan& plan);

struct CvResult {
  double best_lambda = 0.0;
  std::vector<double> lambdas;
  std::vector<double> mean_group_auc;      // per lambda
  std::vector<double> mean_candidate_auc;  // per lambda
  std::vector<int> folds_used;             // per lambda
  bool selected_by_group_auc = true;
  std::vector<std::string> warnings;
};

// Grid search over lambda with epsilon and delta fixed. The selection metric
// is group AUC for the grouped algorithms (gcm, misvm) and candidate AUC for
// per-candidate training (gcm-nogroup, svm); both are reported. A fold whose
// training or validation split lacks a class is skipped with a warning; if
// every fold is skipped, ConfigError. Ties go to the earlier grid entry.
CvResult cross_validate(const Dataset& data, Algorithm algo, const CvPlan& plan, double epsilon,
                        double delta, const TrainOptions& opts = {});

}  // namespace gcm
