#include "gcm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "gcm/baselines.hpp"
#include "gcm/error.hpp"
#include "gcm/random.hpp"
#include "test_util.hpp"

namespace {

using gcm::Candidate;
using gcm::Dataset;
using gcm::LinearModel;
using gcm::ScoredLabel;

// Probability that a random positive outscores a random negative, ties
// counted as one half.
double pair_count_auc(const std::vector<ScoredLabel>& s) {
  double wins = 0.0;
  double pairs = 0.0;
  for (const auto& p : s) {
    if (p.label < 0) continue;
    for (const auto& n : s) {
      if (n.label > 0) continue;
      pairs += 1.0;
      if (p.score > n.score) wins += 1.0;
      else if (p.score == n.score) wins += 0.5;
    }
  }
  return wins / pairs;
}

std::vector<ScoredLabel> random_scores(gcm::Rng& rng, int n, bool coarse) {
  std::vector<ScoredLabel> s;
  for (int i = 0; i < n; ++i) {
    const int label = i % 3 == 0 ? 1 : -1;
    double v = rng.normal() + (label > 0 ? 0.7 : 0.0);
    if (coarse) v = std::round(v * 2.0);
    s.push_back({v, label});
  }
  return s;
}

TEST(GroupScore, MaxOverRows) {
  // Scores -1.0, 0.3, 2.2, -0.7 with w = 1, b = 0.
  const Dataset data = Dataset::from_candidates(
      1, {Candidate{4, 1, true, {-1.0}}, Candidate{4, 1, false, {0.3}}, Candidate{4, 1, false, {2.2}},
          Candidate{4, 1, false, {-0.7}}});
  const LinearModel m(Eigen::VectorXd::Ones(1), 0.0);
  const auto g = gcm::score_groups(m, data);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].group_score, 2.2);
  EXPECT_EQ(g[0].argmax_row, 2u);
  EXPECT_EQ(g[0].group_id, 4u);
}

TEST(GroupScore, MatchesNaiveMaxAndIgnoresNonArgmaxRows) {
  const Dataset data = gcm::test::random_grouped(41, 3, 8, 12, 9);
  gcm::Rng rng(42);
  const LinearModel m = gcm::test::random_model(rng, 3);
  const auto scored = gcm::score_groups(m, data);
  for (std::size_t gi = 0; gi < data.groups().size(); ++gi) {
    const auto& g = data.groups()[gi];
    double best = -INFINITY;
    for (std::size_t r = g.begin; r < g.end; ++r) best = std::max(best, m.score(data.features(r)));
    EXPECT_EQ(scored[gi].group_score, best);
  }
  // Drop one non-argmax, non-key row from every group that has one.
  std::vector<Candidate> kept;
  for (std::size_t gi = 0; gi < data.groups().size(); ++gi) {
    const auto& g = data.groups()[gi];
    bool dropped = false;
    for (std::size_t r = g.begin; r < g.end; ++r) {
      if (!dropped && r != scored[gi].argmax_row && !data.is_key(r)) {
        dropped = true;
        continue;
      }
      kept.push_back(data.candidate(r));
    }
  }
  const auto after = gcm::score_groups(m, Dataset::from_candidates(3, kept));
  for (std::size_t gi = 0; gi < scored.size(); ++gi) EXPECT_EQ(after[gi].group_score, scored[gi].group_score);
}

TEST(Roc, AucEqualsPairCounting) {
  gcm::Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_scores(rng, 60, trial % 2 == 0);
    EXPECT_NEAR(gcm::roc_auc(s).auc, pair_count_auc(s), 1e-12);
  }
}

TEST(Roc, ExtremeCases) {
  const std::vector<ScoredLabel> separated = {{3.0, 1}, {2.0, 1}, {1.0, -1}, {0.0, -1}};
  EXPECT_EQ(gcm::roc_auc(separated).auc, 1.0);
  const std::vector<ScoredLabel> tied = {{1.0, 1}, {1.0, -1}, {1.0, 1}, {1.0, -1}};
  const auto r = gcm::roc_auc(tied);
  EXPECT_EQ(r.auc, 0.5);
  EXPECT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.points.front().fpr, 0.0);
  EXPECT_EQ(r.points.back().tpr, 1.0);
  EXPECT_TRUE(std::isinf(r.points.front().threshold));
}

TEST(Roc, InvariantUnderMonotoneTransform) {
  gcm::Rng rng(44);
  auto s = random_scores(rng, 80, true);
  const double base = gcm::roc_auc(s).auc;
  for (auto& p : s) p.score = std::exp(0.5 * p.score) + 3.0;
  EXPECT_EQ(gcm::roc_auc(s).auc, base);
}

TEST(Roc, SingleClassIsConfigError) {
  const std::vector<ScoredLabel> s = {{1.0, 1}, {2.0, 1}};
  EXPECT_THROW(gcm::roc_auc(s), gcm::ConfigError);
}

TEST(EvaluateModel, PerfectSeparation) {
  const Dataset data = Dataset::from_candidates(
      1, {Candidate{0, 1, true, {5.0}}, Candidate{0, 1, false, {-3.0}}, Candidate{1, -1, false, {-1.0}},
          Candidate{2, -1, false, {0.0}}});
  const auto rep = gcm::evaluate_model(LinearModel(Eigen::VectorXd::Ones(1), 0.0), data);
  EXPECT_EQ(rep.group_auc, 1.0);
  // The key outscores every other row, including the non-key row at -3.
  EXPECT_EQ(rep.candidate_auc, 1.0);
}

TEST(Folds, GroupsNeverSplitAndClassesBalanced) {
  const Dataset data = gcm::test::random_grouped(45, 2, 23, 41, 5);
  for (int folds : {2, 3, 5, 7}) {
    gcm::CvPlan plan;
    plan.folds = folds;
    plan.seed = 46;
    const auto f = gcm::assign_folds(data, plan);
    ASSERT_EQ(f.size(), data.groups().size());
    std::vector<int> pos(folds, 0), neg(folds, 0);
    for (std::size_t gi = 0; gi < f.size(); ++gi) {
      ASSERT_GE(f[gi], 0);
      ASSERT_LT(f[gi], folds);
      (data.groups()[gi].positive() ? pos : neg)[f[gi]]++;
    }
    EXPECT_LE(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()), 1);
    EXPECT_LE(*std::max_element(neg.begin(), neg.end()) - *std::min_element(neg.begin(), neg.end()), 1);
    // Training and validation splits share no group id.
    for (int k = 0; k < folds; ++k) {
      std::set<std::uint64_t> train_ids, val_ids;
      for (std::size_t gi = 0; gi < f.size(); ++gi) (f[gi] == k ? val_ids : train_ids).insert(data.groups()[gi].group_id);
      for (auto id : val_ids) EXPECT_EQ(train_ids.count(id), 0u);
    }
  }
}

TEST(CrossValidation, PlanValidation) {
  gcm::CvPlan plan;
  plan.folds = 1;
  EXPECT_THROW(plan.validate(), gcm::ConfigError);
  plan = {};
  plan.lambda_grid.clear();
  EXPECT_THROW(plan.validate(), gcm::ConfigError);
  EXPECT_EQ(gcm::CvPlan::default_lambda_grid().size(), 19u);
}

TEST(CrossValidation, DeterministicAndSingleGridPoint) {
  const Dataset data = gcm::test::random_grouped(47, 3, 20, 30, 6, 1.5);
  gcm::CvPlan plan;
  plan.folds = 3;
  plan.seed = 48;
  plan.lambda_grid = {0.2, 0.6};
  const auto a = gcm::cross_validate(data, gcm::Algorithm::kGcm, plan, 1.0, 0.5);
  const auto b = gcm::cross_validate(data, gcm::Algorithm::kGcm, plan, 1.0, 0.5);
  EXPECT_EQ(a.best_lambda, b.best_lambda);
  EXPECT_EQ(a.mean_group_auc, b.mean_group_auc);
  EXPECT_EQ(a.mean_candidate_auc, b.mean_candidate_auc);
  EXPECT_TRUE(a.selected_by_group_auc);

  plan.lambda_grid = {0.3};
  const auto single = gcm::cross_validate(data, gcm::Algorithm::kSvm, plan, gcm::kSvmEpsilon, 0.0);
  EXPECT_EQ(single.best_lambda, 0.3);
  EXPECT_FALSE(single.selected_by_group_auc);
}

TEST(CrossValidation, LabelNoisePrefersRegularization) {
  // Few noisy singletons in many dimensions: a weak penalty overfits.
  gcm::Rng rng(49);
  std::vector<Candidate> rows;
  for (std::uint64_t i = 0; i < 80; ++i) {
    int label = i % 2 == 0 ? 1 : -1;
    std::vector<double> x;
    for (int j = 0; j < 30; ++j) x.push_back(rng.normal() + (j == 0 ? 0.8 * label : 0.0));
    if (rng.bernoulli(0.25)) label = -label;
    rows.push_back({i, label, label > 0, x});
  }
  const Dataset data = Dataset::from_candidates(30, rows);
  gcm::CvPlan plan;
  plan.folds = 4;
  plan.seed = 50;
  plan.lambda_grid = {0.05, 0.3, 0.6, 0.999};
  const auto r = gcm::cross_validate(data, gcm::Algorithm::kGcmNoGroup, plan, 1.0, 0.5);
  EXPECT_LT(r.best_lambda, 0.999);
}

TEST(Reports, CsvLayoutAndDeterminism) {
  const Dataset data = gcm::test::random_grouped(51, 2, 5, 7, 4);
  gcm::Rng rng(52);
  const LinearModel m = gcm::test::random_model(rng, 2);
  const auto rep = gcm::evaluate_model(m, data);
  std::ostringstream a, b, g;
  gcm::write_report_csv(rep, a);
  gcm::write_report_csv(gcm::evaluate_model(m, data), b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().rfind("level,fpr,tpr,threshold\n", 0), 0u);
  EXPECT_NE(a.str().find("# summary"), std::string::npos);
  const std::string text = a.str();
  const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  EXPECT_EQ(lines, 2 + rep.candidate_roc.size() + rep.group_roc.size());

  gcm::write_groups_csv(gcm::score_groups(m, data), g);
  EXPECT_EQ(g.str().rfind("group_id,label,group_score,argmax_row\n", 0), 0u);
  const std::string groups = g.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(groups.begin(), groups.end(), '\n')), 1 + data.groups().size());
}

}  // namespace
