#include "gcm/baselines.hpp"

#include <gtest/gtest.h>

#include "gcm/error.hpp"
#include "gcm/evaluation.hpp"
#include "gcm/generator.hpp"
#include "gcm/random.hpp"
#include "gcm/training.hpp"
#include "test_util.hpp"

namespace {

using gcm::Candidate;
using gcm::Dataset;
using gcm::LinearModel;

TEST(SvmBaseline, SeparableBlobs) {
  const Dataset data = gcm::test::random_singletons(90, 2, 40, 3.0);
  const LinearModel m = gcm::train_svm_baseline(data, gcm::svm_hyperparams(0.9));
  for (std::size_t r = 0; r < data.rows(); ++r) {
    EXPECT_GT(gcm::candidate_label(data, r) * m.score(data.features(r)), 0.0) << "row " << r;
  }
}

TEST(SvmBaseline, SymmetricPairHasZeroBias) {
  const Dataset data = Dataset::from_candidates(
      2, {Candidate{0, 1, true, {1.0, 0.0}}, Candidate{1, -1, false, {-1.0, 0.0}}});
  const LinearModel m = gcm::train_svm_baseline(data, {0.5, 1.0, 0.0});
  EXPECT_GT(m.w[0], 0.0);
  EXPECT_LE(std::abs(m.b), 1e-6);
}

TEST(SvmBaseline, BeatsRandomProbes) {
  const Dataset data = gcm::test::random_grouped(91, 4, 10, 20, 6);
  const gcm::Hyperparams hp = gcm::svm_hyperparams(0.5);
  const LinearModel m = gcm::train_svm_baseline(data, hp);
  const double best = gcm::eval_per_candidate(m, data, hp).total;
  gcm::Rng rng(92);
  for (int i = 0; i < 1000; ++i) {
    const LinearModel probe = gcm::test::random_model(rng, 4, 0.5 + 2.0 * rng.uniform());
    EXPECT_LE(best, gcm::eval_per_candidate(probe, data, hp).total + 1e-9);
  }
}

TEST(SvmBaseline, EmptyClassIsConfigError) {
  const Dataset data = Dataset::from_candidates(1, {Candidate{0, -1, false, {1.0}}});
  EXPECT_THROW(gcm::train_svm_baseline(data, gcm::svm_hyperparams(0.5)), gcm::ConfigError);
}

TEST(MiSvm, SingletonPositivesMatchBaseline) {
  const Dataset data = gcm::test::random_singletons(93, 3, 60, 1.0);
  gcm::MiSvmConfig cfg;
  cfg.c_tradeoff = 1.0;
  const auto r = gcm::train_mi_svm(data, cfg);
  EXPECT_LE(r.outer_iterations, 2);
  EXPECT_TRUE(r.converged);
  const LinearModel svm = gcm::train_svm_baseline(data, cfg.hyperparams());
  EXPECT_LE((r.model.pack() - svm.pack()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(MiSvm, ReachesFixedPointAndSelectorsAreArgmax) {
  const Dataset data = gcm::test::random_grouped(94, 4, 5, 5, 12, 2.0);
  gcm::MiSvmConfig cfg;
  int calls = 0;
  const auto r = gcm::train_mi_svm(data, cfg, {}, [&](int outer, const LinearModel& m, const gcm::SelectorState& s) {
    ++calls;
    EXPECT_EQ(outer, calls);
    for (const auto& g : data.groups()) {
      if (!g.positive()) continue;
      const std::size_t row = s.selected_row_per_positive_group.at(g.group_id);
      ASSERT_GE(row, g.begin);
      ASSERT_LT(row, g.end);
      for (std::size_t other = g.begin; other < g.end; ++other) {
        EXPECT_GE(m.score(data.features(row)), m.score(data.features(other)));
      }
    }
  });
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.outer_iterations, 50);
  EXPECT_EQ(calls, r.outer_iterations);
  EXPECT_EQ(r.selector, gcm::select_max_margin(r.model, data));
}

TEST(MiSvm, KeySelectorObjectiveMatchesGrouped) {
  // Negative groups are singletons, so the grouped max is the row itself.
  gcm::Rng rng(95);
  std::vector<Candidate> rows;
  for (std::uint64_t g = 0; g < 6; ++g) {
    for (int r = 0; r < 4; ++r) rows.push_back({g, 1, r == 2, {rng.normal(), rng.normal()}});
  }
  for (std::uint64_t g = 6; g < 20; ++g) rows.push_back({g, -1, false, {rng.normal(), rng.normal()}});
  const Dataset data = Dataset::from_candidates(2, rows);
  for (int trial = 0; trial < 20; ++trial) {
    const LinearModel m = gcm::test::random_model(rng, 2);
    const gcm::Hyperparams hp{rng.uniform(), 0.5 + rng.uniform(), trial % 2 == 0 ? 0.0 : 0.5};
    EXPECT_NEAR(gcm::mi_svm_objective(m, data, gcm::key_selector(data), hp).total,
                gcm::eval_grouped(m, data, hp).total, 1e-9);
  }
}

TEST(MiSvm, MinorityKeysFavourGcm) {
  gcm::GeneratorSpec spec;
  spec.n_pos_groups = 40;
  spec.n_neg_groups = 400;
  spec.min_candidates = 150;
  spec.max_candidates = 250;
  spec.key_shift = 1.6;
  spec.seed = 96;
  const Dataset train = gcm::generate(spec);
  spec.seed = 97;
  const Dataset test = gcm::generate(spec);
  const auto mi = gcm::train_mi_svm(train, {});
  const auto gcm_model = gcm::train_gcm(train, {0.5, 1.0, 0.5}).model;
  EXPECT_LE(gcm::evaluate_model(mi.model, test).group_auc, gcm::evaluate_model(gcm_model, test).group_auc);
}

TEST(MiSvm, Errors) {
  const Dataset no_pos = Dataset::from_candidates(1, {Candidate{0, -1, false, {1.0}}});
  EXPECT_THROW(gcm::train_mi_svm(no_pos, {}), gcm::ConfigError);
  gcm::MiSvmConfig bad;
  bad.c_tradeoff = 0.0;
  EXPECT_THROW(bad.validate(), gcm::DomainError);
  bad = {};
  bad.max_outer_iterations = 0;
  EXPECT_THROW(bad.validate(), gcm::DomainError);
}

TEST(MiSvm, TradeoffMapping) {
  gcm::MiSvmConfig cfg;
  cfg.c_tradeoff = 3.0;
  EXPECT_DOUBLE_EQ(cfg.lambda(), 0.75);
  EXPECT_EQ(cfg.hyperparams().epsilon, gcm::kSvmEpsilon);
  EXPECT_EQ(cfg.hyperparams().delta, 0.0);
}

TEST(Training, DispatchAndNames) {
  EXPECT_EQ(gcm::parse_algorithm("gcm"), gcm::Algorithm::kGcm);
  EXPECT_EQ(gcm::parse_algorithm("gcm-nogroup"), gcm::Algorithm::kGcmNoGroup);
  EXPECT_EQ(gcm::parse_algorithm("svm"), gcm::Algorithm::kSvm);
  EXPECT_EQ(gcm::parse_algorithm("misvm"), gcm::Algorithm::kMiSvm);
  EXPECT_THROW(gcm::parse_algorithm("svm2"), gcm::ConfigError);
  for (auto a : {gcm::Algorithm::kGcm, gcm::Algorithm::kGcmNoGroup, gcm::Algorithm::kSvm, gcm::Algorithm::kMiSvm}) {
    EXPECT_EQ(gcm::parse_algorithm(gcm::to_string(a)), a);
  }
  const Dataset data = gcm::test::random_grouped(98, 3, 6, 10, 5);
  EXPECT_THROW(gcm::train(gcm::Algorithm::kMiSvm, data, {1.0, 10.0, 0.0}), gcm::ConfigError);
  const auto r = gcm::train(gcm::Algorithm::kGcm, data, {1.0, 1.0, 0.5});
  EXPECT_FALSE(r.warnings.empty());
}

}  // namespace
