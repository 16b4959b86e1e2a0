#include "gcm/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "gcm/error.hpp"
#include "gcm/random.hpp"
#include "test_util.hpp"

namespace {

// Counts exponent vectors with total degree 1..deg by brute-force enumeration.
std::size_t enumerate_monomials(std::size_t d, int deg) {
  std::size_t count = 0;
  std::vector<int> e(d, 0);
  while (true) {
    int total = 0;
    for (int v : e) total += v;
    if (total >= 1 && total <= deg) ++count;
    std::size_t i = 0;
    while (i < d && e[i] == deg) e[i++] = 0;
    if (i == d) break;
    ++e[i];
  }
  return count;
}

double eval_monomial(const std::vector<int>& exps, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t j = 0; j < exps.size(); ++j) v *= std::pow(x[j], exps[j]);
  return v;
}

TEST(Expansion, TwoVariablesDegreeThree) {
  EXPECT_EQ(gcm::expanded_dimension(2, 3), 9u);
  const auto m = gcm::monomial_exponents(2, 3);
  ASSERT_EQ(m.size(), 9u);
  const std::vector<std::vector<int>> expected = {{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2},
                                                  {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  EXPECT_EQ(m, expected);
  gcm::PolynomialExpansion exp(2, {3, std::nullopt});
  const std::vector<double> x = {2.0, 3.0};
  const std::vector<double> want = {2, 3, 4, 6, 9, 8, 12, 18, 27};
  EXPECT_EQ(exp.expand_row(x), want);
}

TEST(Expansion, CountMatchesEnumeration) {
  for (std::size_t d = 1; d <= 6; ++d) {
    for (int deg = 1; deg <= 4; ++deg) {
      EXPECT_EQ(gcm::expanded_dimension(d, deg), enumerate_monomials(d, deg)) << d << "," << deg;
      const auto m = gcm::monomial_exponents(d, deg);
      EXPECT_EQ(m.size(), enumerate_monomials(d, deg));
      EXPECT_EQ(std::set<std::vector<int>>(m.begin(), m.end()).size(), m.size());
    }
  }
}

TEST(Expansion, DegreeOneIsIdentity) {
  const gcm::Dataset data = gcm::test::random_grouped(31, 4, 3, 5, 4);
  const gcm::Dataset out = gcm::expand(data, {1, std::nullopt});
  EXPECT_EQ(out.dim(), data.dim());
  EXPECT_EQ(out.feature_matrix(), data.feature_matrix());
  EXPECT_EQ(out.group_ids(), data.group_ids());
  EXPECT_EQ(out.keys(), data.keys());
}

TEST(Expansion, RowwiseSoCommutesWithPermutation) {
  gcm::Rng rng(32);
  gcm::PolynomialExpansion exp(3, {3, std::nullopt});
  std::vector<std::vector<double>> rows(10);
  for (auto& r : rows) r = {rng.normal(), rng.normal(), rng.normal()};
  std::vector<std::vector<double>> expanded;
  for (const auto& r : rows) expanded.push_back(exp.expand_row(r));
  std::vector<std::size_t> perm(rows.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(std::span<std::size_t>(perm));
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(exp.expand_row(rows[perm[i]]), expanded[perm[i]]);
}

TEST(Expansion, LinearScoreEqualsPolynomial) {
  gcm::Rng rng(33);
  gcm::PolynomialExpansion exp(3, {3, std::nullopt});
  const auto& monos = exp.monomials();
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
    const gcm::LinearModel m = gcm::test::random_model(rng, exp.output_dim());
    double direct = m.b;
    for (std::size_t k = 0; k < monos.size(); ++k) direct += m.w[static_cast<Eigen::Index>(k)] * eval_monomial(monos[k], x);
    EXPECT_NEAR(m.score(exp.expand_row(x)), direct, 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST(Expansion, CapNamesRequiredDimension) {
  const gcm::Dataset data = gcm::test::random_grouped(34, 13, 2, 2, 3);
  try {
    gcm::expand(data, {3, 100});
    FAIL();
  } catch (const gcm::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(gcm::expanded_dimension(13, 3))), std::string::npos);
  }
  EXPECT_NO_THROW(gcm::expand(data, {2, 104}));
}

TEST(Expansion, InvalidDegree) {
  EXPECT_ANY_THROW(gcm::PolynomialExpansion(2, {0, std::nullopt}));
}

TEST(AffineScaler, StandardizesTrainingData) {
  const gcm::Dataset data = gcm::test::random_grouped(35, 3, 10, 10, 6, 4.0);
  const gcm::AffineScaler s = gcm::AffineScaler::fit(data);
  const gcm::Dataset out = s.apply(data);
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0;
    double sq = 0.0;
    for (std::size_t r = 0; r < out.rows(); ++r) mean += out.features(r)[j];
    mean /= static_cast<double>(out.rows());
    for (std::size_t r = 0; r < out.rows(); ++r) sq += std::pow(out.features(r)[j] - mean, 2);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq / static_cast<double>(out.rows()), 1.0, 1e-9);
  }
}

TEST(AffineScaler, ConstantFeatureKeepsUnitScale) {
  const gcm::Dataset data = gcm::Dataset::from_candidates(
      2, {gcm::Candidate{0, 1, true, {5.0, 1.0}}, gcm::Candidate{1, -1, false, {5.0, 3.0}}});
  const gcm::AffineScaler s = gcm::AffineScaler::fit(data);
  EXPECT_EQ(s.scale[0], 1.0);
  EXPECT_EQ(s.apply(data).features(0)[0], 0.0);
}

}  // namespace
