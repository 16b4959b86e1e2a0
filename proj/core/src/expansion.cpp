#include "gcm/expansion.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "gcm/error.hpp"

namespace gcm {

std::size_t expanded_dimension(std::size_t d, int degree) {
  if (degree < 1) throw DomainError("expansion degree must be >= 1");
  // C(d + k, k) built up as a running product; each partial value is itself
  // a binomial coefficient, so the division is exact.
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t c = 1;
  for (std::size_t i = 1; i <= static_cast<std::size_t>(degree); ++i) {
    const std::size_t factor = d + i;
    if (c > kMax / factor) return kMax;
    c = c * factor / i;
  }
  return c - 1;
}

namespace {

constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

void enumerate(std::size_t var, int remaining, std::vector<int>& current,
               std::vector<std::vector<int>>& out) {
  if (var + 1 == current.size()) {
    current[var] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate(var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

}  // namespace

std::vector<std::vector<int>> monomial_exponents(std::size_t d, int degree) {
  if (degree < 1) throw DomainError("expansion degree must be >= 1");
  std::vector<std::vector<int>> out;
  if (d == 0) return out;
  std::vector<int> current(d, 0);
  for (int k = 1; k <= degree; ++k) enumerate(0, k, current, out);
  return out;
}

PolynomialExpansion::PolynomialExpansion(std::size_t input_dim, const ExpansionSpec& spec)
    : input_dim_(input_dim), degree_(spec.degree) {
  const std::size_t required = expanded_dimension(input_dim, spec.degree);
  if (spec.max_output_features && required > *spec.max_output_features) {
    throw ConfigError("polynomial expansion of " + std::to_string(input_dim) +
                      " features to degree " + std::to_string(spec.degree) + " needs " +
                      std::to_string(required) + " output features, above the cap of " +
                      std::to_string(*spec.max_output_features));
  }
  monomials_ = monomial_exponents(input_dim, spec.degree);
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t m = 0; m < monomials_.size(); ++m) index.emplace(monomials_[m], m);
  parent_.assign(monomials_.size(), kNoParent);
  factor_.assign(monomials_.size(), 0);
  for (std::size_t m = 0; m < monomials_.size(); ++m) {
    std::vector<int> e = monomials_[m];
    std::size_t last = e.size();
    while (e[last - 1] == 0) --last;
    factor_[m] = last - 1;
    --e[last - 1];
    if (auto it = index.find(e); it != index.end()) parent_[m] = it->second;
  }
}

void PolynomialExpansion::expand_row(std::span<const double> x, std::span<double> out) const {
  if (x.size() != input_dim_) throw DimensionError(input_dim_, x.size());
  if (out.size() != monomials_.size()) throw DimensionError(monomials_.size(), out.size());
  // Parents precede their children in graded order, so one pass suffices.
  for (std::size_t m = 0; m < monomials_.size(); ++m) {
    const double f = x[factor_[m]];
    out[m] = parent_[m] == kNoParent ? f : out[parent_[m]] * f;
  }
}

std::vector<double> PolynomialExpansion::expand_row(std::span<const double> x) const {
  std::vector<double> out(monomials_.size());
  expand_row(x, out);
  return out;
}

Dataset PolynomialExpansion::apply(const Dataset& data) const {
  if (data.dim() != input_dim_) throw DimensionError(input_dim_, data.dim());
  const std::size_t out_dim = output_dim();
  std::vector<double> features(data.rows() * out_dim);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    expand_row(data.features(r), std::span<double>(features.data() + r * out_dim, out_dim));
  }
  return data.with_features(out_dim, std::move(features));
}

Dataset expand(const Dataset& data, const ExpansionSpec& spec) {
  return PolynomialExpansion(data.dim(), spec).apply(data);
}

AffineScaler AffineScaler::fit(const Dataset& data) {
  const std::size_t d = data.dim();
  AffineScaler s;
  s.offset.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  if (data.rows() == 0) return s;
  const double n = static_cast<double>(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto x = data.features(r);
    for (std::size_t j = 0; j < d; ++j) s.offset[j] += x[j];
  }
  for (double& m : s.offset) m /= n;
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto x = data.features(r);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x[j] - s.offset[j];
      var[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

void AffineScaler::apply_row(std::span<double> x) const {
  if (x.size() != offset.size()) throw DimensionError(offset.size(), x.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - offset[j]) / scale[j];
}

Dataset AffineScaler::apply(const Dataset& data) const {
  if (data.dim() != offset.size()) throw DimensionError(offset.size(), data.dim());
  std::vector<double> features = data.feature_matrix();
  const std::size_t d = data.dim();
  for (std::size_t r = 0; r < data.rows(); ++r) {
    apply_row(std::span<double>(features.data() + r * d, d));
  }
  return data.with_features(d, std::move(features));
}

}  // namespace gcm
