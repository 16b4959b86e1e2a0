#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gcm/model.hpp"

namespace gcm {

inline constexpr const char* kMonomialOrder = "graded-lexicographic";

struct ExpansionSpec {
  int degree = 1;
  std::optional<std::size_t> max_output_features;
};

// Number of monomials of total degree 1..degree in d variables,
// C(d + degree, degree) - 1. Saturates at SIZE_MAX on overflow.
std::size_t expanded_dimension(std::size_t d, int degree);

// Exponent vectors of every monomial of total degree 1..degree, in graded
// lexicographic order: by degree, then lexicographically descending in the
// exponents (x1^2, x1 x2, x2^2 for d = 2, degree 2). No constant term.
std::vector<std::vector<int>> monomial_exponents(std::size_t d, int degree);

class PolynomialExpansion {
 public:
  PolynomialExpansion(std::size_t input_dim, const ExpansionSpec& spec);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return monomials_.size(); }
  int degree() const noexcept { return degree_; }
  const std::vector<std::vector<int>>& monomials() const noexcept { return monomials_; }

  // Writes output_dim() values.
  void expand_row(std::span<const double> x, std::span<double> out) const;
  std::vector<double> expand_row(std::span<const double> x) const;

  // Group ids, labels and key flags are carried over unchanged.
  Dataset apply(const Dataset& data) const;

 private:
  std::size_t input_dim_;
  int degree_;
  std::vector<std::vector<int>> monomials_;
  // Monomial m is monomials_[parent_[m]] times x[factor_[m]], where the factor
  // is its last variable; degree-one terms have no parent.
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> factor_;
};

// Convenience wrapper. Throws ConfigError naming the required dimension if
// it exceeds spec.max_output_features.
Dataset expand(const Dataset& data, const ExpansionSpec& spec);

// Per-feature affine map x -> (x - offset) / scale. Fit it on the training
// split only and apply the same instance everywhere else.
struct AffineScaler {
  std::vector<double> offset;
  std::vector<double> scale;

  // Mean and standard deviation of each feature; constant features get
  // scale 1.
  static AffineScaler fit(const Dataset& data);

  bool empty() const noexcept { return offset.empty(); }
  void apply_row(std::span<double> x) const;
  Dataset apply(const Dataset& data) const;
};

}  // namespace gcm
