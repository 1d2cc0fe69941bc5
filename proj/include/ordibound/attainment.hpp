#pragma once

// Explicit construction of a coupling whose relative treatment effect equals
// the closed-form upper bound, plus the post-hoc validation of such a matrix.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ordibound/core_bounds.hpp"

namespace ordibound {

// n x n lower-triangular nonnegative matrix, row-major.
struct TriangularFill {
  std::size_t n = 0;
  std::vector<double> matrix;
  // Variant A: unused row capacity x_k - row_k. Variant B: unused column capacity.
  std::vector<double> slack;

  double at(std::size_t k, std::size_t l) const { return matrix[k * n + l]; }
};

// Column sums exactly y, row sums at most x. Requires the suffix sums of x
// to dominate those of y.
TriangularFill triangular_fill_a(std::span<const double> x, std::span<const double> y);

// Row sums exactly x, column sums at most y. Requires the prefix sums of y
// to dominate those of x.
TriangularFill triangular_fill_b(std::span<const double> x, std::span<const double> y);

namespace detail {
// Exact feasibility solve used when the greedy fill leaves demand unmet.
// `exact_cols` selects variant A (exact columns) or B (exact rows).
TriangularFill triangular_fill_lp(std::span<const double> x, std::span<const double> y, bool exact_cols);
}  // namespace detail

struct AttainmentPlan {
  int j1 = 1;
  int m1 = 1;
  double lambda1 = 0.0;
  std::vector<double> q_row_adjusted;  // treated masses after the lambda1 shift
  std::vector<double> q_col_adjusted;  // control masses after the lambda1 shift
  double leftover_mass = 0.0;          // filled in by the construction
};

AttainmentPlan build_plan(const MarginalDistribution& p1, const MarginalDistribution& p0);

struct Attainment {
  AttainmentPlan plan;
  JointMatrix matrix;
};

// Throws ConstructionInvalid if the result fails validate_attainment.
Attainment attain_upper_bound(const MarginalDistribution& p1, const MarginalDistribution& p0);

JointMatrix construct_attaining_matrix(const MarginalDistribution& p1, const MarginalDistribution& p0);

// Attains the lower bound: construct for the swapped arms and transpose.
JointMatrix construct_lower_attaining_matrix(const MarginalDistribution& p1,
                                             const MarginalDistribution& p0);

struct ValidationReport {
  bool nonnegative = false;
  bool rows_match = false;
  bool cols_match = false;
  bool gamma_matches = false;
  double min_entry = 0.0;
  double max_row_deviation = 0.0;
  double max_col_deviation = 0.0;
  double gamma = 0.0;
  double gamma_deviation = 0.0;

  bool ok() const { return nonnegative && rows_match && cols_match && gamma_matches; }
  // Human-readable name of the first failed check, empty when ok().
  std::string first_failure() const;
};

ValidationReport validate_attainment(const JointMatrix& P, const MarginalDistribution& p1,
                                     const MarginalDistribution& p0, double expected_gamma);

}  // namespace ordibound
