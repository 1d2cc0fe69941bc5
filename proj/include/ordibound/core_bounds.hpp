#pragma once

// Closed-form sharp bounds on the relative treatment effect
//
//   gamma = pr{Y(1) > Y(0)} - pr{Y(1) < Y(0)}
//
// for an ordinal outcome with categories 0..J-1, given only the two
// marginal distributions p1 (treated, row sums of P) and p0 (control,
// column sums of P).

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ordibound {

inline constexpr double kValidationTolerance = 1e-6;
inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kOracleTolerance = 1e-9;
// Two table entries closer than this are the same extremum.
inline constexpr double kTieTolerance = 1e-13;

class MarginalDistribution {
 public:
  // Unchecked; prefer validate_marginal().
  explicit MarginalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {}

  std::size_t categories() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const MarginalDistribution&, const MarginalDistribution&) = default;

 private:
  std::vector<double> probs_;
};

// Accepts a raw mass vector whose total is within 1e-6 of one and
// renormalizes it. Throws NegativeMass, NotAProbabilityVector or
// TooFewCategories.
MarginalDistribution validate_marginal(std::span<const double> raw);

// J x J coupling, row index k = treated category, column l = control category.
class JointMatrix {
 public:
  explicit JointMatrix(std::size_t J) : J_(J), entries_(J * J, 0.0) {}
  JointMatrix(std::size_t J, std::vector<double> row_major);

  std::size_t categories() const noexcept { return J_; }
  double& operator()(std::size_t k, std::size_t l) { return entries_[k * J_ + l]; }
  double operator()(std::size_t k, std::size_t l) const { return entries_[k * J_ + l]; }
  std::span<const double> entries() const noexcept { return entries_; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  JointMatrix transposed() const;

  static JointMatrix outer(const MarginalDistribution& p1, const MarginalDistribution& p0);

  friend bool operator==(const JointMatrix&, const JointMatrix&) = default;

 private:
  std::size_t J_;
  std::vector<double> entries_;
};

// A (j, m) pair from the index set {1 <= j <= J-1, 1 <= m <= J-j}.
struct TupleIndex {
  int j = 1;
  int m = 1;

  bool valid_for(std::size_t J) const noexcept {
    return j >= 1 && m >= 1 && static_cast<std::size_t>(j) <= J - 1 &&
           static_cast<std::size_t>(j + m) <= J;
  }
  friend auto operator<=>(const TupleIndex&, const TupleIndex&) = default;
};

// All tuples for J categories in lexicographic order.
std::vector<TupleIndex> tuple_set(std::size_t J);

struct TupleValue {
  TupleIndex index;
  double value = 0.0;
};

struct BoundsReport {
  double gamma_lower = 0.0;
  double gamma_independent = 0.0;
  double gamma_upper = 0.0;
  // Empty for covariate-averaged reports.
  std::optional<TupleIndex> argmin_upper;
  std::optional<TupleIndex> argmax_lower;
  std::vector<TupleValue> delta_table;
  std::vector<TupleValue> xi_table;
};

struct BoundWithTuple {
  double value = 0.0;
  TupleIndex tuple;
};

struct TauEtaGamma {
  double tau = 0.0;    // pr{Y(1) >= Y(0)}
  double eta = 0.0;    // pr{Y(1) > Y(0)}
  double gamma = 0.0;
};

// Sum of v[first..last] restricted to valid indices; zero when the range is empty.
double range_sum(std::span<const double> v, long first, long last) noexcept;

double delta_jm(const MarginalDistribution& p1, const MarginalDistribution& p0, TupleIndex t);
double xi_jm(const MarginalDistribution& p1, const MarginalDistribution& p0, TupleIndex t);

// Difference of survivor functions at j, 1 <= j <= J-1.
double distributional_effect(const MarginalDistribution& p1, const MarginalDistribution& p0, int j);

double gamma_of_joint(const JointMatrix& P) noexcept;
TauEtaGamma tau_eta_gamma(const JointMatrix& P) noexcept;

// Minimum of delta_jm. Ties within kTieTolerance of the minimum resolve to
// the lexicographically first tuple.
BoundWithTuple gamma_upper(const MarginalDistribution& p1, const MarginalDistribution& p0);
BoundWithTuple gamma_lower(const MarginalDistribution& p1, const MarginalDistribution& p0);
double gamma_independent(const MarginalDistribution& p1, const MarginalDistribution& p0);

BoundsReport compute_bounds(const MarginalDistribution& p1, const MarginalDistribution& p0);

}  // namespace ordibound
