#include "ordibound/core_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ordibound/error.hpp"

namespace ordibound {

namespace {

void require_same_shape(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  if (p1.categories() != p0.categories()) {
    throw Error(ErrorKind::MarginalShapeMismatch,
                "treated marginal has " + std::to_string(p1.categories()) +
                    " categories, control has " + std::to_string(p0.categories()));
  }
}

void require_tuple(const MarginalDistribution& p1, const MarginalDistribution& p0, TupleIndex t) {
  require_same_shape(p1, p0);
  if (!t.valid_for(p1.categories())) {
    throw Error(ErrorKind::IndexOutOfRange,
                "tuple (" + std::to_string(t.j) + "," + std::to_string(t.m) +
                    ") is outside the index set for J=" + std::to_string(p1.categories()));
  }
}

// Scans tuples in lexicographic order; keeps the first tuple within the tie
// tolerance of the running optimum.
template <typename Better>
BoundWithTuple extremum(const std::vector<TupleValue>& table, Better better) {
  BoundWithTuple best{table.front().value, table.front().index};
  for (const auto& entry : table) {
    if (better(entry.value, best.value)) best.value = entry.value;
  }
  for (const auto& entry : table) {
    if (std::abs(entry.value - best.value) <= kTieTolerance) {
      best.tuple = entry.index;
      break;
    }
  }
  return best;
}

std::vector<TupleValue> delta_values(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  std::vector<TupleValue> out;
  for (auto t : tuple_set(p1.categories())) out.push_back({t, delta_jm(p1, p0, t)});
  return out;
}

std::vector<TupleValue> xi_values(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  std::vector<TupleValue> out;
  for (auto t : tuple_set(p1.categories())) out.push_back({t, xi_jm(p1, p0, t)});
  return out;
}

}  // namespace

MarginalDistribution validate_marginal(std::span<const double> raw) {
  if (raw.size() < 2) {
    throw Error(ErrorKind::TooFewCategories, "a marginal needs at least 2 categories");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (!(raw[k] >= 0.0) || !std::isfinite(raw[k])) {
      throw Error(ErrorKind::NegativeMass,
                  "entry " + std::to_string(k) + " is negative or not finite");
    }
    total += raw[k];
  }
  if (std::abs(total - 1.0) > kValidationTolerance) {
    throw Error(ErrorKind::NotAProbabilityVector,
                "entries sum to " + std::to_string(total) + ", expected 1");
  }
  std::vector<double> probs(raw.begin(), raw.end());
  for (auto& p : probs) p /= total;
  return MarginalDistribution(std::move(probs));
}

JointMatrix::JointMatrix(std::size_t J, std::vector<double> row_major)
    : J_(J), entries_(std::move(row_major)) {
  if (entries_.size() != J * J) {
    throw Error(ErrorKind::DimensionMismatch, "joint matrix needs J*J entries");
  }
}

std::vector<double> JointMatrix::row_sums() const {
  std::vector<double> sums(J_, 0.0);
  for (std::size_t k = 0; k < J_; ++k)
    for (std::size_t l = 0; l < J_; ++l) sums[k] += (*this)(k, l);
  return sums;
}

std::vector<double> JointMatrix::col_sums() const {
  std::vector<double> sums(J_, 0.0);
  for (std::size_t k = 0; k < J_; ++k)
    for (std::size_t l = 0; l < J_; ++l) sums[l] += (*this)(k, l);
  return sums;
}

JointMatrix JointMatrix::transposed() const {
  JointMatrix t(J_);
  for (std::size_t k = 0; k < J_; ++k)
    for (std::size_t l = 0; l < J_; ++l) t(l, k) = (*this)(k, l);
  return t;
}

JointMatrix JointMatrix::outer(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  require_same_shape(p1, p0);
  JointMatrix P(p1.categories());
  for (std::size_t k = 0; k < P.categories(); ++k)
    for (std::size_t l = 0; l < P.categories(); ++l) P(k, l) = p1[k] * p0[l];
  return P;
}

std::vector<TupleIndex> tuple_set(std::size_t J) {
  std::vector<TupleIndex> out;
  for (int j = 1; j <= static_cast<int>(J) - 1; ++j)
    for (int m = 1; m <= static_cast<int>(J) - j; ++m) out.push_back({j, m});
  return out;
}

double range_sum(std::span<const double> v, long first, long last) noexcept {
  first = std::max(first, 0L);
  last = std::min(last, static_cast<long>(v.size()) - 1);
  if (first > last) return 0.0;
  return std::accumulate(v.begin() + first, v.begin() + last + 1, 0.0);
}

double delta_jm(const MarginalDistribution& p1, const MarginalDistribution& p0, TupleIndex t) {
  require_tuple(p1, p0, t);
  const long J = static_cast<long>(p1.categories());
  const long j = t.j, m = t.m;
  return range_sum(p1.probs(), j, J - 1) + range_sum(p1.probs(), j + m, J - 1) +
         range_sum(p0.probs(), 0, j - 2) - range_sum(p0.probs(), j + m - 1, J - 1);
}

double xi_jm(const MarginalDistribution& p1, const MarginalDistribution& p0, TupleIndex t) {
  require_tuple(p1, p0, t);
  const long J = static_cast<long>(p1.categories());
  const long j = t.j, m = t.m;
  return range_sum(p1.probs(), j + m - 1, J - 1) - range_sum(p0.probs(), j, J - 1) -
         range_sum(p0.probs(), j + m, J - 1) - range_sum(p1.probs(), 0, j - 2);
}

double distributional_effect(const MarginalDistribution& p1, const MarginalDistribution& p0, int j) {
  require_same_shape(p1, p0);
  const long J = static_cast<long>(p1.categories());
  if (j < 1 || j > J - 1) {
    throw Error(ErrorKind::IndexOutOfRange,
                "j=" + std::to_string(j) + " outside 1.." + std::to_string(J - 1));
  }
  return range_sum(p1.probs(), j, J - 1) - range_sum(p0.probs(), j, J - 1);
}

double gamma_of_joint(const JointMatrix& P) noexcept {
  return tau_eta_gamma(P).gamma;
}

TauEtaGamma tau_eta_gamma(const JointMatrix& P) noexcept {
  double above = 0.0, below = 0.0, ties = 0.0;
  for (std::size_t k = 0; k < P.categories(); ++k) {
    for (std::size_t l = 0; l < P.categories(); ++l) {
      if (k > l) below += P(k, l);
      else if (k < l) above += P(k, l);
      else ties += P(k, l);
    }
  }
  // below = pr{Y(1) > Y(0)}, above = pr{Y(1) < Y(0)}
  return {below + ties, below, below - above};
}

BoundWithTuple gamma_upper(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  require_same_shape(p1, p0);
  return extremum(delta_values(p1, p0), [](double a, double b) { return a < b; });
}

BoundWithTuple gamma_lower(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  require_same_shape(p1, p0);
  return extremum(xi_values(p1, p0), [](double a, double b) { return a > b; });
}

double gamma_independent(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  require_same_shape(p1, p0);
  const std::size_t J = p1.categories();
  double better = 0.0, worse = 0.0;
  for (std::size_t k = 0; k < J; ++k) {
    for (std::size_t l = 0; l < J; ++l) {
      if (k > l) better += p1[k] * p0[l];
      else if (k < l) worse += p1[k] * p0[l];
    }
  }
  return better - worse;
}

BoundsReport compute_bounds(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  require_same_shape(p1, p0);
  BoundsReport report;
  report.delta_table = delta_values(p1, p0);
  report.xi_table = xi_values(p1, p0);
  const auto upper = extremum(report.delta_table, [](double a, double b) { return a < b; });
  const auto lower = extremum(report.xi_table, [](double a, double b) { return a > b; });
  report.gamma_upper = upper.value;
  report.argmin_upper = upper.tuple;
  report.gamma_lower = lower.value;
  report.argmax_lower = lower.tuple;
  report.gamma_independent = gamma_independent(p1, p0);
  return report;
}

}  // namespace ordibound
