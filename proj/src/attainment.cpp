#include "ordibound/attainment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "ordibound/error.hpp"
#include "ordibound/transport.hpp"

namespace ordibound {

namespace {

// Dominance slack for fills; covers the argmin tie tolerance plus rounding.
constexpr double kFillTolerance = 1e-12;

double clamp_dust(double v) {
  return (v < 0.0 && v >= -kIdentityTolerance) ? 0.0 : v;
}

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "fill vectors must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < -kIdentityTolerance || y[i] < -kIdentityTolerance) {
      throw Error(ErrorKind::NegativeMass, "fill vectors must be nonnegative");
    }
  }
}

}  // namespace

namespace detail {

// Feasibility solve on the lower-triangular support. Cells above the
// diagonal carry unit cost, so a zero optimum means a feasible fill.
TriangularFill triangular_fill_lp(std::span<const double> x, std::span<const double> y, bool exact_cols) {
  const std::size_t n = x.size();
  const double sx = std::accumulate(x.begin(), x.end(), 0.0);
  const double sy = std::accumulate(y.begin(), y.end(), 0.0);
  TransportProblem problem;
  problem.sense = Sense::Minimize;
  if (exact_cols) {
    // n rows x (n + 1) columns; the last column absorbs unused row capacity.
    problem.supplies.assign(x.begin(), x.end());
    problem.demands.assign(y.begin(), y.end());
    problem.demands.push_back(std::max(sx - sy, 0.0));
    problem.costs.assign(n * (n + 1), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = k + 1; l < n; ++l) problem.costs[k * (n + 1) + l] = 1.0;
  } else {
    // (n + 1) rows x n columns; the last row absorbs unused column capacity.
    problem.supplies.assign(x.begin(), x.end());
    problem.supplies.push_back(std::max(sy - sx, 0.0));
    problem.demands.assign(y.begin(), y.end());
    problem.costs.assign((n + 1) * n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = k + 1; l < n; ++l) problem.costs[k * n + l] = 1.0;
  }
  TransportSolution sol;
  try {
    sol = solve_transport(problem);
  } catch (const Error& e) {
    throw Error(ErrorKind::FillInfeasible, std::string("triangular fill solve failed: ") + e.what());
  }
  if (sol.objective > kOracleTolerance) {
    throw Error(ErrorKind::FillInfeasible, "no lower-triangular fill satisfies the constraints");
  }
  TriangularFill fill;
  fill.n = n;
  fill.matrix.assign(n * n, 0.0);
  const std::size_t width = exact_cols ? n + 1 : n;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l <= k; ++l) fill.matrix[k * n + l] = std::max(sol.plan[k * width + l], 0.0);
  fill.slack.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double used = 0.0;
    for (std::size_t j = 0; j < n; ++j) used += exact_cols ? fill.matrix[i * n + j] : fill.matrix[j * n + i];
    fill.slack[i] = std::max((exact_cols ? x[i] : y[i]) - used, 0.0);
  }
  return fill;
}

}  // namespace detail

TriangularFill triangular_fill_a(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t s = n; s-- > 0;) {
    sx += x[s];
    sy += y[s];
    if (sx < sy - kFillTolerance) {
      throw Error(ErrorKind::DominanceViolated,
                  "suffix sum of capacities falls short of demand at s=" + std::to_string(s));
    }
  }

  // Column l may only draw from rows k >= l. Row l is useless to later
  // columns, so each column drains the lowest eligible rows first.
  TriangularFill fill;
  fill.n = n;
  fill.matrix.assign(n * n, 0.0);
  std::vector<double> remaining(x.begin(), x.end());
  for (std::size_t l = 0; l < n; ++l) {
    double need = std::max(y[l], 0.0);
    for (std::size_t k = l; k < n && need > 0.0; ++k) {
      const double take = std::min(need, std::max(remaining[k], 0.0));
      fill.matrix[k * n + l] += take;
      remaining[k] -= take;
      need -= take;
    }
    if (need > kFillTolerance) return detail::triangular_fill_lp(x, y, true);
    if (need > 0.0) {
      fill.matrix[(n - 1) * n + l] += need;
      remaining[n - 1] -= need;
    }
  }
  fill.slack.resize(n);
  for (std::size_t k = 0; k < n; ++k) fill.slack[k] = std::max(remaining[k], 0.0);
  return fill;
}

TriangularFill triangular_fill_b(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    sx += x[s];
    sy += y[s];
    if (sx > sy + kFillTolerance) {
      throw Error(ErrorKind::DominanceViolated,
                  "prefix sum of rows exceeds column capacity at s=" + std::to_string(s));
    }
  }

  // Row k may use columns l <= k; every later row can use those columns too,
  // so the order in which a row drains them does not matter.
  TriangularFill fill;
  fill.n = n;
  fill.matrix.assign(n * n, 0.0);
  std::vector<double> remaining(y.begin(), y.end());
  for (std::size_t k = 0; k < n; ++k) {
    double need = std::max(x[k], 0.0);
    for (std::size_t l = 0; l <= k && need > 0.0; ++l) {
      const double take = std::min(need, std::max(remaining[l], 0.0));
      fill.matrix[k * n + l] += take;
      remaining[l] -= take;
      need -= take;
    }
    if (need > kFillTolerance) return detail::triangular_fill_lp(x, y, false);
    if (need > 0.0) {
      fill.matrix[k * n + k] += need;
      remaining[k] -= need;
    }
  }
  fill.slack.resize(n);
  for (std::size_t l = 0; l < n; ++l) fill.slack[l] = std::max(remaining[l], 0.0);
  return fill;
}

AttainmentPlan build_plan(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  const auto upper = gamma_upper(p1, p0);
  const long J = static_cast<long>(p1.categories());
  AttainmentPlan plan;
  plan.j1 = upper.tuple.j;
  plan.m1 = upper.tuple.m;
  const long j1 = plan.j1, m1 = plan.m1;
  plan.lambda1 = range_sum(p1.probs(), j1, j1 + m1 - 1) - range_sum(p0.probs(), j1 - 1, j1 + m1 - 2);

  plan.q_row_adjusted.assign(p1.probs().begin(), p1.probs().end());
  plan.q_col_adjusted.assign(p0.probs().begin(), p0.probs().end());
  const double positive = std::max(0.0, plan.lambda1);
  if (j1 > 1) {
    auto& q = plan.q_row_adjusted[static_cast<std::size_t>(j1 - 1)];
    q = clamp_dust(q + std::min(0.0, plan.lambda1));
  }
  if (m1 > 1) {
    auto& q = plan.q_row_adjusted[static_cast<std::size_t>(j1 + m1 - 1)];
    q = clamp_dust(q - positive);
  }
  if (j1 + m1 < J) {
    auto& q = plan.q_col_adjusted[static_cast<std::size_t>(j1 + m1 - 1)];
    q = clamp_dust(q - positive);
  }
  return plan;
}

Attainment attain_upper_bound(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  AttainmentPlan plan = build_plan(p1, p0);
  const std::size_t J = p1.categories();
  const std::size_t j1 = static_cast<std::size_t>(plan.j1);
  const std::size_t m1 = static_cast<std::size_t>(plan.m1);
  const std::size_t top = j1 + m1 - 1;  // last row of the middle band
  const auto& qr = plan.q_row_adjusted;
  const auto& qc = plan.q_col_adjusted;
  const auto pr = p1.probs();
  const auto pc = p0.probs();

  JointMatrix P(J);
  auto place = [&P](const TriangularFill& fill, std::size_t row0, std::size_t col0) {
    for (std::size_t k = 0; k < fill.n; ++k)
      for (std::size_t l = 0; l <= k; ++l) P(row0 + k, col0 + l) = fill.at(k, l);
  };

  // (I) rows 1..j1-1 against control columns 0..j1-2.
  if (j1 > 1) {
    std::span<const double> x(qr.data() + 1, j1 - 1);
    place(triangular_fill_a(x, pc.subspan(0, j1 - 1)), 1, 0);
  }
  // (II) rows j1+1..j1+m1-1 against columns j1..j1+m1-2.
  if (m1 > 1) {
    std::span<const double> x(qr.data() + j1 + 1, m1 - 1);
    place(triangular_fill_a(x, pc.subspan(j1, m1 - 1)), j1 + 1, j1);
  }
  // (III) rows j1+m1..J-1 against adjusted columns j1+m1-1..J-2.
  if (j1 + m1 < J) {
    std::span<const double> y(qc.data() + top, J - j1 - m1);
    place(triangular_fill_b(pr.subspan(j1 + m1), y), j1 + m1, top);
  }
  // (IV)
  P(top, top) = std::max(0.0, plan.lambda1);
  // (V) complete the middle band into column j1-1.
  for (std::size_t k = j1; k <= top; ++k) {
    double used = 0.0;
    for (std::size_t l = j1; l < J; ++l) used += P(k, l);
    P(k, j1 - 1) = clamp_dust(pr[k] - used);
  }
  // (VI)
  {
    double used = 0.0;
    for (std::size_t k = j1; k <= top; ++k) used += P(k, j1 - 1);
    P(j1 - 1, j1 - 1) = clamp_dust(pc[j1 - 1] - used);
  }
  // (VII) rows 0..j1-1 x columns top..J-1 get the independent coupling of
  // their leftover masses, normalized by the total leftover.
  std::vector<double> row_left(j1), col_left(J - top);
  for (std::size_t k = 0; k < j1; ++k) {
    double used = 0.0;
    for (std::size_t l = 0; l < top; ++l) used += P(k, l);
    row_left[k] = clamp_dust(pr[k] - used);
  }
  for (std::size_t l = top; l < J; ++l) {
    double used = 0.0;
    for (std::size_t k = j1; k < J; ++k) used += P(k, l);
    col_left[l - top] = clamp_dust(pc[l] - used);
  }
  const double leftover = std::accumulate(row_left.begin(), row_left.end(), 0.0);
  plan.leftover_mass = leftover;
  if (leftover > kIdentityTolerance) {
    for (std::size_t k = 0; k < j1; ++k)
      for (std::size_t l = top; l < J; ++l) P(k, l) = row_left[k] * col_left[l - top] / leftover;
  }

  const auto report = validate_attainment(P, p1, p0, delta_jm(p1, p0, {plan.j1, plan.m1}));
  if (!report.ok()) {
    throw Error(ErrorKind::ConstructionInvalid,
                "constructed matrix fails " + report.first_failure() + " (j1=" +
                    std::to_string(plan.j1) + ", m1=" + std::to_string(plan.m1) + ")");
  }
  return Attainment{std::move(plan), std::move(P)};
}

JointMatrix construct_attaining_matrix(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  return attain_upper_bound(p1, p0).matrix;
}

JointMatrix construct_lower_attaining_matrix(const MarginalDistribution& p1,
                                             const MarginalDistribution& p0) {
  return construct_attaining_matrix(p0, p1).transposed();
}

std::string ValidationReport::first_failure() const {
  if (!nonnegative) return "nonnegativity (min entry " + std::to_string(min_entry) + ")";
  if (!rows_match) return "row sums (max deviation " + std::to_string(max_row_deviation) + ")";
  if (!cols_match) return "column sums (max deviation " + std::to_string(max_col_deviation) + ")";
  if (!gamma_matches) return "gamma match (deviation " + std::to_string(gamma_deviation) + ")";
  return {};
}

ValidationReport validate_attainment(const JointMatrix& P, const MarginalDistribution& p1,
                                     const MarginalDistribution& p0, double expected_gamma) {
  ValidationReport report;
  const std::size_t J = P.categories();
  if (p1.categories() != J || p0.categories() != J) {
    report.max_row_deviation = report.max_col_deviation = INFINITY;
    report.gamma = gamma_of_joint(P);
    report.gamma_deviation = std::abs(report.gamma - expected_gamma);
    return report;
  }
  const auto entries = P.entries();
  report.min_entry = entries.empty() ? 0.0 : *std::min_element(entries.begin(), entries.end());
  report.nonnegative = report.min_entry >= -kIdentityTolerance;

  const auto rows = P.row_sums();
  const auto cols = P.col_sums();
  for (std::size_t i = 0; i < J; ++i) {
    report.max_row_deviation = std::max(report.max_row_deviation, std::abs(rows[i] - p1[i]));
    report.max_col_deviation = std::max(report.max_col_deviation, std::abs(cols[i] - p0[i]));
  }
  report.rows_match = report.max_row_deviation <= kOracleTolerance;
  report.cols_match = report.max_col_deviation <= kOracleTolerance;
  report.gamma = gamma_of_joint(P);
  report.gamma_deviation = std::abs(report.gamma - expected_gamma);
  report.gamma_matches = report.gamma_deviation <= kOracleTolerance;
  return report;
}

}  // namespace ordibound
