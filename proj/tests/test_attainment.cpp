#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ordibound/attainment.hpp"
#include "ordibound/error.hpp"
#include "ordibound/transport.hpp"

using namespace ordibound;

namespace {

const MarginalDistribution kP1({0.2, 0.3, 0.5});
const MarginalDistribution kP0({0.5, 0.3, 0.2});

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ordibound::Error");
  return ErrorKind::Usage;
}

void check_fill(const TriangularFill& f, const std::vector<double>& x, const std::vector<double>& y,
                bool exact_cols) {
  const std::size_t n = x.size();
  REQUIRE(f.n == n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      if (l > k) CHECK(f.at(k, l) == 0.0);
      CHECK(f.at(k, l) >= 0.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += f.at(i, j);
      col += f.at(j, i);
    }
    if (exact_cols) {
      CHECK(std::abs(col - y[i]) <= 1e-12);
      CHECK(row <= x[i] + 1e-12);
    } else {
      CHECK(std::abs(row - x[i]) <= 1e-12);
      CHECK(col <= y[i] + 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("triangular_fill_a examples") {
  auto f = triangular_fill_a(std::vector<double>{0.5}, std::vector<double>{0.3});
  CHECK(f.at(0, 0) == doctest::Approx(0.3));

  f = triangular_fill_a(std::vector<double>{0.1, 0.9}, std::vector<double>{0.5, 0.4});
  CHECK(f.at(0, 0) == doctest::Approx(0.1));
  CHECK(f.at(0, 1) == 0.0);
  CHECK(f.at(1, 0) == doctest::Approx(0.4));
  CHECK(f.at(1, 1) == doctest::Approx(0.4));
  check_fill(f, {0.1, 0.9}, {0.5, 0.4}, true);

  CHECK(kind_of([] { triangular_fill_a(std::vector<double>{0.2, 0.2}, std::vector<double>{0.5, 0.4}); }) ==
        ErrorKind::DominanceViolated);
}

TEST_CASE("triangular_fill_b examples") {
  auto f = triangular_fill_b(std::vector<double>{0.3}, std::vector<double>{0.5});
  CHECK(f.at(0, 0) == doctest::Approx(0.3));

  f = triangular_fill_b(std::vector<double>{0.2, 0.7}, std::vector<double>{0.6, 0.5});
  CHECK(f.at(0, 0) == doctest::Approx(0.2));
  CHECK(f.at(0, 1) == 0.0);
  CHECK(f.at(1, 0) == doctest::Approx(0.4));
  CHECK(f.at(1, 1) == doctest::Approx(0.3));
  check_fill(f, {0.2, 0.7}, {0.6, 0.5}, false);

  CHECK(kind_of([] { triangular_fill_b(std::vector<double>{0.7, 0.1}, std::vector<double>{0.6, 0.5}); }) ==
        ErrorKind::DominanceViolated);
}

TEST_CASE("triangular fills on random dominated inputs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 7;
    // Fill A: x is y with mass moved to later indices, plus spare mass.
    auto y = oracle::random_marginal(rng, n);
    std::vector<double> xa(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t hi = i + static_cast<std::size_t>(unif(rng) * static_cast<double>(n - i));
      xa[std::min(hi, n - 1)] += y[i];
      xa[static_cast<std::size_t>(unif(rng) * static_cast<double>(n)) % n] += 0.1 * unif(rng);
    }
    check_fill(triangular_fill_a(xa, y), xa, y, true);
    // Fill B: y caps the columns, rows take part of y moved to later indices.
    std::vector<double> rows(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t hi = i + static_cast<std::size_t>(unif(rng) * static_cast<double>(n - i));
      rows[std::min(hi, n - 1)] += y[i] * unif(rng);
    }
    check_fill(triangular_fill_b(rows, y), rows, y, false);
  }
}

TEST_CASE("LP fallback fills satisfy the same contracts") {
  const std::vector<double> x{0.1, 0.9}, y{0.5, 0.4};
  check_fill(detail::triangular_fill_lp(x, y, true), x, y, true);
  const std::vector<double> r{0.2, 0.7}, c{0.6, 0.5};
  check_fill(detail::triangular_fill_lp(r, c, false), r, c, false);
  CHECK(kind_of([] {
          detail::triangular_fill_lp(std::vector<double>{0.9, 0.1}, std::vector<double>{0.1, 0.9}, true);
        }) == ErrorKind::FillInfeasible);
}

TEST_CASE("build_plan examples") {
  auto plan = build_plan(kP1, kP0);
  CHECK(plan.j1 == 1);
  CHECK(plan.m1 == 2);
  CHECK(std::abs(plan.lambda1) <= 1e-15);

  plan = build_plan(MarginalDistribution({0, 0, 1}), MarginalDistribution({1, 0, 0}));
  CHECK(plan.j1 == 1);
  CHECK(plan.m1 == 2);
  CHECK(plan.lambda1 == 0.0);

  const MarginalDistribution point({1, 0, 0});
  plan = build_plan(point, point);
  CHECK(plan.lambda1 == doctest::Approx(-1.0));
  for (double q : plan.q_row_adjusted) CHECK(q >= 0.0);
  for (double q : plan.q_col_adjusted) CHECK(q >= 0.0);
}

TEST_CASE("construct_attaining_matrix examples") {
  const auto P = construct_attaining_matrix(kP1, kP0);
  const auto report = validate_attainment(P, kP1, kP0, 0.6);
  CHECK(report.ok());
  CHECK(P(1, 0) == doctest::Approx(0.3));
  CHECK(P(2, 0) == doctest::Approx(0.2));
  CHECK(P(2, 1) == doctest::Approx(0.3));
  CHECK(P(0, 2) == doctest::Approx(0.2));

  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<double> v(4, 0.0);
    v[c] = 1.0;
    const MarginalDistribution point(v);
    const auto Q = construct_attaining_matrix(point, point);
    CHECK(Q(c, c) == 1.0);
    CHECK(gamma_of_joint(Q) == 0.0);
  }

  std::vector<double> t{23, 15, 48, 67, 121, 177}, c{42, 40, 62, 103, 184, 11};
  for (auto& x : t) x /= 451.0;
  for (auto& x : c) x /= 442.0;
  const auto p1 = validate_marginal(t), p0 = validate_marginal(c);
  const auto S = construct_attaining_matrix(p1, p0);
  CHECK(validate_attainment(S, p1, p0, gamma_upper(p1, p0).value).ok());
  CHECK(std::abs(gamma_of_joint(S) - 0.900) <= 0.0005);
}

TEST_CASE("validate_attainment reports failures") {
  auto P = construct_attaining_matrix(kP1, kP0);
  P(0, 2) = 0.0;
  const auto bad = validate_attainment(P, kP1, kP0, 0.6);
  CHECK_FALSE(bad.rows_match);
  CHECK_FALSE(bad.cols_match);
  CHECK_FALSE(bad.ok());
  CHECK_FALSE(bad.first_failure().empty());

  const auto indep = JointMatrix::outer(kP1, kP0);
  CHECK(validate_attainment(indep, kP1, kP0, gamma_independent(kP1, kP0)).ok());
  CHECK_FALSE(validate_attainment(indep, kP1, kP0, 0.6).gamma_matches);
}

TEST_CASE("upper and lower attainment on random marginals") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 1400; ++trial) {
    const std::size_t J = 2 + static_cast<std::size_t>(trial % 7);
    const auto p1 = validate_marginal(oracle::random_marginal(rng, J));
    const auto p0 = validate_marginal(oracle::random_marginal(rng, J));
    const auto attained = attain_upper_bound(p1, p0);
    const auto up = gamma_upper(p1, p0);
    CHECK(attained.plan.j1 == up.tuple.j);
    CHECK(attained.plan.m1 == up.tuple.m);
    const double lam = range_sum(p1.probs(), attained.plan.j1, attained.plan.j1 + attained.plan.m1 - 1) -
                       range_sum(p0.probs(), attained.plan.j1 - 1, attained.plan.j1 + attained.plan.m1 - 2);
    CHECK(std::abs(lam - attained.plan.lambda1) <= 1e-12);
    const auto& P = attained.matrix;
    const auto report = validate_attainment(P, p1, p0, up.value);
    CHECK_MESSAGE(report.ok(), report.first_failure());
    // diagonal cell fixed by the construction
    const std::size_t d = static_cast<std::size_t>(attained.plan.j1 - 1);
    CHECK(std::abs(P(d, d) - std::max(0.0, -attained.plan.lambda1)) <= 1e-12);

    const auto L = construct_lower_attaining_matrix(p1, p0);
    CHECK(validate_attainment(L, p1, p0, gamma_lower(p1, p0).value).ok());
  }
}
