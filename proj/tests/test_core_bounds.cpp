#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ordibound/core_bounds.hpp"
#include "ordibound/error.hpp"

using namespace ordibound;

namespace {

MarginalDistribution M(std::vector<double> v) { return validate_marginal(v); }

const MarginalDistribution kP1 = MarginalDistribution({0.2, 0.3, 0.5});
const MarginalDistribution kP0 = MarginalDistribution({0.5, 0.3, 0.2});

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ordibound::Error");
  return ErrorKind::Usage;
}

MarginalDistribution senn(bool treated) {
  std::vector<double> t{23, 15, 48, 67, 121, 177}, c{42, 40, 62, 103, 184, 11};
  auto& v = treated ? t : c;
  const double n = treated ? 451.0 : 442.0;
  for (auto& x : v) x /= n;
  return M(v);
}

}  // namespace

TEST_CASE("validate_marginal") {
  const auto m = M({0.2, 0.3, 0.5});
  CHECK(m.categories() == 3);
  CHECK(m[2] == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(kind_of([] { M({2, 3, 5}); }) == ErrorKind::NotAProbabilityVector);
  CHECK(kind_of([] { M({0.5, -0.1, 0.6}); }) == ErrorKind::NegativeMass);
  CHECK(kind_of([] { M({1.0}); }) == ErrorKind::TooFewCategories);

  const auto r = M({0.2000000001, 0.3, 0.4999999999});
  double total = 0.0;
  for (double p : r.probs()) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("delta_jm and xi_jm worked examples") {
  CHECK(delta_jm(kP1, kP0, {1, 1}) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(delta_jm(kP1, kP0, {1, 2}) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(std::abs(xi_jm(kP1, kP0, {1, 2})) <= 1e-15);
  CHECK(xi_jm(kP1, kP0, {2, 1}) == doctest::Approx(0.1).epsilon(1e-14));

  const auto point = M({1, 0, 0});
  CHECK(delta_jm(point, point, {1, 1}) == 0.0);
  CHECK(xi_jm(point, point, {1, 1}) == -delta_jm(point, point, {1, 1}));

  CHECK(kind_of([] { delta_jm(kP1, kP0, {2, 2}); }) == ErrorKind::IndexOutOfRange);
  CHECK(kind_of([] { xi_jm(kP1, kP0, {0, 1}); }) == ErrorKind::IndexOutOfRange);
  CHECK(kind_of([] { delta_jm(kP1, M({0.5, 0.5}), {1, 1}); }) == ErrorKind::MarginalShapeMismatch);
}

TEST_CASE("distributional_effect") {
  // survivor functions: pr{Y(1) >= 1} = 0.8, pr{Y(0) >= 1} = 0.5
  CHECK(distributional_effect(kP1, kP0, 1) ==
        doctest::Approx(oracle::survivor_difference({0.2, 0.3, 0.5}, {0.5, 0.3, 0.2}, 1)));
  CHECK(distributional_effect(kP1, kP0, 1) == doctest::Approx(0.3));
  CHECK(distributional_effect(kP1, kP1, 2) == 0.0);
  CHECK(distributional_effect(M({0, 0, 1}), M({1, 0, 0}), 2) == 1.0);
  CHECK(kind_of([] { distributional_effect(kP1, kP0, 3); }) == ErrorKind::IndexOutOfRange);
}

TEST_CASE("gamma_of_joint and tau_eta_gamma") {
  JointMatrix diag(3);
  diag(0, 0) = 0.2;
  diag(1, 1) = 0.3;
  diag(2, 2) = 0.5;
  CHECK(gamma_of_joint(diag) == 0.0);
  const auto d = tau_eta_gamma(diag);
  CHECK(d.tau == doctest::Approx(1.0));
  CHECK(d.eta == 0.0);

  JointMatrix P(3);
  P(1, 0) = 0.3;
  P(2, 0) = 0.2;
  P(2, 1) = 0.3;
  P(0, 2) = 0.2;
  CHECK(gamma_of_joint(P) == doctest::Approx(0.6).epsilon(1e-14));
  const auto t = tau_eta_gamma(P);
  CHECK(t.tau == doctest::Approx(0.8));
  CHECK(t.eta == doctest::Approx(0.8));

  CHECK(gamma_of_joint(JointMatrix::outer(M({0, 0, 1}), M({1, 0, 0}))) == 1.0);

  JointMatrix harm(3);
  harm(0, 2) = 1.0;
  const auto h = tau_eta_gamma(harm);
  CHECK(h.tau == 0.0);
  CHECK(h.eta == 0.0);
  CHECK(h.gamma == -1.0);
}

TEST_CASE("bounds worked examples") {
  const auto up = gamma_upper(kP1, kP0);
  CHECK(up.value == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(up.tuple == TupleIndex{1, 2});

  const auto lo = gamma_lower(kP1, kP0);
  CHECK(lo.value == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(lo.tuple == TupleIndex{1, 1});  // xi_11 = xi_21 = 0.1

  const auto binary1 = M({0.4, 0.6}), binary0 = M({0.7, 0.3});
  CHECK(gamma_upper(binary1, binary0).value == doctest::Approx(0.3));
  CHECK(gamma_lower(binary1, binary0).value == doctest::Approx(0.3));
  CHECK(gamma_independent(binary1, binary0) == doctest::Approx(0.3));

  const auto uniform = M({1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(gamma_lower(uniform, uniform).value == doctest::Approx(-gamma_upper(uniform, uniform).value));
  CHECK(gamma_independent(uniform, uniform) == doctest::Approx(0.0));
  CHECK(gamma_independent(M({0, 0, 1}), M({1, 0, 0})) == 1.0);

  CHECK(kind_of([] { gamma_upper(kP1, M({0.5, 0.5})); }) == ErrorKind::MarginalShapeMismatch);
  CHECK(kind_of([] { gamma_lower(kP1, M({0.5, 0.5})); }) == ErrorKind::MarginalShapeMismatch);
  CHECK(kind_of([] { gamma_independent(kP1, M({0.5, 0.5})); }) == ErrorKind::MarginalShapeMismatch);
}

TEST_CASE("Senn trial bounds") {
  const auto p1 = senn(true), p0 = senn(false);
  CHECK(std::abs(gamma_upper(p1, p0).value - 0.900) <= 0.0005);
  CHECK(std::abs(gamma_independent(p1, p0) - 0.387) <= 0.0005);
}

TEST_CASE("compute_bounds tables are lexicographic") {
  const auto report = compute_bounds(kP1, kP0);
  REQUIRE(report.delta_table.size() == 3);
  CHECK(report.delta_table[0].index == TupleIndex{1, 1});
  CHECK(report.delta_table[1].index == TupleIndex{1, 2});
  CHECK(report.delta_table[2].index == TupleIndex{2, 1});
  CHECK(report.argmin_upper == TupleIndex{1, 2});
  CHECK(report.argmax_lower == TupleIndex{1, 1});
  CHECK(report.gamma_lower <= report.gamma_independent);
  CHECK(report.gamma_independent <= report.gamma_upper);
}

TEST_CASE("properties on random marginal pairs") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t J = 2 + static_cast<std::size_t>(trial % 7);
    const auto a = oracle::random_marginal(rng, J), b = oracle::random_marginal(rng, J);
    const auto p1 = M(a), p0 = M(b);
    const auto ap = std::vector<double>(p1.probs().begin(), p1.probs().end());
    const auto bp = std::vector<double>(p0.probs().begin(), p0.probs().end());

    for (auto t : tuple_set(J)) {
      CHECK(std::abs(delta_jm(p1, p0, t) - oracle::delta_via_survivor(ap, bp, t.j, t.m)) <= 1e-12);
      CHECK(std::abs(xi_jm(p1, p0, t) - oracle::xi_via_survivor(ap, bp, t.j, t.m)) <= 1e-12);
      CHECK(std::abs(xi_jm(p1, p0, t) + delta_jm(p0, p1, t)) <= 1e-12);
    }

    const double up = gamma_upper(p1, p0).value;
    const double lo = gamma_lower(p1, p0).value;
    const double ind = gamma_independent(p1, p0);
    CHECK(std::abs(lo + gamma_upper(p0, p1).value) <= 1e-12);
    CHECK(lo <= ind + 1e-12);
    CHECK(ind <= up + 1e-12);
    CHECK(lo >= -1 - 1e-12);
    CHECK(up <= 1 + 1e-12);
    CHECK(std::abs(ind - gamma_of_joint(JointMatrix::outer(p1, p0))) <= 1e-12);

    if (J == 2) {
      const double identified = p1[1] - p0[1];
      CHECK(std::abs(up - identified) <= 1e-12);
      CHECK(std::abs(lo - identified) <= 1e-12);
      CHECK(std::abs(ind - identified) <= 1e-12);
    }

    // Any coupling respects every delta and xi.
    const auto coupling = oracle::random_coupling(rng, ap, bp);
    const JointMatrix P(J, coupling);
    const double g = gamma_of_joint(P);
    for (auto t : tuple_set(J)) {
      CHECK(g <= delta_jm(p1, p0, t) + 1e-9);
      CHECK(g >= xi_jm(p1, p0, t) - 1e-9);
    }
    const auto teg = tau_eta_gamma(P);
    CHECK(std::abs(teg.gamma - (teg.tau + teg.eta - 1.0)) <= 1e-12);
    CHECK(std::abs(teg.gamma - oracle::gamma_direct(coupling, J)) <= 1e-12);
  }
}

TEST_CASE("recursions between neighbouring deltas") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t Jn = 3 + static_cast<std::size_t>(trial % 6);
    const auto p1 = M(oracle::random_marginal(rng, Jn)), p0 = M(oracle::random_marginal(rng, Jn));
    const int J = static_cast<int>(Jn);
    auto d = [&](int j, int m) { return delta_jm(p1, p0, {j, m}); };
    auto r = [&](int k) { return p1[static_cast<std::size_t>(k)]; };
    auto c = [&](int l) { return p0[static_cast<std::size_t>(l)]; };
    for (int j = 1; j <= J - 2; ++j) {
      for (int m = 1; m <= J - 1 - j; ++m) {
        CHECK(std::abs(d(j, m + 1) - (d(j, m) + c(j + m - 1) - r(j + m))) <= 1e-12);
        CHECK(std::abs(d(j, m + 1) - (d(j + 1, m) + r(j) - c(j - 1))) <= 1e-12);
      }
      CHECK(std::abs(d(1, j) - (d(j + 1, J - 1 - j) + c(J - 1) - r(0))) <= 1e-12);
    }
  }
}
