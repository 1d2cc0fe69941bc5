#include <cmath>
#include <cstdlib>
#include <random>

#include "doctest.h"
#include "ordibound/bootstrap.hpp"
#include "ordibound/error.hpp"

using namespace ordibound;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ordibound::Error");
  return ErrorKind::Usage;
}

Dataset senn() { return dataset_from_counts({23, 15, 48, 67, 121, 177}, {42, 40, 62, 103, 184, 11}); }

}  // namespace

TEST_CASE("replicate streams") {
  auto a = SplitMix64::for_replicate(7, 3), b = SplitMix64::for_replicate(7, 3);
  auto c = SplitMix64::for_replicate(7, 4), d = SplitMix64::for_replicate(8, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 20; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs_c |= x != c.next();
    differs_d |= x != d.next();
  }
  CHECK(differs_c);
  CHECK(differs_d);

  // Bounded draws: in range and roughly uniform (chi-square, 9 dof, p ~ 1e-6 cutoff).
  auto r = SplitMix64::for_replicate(1, 0);
  std::vector<int> bins(10, 0);
  for (int i = 0; i < 100000; ++i) {
    const auto v = r.below(10);
    REQUIRE(v < 10);
    ++bins[v];
  }
  double chi2 = 0.0;
  for (int c2 : bins) chi2 += (c2 - 10000.0) * (c2 - 10000.0) / 10000.0;
  CHECK(chi2 < 40.0);
  CHECK(r.below(1) == 0);
}

TEST_CASE("bootstrap_threshold") {
  std::vector<double> d(100);
  for (int i = 0; i < 100; ++i) d[static_cast<std::size_t>(i)] = i + 1;
  CHECK(bootstrap_threshold(d, 0.05) == 95.0);
  CHECK(bootstrap_threshold(d, 0.5) == 50.0);
  CHECK(bootstrap_threshold(std::vector<double>(50, -0.2), 0.05) == 0.0);
  CHECK(kind_of([] { bootstrap_threshold({}, 0.05); }) == ErrorKind::TooFewReplicates);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(200);
    for (auto& x : v) x = g(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 0.9}) {
      const double z = bootstrap_threshold(v, alpha);
      CHECK(z >= 0.0);
      CHECK(z <= prev);
      prev = z;
    }
  }
}

TEST_CASE("degenerate data give a zero threshold") {
  const auto data = dataset_from_counts({0, 0, 120}, {130, 0, 0});
  const auto r = bootstrap_interval(data, {}, 0.05, 200, 3);
  CHECK(r.z_star == 0.0);
  CHECK(r.lower == 1.0);
  CHECK(r.upper == 1.0);
  CHECK(r.failed_replicates == 0);
}

TEST_CASE("Senn interval, determinism and thread independence") {
  const auto data = senn();
  const auto r = bootstrap_interval(data, {}, 0.05, 2000, 7, 1);
  CHECK(std::abs(r.lower - 0.315) <= 0.01);
  CHECK(std::abs(r.upper - 0.972) <= 0.01);
  CHECK(r.lower <= r.point_independent);
  CHECK(r.point_independent <= r.point_upper);
  CHECK(r.point_upper <= r.upper);
  CHECK(r.lower == r.point_independent - r.z_star);
  CHECK(r.upper == r.point_upper + r.z_star);
  CHECK(r.replicate_summary.sd_upper > 0.0);

  const auto again = bootstrap_interval(data, {}, 0.05, 2000, 7, 1);
  CHECK(again == r);
  const auto threaded = bootstrap_interval(data, {}, 0.05, 2000, 7, 4);
  CHECK(threaded == r);
  const auto other = bootstrap_interval(data, {}, 0.05, 2000, 8, 2);
  CHECK(other.z_star != r.z_star);
}

TEST_CASE("covariate design replicates refit their models") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset data;
  data.J = 3;
  data.covariate_names = {"x"};
  for (int i = 0; i < 200; ++i) {
    const double x = g(rng);
    const int z = i % 2;
    const double latent = x + 0.5 * z + g(rng);
    data.records.push_back({z, latent < -0.5 ? 0 : (latent < 0.7 ? 1 : 2), {x}});
  }
  for (Design d : {Design::Ipw, Design::OutcomeRegression, Design::CovariateSharpened}) {
    const auto r = bootstrap_interval(data, {d, std::nullopt, std::nullopt}, 0.1, 100, 1, 2);
    CHECK(r.lower <= r.point_independent);
    CHECK(r.point_upper <= r.upper);
  }
}

TEST_CASE("argument and replicate failures") {
  const auto data = senn();
  CHECK(kind_of([&] { bootstrap_interval(data, {}, 0.0, 200, 1); }) == ErrorKind::Usage);
  CHECK(kind_of([&] { bootstrap_interval(data, {}, 0.05, 99, 1); }) == ErrorKind::Usage);

  // A single treated unit goes missing from about a third of resamples.
  const auto thin = dataset_from_counts({0, 1, 0}, {10, 10, 9});
  CHECK(kind_of([&] { bootstrap_interval(thin, {}, 0.05, 200, 1); }) == ErrorKind::TooFewReplicates);
}

TEST_CASE("ORDIBOUND_THREADS caps the worker count") {
  ::setenv("ORDIBOUND_THREADS", "2", 1);
  CHECK(resolve_thread_count(8) == 2);
  CHECK(resolve_thread_count(1) == 1);
  ::setenv("ORDIBOUND_THREADS", "0", 1);
  CHECK(resolve_thread_count(3) == 3);
  ::unsetenv("ORDIBOUND_THREADS");
  CHECK(resolve_thread_count(0) >= 1);
}
