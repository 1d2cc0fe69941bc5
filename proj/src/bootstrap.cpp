#include "ordibound/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>

#include "ordibound/error.hpp"

namespace ordibound {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

struct Replicate {
  double independent = 0.0;
  double upper = 0.0;
};

std::optional<Replicate> run_replicate(const Dataset& data, const EstimatorConfig& config, std::uint64_t seed,
                                       std::uint64_t b) {
  auto rng = SplitMix64::for_replicate(seed, b);
  Dataset sample;
  sample.J = data.J;
  sample.covariate_names = data.covariate_names;
  sample.records.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) sample.records.push_back(data.records[rng.below(data.size())]);
  try {
    const auto est = estimate(sample, config);
    return Replicate{est.bounds.gamma_independent, est.bounds.gamma_upper};
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

SplitMix64 SplitMix64::for_replicate(std::uint64_t seed, std::uint64_t replicate) {
  return SplitMix64(mix64(seed + kGolden) ^ mix64((replicate + 1) * kGolden));
}

std::uint64_t SplitMix64::next() {
  state_ += kGolden;
  return mix64(state_);
}

std::uint64_t SplitMix64::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double bootstrap_threshold(std::vector<double> d, double alpha) {
  if (d.empty()) throw Error(ErrorKind::TooFewReplicates, "no replicates to take a quantile of");
  std::sort(d.begin(), d.end());
  const double n = static_cast<double>(d.size());
  // The small offset keeps exact products such as 0.95 * 2000 from rounding up.
  auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, d.size());
  return std::max(0.0, d[k - 1]);
}

unsigned resolve_thread_count(unsigned requested) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ORDIBOUND_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

IntervalReport bootstrap_interval(const Dataset& data, const EstimatorConfig& config, double alpha, int B,
                                  std::uint64_t seed, unsigned threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::Usage, "alpha must lie in (0, 1)");
  if (B < kMinReplicates)
    throw Error(ErrorKind::Usage, "at least " + std::to_string(kMinReplicates) + " bootstrap replicates are required");

  const auto point = estimate(data, config);
  const double gI = point.bounds.gamma_independent, gU = point.bounds.gamma_upper;

  std::vector<std::optional<Replicate>> reps(static_cast<std::size_t>(B));
  const unsigned workers = std::min<unsigned>(resolve_thread_count(threads), static_cast<unsigned>(B));
  if (workers <= 1) {
    for (int b = 0; b < B; ++b) reps[static_cast<std::size_t>(b)] = run_replicate(data, config, seed, b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int b = next++; b < B; b = next++) reps[static_cast<std::size_t>(b)] = run_replicate(data, config, seed, b);
      });
    }
    for (auto& t : pool) t.join();
  }

  IntervalReport report;
  report.alpha = alpha;
  report.B = B;
  report.seed = seed;
  report.point_independent = gI;
  report.point_upper = gU;
  std::vector<double> d;
  d.reserve(reps.size());
  double sI = 0, sU = 0;
  for (const auto& r : reps) {
    if (!r) {
      ++report.failed_replicates;
      continue;
    }
    d.push_back(std::max(r->independent - gI, gU - r->upper));
    sI += r->independent;
    sU += r->upper;
  }
  const double usable = static_cast<double>(d.size());
  if (usable < kMinUsableFraction * B) {
    throw Error(ErrorKind::TooFewReplicates, std::to_string(report.failed_replicates) + " of " + std::to_string(B) +
                                                 " replicates failed to refit");
  }
  auto& sum = report.replicate_summary;
  sum.mean_independent = sI / usable;
  sum.mean_upper = sU / usable;
  double vI = 0, vU = 0;
  for (const auto& r : reps) {
    if (!r) continue;
    vI += (r->independent - sum.mean_independent) * (r->independent - sum.mean_independent);
    vU += (r->upper - sum.mean_upper) * (r->upper - sum.mean_upper);
  }
  sum.sd_independent = usable > 1 ? std::sqrt(vI / (usable - 1)) : 0.0;
  sum.sd_upper = usable > 1 ? std::sqrt(vU / (usable - 1)) : 0.0;

  report.z_star = bootstrap_threshold(std::move(d), alpha);
  report.lower = gI - report.z_star;
  report.upper = gU + report.z_star;
  return report;
}

}  // namespace ordibound
