#pragma once

// Nonparametric bootstrap interval that covers the identified set
// [gamma_I, gamma_U] jointly at level 1 - alpha.

#include <cstdint>
#include <vector>

#include "ordibound/estimators.hpp"

namespace ordibound {

struct ReplicateSummary {
  double mean_independent = 0.0;
  double sd_independent = 0.0;
  double mean_upper = 0.0;
  double sd_upper = 0.0;

  friend bool operator==(const ReplicateSummary&, const ReplicateSummary&) = default;
};

struct IntervalReport {
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.05;
  double z_star = 0.0;
  int B = 0;
  std::uint64_t seed = 0;
  ReplicateSummary replicate_summary;
  int failed_replicates = 0;
  // Full-sample estimates the interval is built around.
  double point_independent = 0.0;
  double point_upper = 0.0;

  friend bool operator==(const IntervalReport&, const IntervalReport&) = default;
};

inline constexpr int kDefaultReplicates = 2000;
inline constexpr double kDefaultAlpha = 0.05;
inline constexpr int kMinReplicates = 100;
inline constexpr double kMinUsableFraction = 0.9;

// Counter-based generator: replicate b of seed s always sees the same stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static SplitMix64 for_replicate(std::uint64_t seed, std::uint64_t replicate);

  std::uint64_t next();
  // Uniform on [0, n) without modulo bias.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

// Smallest z >= 0 with at least ceil((1 - alpha) n) of the d values <= z.
double bootstrap_threshold(std::vector<double> d, double alpha);

// Worker count after applying ORDIBOUND_THREADS; 0 requests the hardware count.
unsigned resolve_thread_count(unsigned requested);

// Each replicate resamples N units with replacement and reruns estimate().
// Replicates whose refit throws are dropped and counted. Output does not
// depend on `threads`.
IntervalReport bootstrap_interval(const Dataset& data, const EstimatorConfig& config, double alpha = kDefaultAlpha,
                                  int B = kDefaultReplicates, std::uint64_t seed = 0, unsigned threads = 0);

}  // namespace ordibound
