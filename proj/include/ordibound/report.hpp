#pragma once

// Analysis report and its JSON form. Doubles are written in shortest
// round-trip form, so parse(serialize(r)) reproduces every number exactly.

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "ordibound/attainment.hpp"
#include "ordibound/bootstrap.hpp"
#include "ordibound/core_bounds.hpp"
#include "ordibound/estimators.hpp"

namespace ordibound {

inline constexpr const char* kToolName = "ordibound";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// Closed-form bounds compared against the transportation LP.
struct OracleCheck {
  double lp_lower = 0.0;
  double lp_upper = 0.0;
  double lower_deviation = 0.0;
  double upper_deviation = 0.0;
  double tolerance = kOracleTolerance;

  bool agrees() const { return lower_deviation <= tolerance && upper_deviation <= tolerance; }
  friend bool operator==(const OracleCheck&, const OracleCheck&) = default;
};

// Randomized sweep of closed form versus LP (and attainment) over many pairs.
struct OracleSweep {
  int trials = 0;
  int max_categories = 0;
  std::uint64_t seed = 0;
  int instances = 0;
  double max_upper_deviation = 0.0;
  double max_lower_deviation = 0.0;
  int bound_failures = 0;
  int attainment_failures = 0;
  double tolerance = kOracleTolerance;

  bool passed() const { return bound_failures == 0 && attainment_failures == 0; }
  friend bool operator==(const OracleSweep&, const OracleSweep&) = default;
};

struct Provenance {
  std::string tool = kToolName;
  std::string version = kToolVersion;
  std::string input_digest;  // "sha256:<hex>"
  Json config = Json::object();

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct AnalysisReport {
  std::string command;
  std::optional<BoundsReport> bounds;
  std::optional<MarginalPair> marginals;
  std::optional<IntervalReport> interval;
  std::optional<JointMatrix> attaining_matrix;
  std::optional<ValidationReport> attainment_validation;
  std::optional<OracleCheck> oracle_check;
  std::optional<OracleSweep> oracle_sweep;
  Provenance provenance;
};

Json to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const Json& j);

std::string serialize(const AnalysisReport& report);
AnalysisReport parse_report(const std::string& text);

// Plain-text summary for --pretty.
std::string pretty_summary(const AnalysisReport& report);

std::string sha256_hex(std::string_view bytes);

OracleCheck oracle_check(const MarginalDistribution& p1, const MarginalDistribution& p0, const BoundsReport& bounds);

// Random marginal pairs with J uniform on 2..max_categories.
OracleSweep oracle_sweep(int trials, int max_categories, std::uint64_t seed);

}  // namespace ordibound
