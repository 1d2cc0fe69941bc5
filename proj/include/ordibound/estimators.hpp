#pragma once

// Estimated marginals and plug-in bounds for randomized and observational
// designs, plus covariate-sharpened bounds.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ordibound/core_bounds.hpp"
#include "ordibound/ordinal_glm.hpp"

namespace ordibound {

struct UnitRecord {
  int z = 0;  // 1 treated, 0 control
  int y = 0;  // category 0..J-1
  std::vector<double> x;
};

struct Dataset {
  std::vector<UnitRecord> records;
  std::size_t J = 0;
  std::vector<std::string> covariate_names;

  std::size_t size() const { return records.size(); }
  std::size_t covariate_count() const { return records.empty() ? covariate_names.size() : records.front().x.size(); }
};

// Checks J >= 2, categories in range, both arms non-empty and a constant
// covariate length.
void validate_dataset(const Dataset& data);

// One unit per count, no covariates.
Dataset dataset_from_counts(const std::vector<long long>& treated, const std::vector<long long>& control);

enum class Design { Cre, Ipw, OutcomeRegression, CovariateSharpened };

std::string_view to_string(Design d);
std::optional<Design> parse_design(std::string_view name);  // accepts "outcome-regression" and "outcome_regression"

// Column indices into UnitRecord::x. Unset means every covariate; an empty
// list means an intercept-only model.
using CovariateSelection = std::optional<std::vector<std::size_t>>;

struct EstimatorConfig {
  Design design = Design::Cre;
  CovariateSelection propensity_covariates;
  CovariateSelection outcome_covariates;
};

struct MarginalPair {
  MarginalDistribution treated;
  MarginalDistribution control;
};

// Design matrix over the selected covariates for the units in `arm`
// (0 or 1), or for every unit when arm is -1.
DesignMatrix design_matrix(const Dataset& data, const CovariateSelection& columns, int arm = -1);

MarginalPair estimate_marginals_cre(const Dataset& data);
MarginalPair estimate_marginals_ipw(const Dataset& data, const LogisticModel& model,
                                    const CovariateSelection& columns = std::nullopt);
MarginalPair estimate_marginals_ipw(const Dataset& data, const Eigen::VectorXd& propensities);
MarginalPair estimate_marginals_outcome_regression(const Dataset& data, const ProportionalOddsModel& m1,
                                                   const ProportionalOddsModel& m0,
                                                   const CovariateSelection& columns = std::nullopt);

BoundsReport estimate_bounds_plugin(const MarginalDistribution& p1hat, const MarginalDistribution& p0hat);
// Per-unit bounds averaged over the sample; tuple fields and tables stay empty.
BoundsReport estimate_bounds_covariate_sharpened(const Dataset& data, const ProportionalOddsModel& m1,
                                                 const ProportionalOddsModel& m0,
                                                 const CovariateSelection& columns = std::nullopt);

LogisticModel fit_propensity_model(const Dataset& data, const CovariateSelection& columns);
struct OutcomeModels {
  ProportionalOddsModel treated;
  ProportionalOddsModel control;
};
OutcomeModels fit_outcome_models(const Dataset& data, const CovariateSelection& columns);

struct Estimate {
  MarginalPair marginals;  // outcome-regression marginals under the sharpened design
  BoundsReport bounds;
};

// Full pipeline for one dataset under one configuration, refitting models as
// the design requires.
Estimate estimate(const Dataset& data, const EstimatorConfig& config);

}  // namespace ordibound
