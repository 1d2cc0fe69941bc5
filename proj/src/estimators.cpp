#include "ordibound/estimators.hpp"

#include <string>

#include "ordibound/error.hpp"

namespace ordibound {

namespace {

void require_both_arms(const Dataset& data) {
  bool treated = false, control = false;
  for (const auto& r : data.records) (r.z == 1 ? treated : control) = true;
  if (!treated) throw Error(ErrorKind::EmptyArm, "treatment arm is empty");
  if (!control) throw Error(ErrorKind::EmptyArm, "control arm is empty");
}

std::vector<int> outcomes(const Dataset& data, int arm) {
  std::vector<int> y;
  for (const auto& r : data.records)
    if (arm < 0 || r.z == arm) y.push_back(r.y);
  return y;
}

// Mean of per-unit probability rows, renormalized against rounding.
MarginalDistribution average_rows(const Eigen::MatrixXd& P) {
  const Eigen::VectorXd mean = P.colwise().mean().transpose();
  return validate_marginal(std::span<const double>(mean.data(), static_cast<std::size_t>(mean.size())));
}

MarginalDistribution row_marginal(const Eigen::MatrixXd& P, Eigen::Index i) {
  std::vector<double> row(static_cast<std::size_t>(P.cols()));
  for (Eigen::Index k = 0; k < P.cols(); ++k) row[static_cast<std::size_t>(k)] = P(i, k);
  return MarginalDistribution(std::move(row));
}

}  // namespace

void validate_dataset(const Dataset& data) {
  if (data.J < 2) throw Error(ErrorKind::TooFewCategories, "at least two outcome categories are required");
  const std::size_t d = data.covariate_count();
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = data.records[i];
    if (r.z != 0 && r.z != 1)
      throw Error(ErrorKind::MalformedRow, "unit " + std::to_string(i) + ": treatment must be 0 or 1");
    if (r.y < 0 || static_cast<std::size_t>(r.y) >= data.J)
      throw Error(ErrorKind::IndexOutOfRange, "unit " + std::to_string(i) + ": category " + std::to_string(r.y) +
                                                  " outside 0.." + std::to_string(data.J - 1));
    if (r.x.size() != d)
      throw Error(ErrorKind::DimensionMismatch, "unit " + std::to_string(i) + " has " +
                                                    std::to_string(r.x.size()) + " covariates, expected " +
                                                    std::to_string(d));
  }
  require_both_arms(data);
}

Dataset dataset_from_counts(const std::vector<long long>& treated, const std::vector<long long>& control) {
  if (treated.size() != control.size())
    throw Error(ErrorKind::LengthMismatch, "treated and control count vectors differ in length");
  Dataset data;
  data.J = treated.size();
  for (int arm = 0; arm < 2; ++arm) {
    const auto& counts = arm == 1 ? treated : control;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] < 0) throw Error(ErrorKind::NegativeCount, "negative count in category " + std::to_string(k));
      for (long long c = 0; c < counts[k]; ++c) data.records.push_back({arm, static_cast<int>(k), {}});
    }
  }
  return data;
}

std::string_view to_string(Design d) {
  switch (d) {
    case Design::Cre: return "cre";
    case Design::Ipw: return "ipw";
    case Design::OutcomeRegression: return "outcome-regression";
    case Design::CovariateSharpened: return "covariate-sharpened";
  }
  return "unknown";
}

std::optional<Design> parse_design(std::string_view name) {
  if (name == "cre") return Design::Cre;
  if (name == "ipw") return Design::Ipw;
  if (name == "outcome-regression" || name == "outcome_regression") return Design::OutcomeRegression;
  if (name == "covariate-sharpened" || name == "covariate_sharpened") return Design::CovariateSharpened;
  return std::nullopt;
}

DesignMatrix design_matrix(const Dataset& data, const CovariateSelection& columns, int arm) {
  const std::size_t d = data.covariate_count();
  std::vector<std::size_t> cols;
  if (columns) {
    cols = *columns;
    for (std::size_t c : cols)
      if (c >= d)
        throw Error(ErrorKind::MissingCovariates, "covariate column " + std::to_string(c) + " does not exist");
  } else {
    for (std::size_t c = 0; c < d; ++c) cols.push_back(c);
  }
  std::size_t n = 0;
  for (const auto& r : data.records) n += (arm < 0 || r.z == arm) ? 1 : 0;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  Eigen::Index i = 0;
  for (const auto& r : data.records) {
    if (arm >= 0 && r.z != arm) continue;
    if (r.x.size() != d) throw Error(ErrorKind::MissingCovariates, "unit is missing covariate values");
    for (std::size_t c = 0; c < cols.size(); ++c) X(i, static_cast<Eigen::Index>(c)) = r.x[cols[c]];
    ++i;
  }
  return DesignMatrix(std::move(X), true);
}

MarginalPair estimate_marginals_cre(const Dataset& data) {
  require_both_arms(data);
  std::vector<double> c1(data.J, 0.0), c0(data.J, 0.0);
  double n1 = 0.0, n0 = 0.0;
  for (const auto& r : data.records) {
    if (r.z == 1) {
      c1[static_cast<std::size_t>(r.y)] += 1.0;
      n1 += 1.0;
    } else {
      c0[static_cast<std::size_t>(r.y)] += 1.0;
      n0 += 1.0;
    }
  }
  for (auto& v : c1) v /= n1;
  for (auto& v : c0) v /= n0;
  return {MarginalDistribution(std::move(c1)), MarginalDistribution(std::move(c0))};
}

MarginalPair estimate_marginals_ipw(const Dataset& data, const Eigen::VectorXd& propensities) {
  require_both_arms(data);
  if (propensities.size() != static_cast<Eigen::Index>(data.size()))
    throw Error(ErrorKind::DimensionMismatch, "one propensity per unit is required");
  std::vector<double> w1(data.J, 0.0), w0(data.J, 0.0);
  double s1 = 0.0, s0 = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    const double e = propensities(static_cast<Eigen::Index>(i));
    if (r.z == 1) {
      w1[static_cast<std::size_t>(r.y)] += 1.0 / e;
      s1 += 1.0 / e;
    } else {
      w0[static_cast<std::size_t>(r.y)] += 1.0 / (1.0 - e);
      s0 += 1.0 / (1.0 - e);
    }
  }
  for (auto& v : w1) v /= s1;
  for (auto& v : w0) v /= s0;
  return {validate_marginal(w1), validate_marginal(w0)};
}

MarginalPair estimate_marginals_ipw(const Dataset& data, const LogisticModel& model,
                                    const CovariateSelection& columns) {
  return estimate_marginals_ipw(data, predict_propensity(model, design_matrix(data, columns)));
}

MarginalPair estimate_marginals_outcome_regression(const Dataset& data, const ProportionalOddsModel& m1,
                                                   const ProportionalOddsModel& m0,
                                                   const CovariateSelection& columns) {
  const DesignMatrix X = design_matrix(data, columns);
  return {average_rows(predict_category_probs(m1, X)), average_rows(predict_category_probs(m0, X))};
}

BoundsReport estimate_bounds_plugin(const MarginalDistribution& p1hat, const MarginalDistribution& p0hat) {
  return compute_bounds(p1hat, p0hat);
}

BoundsReport estimate_bounds_covariate_sharpened(const Dataset& data, const ProportionalOddsModel& m1,
                                                 const ProportionalOddsModel& m0,
                                                 const CovariateSelection& columns) {
  const DesignMatrix X = design_matrix(data, columns);
  const Eigen::MatrixXd P1 = predict_category_probs(m1, X);
  const Eigen::MatrixXd P0 = predict_category_probs(m0, X);
  if (P1.cols() != P0.cols()) throw Error(ErrorKind::MarginalShapeMismatch, "arm models disagree on J");
  BoundsReport report;
  const double n = static_cast<double>(X.rows());
  if (n == 0) throw Error(ErrorKind::EmptyArm, "no units to average over");
  for (Eigen::Index i = 0; i < P1.rows(); ++i) {
    const auto a = row_marginal(P1, i), b = row_marginal(P0, i);
    report.gamma_upper += gamma_upper(a, b).value;
    report.gamma_lower += gamma_lower(a, b).value;
    report.gamma_independent += gamma_independent(a, b);
  }
  report.gamma_upper /= n;
  report.gamma_lower /= n;
  report.gamma_independent /= n;
  return report;
}

LogisticModel fit_propensity_model(const Dataset& data, const CovariateSelection& columns) {
  std::vector<int> z;
  z.reserve(data.size());
  for (const auto& r : data.records) z.push_back(r.z);
  return fit_logistic(design_matrix(data, columns), z);
}

OutcomeModels fit_outcome_models(const Dataset& data, const CovariateSelection& columns) {
  require_both_arms(data);
  return {fit_proportional_odds(design_matrix(data, columns, 1), outcomes(data, 1), data.J),
          fit_proportional_odds(design_matrix(data, columns, 0), outcomes(data, 0), data.J)};
}

Estimate estimate(const Dataset& data, const EstimatorConfig& config) {
  validate_dataset(data);
  if (config.design != Design::Cre) {
    const auto& sel = config.design == Design::Ipw ? config.propensity_covariates : config.outcome_covariates;
    if (!sel && data.covariate_count() == 0)
      throw Error(ErrorKind::MissingCovariates,
                  "design '" + std::string(to_string(config.design)) + "' needs covariates");
  }
  switch (config.design) {
    case Design::Cre: {
      auto m = estimate_marginals_cre(data);
      auto b = estimate_bounds_plugin(m.treated, m.control);
      return {std::move(m), std::move(b)};
    }
    case Design::Ipw: {
      const auto model = fit_propensity_model(data, config.propensity_covariates);
      auto m = estimate_marginals_ipw(data, model, config.propensity_covariates);
      auto b = estimate_bounds_plugin(m.treated, m.control);
      return {std::move(m), std::move(b)};
    }
    case Design::OutcomeRegression: {
      const auto models = fit_outcome_models(data, config.outcome_covariates);
      auto m = estimate_marginals_outcome_regression(data, models.treated, models.control,
                                                     config.outcome_covariates);
      auto b = estimate_bounds_plugin(m.treated, m.control);
      return {std::move(m), std::move(b)};
    }
    case Design::CovariateSharpened: {
      const auto models = fit_outcome_models(data, config.outcome_covariates);
      auto m = estimate_marginals_outcome_regression(data, models.treated, models.control,
                                                     config.outcome_covariates);
      auto b = estimate_bounds_covariate_sharpened(data, models.treated, models.control,
                                                   config.outcome_covariates);
      return {std::move(m), std::move(b)};
    }
  }
  throw Error(ErrorKind::Usage, "unknown design");
}

}  // namespace ordibound
