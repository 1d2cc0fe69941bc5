#pragma once

// Maximum-likelihood fits for the two nuisance models: a logistic propensity
// model and a proportional-odds (cumulative logit) outcome model.

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

namespace ordibound {

// Covariates only. A constant column is never stored here; the logistic fit
// adds its own intercept when includes_intercept is set, and the
// proportional-odds cutpoints always play the intercept role.
struct DesignMatrix {
  Eigen::MatrixXd values;  // N x d
  bool includes_intercept = true;

  DesignMatrix() = default;
  DesignMatrix(Eigen::MatrixXd v, bool intercept = true) : values(std::move(v)), includes_intercept(intercept) {}

  // Intercept-only design with N rows.
  static DesignMatrix intercept_only(std::size_t n) { return DesignMatrix(Eigen::MatrixXd(n, 0), true); }

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  // Number of logistic coefficients.
  std::size_t parameters() const { return cols() + (includes_intercept ? 1 : 0); }
};

struct LogisticModel {
  Eigen::VectorXd coefficients;  // intercept first when present
  bool includes_intercept = true;
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
  double loglik = 0.0;
  std::vector<double> loglik_trace;  // one entry per accepted iterate
};

// pr(Y <= j | x) = invlogit(cutpoints[j] - x.slopes). Categories outside the
// observed range get cutpoints at -inf / +inf so their probability is zero.
struct ProportionalOddsModel {
  Eigen::VectorXd cutpoints;  // J-1, nondecreasing
  Eigen::VectorXd slopes;     // d
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
  double loglik = 0.0;
  std::vector<double> loglik_trace;

  std::size_t categories() const { return static_cast<std::size_t>(cutpoints.size()) + 1; }
};

inline constexpr double kGradientTolerance = 1e-8;
inline constexpr int kMaxNewtonIterations = 100;
inline constexpr int kMaxStepHalvings = 30;
inline constexpr double kHessianRidge = 1e-10;
inline constexpr double kCoefficientNormLimit = 1e6;
inline constexpr double kPropensityClip = 1e-6;

LogisticModel fit_logistic(const DesignMatrix& X, const std::vector<int>& z);
Eigen::VectorXd predict_propensity(const LogisticModel& model, const DesignMatrix& X);

ProportionalOddsModel fit_proportional_odds(const DesignMatrix& X, const std::vector<int>& y, std::size_t J);
// N x J matrix of category probabilities.
Eigen::MatrixXd predict_category_probs(const ProportionalOddsModel& model, const DesignMatrix& X);

// Log-likelihoods and analytic gradients on the original covariate scale.
// The logistic parameter vector matches LogisticModel::coefficients. The
// proportional-odds vector is (alpha_0, u_1..u_{J-2}, slopes) with
// alpha_j = alpha_0 + sum_{i<=j} exp(u_i).
double logistic_loglik(const DesignMatrix& X, const std::vector<int>& z, const Eigen::VectorXd& beta);
Eigen::VectorXd logistic_gradient(const DesignMatrix& X, const std::vector<int>& z, const Eigen::VectorXd& beta);

double proportional_odds_loglik(const DesignMatrix& X, const std::vector<int>& y, std::size_t J,
                                const Eigen::VectorXd& theta);
Eigen::VectorXd proportional_odds_gradient(const DesignMatrix& X, const std::vector<int>& y, std::size_t J,
                                           const Eigen::VectorXd& theta);

// Cutpoints implied by a (alpha_0, u) block.
Eigen::VectorXd cutpoints_from_increments(const Eigen::VectorXd& theta, std::size_t J);

}  // namespace ordibound
