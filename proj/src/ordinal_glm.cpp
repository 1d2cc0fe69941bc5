#include "ordibound/ordinal_glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ordibound/error.hpp"

namespace ordibound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Linear predictors this far from zero mean a fitted probability within
// 1e-13 of 0 or 1, which a finite MLE does not produce.
constexpr double kSeparationPredictor = 30.0;
constexpr double kRankTolerance = 1e-10;

double invlogit(double t) {
  if (t == kInf) return 1.0;
  if (t == -kInf) return 0.0;
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// logistic density F(1-F)
double logistic_density(double t) {
  if (std::isinf(t)) return 0.0;
  const double F = invlogit(t);
  return F * (1.0 - F);
}

// derivative of the density
double logistic_density_slope(double t) {
  if (std::isinf(t)) return 0.0;
  const double F = invlogit(t);
  return F * (1.0 - F) * (1.0 - 2.0 * F);
}

double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// F(a) - F(b) for a >= b without cancellation in either tail.
double cell_probability(double a, double b) {
  if (a <= 0) return invlogit(a) - invlogit(b);
  if (b >= 0) return invlogit(-b) - invlogit(-a);
  return 1.0 - invlogit(-a) - invlogit(b);
}

void require_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw Error(ErrorKind::DegenerateDesign, "design matrix has non-finite entries");
}

// Column centering and scaling used only inside the fits.
struct Standardizer {
  Eigen::VectorXd center, scale;

  Standardizer(const Eigen::MatrixXd& X, bool centered) {
    const Eigen::Index d = X.cols();
    const double n = static_cast<double>(X.rows());
    center = Eigen::VectorXd::Zero(d);
    scale = Eigen::VectorXd::Ones(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (centered) center(j) = X.col(j).mean();
      const double s = std::sqrt((X.col(j).array() - center(j)).square().sum() / n);
      if (!(s > 0)) {
        throw Error(ErrorKind::DegenerateDesign,
                    "covariate column " + std::to_string(j) + " is constant and collinear with the intercept");
      }
      scale(j) = s;
    }
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array();
  }
};

void require_full_rank(const Eigen::MatrixXd& A) {
  if (A.cols() == 0) return;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < A.cols()) {
    throw Error(ErrorKind::DegenerateDesign, "design is rank deficient (rank " + std::to_string(qr.rank()) +
                                                 " of " + std::to_string(A.cols()) + ")");
  }
}

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd information;  // positive semidefinite curvature for the Newton step
};

struct NewtonOutcome {
  Eigen::VectorXd theta;
  double loglik = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

double gradient_tolerance(double loglik) { return kGradientTolerance * (1.0 + std::abs(loglik)); }

// Damped Newton ascent. `eval(theta, full)` returns the log-likelihood and,
// when `full` is set, the gradient and information matrix. `norm_mask`
// selects the coordinates whose size signals divergence.
template <typename Eval>
NewtonOutcome newton_maximize(Eigen::VectorXd theta, Eval&& eval, const Eigen::VectorXd& norm_mask) {
  NewtonOutcome out;
  Evaluation cur = eval(theta, true);
  out.trace.push_back(cur.loglik);
  // Roundoff allowance when comparing log-likelihoods of nearby iterates.
  auto accepts = [](double candidate, double current) {
    return candidate >= current - 1e-14 * (1.0 + std::abs(current));
  };
  auto newton_step = [&](const Evaluation& e) {
    Eigen::MatrixXd H = e.information;
    H.diagonal().array() += kHessianRidge;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::DegenerateDesign, "singular Hessian beyond ridge");
    Eigen::VectorXd step = llt.solve(e.gradient);
    if (!step.allFinite()) throw Error(ErrorKind::DegenerateDesign, "singular Hessian beyond ridge");
    return step;
  };

  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const double gnorm = cur.gradient.norm();
    if (gnorm <= gradient_tolerance(cur.loglik)) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd step = newton_step(cur);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxStepHalvings; ++h, t *= 0.5) {
      const Eigen::VectorXd cand = theta + t * step;
      const double ll = eval(cand, false).loglik;
      if (std::isfinite(ll) && accepts(ll, cur.loglik)) {
        theta = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorKind::Separation, "step-halving failed to increase the likelihood " +
                                             std::to_string(kMaxStepHalvings) + " times");
    }
    ++out.iterations;
    cur = eval(theta, true);
    out.trace.push_back(cur.loglik);
    if (theta.cwiseProduct(norm_mask).norm() > kCoefficientNormLimit) {
      throw Error(ErrorKind::Separation, "coefficient norm exceeds 1e6");
    }
  }
  if (out.converged) {
    // One extra full step sharpens the optimum well below the stopping tolerance.
    const Eigen::VectorXd cand = theta + newton_step(cur);
    const Evaluation polished = eval(cand, true);
    if (std::isfinite(polished.loglik) && accepts(polished.loglik, cur.loglik) &&
        polished.gradient.norm() <= cur.gradient.norm()) {
      theta = cand;
      cur = polished;
      out.trace.push_back(cur.loglik);
    }
  } else {
    out.converged = cur.gradient.norm() <= gradient_tolerance(cur.loglik);
  }
  out.theta = theta;
  out.loglik = cur.loglik;
  out.gradient_norm = cur.gradient.norm();
  return out;
}

// ---- logistic ----

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X, bool intercept) {
  if (!intercept) return X;
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  return A;
}

Evaluation logistic_eval(const Eigen::MatrixXd& A, const Eigen::VectorXd& zv, const Eigen::VectorXd& beta,
                         bool full) {
  Evaluation e;
  const Eigen::VectorXd eta = A * beta;
  for (Eigen::Index i = 0; i < eta.size(); ++i) e.loglik += zv(i) * eta(i) - log1pexp(eta(i));
  if (!full) return e;
  Eigen::VectorXd p(eta.size()), w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    p(i) = invlogit(eta(i));
    w(i) = p(i) * (1.0 - p(i));
  }
  e.gradient = A.transpose() * (zv - p);
  e.information = A.transpose() * w.asDiagonal() * A;
  return e;
}

Eigen::VectorXd indicator_vector(const std::vector<int>& z) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] != 0 && z[i] != 1) throw Error(ErrorKind::DimensionMismatch, "treatment indicator must be 0 or 1");
    v(static_cast<Eigen::Index>(i)) = z[i];
  }
  return v;
}

// ---- proportional odds ----

// theta = (alpha_0, u_1..u_{K-2}, beta). Returns the K-1 cutpoints.
Eigen::VectorXd increments_to_cutpoints(const Eigen::VectorXd& theta, Eigen::Index K) {
  Eigen::VectorXd alpha(K - 1);
  alpha(0) = theta(0);
  for (Eigen::Index j = 1; j < K - 1; ++j) alpha(j) = alpha(j - 1) + std::exp(theta(j));
  return alpha;
}

// Log-likelihood, gradient and information in the increment parameterization.
// The information is J' (-H_raw) J where H_raw is the (concave) Hessian in
// raw cutpoints and slopes; the term involving the raw gradient is dropped,
// which keeps the matrix positive semidefinite and vanishes at the optimum.
Evaluation po_eval(const Eigen::MatrixXd& X, const std::vector<int>& y, Eigen::Index K,
                   const Eigen::VectorXd& theta, bool full) {
  const Eigen::Index d = X.cols();
  const Eigen::Index q = K - 1;  // raw cutpoint count
  const Eigen::VectorXd alpha = increments_to_cutpoints(theta, K);
  const Eigen::VectorXd beta = theta.tail(d);
  Evaluation e;
  Eigen::VectorXd graw;
  Eigen::MatrixXd Hraw;
  if (full) {
    graw = Eigen::VectorXd::Zero(q + d);
    Hraw = Eigen::MatrixXd::Zero(q + d, q + d);
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double eta = d ? X.row(i).dot(beta) : 0.0;
    const Eigen::Index k = y[static_cast<std::size_t>(i)];
    const double a = k < q ? alpha(k) - eta : kInf;
    const double b = k > 0 ? alpha(k - 1) - eta : -kInf;
    const double p = std::max(cell_probability(a, b), std::numeric_limits<double>::min());
    e.loglik += std::log(p);
    if (!full) continue;

    const double fa = logistic_density(a), fb = logistic_density(b);
    const double ga = logistic_density_slope(a), gb = logistic_density_slope(b);
    // local coordinates: r = alpha_k, s = alpha_{k-1}, t = eta
    const double v[3] = {fa, -fb, fb - fa};
    const double second[3][3] = {{ga, 0.0, -ga}, {0.0, -gb, gb}, {-ga, gb, ga - gb}};
    double h[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) h[r][c] = second[r][c] / p - v[r] * v[c] / (p * p);

    const Eigen::Index idx[2] = {k < q ? k : -1, k > 0 ? k - 1 : -1};
    for (int r = 0; r < 2; ++r) {
      if (idx[r] < 0) continue;
      graw(idx[r]) += v[r] / p;
      for (int c = 0; c < 2; ++c)
        if (idx[c] >= 0) Hraw(idx[r], idx[c]) += h[r][c];
      if (d) {
        Hraw.block(idx[r], q, 1, d) += h[r][2] * X.row(i);
        Hraw.block(q, idx[r], d, 1) += h[2][r] * X.row(i).transpose();
      }
    }
    if (d) {
      graw.tail(d) += (v[2] / p) * X.row(i).transpose();
      Hraw.bottomRightCorner(d, d) += h[2][2] * X.row(i).transpose() * X.row(i);
    }
  }
  if (!full) return e;

  Eigen::MatrixXd Jac = Eigen::MatrixXd::Zero(q + d, q + d);
  for (Eigen::Index j = 0; j < q; ++j) {
    Jac(j, 0) = 1.0;
    for (Eigen::Index u = 1; u <= j; ++u) Jac(j, u) = std::exp(theta(u));
  }
  if (d) Jac.bottomRightCorner(d, d).setIdentity();
  e.gradient = Jac.transpose() * graw;
  e.information = -(Jac.transpose() * Hraw * Jac);
  return e;
}

void check_categories(const std::vector<int>& y, std::size_t J) {
  for (int v : y) {
    if (v < 0 || static_cast<std::size_t>(v) >= J)
      throw Error(ErrorKind::DimensionMismatch, "category " + std::to_string(v) + " outside 0.." +
                                                    std::to_string(J - 1));
  }
}

void check_rows(const DesignMatrix& X, std::size_t n) {
  if (X.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "design has " + std::to_string(X.rows()) + " rows but " +
                                                  std::to_string(n) + " responses were given");
  }
}

}  // namespace

double logistic_loglik(const DesignMatrix& X, const std::vector<int>& z, const Eigen::VectorXd& beta) {
  check_rows(X, z.size());
  return logistic_eval(with_intercept(X.values, X.includes_intercept), indicator_vector(z), beta, false).loglik;
}

Eigen::VectorXd logistic_gradient(const DesignMatrix& X, const std::vector<int>& z, const Eigen::VectorXd& beta) {
  check_rows(X, z.size());
  return logistic_eval(with_intercept(X.values, X.includes_intercept), indicator_vector(z), beta, true).gradient;
}

LogisticModel fit_logistic(const DesignMatrix& X, const std::vector<int>& z) {
  check_rows(X, z.size());
  require_finite(X.values);
  const Eigen::VectorXd zv = indicator_vector(z);
  const double treated = zv.sum();
  if (treated == 0.0 || treated == static_cast<double>(z.size())) {
    throw Error(ErrorKind::Separation, "only one treatment class present; the logistic MLE does not exist");
  }
  if (X.rows() < X.parameters()) {
    throw Error(ErrorKind::DegenerateDesign, "fewer rows than logistic coefficients");
  }
  const Standardizer st(X.values, X.includes_intercept);
  const Eigen::MatrixXd A = with_intercept(st.apply(X.values), X.includes_intercept);
  require_full_rank(A);

  const Eigen::Index p = A.cols();
  const auto eval = [&](const Eigen::VectorXd& b, bool full) { return logistic_eval(A, zv, b, full); };
  const NewtonOutcome fit = newton_maximize(Eigen::VectorXd::Zero(p), eval, Eigen::VectorXd::Ones(p));
  const Eigen::VectorXd eta = A * fit.theta;
  if (p > 0 && eta.cwiseAbs().maxCoeff() > kSeparationPredictor) {
    throw Error(ErrorKind::Separation, "fitted propensities reach 0 or 1; the data are separated");
  }
  // A fit that classifies every unit strictly correctly is itself a separating
  // hyperplane, so no finite maximizer exists.
  if (p > 0 && ((2.0 * zv.array() - 1.0) * eta.array()).minCoeff() > 0.0) {
    throw Error(ErrorKind::Separation, "the fitted index separates treated from control units");
  }

  LogisticModel model;
  model.includes_intercept = X.includes_intercept;
  model.coefficients = fit.theta;
  const Eigen::Index off = X.includes_intercept ? 1 : 0;
  for (Eigen::Index j = 0; j < X.values.cols(); ++j) {
    model.coefficients(off + j) = fit.theta(off + j) / st.scale(j);
    if (off) model.coefficients(0) -= model.coefficients(off + j) * st.center(j);
  }
  model.converged = fit.converged;
  model.iterations = fit.iterations;
  model.final_gradient_norm = fit.gradient_norm;
  model.loglik = fit.loglik;
  model.loglik_trace = fit.trace;
  return model;
}

Eigen::VectorXd predict_propensity(const LogisticModel& model, const DesignMatrix& X) {
  const Eigen::Index expected = model.coefficients.size() - (model.includes_intercept ? 1 : 0);
  if (X.values.cols() != expected) {
    throw Error(ErrorKind::DimensionMismatch, "propensity model expects " + std::to_string(expected) +
                                                  " covariates, got " + std::to_string(X.values.cols()));
  }
  const Eigen::VectorXd eta = with_intercept(X.values, model.includes_intercept) * model.coefficients;
  Eigen::VectorXd e(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    e(i) = std::clamp(invlogit(eta(i)), kPropensityClip, 1.0 - kPropensityClip);
  return e;
}

Eigen::VectorXd cutpoints_from_increments(const Eigen::VectorXd& theta, std::size_t J) {
  if (J < 2 || theta.size() < static_cast<Eigen::Index>(J - 1))
    throw Error(ErrorKind::DimensionMismatch, "parameter vector too short for the category count");
  return increments_to_cutpoints(theta, static_cast<Eigen::Index>(J));
}

double proportional_odds_loglik(const DesignMatrix& X, const std::vector<int>& y, std::size_t J,
                                const Eigen::VectorXd& theta) {
  check_rows(X, y.size());
  check_categories(y, J);
  if (theta.size() != static_cast<Eigen::Index>(J - 1 + X.cols()))
    throw Error(ErrorKind::DimensionMismatch, "parameter vector has the wrong length");
  return po_eval(X.values, y, static_cast<Eigen::Index>(J), theta, false).loglik;
}

Eigen::VectorXd proportional_odds_gradient(const DesignMatrix& X, const std::vector<int>& y, std::size_t J,
                                           const Eigen::VectorXd& theta) {
  check_rows(X, y.size());
  check_categories(y, J);
  if (theta.size() != static_cast<Eigen::Index>(J - 1 + X.cols()))
    throw Error(ErrorKind::DimensionMismatch, "parameter vector has the wrong length");
  return po_eval(X.values, y, static_cast<Eigen::Index>(J), theta, true).gradient;
}

ProportionalOddsModel fit_proportional_odds(const DesignMatrix& X, const std::vector<int>& y, std::size_t J) {
  check_rows(X, y.size());
  if (J < 2) throw Error(ErrorKind::DimensionMismatch, "at least two categories are required");
  check_categories(y, J);
  require_finite(X.values);
  if (y.empty()) throw Error(ErrorKind::SingleCategory, "no observations");
  const int lo = *std::min_element(y.begin(), y.end());
  const int hi = *std::max_element(y.begin(), y.end());
  if (lo == hi) throw Error(ErrorKind::SingleCategory, "all outcomes fall in category " + std::to_string(lo));

  // Fit on the observed range; categories outside it have no mass to estimate.
  const Eigen::Index K = hi - lo + 1;
  const Eigen::Index d = X.values.cols();
  if (X.values.rows() < K - 1 + d) throw Error(ErrorKind::DegenerateDesign, "fewer rows than parameters");
  std::vector<int> yk(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yk[i] = y[i] - lo;

  const Standardizer st(X.values, true);
  const Eigen::MatrixXd Xs = st.apply(X.values);
  if (d) {
    Eigen::MatrixXd A(Xs.rows(), d + 1);
    A.col(0).setOnes();
    A.rightCols(d) = Xs;
    require_full_rank(A);
  }

  // Start from smoothed marginal cumulative logits.
  std::vector<double> counts(static_cast<std::size_t>(K), 0.0);
  for (int v : yk) counts[static_cast<std::size_t>(v)] += 1.0;
  const double n = static_cast<double>(y.size());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(K - 1 + d);
  double cum = 0.0, prev = 0.0;
  for (Eigen::Index j = 0; j < K - 1; ++j) {
    cum += counts[static_cast<std::size_t>(j)];
    const double c = (cum + 0.5) / (n + 1.0);
    const double a = std::log(c / (1.0 - c));
    if (j == 0) theta(0) = a;
    else theta(j) = std::log(std::max(a - prev, 1e-3));
    prev = j == 0 ? a : prev + std::exp(theta(j));
  }

  Eigen::VectorXd mask = Eigen::VectorXd::Zero(K - 1 + d);
  mask(0) = 1.0;
  mask.tail(d).setOnes();
  const auto eval = [&](const Eigen::VectorXd& t, bool full) { return po_eval(Xs, yk, K, t, full); };
  const NewtonOutcome fit = newton_maximize(theta, eval, mask);
  if (d && (Xs * fit.theta.tail(d)).cwiseAbs().maxCoeff() > kSeparationPredictor) {
    throw Error(ErrorKind::Separation, "fitted category probabilities reach 0 or 1; the data are separated");
  }

  ProportionalOddsModel model;
  model.slopes = fit.theta.tail(d).cwiseQuotient(st.scale);
  const double shift = d ? model.slopes.dot(st.center) : 0.0;
  const Eigen::VectorXd inner = increments_to_cutpoints(fit.theta, K);
  model.cutpoints.resize(static_cast<Eigen::Index>(J - 1));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(J - 1); ++j) {
    if (j < lo) model.cutpoints(j) = -kInf;
    else if (j >= hi) model.cutpoints(j) = kInf;
    else model.cutpoints(j) = inner(j - lo) + shift;
  }
  model.converged = fit.converged;
  model.iterations = fit.iterations;
  model.final_gradient_norm = fit.gradient_norm;
  model.loglik = fit.loglik;
  model.loglik_trace = fit.trace;
  return model;
}

Eigen::MatrixXd predict_category_probs(const ProportionalOddsModel& model, const DesignMatrix& X) {
  if (X.values.cols() != model.slopes.size()) {
    throw Error(ErrorKind::DimensionMismatch, "outcome model expects " + std::to_string(model.slopes.size()) +
                                                  " covariates, got " + std::to_string(X.values.cols()));
  }
  const Eigen::Index J = static_cast<Eigen::Index>(model.categories());
  Eigen::MatrixXd probs(X.values.rows(), J);
  for (Eigen::Index i = 0; i < X.values.rows(); ++i) {
    const double eta = model.slopes.size() ? X.values.row(i).dot(model.slopes) : 0.0;
    double total = 0.0;
    for (Eigen::Index k = 0; k < J; ++k) {
      const double a = k < J - 1 ? model.cutpoints(k) - eta : kInf;
      const double b = k > 0 ? model.cutpoints(k - 1) - eta : -kInf;
      probs(i, k) = a <= b ? 0.0 : std::max(0.0, cell_probability(a, b));
      total += probs(i, k);
    }
    probs.row(i) /= total;
  }
  return probs;
}

}  // namespace ordibound
