#include "ordibound/transport.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ordibound/error.hpp"

namespace ordibound {

namespace {

// Simplex tableau for  min c.x  s.t.  A x = b, x >= 0, b >= 0, with one
// artificial column per constraint appended after the structural columns.
// Row m holds the reduced costs; the last column holds the right-hand side.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t structural)
      : m_(rows), n_(structural), width_(structural + rows + 1),
        cells_((rows + 1) * width_, 0.0), basis_(rows) {
    for (std::size_t i = 0; i < m_; ++i) {
      at(i, n_ + i) = 1.0;
      basis_[i] = n_ + i;
    }
  }

  double& at(std::size_t r, std::size_t c) { return cells_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return cells_[r * width_ + c]; }
  double& rhs(std::size_t r) { return at(r, width_ - 1); }
  double rhs(std::size_t r) const { return at(r, width_ - 1); }
  double& reduced(std::size_t c) { return at(m_, c); }

  std::size_t rows() const { return m_; }
  std::size_t structural() const { return n_; }
  std::size_t basic(std::size_t r) const { return basis_[r]; }

  // Loads reduced costs for the objective `cost` (length n + m).
  void set_objective(const std::vector<double>& cost) {
    for (std::size_t c = 0; c + 1 < width_; ++c) {
      double d = cost[c];
      for (std::size_t r = 0; r < m_; ++r) d -= cost[basis_[r]] * at(r, c);
      reduced(c) = d;
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c < width_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double factor = at(r, pc);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) at(r, c) -= factor * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  // Bland's rule; entering columns restricted to [0, allowed).
  // Returns the number of pivots performed.
  int optimize(std::size_t allowed, int max_iterations) {
    int iterations = 0;
    for (;;) {
      std::size_t entering = allowed;
      for (std::size_t c = 0; c < allowed; ++c) {
        if (reduced(c) < -kPivotTolerance) {
          entering = c;
          break;
        }
      }
      if (entering == allowed) return iterations;

      std::size_t leaving = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, entering);
        if (a <= kPivotTolerance) continue;
        const double ratio = std::max(rhs(r), 0.0) / a;
        const double tie = 1e-14 * (1.0 + ratio);
        if (leaving == m_ || ratio < best_ratio - tie ||
            (ratio <= best_ratio + tie && basis_[r] < basis_[leaving])) {
          best_ratio = ratio;
          leaving = r;
        }
      }
      if (leaving == m_) {
        throw Error(ErrorKind::Unbounded, "simplex found an unbounded direction");
      }
      pivot(leaving, entering);
      if (++iterations > max_iterations) {
        throw Error(ErrorKind::Unbounded, "simplex exceeded its iteration limit");
      }
    }
  }

 private:
  std::size_t m_, n_, width_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
};

void check_masses(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x) || x < -kIdentityTolerance) {
      throw Error(ErrorKind::Infeasible, std::string(what) + " contain a negative or non-finite mass");
    }
  }
}

}  // namespace

TransportSolution solve_transport(const TransportProblem& problem) {
  const std::size_t R = problem.supplies.size();
  const std::size_t C = problem.demands.size();
  if (R == 0 || C == 0 || problem.costs.size() != R * C) {
    throw Error(ErrorKind::Infeasible, "transport problem has inconsistent dimensions");
  }
  check_masses(problem.supplies, "supplies");
  check_masses(problem.demands, "demands");
  for (double c : problem.costs) {
    if (!std::isfinite(c)) throw Error(ErrorKind::Infeasible, "costs must be finite");
  }
  const double supply_total = std::accumulate(problem.supplies.begin(), problem.supplies.end(), 0.0);
  const double demand_total = std::accumulate(problem.demands.begin(), problem.demands.end(), 0.0);
  if (std::abs(supply_total - demand_total) > kOracleTolerance) {
    throw Error(ErrorKind::Infeasible, "supplies and demands have different totals");
  }

  // Row constraints, then all but the last column constraint (rank R + C - 1).
  const std::size_t n = R * C;
  const std::size_t m = R + C - 1;
  Tableau tab(m, n);
  for (std::size_t k = 0; k < R; ++k) {
    for (std::size_t l = 0; l < C; ++l) {
      tab.at(k, k * C + l) = 1.0;
      if (l + 1 < C) tab.at(R + l, k * C + l) = 1.0;
    }
    tab.rhs(k) = std::max(problem.supplies[k], 0.0);
  }
  for (std::size_t l = 0; l + 1 < C; ++l) tab.rhs(R + l) = std::max(problem.demands[l], 0.0);

  const int max_iterations = static_cast<int>(50 * (n + m) + 100);

  // Phase 1: drive the artificials to zero.
  std::vector<double> phase1(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = 1.0;
  tab.set_objective(phase1);
  int iterations = tab.optimize(n + m, max_iterations);

  double infeasibility = 0.0;
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basic(r) >= n) infeasibility += std::max(tab.rhs(r), 0.0);
  if (infeasibility > kOracleTolerance) {
    throw Error(ErrorKind::Infeasible, "no plan meets the marginal constraints");
  }
  // Pivot degenerate artificials out of the basis where possible.
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basic(r) < n) continue;
    for (std::size_t c = 0; c < n; ++c) {
      if (std::abs(tab.at(r, c)) > kPivotTolerance) {
        tab.pivot(r, c);
        ++iterations;
        break;
      }
    }
  }

  // Phase 2 always minimizes internally.
  const double sign = problem.sense == Sense::Maximize ? -1.0 : 1.0;
  std::vector<double> phase2(n + m, 0.0);
  for (std::size_t c = 0; c < n; ++c) phase2[c] = sign * problem.costs[c];
  tab.set_objective(phase2);
  iterations += tab.optimize(n, max_iterations);

  TransportSolution sol;
  sol.iterations = iterations;
  sol.plan.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basic(r) < n) {
      double v = tab.rhs(r);
      if (v < 0.0 && v >= -kIdentityTolerance) v = 0.0;
      sol.plan[tab.basic(r)] = v;
    }
  }
  sol.objective = 0.0;
  for (std::size_t c = 0; c < n; ++c) sol.objective += problem.costs[c] * sol.plan[c];

  // Duals y = c_B B^{-1}; B^{-1} sits in the artificial columns.
  std::vector<double> duals(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double y = 0.0;
    for (std::size_t r = 0; r < m; ++r) y += phase2[tab.basic(r)] * tab.at(r, n + i);
    duals[i] = sign * y;
  }
  sol.row_potentials.assign(duals.begin(), duals.begin() + static_cast<long>(R));
  sol.col_potentials.assign(duals.begin() + static_cast<long>(R), duals.end());
  sol.col_potentials.push_back(0.0);
  return sol;
}

std::vector<double> gamma_costs(std::size_t J) {
  std::vector<double> costs(J * J, 0.0);
  for (std::size_t k = 0; k < J; ++k)
    for (std::size_t l = 0; l < J; ++l) costs[k * J + l] = k > l ? 1.0 : (k < l ? -1.0 : 0.0);
  return costs;
}

LpBounds lp_gamma_bounds(const MarginalDistribution& p1, const MarginalDistribution& p0) {
  if (p1.categories() != p0.categories()) {
    throw Error(ErrorKind::MarginalShapeMismatch, "marginals have different numbers of categories");
  }
  TransportProblem problem;
  problem.supplies.assign(p1.probs().begin(), p1.probs().end());
  problem.demands.assign(p0.probs().begin(), p0.probs().end());
  problem.costs = gamma_costs(p1.categories());
  problem.sense = Sense::Maximize;
  const double upper = solve_transport(problem).objective;
  problem.sense = Sense::Minimize;
  const double lower = solve_transport(problem).objective;
  return {lower, upper};
}

}  // namespace ordibound
