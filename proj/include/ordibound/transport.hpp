#pragma once

// Dense two-phase simplex for small transportation problems.
//
// The sharp bounds are the optimal values of
//     max / min  sum_kl sign(k - l) p_kl
//     s.t.       row sums = p1, column sums = p0, p_kl >= 0,
// and this solver is the independent check on the closed forms.

#include <cstddef>
#include <vector>

#include "ordibound/core_bounds.hpp"

namespace ordibound {

enum class Sense { Maximize, Minimize };

struct TransportProblem {
  std::vector<double> supplies;  // row marginals
  std::vector<double> demands;   // column marginals
  std::vector<double> costs;     // supplies.size() x demands.size(), row-major
  Sense sense = Sense::Maximize;
};

struct TransportSolution {
  std::vector<double> plan;  // same shape as costs
  double objective = 0.0;
  int iterations = 0;
  // Optimal dual prices: objective == sum u_k s_k + sum v_l d_l, and
  // u_k + v_l >= c_kl (maximize) or <= c_kl (minimize) for every cell.
  std::vector<double> row_potentials;
  std::vector<double> col_potentials;
};

inline constexpr double kPivotTolerance = 1e-11;

// Throws Infeasible for mismatched totals or negative masses and Unbounded
// if the simplex ever detects an unbounded ray (an internal error here).
TransportSolution solve_transport(const TransportProblem& problem);

struct LpBounds {
  double lower = 0.0;
  double upper = 0.0;
};

LpBounds lp_gamma_bounds(const MarginalDistribution& p1, const MarginalDistribution& p0);

// sign(k - l) cost matrix for J categories.
std::vector<double> gamma_costs(std::size_t J);

}  // namespace ordibound
