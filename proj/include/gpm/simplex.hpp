#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace gpm {

/// minimize c^T x subject to A x = b, x >= 0.
struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  double feasibility_residual = 0.0;  // max |A x - b|
  std::size_t pivots = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-11;
  double optimality_tol = 1e-11;  // reduced costs above -tol count as optimal
  double feasibility_tol = 1e-10;
  std::size_t max_pivots = 200000;
};

/// Dense two-phase tableau simplex. Pricing is Dantzig's rule, falling back
/// to Bland's smallest-index rule during runs of degenerate pivots, so
/// degenerate problems cannot cycle. Redundant equality rows are tolerated.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace gpm
