#include "gpm/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gpm {

namespace {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, double tol)
      : m_(static_cast<std::size_t>(lp.A.rows())),
        n_(static_cast<std::size_t>(lp.A.cols())),
        width_(n_ + m_ + 1),
        t_(m_ * width_, 0.0),
        cost_(width_, 0.0),
        basis_(m_),
        tol_(tol) {
    original_.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(width_));
    original_.setZero();
    for (std::size_t r = 0; r < m_; ++r) {
      const double sign = lp.b(static_cast<Eigen::Index>(r)) < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) {
        at(r, j) = sign * lp.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      }
      at(r, n_ + r) = 1.0;
      at(r, width_ - 1) = sign * lp.b(static_cast<Eigen::Index>(r));
      basis_[r] = n_ + r;
    }
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < width_; ++j) {
        original_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = at(r, j);
      }
    }
  }

  // Rebuilds the tableau as B^-1 [A | I | b] from the original data for the
  // current basis, discarding the rounding accumulated by pivoting.
  void reinvert() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd basis(m, m);
    for (std::size_t r = 0; r < m_; ++r) basis.col(static_cast<Eigen::Index>(r)) = original_.col(static_cast<Eigen::Index>(basis_[r]));
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    if (!(std::abs(lu.determinant()) > 0.0)) return;
    const Eigen::MatrixXd fresh = lu.solve(original_);
    if (!fresh.allFinite()) return;
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < width_; ++j) at(r, j) = fresh(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      at(r, basis_[r]) = 1.0;
    }
    price(objective_);
  }

  double& at(std::size_t r, std::size_t j) { return t_[r * width_ + j]; }
  double at(std::size_t r, std::size_t j) const { return t_[r * width_ + j]; }
  double rhs(std::size_t r) const { return at(r, width_ - 1); }

  // Reduced costs for objective `c`; the last entry holds -objective.
  void price(const std::vector<double>& c) {
    objective_ = c;
    for (std::size_t j = 0; j < width_; ++j) {
      double z = j + 1 < width_ ? c[j] : 0.0;
      for (std::size_t r = 0; r < m_; ++r) z -= c[basis_[r]] * at(r, j);
      cost_[j] = z;
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row, col);
    for (std::size_t j = 0; j < width_; ++j) at(row, j) /= p;
    at(row, col) = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == row) continue;
      const double f = at(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(r, j) -= f * at(row, j);
      at(r, col) = 0.0;
    }
    const double f = cost_[col];
    if (f != 0.0) {
      for (std::size_t j = 0; j < width_; ++j) cost_[j] -= f * at(row, j);
      cost_[col] = 0.0;
    }
    basis_[row] = col;
  }

  // Dantzig pricing (most negative reduced cost) with a switch to Bland's
  // smallest-index rule after a run of degenerate pivots, and back after the
  // next step that moves the objective. Bland's phase guarantees termination.
  LpStatus run(std::size_t eligible, std::size_t max_pivots, double cost_tol, std::size_t& pivots) {
    constexpr std::size_t kDegenerateRun = 50;
    constexpr std::size_t kReinvertEvery = 100;
    std::size_t degenerate = 0;
    for (;;) {
      const bool bland = degenerate >= kDegenerateRun;
      std::size_t enter = eligible;
      double most_negative = -cost_tol;
      for (std::size_t j = 0; j < eligible; ++j) {
        if (cost_[j] < most_negative) {
          enter = j;
          if (bland) break;
          most_negative = cost_[j];
        }
      }
      if (enter == eligible) return LpStatus::optimal;

      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a <= tol_) continue;
        const double ratio = std::max(0.0, rhs(r)) / a;
        if (leave == m_ || ratio < best - tol_) {
          best = ratio;
          leave = r;
        } else if (std::abs(ratio - best) <= tol_) {
          const bool prefer = bland ? basis_[r] < basis_[leave] : a > at(leave, enter);
          if (prefer) {
            best = std::min(best, ratio);
            leave = r;
          }
        }
      }
      if (leave == m_) return LpStatus::unbounded;
      if (pivots++ >= max_pivots) return LpStatus::iteration_limit;
      degenerate = best * std::abs(cost_[enter]) <= tol_ ? degenerate + 1 : 0;
      pivot(leave, enter);
      if (pivots % kReinvertEvery == 0) reinvert();
    }
  }

  // Pivot artificial variables out of the basis on the largest available
  // original column; rows with no such column are redundant and stay inert.
  void expel_artificials(double threshold) {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      std::size_t best = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(at(r, j)) > threshold && (best == n_ || std::abs(at(r, j)) > std::abs(at(r, best)))) best = j;
      }
      if (best < n_) pivot(r, best);
    }
  }

  double cost(std::size_t j) const { return cost_[j]; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::size_t basis(std::size_t r) const { return basis_[r]; }

 private:
  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<double> t_;
  std::vector<double> cost_;
  std::vector<double> objective_;
  std::vector<std::size_t> basis_;
  double tol_;
  Eigen::MatrixXd original_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  if (lp.A.rows() != lp.b.size() || lp.A.cols() != lp.c.size()) {
    throw std::invalid_argument("solve_lp: inconsistent problem dimensions");
  }
  const std::size_t m = static_cast<std::size_t>(lp.A.rows());
  const std::size_t n = static_cast<std::size_t>(lp.A.cols());
  Tableau tab(lp, options.pivot_tol);
  LpSolution out;

  std::vector<double> phase1(n + m + 1, 0.0);
  for (std::size_t r = 0; r < m; ++r) phase1[n + r] = 1.0;
  tab.price(phase1);
  LpStatus status = tab.run(n + m, options.max_pivots, options.optimality_tol, out.pivots);
  if (status == LpStatus::iteration_limit) {
    out.status = status;
    return out;
  }
  tab.reinvert();
  double infeasibility = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis(r) >= n) infeasibility += tab.rhs(r);
  }
  if (infeasibility > options.feasibility_tol * (1.0 + lp.b.cwiseAbs().sum())) {
    out.status = LpStatus::infeasible;
    return out;
  }

  tab.expel_artificials(options.feasibility_tol);
  std::vector<double> phase2(n + m + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = lp.c(static_cast<Eigen::Index>(j));
  tab.price(phase2);
  status = tab.run(n, options.max_pivots, options.optimality_tol * (1.0 + lp.c.cwiseAbs().maxCoeff()), out.pivots);
  out.status = status;
  if (status != LpStatus::optimal) return out;
  tab.reinvert();

  out.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis(r) < n) out.x(static_cast<Eigen::Index>(tab.basis(r))) = std::max(0.0, tab.rhs(r));
  }
  out.objective = lp.c.dot(out.x);
  out.feasibility_residual = (lp.A * out.x - lp.b).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace gpm
