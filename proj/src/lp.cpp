#include "apxne/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "apxne/error.hpp"
#include "apxne/kernels.hpp"

namespace apxne::lp {

void LpProblem::validate() const {
  const std::size_t n = objective.size();
  if (lower.size() != n || upper.size() != n) {
    throw Error(ErrorCode::ValidationError, "bound vectors do not match objective size");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) {
      throw Error(ErrorCode::ValidationError, "variable " + std::to_string(j) + " has an infinite bound");
    }
    if (lower[j] > upper[j]) {
      throw Error(ErrorCode::ValidationError, "variable " + std::to_string(j) + " has lower > upper");
    }
  }
  for (const LpRow& row : rows) {
    for (const Entry& e : row.coeffs) {
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= n) {
        throw Error(ErrorCode::ValidationError, "row references variable out of range");
      }
    }
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Simplex {
 public:
  Simplex(const LpProblem& p, const LpOptions& o)
      : p_(p), opt_(o), n_(p.num_vars()), m_(p.num_rows()) {
    dense_.assign(static_cast<std::size_t>(n_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      for (const Entry& e : p.rows[r].coeffs) {
        dense_[static_cast<std::size_t>(e.index) * m_ + r] += e.value;
      }
      rhs_scale_ = std::max(rhs_scale_, std::fabs(p.rows[r].rhs));
    }
  }

  LpSolution run() {
    init_phase1();
    LpSolution sol;
    run_phase(sol);
    double infeas = 0.0;
    for (int k = 0; k < num_art_; ++k) infeas += value_[n_ + m_ + k];
    if (infeas > opt_.feasibility_tol * (1.0 + rhs_scale_)) {
      sol.status = LpStatus::Infeasible;
      compute_duals();
      sol.farkas.resize(m_);
      for (int r = 0; r < m_; ++r) sol.farkas[r] = std::max(0.0, -y_[r]);
      sol.iterations = iterations_;
      return sol;
    }
    for (int k = 0; k < num_art_; ++k) {
      const int col = n_ + m_ + k;
      upper_[col] = 0.0;
      cost_[col] = 0.0;
      if (pos_[col] < 0) value_[col] = 0.0;
    }
    drive_out_artificials();
    for (int j = 0; j < n_; ++j) cost_[j] = p_.objective[j];
    run_phase(sol);
    finish(sol);
    return sol;
  }

 private:
  int ncols() const { return n_ + m_ + num_art_; }
  std::span<double> binv_row(int r) {
    return {binv_.data() + static_cast<std::size_t>(r) * m_, static_cast<std::size_t>(m_)};
  }
  std::span<const double> dense_col(int j) const {
    return {dense_.data() + static_cast<std::size_t>(j) * m_, static_cast<std::size_t>(m_)};
  }

  void init_phase1() {
    lower_.assign(n_ + m_, 0.0);
    upper_.assign(n_ + m_, kInf);
    for (int j = 0; j < n_; ++j) {
      lower_[j] = p_.lower[j];
      upper_[j] = p_.upper[j];
    }
    value_.assign(n_ + m_, 0.0);
    state_.assign(n_ + m_, BasisState::AtLower);
    for (int j = 0; j < n_; ++j) value_[j] = lower_[j];

    head_.assign(m_, -1);
    art_row_.clear();
    std::vector<double> resid(m_);
    for (int r = 0; r < m_; ++r) {
      double ax = 0.0;
      for (const Entry& e : p_.rows[r].coeffs) ax += e.value * value_[e.index];
      resid[r] = p_.rows[r].rhs - ax;
    }
    for (int r = 0; r < m_; ++r) {
      if (resid[r] < -opt_.feasibility_tol) art_row_.push_back(r);
    }
    num_art_ = static_cast<int>(art_row_.size());
    lower_.resize(ncols(), 0.0);
    upper_.resize(ncols(), kInf);
    value_.resize(ncols(), 0.0);
    state_.resize(ncols(), BasisState::AtLower);
    cost_.assign(ncols(), 0.0);
    pos_.assign(ncols(), -1);
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);

    std::vector<int> art_of_row(m_, -1);
    for (int k = 0; k < num_art_; ++k) art_of_row[art_row_[k]] = k;
    for (int r = 0; r < m_; ++r) {
      if (art_of_row[r] >= 0) {
        const int col = n_ + m_ + art_of_row[r];
        set_basic(r, col);
        value_[col] = -resid[r];
        value_[n_ + r] = 0.0;
        cost_[col] = 1.0;
        binv_[static_cast<std::size_t>(r) * m_ + r] = -1.0;
      } else {
        set_basic(r, n_ + r);
        value_[n_ + r] = std::max(resid[r], 0.0);
        binv_[static_cast<std::size_t>(r) * m_ + r] = 1.0;
      }
    }
  }

  void set_basic(int row, int col) {
    head_[row] = col;
    pos_[col] = row;
    state_[col] = BasisState::Basic;
  }

  // Dense column of the full constraint matrix [A | I | -E_art].
  void load_column(int j, std::vector<double>& out) const {
    out.assign(m_, 0.0);
    if (j < n_) {
      auto c = dense_col(j);
      std::copy(c.begin(), c.end(), out.begin());
    } else if (j < n_ + m_) {
      out[j - n_] = 1.0;
    } else {
      out[art_row_[j - n_ - m_]] = -1.0;
    }
  }

  // B^{-1} a_j.
  void ftran(int j, std::vector<double>& out) {
    out.assign(m_, 0.0);
    if (j < n_) {
      auto c = dense_col(j);
      for (int r = 0; r < m_; ++r) out[r] = kernels::dot(binv_row(r), c);
    } else {
      const int unit = j < n_ + m_ ? j - n_ : art_row_[j - n_ - m_];
      const double sign = j < n_ + m_ ? 1.0 : -1.0;
      for (int r = 0; r < m_; ++r) out[r] = sign * binv_[static_cast<std::size_t>(r) * m_ + unit];
    }
  }

  void compute_duals() {
    y_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double cb = cost_[head_[r]];
      if (cb != 0.0) kernels::axpy(cb, binv_row(r), y_);
    }
  }

  double reduced_cost(int j) const {
    if (j < n_) return cost_[j] - kernels::dot(y_, dense_col(j));
    if (j < n_ + m_) return cost_[j] - y_[j - n_];
    return cost_[j] + y_[art_row_[j - n_ - m_]];
  }

  bool is_fixed(int j) const { return upper_[j] - lower_[j] <= 0.0; }

  // Returns the entering column and its direction (+1 increase, -1 decrease), or -1.
  int price(bool bland, double& direction) {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < ncols(); ++j) {
      if (state_[j] == BasisState::Basic || is_fixed(j)) continue;
      const double d = reduced_cost(j);
      double score = 0.0;
      double dir = 0.0;
      if (state_[j] == BasisState::AtLower && d < -opt_.optimality_tol) {
        score = -d;
        dir = 1.0;
      } else if (state_[j] == BasisState::AtUpper && d > opt_.optimality_tol) {
        score = d;
        dir = -1.0;
      } else {
        continue;
      }
      if (bland) {
        direction = dir;
        return j;
      }
      if (score > best_score) {
        best_score = score;
        best = j;
        direction = dir;
      }
    }
    return best;
  }

  void pivot(int row, const std::vector<double>& col) {
    const double piv = col[row];
    auto prow = binv_row(row);
    for (double& v : prow) v /= piv;
    for (int r = 0; r < m_; ++r) {
      if (r == row || col[r] == 0.0) continue;
      kernels::axpy(-col[r], prow, binv_row(r));
    }
  }

  void refactor() {
    // Gauss-Jordan inversion of the basis with partial pivoting.
    std::vector<double> basis(static_cast<std::size_t>(m_) * m_, 0.0);
    std::vector<double> colbuf;
    for (int r = 0; r < m_; ++r) {
      load_column(head_[r], colbuf);
      for (int i = 0; i < m_; ++i) basis[static_cast<std::size_t>(i) * m_ + r] = colbuf[i];
    }
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    auto row_of = [&](std::vector<double>& mat, int i) {
      return std::span<double>(mat.data() + static_cast<std::size_t>(i) * m_, static_cast<std::size_t>(m_));
    };
    for (int c = 0; c < m_; ++c) {
      int piv = c;
      double best = std::fabs(basis[static_cast<std::size_t>(c) * m_ + c]);
      for (int i = c + 1; i < m_; ++i) {
        const double v = std::fabs(basis[static_cast<std::size_t>(i) * m_ + c]);
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < 1e-13) throw Error(ErrorCode::NumericalFailure, "singular basis during refactorization");
      if (piv != c) {
        std::swap_ranges(row_of(basis, c).begin(), row_of(basis, c).end(), row_of(basis, piv).begin());
        std::swap_ranges(row_of(inv, c).begin(), row_of(inv, c).end(), row_of(inv, piv).begin());
      }
      const double d = basis[static_cast<std::size_t>(c) * m_ + c];
      for (double& v : row_of(basis, c)) v /= d;
      for (double& v : row_of(inv, c)) v /= d;
      for (int i = 0; i < m_; ++i) {
        if (i == c) continue;
        const double f = basis[static_cast<std::size_t>(i) * m_ + c];
        if (f == 0.0) continue;
        kernels::axpy(-f, row_of(basis, c), row_of(basis, i));
        kernels::axpy(-f, row_of(inv, c), row_of(inv, i));
      }
    }
    binv_ = std::move(inv);
    recompute_basic_values();
  }

  void recompute_basic_values() {
    std::vector<double> rhs(m_);
    for (int r = 0; r < m_; ++r) rhs[r] = p_.rows[r].rhs;
    for (int j = 0; j < ncols(); ++j) {
      if (state_[j] == BasisState::Basic || value_[j] == 0.0) continue;
      if (j < n_) {
        kernels::axpy(-value_[j], dense_col(j), rhs);
      } else if (j < n_ + m_) {
        rhs[j - n_] -= value_[j];
      } else {
        rhs[art_row_[j - n_ - m_]] += value_[j];
      }
    }
    for (int r = 0; r < m_; ++r) value_[head_[r]] = kernels::dot(binv_row(r), rhs);
  }

  void run_phase(LpSolution&) {
    int degenerate = 0;
    int since_refactor = 0;
    const int bland_after = 10 * (m_ + n_);
    bool bland = false;
    std::vector<double> col;
    for (int pass = 0;; ++pass) {
      while (true) {
        if (iterations_ >= opt_.max_iterations) {
          throw Error(ErrorCode::NumericalFailure, "simplex iteration limit reached");
        }
        compute_duals();
        double dir = 0.0;
        const int q = price(bland, dir);
        if (q < 0) break;
        ftran(q, col);

        // Two-pass (Harris) ratio test: bound the step with relaxed bounds,
        // then take the largest pivot among the rows that block within it.
        double bound_flip = upper_[q] - lower_[q];
        double relaxed = bound_flip;
        auto ratio_of = [&](int r, double slack_tol, bool& to_upper) {
          const double g = dir * col[r];
          const int b = head_[r];
          if (g > 0.0) {
            to_upper = false;
            return (value_[b] - lower_[b] + slack_tol) / g;
          }
          to_upper = true;
          if (upper_[b] == kInf) return kInf;
          return (upper_[b] - value_[b] + slack_tol) / (-g);
        };
        for (int r = 0; r < m_; ++r) {
          if (std::fabs(col[r]) <= opt_.pivot_tol) continue;
          bool to_upper;
          relaxed = std::min(relaxed, ratio_of(r, opt_.feasibility_tol, to_upper));
        }
        double t_max = bound_flip;
        int leave = -1;
        bool leave_to_upper = false;
        double best_piv = 0.0;
        if (relaxed < bound_flip) {
          for (int r = 0; r < m_; ++r) {
            const double g = std::fabs(col[r]);
            if (g <= opt_.pivot_tol) continue;
            bool to_upper;
            const double ratio = std::max(ratio_of(r, 0.0, to_upper), 0.0);
            if (ratio > relaxed) continue;
            const bool better = leave < 0 || (bland ? head_[r] < head_[leave] : g > best_piv);
            if (better) {
              t_max = ratio;
              leave = r;
              leave_to_upper = to_upper;
              best_piv = g;
            }
          }
        }
        if (t_max == kInf) throw Error(ErrorCode::NumericalFailure, "unbounded direction in bounded LP");

        ++iterations_;
        degenerate = t_max < 1e-12 ? degenerate + 1 : 0;
        if (degenerate > bland_after) bland = true;
        if (degenerate == 0) bland = false;

        value_[q] += dir * t_max;
        for (int r = 0; r < m_; ++r) {
          if (col[r] != 0.0) value_[head_[r]] -= dir * col[r] * t_max;
        }
        if (leave < 0) {
          // Bound flip.
          state_[q] = state_[q] == BasisState::AtLower ? BasisState::AtUpper : BasisState::AtLower;
          value_[q] = state_[q] == BasisState::AtLower ? lower_[q] : upper_[q];
          continue;
        }
        const int out = head_[leave];
        pivot(leave, col);
        pos_[out] = -1;
        state_[out] = leave_to_upper ? BasisState::AtUpper : BasisState::AtLower;
        value_[out] = leave_to_upper ? upper_[out] : lower_[out];
        set_basic(leave, q);
        if (++since_refactor >= opt_.refactor_every) {
          refactor();
          since_refactor = 0;
        }
      }
      // Confirm optimality on a fresh factorization.
      refactor();
      since_refactor = 0;
      compute_duals();
      double dir = 0.0;
      if (price(false, dir) < 0 || pass > 8) break;
    }
  }

  void drive_out_artificials() {
    std::vector<double> col;
    for (int r = 0; r < m_; ++r) {
      if (head_[r] < n_ + m_) continue;
      auto brow = binv_row(r);
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == BasisState::Basic || is_fixed(j)) continue;
        double v;
        if (j < n_) {
          v = kernels::dot(brow, dense_col(j));
        } else {
          v = brow[j - n_];
        }
        if (std::fabs(v) > best_abs) {
          best_abs = std::fabs(v);
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays basic at zero
      ftran(best, col);
      const int out = head_[r];
      pivot(r, col);
      pos_[out] = -1;
      state_[out] = BasisState::AtLower;
      value_[out] = 0.0;
      set_basic(r, best);
    }
    refactor();
  }

  void finish(LpSolution& sol) {
    sol.status = LpStatus::Optimal;
    sol.iterations = iterations_;
    sol.x.assign(value_.begin(), value_.begin() + n_);
    for (int j = 0; j < n_; ++j) sol.x[j] = std::clamp(sol.x[j], lower_[j], upper_[j]);
    sol.slack.resize(m_);
    for (int r = 0; r < m_; ++r) {
      double ax = 0.0;
      for (const Entry& e : p_.rows[r].coeffs) ax += e.value * sol.x[e.index];
      sol.slack[r] = p_.rows[r].rhs - ax;
    }
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += p_.objective[j] * sol.x[j];
    sol.var_state.assign(state_.begin(), state_.begin() + n_);
    sol.slack_state.assign(state_.begin() + n_, state_.begin() + n_ + m_);
    compute_duals();
    sol.duals = y_;
    sol.basic_head = head_;
    sol.basis_inverse = binv_;
  }

  const LpProblem& p_;
  LpOptions opt_;
  int n_;
  int m_;
  int num_art_ = 0;
  int iterations_ = 0;
  double rhs_scale_ = 0.0;
  std::vector<double> dense_;  // column-major m x n
  std::vector<double> lower_, upper_, value_, cost_, y_;
  std::vector<BasisState> state_;
  std::vector<int> head_, pos_, art_row_;
  std::vector<double> binv_;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  problem.validate();
  if (problem.num_rows() == 0) {
    // Pure box: every variable sits at its cheaper bound (lower on ties).
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    const int n = problem.num_vars();
    sol.x.resize(n);
    sol.var_state.resize(n);
    for (int j = 0; j < n; ++j) {
      const bool up = problem.objective[j] < 0.0;
      sol.x[j] = up ? problem.upper[j] : problem.lower[j];
      sol.var_state[j] = up ? BasisState::AtUpper : BasisState::AtLower;
      sol.objective += problem.objective[j] * sol.x[j];
    }
    return sol;
  }
  Simplex s(problem, options);
  return s.run();
}

std::vector<Ray> corner_rays(const LpProblem& problem, const LpSolution& solution) {
  const int n = problem.num_vars();
  const int m = problem.num_rows();
  if (solution.status != LpStatus::Optimal ||
      static_cast<int>(solution.var_state.size()) != n ||
      static_cast<int>(solution.basic_head.size()) != m ||
      solution.basis_inverse.size() != static_cast<std::size_t>(m) * m) {
    throw Error(ErrorCode::NotAVertex, "solution carries no optimal basis");
  }
  std::vector<double> dense_col(m);
  std::vector<double> tab(m);
  std::vector<Ray> rays;
  auto emit = [&](NonbasicRef ref, int structural_index) {
    const double dir = ref.at_upper ? -1.0 : 1.0;
    for (int r = 0; r < m; ++r) {
      std::span<const double> brow(solution.basis_inverse.data() + static_cast<std::size_t>(r) * m,
                                   static_cast<std::size_t>(m));
      tab[r] = structural_index >= 0 ? kernels::dot(brow, dense_col) : brow[ref.index];
    }
    Ray ray;
    ray.source = ref;
    ray.direction.assign(n, 0.0);
    if (structural_index >= 0) ray.direction[structural_index] = dir;
    for (int r = 0; r < m; ++r) {
      const int h = solution.basic_head[r];
      if (h < n) ray.direction[h] = -dir * tab[r];
    }
    rays.push_back(std::move(ray));
  };
  for (int j = 0; j < n; ++j) {
    if (solution.var_state[j] == BasisState::Basic) continue;
    if (problem.upper[j] - problem.lower[j] <= 1e-12) continue;
    std::fill(dense_col.begin(), dense_col.end(), 0.0);
    for (int r = 0; r < m; ++r) {
      for (const Entry& e : problem.rows[r].coeffs) {
        if (e.index == j) dense_col[r] += e.value;
      }
    }
    emit({NonbasicRef::Kind::Structural, j, solution.var_state[j] == BasisState::AtUpper}, j);
  }
  for (int r = 0; r < m; ++r) {
    if (solution.slack_state[r] == BasisState::Basic) continue;
    emit({NonbasicRef::Kind::Slack, r, false}, -1);
  }
  return rays;
}

}  // namespace apxne::lp
