#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clearn::milp::detail {

namespace {

double pow2_round(double s) { return std::exp2(std::round(std::log2(s))); }

}  // namespace

LpData::LpData(const MilpModel& model)
    : m(model.num_rows()), n(model.num_vars()) {
  a = Matrix::Zero(m, n);
  b.resize(m);
  sense.resize(m);
  for (int i = 0; i < m; ++i) {
    const Constraint& row = model.constraint(i);
    for (const Term& t : row.terms) a(i, t.var) += t.coef;
    b(i) = row.rhs;
    sense[i] = row.sense;
  }

  // Geometric-mean equilibration, rounded to powers of two.
  row_scale = Vector::Ones(m);
  col_scale = Vector::Ones(n);
  for (int pass = 0; pass < 4; ++pass) {
    for (int i = 0; i < m; ++i) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (int j = 0; j < n; ++j) {
        const double v = std::abs(a(i, j)) * col_scale(j);
        if (v > 0) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      row_scale(i) = hi > 0 ? 1.0 / std::sqrt(lo * hi) : 1.0;
    }
    for (int j = 0; j < n; ++j) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (int i = 0; i < m; ++i) {
        const double v = std::abs(a(i, j)) * row_scale(i);
        if (v > 0) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      col_scale(j) = hi > 0 ? 1.0 / std::sqrt(lo * hi) : 1.0;
    }
  }
  for (int i = 0; i < m; ++i) row_scale(i) = pow2_round(row_scale(i));
  for (int j = 0; j < n; ++j) col_scale(j) = pow2_round(col_scale(j));

  a = row_scale.asDiagonal() * a * col_scale.asDiagonal();
  b = row_scale.cwiseProduct(b);

  cost = Vector::Zero(n);
  for (const Term& t : model.objective().terms) cost(t.var) += t.coef;
  if (model.objective_sense() == ObjectiveSense::Maximize) cost = -cost;
  cost = cost.cwiseProduct(col_scale);
  const double cmax = cost.cwiseAbs().maxCoeff();
  cost_scale = (n > 0 && cmax > 0) ? cmax : 1.0;
  cost /= cost_scale;
}

namespace {

// Optimality found after this many eta updates is re-checked on a fresh
// factorization.
constexpr int kConfirmAfter = 25;

enum class State : unsigned char { Basic, Lower, Upper, Zero };

enum class Phase { One, Two };

class Simplex {
 public:
  Simplex(const LpData& data, const SolverConfig& config, Clock::time_point deadline)
      : d_(data), cfg_(config), deadline_(deadline), m_(data.m), n_(data.n) {}

  LpOutcome run(const Vector& lower, const Vector& upper);

 private:
  enum class Step { Optimal, Unbounded, Limit, Continue };

  int total() const { return n_ + 2 * m_; }
  bool is_artificial(int j) const { return j >= n_ + m_; }

  Vector ftran(int j) const {
    if (j < n_) return binv_ * d_.a.col(j);
    if (j < n_ + m_) return binv_.col(j - n_);
    return sigma_(j - n_ - m_) * binv_.col(j - n_ - m_);
  }

  double column_entry(int j, int i) const {
    if (j < n_) return d_.a(i, j);
    if (j < n_ + m_) return j - n_ == i ? 1.0 : 0.0;
    return j - n_ - m_ == i ? sigma_(i) : 0.0;
  }

  void initialize(const Vector& lower, const Vector& upper);
  Step iterate(const Vector& cost);
  void pivot(int row, int entering, const Vector& alpha);
  void refactor();
  void drive_out_artificials();
  bool timed_out() const { return Clock::now() > deadline_; }

  const LpData& d_;
  const SolverConfig& cfg_;
  Clock::time_point deadline_;
  int m_;
  int n_;

  Vector lb_, ub_, x_;
  Vector sigma_;
  std::vector<State> state_;
  std::vector<int> head_;
  Matrix binv_;
  long iterations_ = 0;
  int since_refactor_ = 0;
  bool infeasible_bounds_ = false;
};

void Simplex::initialize(const Vector& lower, const Vector& upper) {
  const int N = total();
  lb_.resize(N);
  ub_.resize(N);
  x_ = Vector::Zero(N);
  state_.assign(N, State::Lower);
  sigma_ = Vector::Ones(m_);

  for (int j = 0; j < n_; ++j) {
    const double s = d_.col_scale(j);
    lb_(j) = lower(j) / s;
    ub_(j) = upper(j) / s;
    if (lb_(j) > ub_(j)) {
      if (lb_(j) - ub_(j) <= cfg_.feasibility_tol) {
        ub_(j) = lb_(j);
      } else {
        infeasible_bounds_ = true;
      }
    }
    if (std::isfinite(lb_(j))) {
      state_[j] = State::Lower;
      x_(j) = lb_(j);
    } else if (std::isfinite(ub_(j))) {
      state_[j] = State::Upper;
      x_(j) = ub_(j);
    } else {
      state_[j] = State::Zero;
      x_(j) = 0.0;
    }
  }
  for (int i = 0; i < m_; ++i) {
    const int s = n_ + i;
    switch (d_.sense[i]) {
      case RowSense::LessEqual: lb_(s) = 0.0; ub_(s) = kInf; break;
      case RowSense::GreaterEqual: lb_(s) = -kInf; ub_(s) = 0.0; break;
      case RowSense::Equal: lb_(s) = 0.0; ub_(s) = 0.0; break;
    }
  }

  const Vector r = d_.b - d_.a * x_.head(n_);
  head_.assign(m_, -1);
  binv_ = Matrix::Identity(m_, m_);
  for (int i = 0; i < m_; ++i) {
    const int s = n_ + i;
    const int art = n_ + m_ + i;
    if (r(i) >= lb_(s) - cfg_.feasibility_tol && r(i) <= ub_(s) + cfg_.feasibility_tol) {
      head_[i] = s;
      state_[s] = State::Basic;
      x_(s) = r(i);
      lb_(art) = ub_(art) = 0.0;
      state_[art] = State::Lower;
      x_(art) = 0.0;
    } else {
      const bool below = r(i) < lb_(s);
      const double v = below ? lb_(s) : ub_(s);
      state_[s] = below ? State::Lower : State::Upper;
      x_(s) = v;
      sigma_(i) = r(i) - v >= 0 ? 1.0 : -1.0;
      head_[i] = art;
      state_[art] = State::Basic;
      x_(art) = std::abs(r(i) - v);
      lb_(art) = 0.0;
      ub_(art) = kInf;
      binv_(i, i) = sigma_(i);
    }
  }
}

void Simplex::refactor() {
  Matrix basis(m_, m_);
  Vector col(m_);
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    if (j < n_) {
      basis.col(i) = d_.a.col(j);
    } else {
      basis.col(i).setZero();
      const int row = j < n_ + m_ ? j - n_ : j - n_ - m_;
      basis(row, i) = j < n_ + m_ ? 1.0 : sigma_(row);
    }
  }
  Eigen::PartialPivLU<Matrix> lu(basis);
  if (m_ > 0 && !(lu.rcond() > 1e-14)) {
    throw NumericError("simplex basis is numerically singular (rcond " +
                       std::to_string(lu.rcond()) + ", " + std::to_string(m_) + " rows)");
  }
  binv_ = lu.inverse();

  // Basic values from the nonbasic ones.
  Vector rhs = d_.b;
  for (int j = 0; j < n_; ++j) {
    if (state_[j] != State::Basic && x_(j) != 0.0) rhs -= d_.a.col(j) * x_(j);
  }
  for (int i = 0; i < m_; ++i) {
    const int s = n_ + i, art = n_ + m_ + i;
    if (state_[s] != State::Basic) rhs(i) -= x_(s);
    if (state_[art] != State::Basic) rhs(i) -= sigma_(i) * x_(art);
  }
  const Vector xb = binv_ * rhs;
  for (int i = 0; i < m_; ++i) x_(head_[i]) = xb(i);
  since_refactor_ = 0;
}

void Simplex::pivot(int row, int entering, const Vector& alpha) {
  const double piv = alpha(row);
  const Eigen::RowVectorXd pr = binv_.row(row) / piv;
  binv_.noalias() -= alpha * pr;
  binv_.row(row) = pr;
  head_[row] = entering;
  state_[entering] = State::Basic;
  ++since_refactor_;
}

Simplex::Step Simplex::iterate(const Vector& cost) {
  const double dtol = cfg_.optimality_tol;
  const double ptol = 1e-9;        // pivot magnitude
  const double htol = 1e-9;        // Harris bound relaxation
  const long max_iter = 50L * (m_ + n_) + 10000;
  int degenerate = 0;
  bool bland = false;
  int optimal_confirmations = 0;

  Vector cb(m_), y(m_), dstruct(n_);
  for (;;) {
    if (++iterations_ > max_iter || timed_out()) return Step::Limit;
    if (since_refactor_ >= cfg_.refactor_interval) refactor();

    for (int i = 0; i < m_; ++i) cb(i) = cost(head_[i]);
    y.noalias() = binv_.transpose() * cb;
    dstruct.noalias() = cost.head(n_) - d_.a.transpose() * y;

    auto reduced = [&](int j) -> double {
      if (j < n_) return dstruct(j);
      if (j < n_ + m_) return cost(j) - y(j - n_);
      return cost(j) - sigma_(j - n_ - m_) * y(j - n_ - m_);
    };

    int q = -1;
    double best = 0.0;
    int dir = 0;
    for (int j = 0; j < total(); ++j) {
      const State s = state_[j];
      if (s == State::Basic || lb_(j) == ub_(j)) continue;
      const double dj = reduced(j);
      int dj_dir = 0;
      if (s == State::Lower && dj < -dtol) dj_dir = 1;
      else if (s == State::Upper && dj > dtol) dj_dir = -1;
      else if (s == State::Zero && std::abs(dj) > dtol) dj_dir = dj < 0 ? 1 : -1;
      if (dj_dir == 0) continue;
      if (bland) {
        q = j;
        dir = dj_dir;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        q = j;
        dir = dj_dir;
      }
    }

    if (q < 0) {
      // Confirm optimality on a fresh factorization before stopping.
      if (since_refactor_ < kConfirmAfter || optimal_confirmations > 0) return Step::Optimal;
      refactor();
      ++optimal_confirmations;
      continue;
    }
    optimal_confirmations = 0;

    const Vector alpha = ftran(q);
    const double flip = ub_(q) - lb_(q);  // inf when either bound is infinite

    int row = -1;
    double t = kInf;
    if (!bland) {
      double theta = kInf;
      for (int i = 0; i < m_; ++i) {
        const double a = alpha(i);
        if (std::abs(a) < ptol) continue;
        const int v = head_[i];
        const double delta = -dir * a;
        double lim = kInf;
        if (delta < 0 && std::isfinite(lb_(v))) lim = (x_(v) - lb_(v) + htol) / -delta;
        else if (delta > 0 && std::isfinite(ub_(v))) lim = (ub_(v) - x_(v) + htol) / delta;
        theta = std::min(theta, lim);
      }
      if (flip <= theta) {
        t = flip;
      } else if (std::isfinite(theta)) {
        double best_a = 0.0;
        for (int i = 0; i < m_; ++i) {
          const double a = alpha(i);
          if (std::abs(a) < ptol) continue;
          const int v = head_[i];
          const double delta = -dir * a;
          double lim = kInf;
          if (delta < 0 && std::isfinite(lb_(v))) lim = (x_(v) - lb_(v)) / -delta;
          else if (delta > 0 && std::isfinite(ub_(v))) lim = (ub_(v) - x_(v)) / delta;
          if (lim <= theta && std::abs(a) > best_a) {
            best_a = std::abs(a);
            row = i;
            t = std::max(lim, 0.0);
          }
        }
      }
    } else {
      for (int i = 0; i < m_; ++i) {
        const double a = alpha(i);
        if (std::abs(a) < ptol) continue;
        const int v = head_[i];
        const double delta = -dir * a;
        double lim = kInf;
        if (delta < 0 && std::isfinite(lb_(v))) lim = (x_(v) - lb_(v)) / -delta;
        else if (delta > 0 && std::isfinite(ub_(v))) lim = (ub_(v) - x_(v)) / delta;
        if (!std::isfinite(lim)) continue;
        lim = std::max(lim, 0.0);
        if (row < 0 || lim < t - 1e-12 || (lim <= t + 1e-12 && head_[i] < head_[row])) {
          row = i;
          t = lim;
        }
      }
      if (flip <= t) {
        row = -1;
        t = flip;
      }
    }

    if (!std::isfinite(t)) return Step::Unbounded;

    // Move along the edge.
    x_(q) += dir * t;
    for (int i = 0; i < m_; ++i) x_(head_[i]) -= dir * t * alpha(i);

    if (row < 0) {
      state_[q] = (state_[q] == State::Lower || (state_[q] == State::Zero && dir > 0))
                      ? State::Upper
                      : State::Lower;
      x_(q) = state_[q] == State::Upper ? ub_(q) : lb_(q);
    } else {
      const int leaving = head_[row];
      const double delta = -dir * alpha(row);
      if (delta < 0) {
        state_[leaving] = State::Lower;
        x_(leaving) = lb_(leaving);
      } else {
        state_[leaving] = State::Upper;
        x_(leaving) = ub_(leaving);
      }
      pivot(row, q, alpha);
    }

    if (t <= 1e-12) {
      if (++degenerate > cfg_.bland_after) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
  }
}

void Simplex::drive_out_artificials() {
  for (int i = 0; i < m_; ++i) {
    if (!is_artificial(head_[i])) continue;
    const Eigen::RowVectorXd rho = binv_.row(i);
    const Vector alpha_struct = d_.a.transpose() * rho.transpose();
    int best = -1;
    double best_abs = 1e-7;
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::Basic) continue;
      const double a = j < n_ ? alpha_struct(j) : rho(j - n_);
      if (std::abs(a) > best_abs) {
        best_abs = std::abs(a);
        best = j;
      }
    }
    if (best < 0) continue;  // redundant row; the artificial stays basic at zero
    const int art = head_[i];
    const Vector alpha = ftran(best);
    state_[art] = State::Lower;
    x_(art) = 0.0;
    pivot(i, best, alpha);
  }
}

LpOutcome Simplex::run(const Vector& lower, const Vector& upper) {
  LpOutcome out;
  initialize(lower, upper);
  if (infeasible_bounds_) {
    out.status = SolveStatus::Infeasible;
    return out;
  }

  bool need_phase_one = false;
  for (int i = 0; i < m_; ++i) need_phase_one |= is_artificial(head_[i]);

  if (need_phase_one) {
    Vector cost1 = Vector::Zero(total());
    for (int i = 0; i < m_; ++i) {
      if (is_artificial(head_[i])) cost1(n_ + m_ + i) = 1.0;
    }
    const Step s = iterate(cost1);
    out.iterations = iterations_;
    if (s == Step::Limit) {
      out.status = SolveStatus::LimitReached;
      return out;
    }
    if (since_refactor_ > 0) refactor();
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i) infeas = std::max(infeas, x_(n_ + m_ + i));
    if (infeas > cfg_.feasibility_tol) {
      out.status = SolveStatus::Infeasible;
      return out;
    }
    for (int i = 0; i < m_; ++i) {
      const int art = n_ + m_ + i;
      ub_(art) = 0.0;
      if (state_[art] != State::Basic) x_(art) = 0.0;
    }
    drive_out_artificials();
    if (since_refactor_ > 0) refactor();
  }

  Vector cost2 = Vector::Zero(total());
  cost2.head(n_) = d_.cost;
  const Step s = iterate(cost2);
  out.iterations = iterations_;
  if (s == Step::Limit) {
    out.status = SolveStatus::LimitReached;
    return out;
  }
  if (s == Step::Unbounded) {
    out.status = SolveStatus::Unbounded;
    return out;
  }
  out.status = SolveStatus::Optimal;
  out.x = d_.col_scale.cwiseProduct(x_.head(n_));
  Vector cb(m_);
  for (int i = 0; i < m_; ++i) cb(i) = cost2(head_[i]);
  out.duals = d_.cost_scale * d_.row_scale.cwiseProduct(binv_.transpose() * cb);
  return out;
}

}  // namespace

LpOutcome solve_bounded_lp(const LpData& data, const Vector& lower, const Vector& upper,
                           const SolverConfig& config, Clock::time_point deadline) {
  Simplex simplex(data, config, deadline);
  return simplex.run(lower, upper);
}

}  // namespace clearn::milp::detail
