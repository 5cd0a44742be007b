// Copyright 2026 The dhdsddp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense two-phase revised simplex for bounded-variable linear programs.
//
// Every row a.x {<=,=,>=} b is turned into a.x - s = 0 with the logical s
// carrying the row bounds, so the whole problem lives in variable bounds.
// Phase 1 starts from logicals (rows satisfied at the initial point) and
// artificials (rows violated there). Pricing is Dantzig's rule; after a
// stall of 2n non-improving pivots it falls back to Bland's rule until the
// objective moves again.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dhdsddp {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

inline const char* to_string(Sense s) {
  switch (s) {
    case Sense::LessEqual: return "<=";
    case Sense::Equal: return "=";
    case Sense::GreaterEqual: return ">=";
  }
  return "?";
}

struct Term {
  std::size_t var;
  double coef;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Sense sense = Sense::Equal;
  double rhs = 0.0;
  std::string label;
};

/// Minimize cost.x subject to rows and lower <= x <= upper.
struct LinearProgram {
  Vector cost;
  Vector lower;
  Vector upper;
  std::vector<std::string> var_labels;
  std::vector<LinearConstraint> rows;

  std::size_t num_vars() const { return cost.size(); }
  std::size_t num_rows() const { return rows.size(); }

  std::size_t add_variable(double c, double lo, double hi, std::string label = {}) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    var_labels.push_back(std::move(label));
    return cost.size() - 1;
  }

  std::size_t add_row(std::vector<Term> terms, Sense sense, double rhs, std::string label = {}) {
    rows.push_back(LinearConstraint{std::move(terms), sense, rhs, std::move(label)});
    return rows.size() - 1;
  }

  std::size_t num_nonzeros() const {
    std::size_t nnz = 0;
    for (const auto& r : rows) nnz += r.terms.size();
    return nnz;
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  Vector x;
  Vector duals;          // one per row; d(objective)/d(rhs)
  Vector reduced_costs;  // cost - A^T duals
  std::size_t iterations = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-8;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t refactor_interval = 64;
  std::size_t max_iterations = 0;  // 0: 50 * (rows + vars) + 1000
};

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_dimensions(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  if (lp.lower.size() != n || lp.upper.size() != n)
    throw LpError("linear program: bound vectors do not match the number of variables");
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(lp.cost[j]) || std::isinf(lp.cost[j]))
      throw LpError("linear program: non-finite cost on variable " + std::to_string(j));
    if (!(lp.lower[j] <= lp.upper[j]))
      throw LpError("linear program: lower > upper on variable " + std::to_string(j));
  }
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.rows[i];
    if (!std::isfinite(row.rhs))
      throw LpError("linear program: non-finite rhs on row " + std::to_string(i));
    for (const auto& t : row.terms) {
      if (t.var >= n)
        throw LpError("linear program: row " + std::to_string(i) + " references variable " +
                      std::to_string(t.var) + " of " + std::to_string(n));
      if (!std::isfinite(t.coef))
        throw LpError("linear program: non-finite coefficient on row " + std::to_string(i));
    }
  }
}

inline std::pair<double, double> row_bounds(const LinearConstraint& row) {
  switch (row.sense) {
    case Sense::LessEqual: return {-kInf, row.rhs};
    case Sense::GreaterEqual: return {row.rhs, kInf};
    case Sense::Equal: return {row.rhs, row.rhs};
  }
  return {-kInf, kInf};
}

class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_vars();
    m_ = lp.num_rows();
    total_ = n_ + 2 * m_;
    columns_.assign(total_, {});
    for (std::size_t i = 0; i < m_; ++i) {
      for (const auto& t : lp.rows[i].terms) {
        if (t.coef != 0.0) columns_[t.var].push_back({i, t.coef});
      }
    }
    // Rows may mention a variable twice; merge so each column has one entry per row.
    for (std::size_t j = 0; j < n_; ++j) {
      auto& col = columns_[j];
      std::stable_sort(col.begin(), col.end(),
                       [](const Entry& a, const Entry& b) { return a.row < b.row; });
      std::vector<Entry> merged;
      for (const auto& e : col) {
        if (!merged.empty() && merged.back().row == e.row)
          merged.back().value += e.value;
        else
          merged.push_back(e);
      }
      std::erase_if(merged, [](const Entry& e) { return e.value == 0.0; });
      col = std::move(merged);
    }
    for (std::size_t i = 0; i < m_; ++i) columns_[n_ + i].push_back({i, -1.0});
    max_iterations_ = opt.max_iterations ? opt.max_iterations : 50 * (m_ + n_) + 1000;
  }

  LpSolution run() {
    initialize();
    LpSolution sol;

    Vector phase1_cost(total_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) phase1_cost[artificial(i)] = 1.0;
    bool any_artificial = false;
    for (std::size_t i = 0; i < m_; ++i)
      if (is_basic(artificial(i))) any_artificial = true;
    if (any_artificial) {
      iterate(phase1_cost, /*phase_one=*/true);
      double infeasibility = 0.0;
      for (std::size_t i = 0; i < m_; ++i) infeasibility += value_[artificial(i)];
      if (infeasibility > opt_.feasibility_tol) {
        sol.status = LpStatus::Infeasible;
        sol.objective = infeasibility;
        sol.iterations = iterations_;
        return sol;
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      upper_[artificial(i)] = 0.0;
      if (!is_basic(artificial(i))) value_[artificial(i)] = 0.0;
    }
    drive_out_artificials();

    Vector cost(total_, 0.0);
    std::copy(lp_.cost.begin(), lp_.cost.end(), cost.begin());
    const bool bounded = iterate(cost, /*phase_one=*/false);
    sol.iterations = iterations_;
    if (!bounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }

    refactor();
    recompute_basic_values();
    const Vector y = duals_for(cost);
    sol.status = LpStatus::Optimal;
    sol.x.assign(value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.duals = y;
    sol.reduced_costs.resize(n_);
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      obj += lp_.cost[j] * sol.x[j];
      sol.reduced_costs[j] = lp_.cost[j] - dot_column(y, j);
    }
    sol.objective = obj;
    return sol;
  }

 private:
  struct Entry {
    std::size_t row;
    double value;
  };
  enum class State { Basic, AtLower, AtUpper, FreeZero };

  std::size_t artificial(std::size_t i) const { return n_ + m_ + i; }
  bool is_basic(std::size_t j) const { return state_[j] == State::Basic; }

  double dot_column(const Vector& y, std::size_t j) const {
    double s = 0.0;
    for (const auto& e : columns_[j]) s += y[e.row] * e.value;
    return s;
  }

  void initialize() {
    lower_.assign(total_, 0.0);
    upper_.assign(total_, 0.0);
    value_.assign(total_, 0.0);
    state_.assign(total_, State::AtLower);
    for (std::size_t j = 0; j < n_; ++j) {
      lower_[j] = lp_.lower[j];
      upper_[j] = lp_.upper[j];
      if (std::isfinite(lower_[j])) {
        value_[j] = lower_[j];
        state_[j] = State::AtLower;
      } else if (std::isfinite(upper_[j])) {
        value_[j] = upper_[j];
        state_[j] = State::AtUpper;
      } else {
        value_[j] = 0.0;
        state_[j] = State::FreeZero;
      }
    }
    Vector activity(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (value_[j] == 0.0) continue;
      for (const auto& e : columns_[j]) activity[e.row] += e.value * value_[j];
    }
    basis_.assign(m_, 0);
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto [lo, hi] = row_bounds(lp_.rows[i]);
      const std::size_t s = n_ + i;
      const std::size_t a = artificial(i);
      lower_[s] = lo;
      upper_[s] = hi;
      columns_[a].clear();
      const double act = activity[i];
      if (act >= lo && act <= hi) {
        basis_[i] = s;
        state_[s] = State::Basic;
        value_[s] = act;
        binv_[i * m_ + i] = -1.0;
        columns_[a].push_back({i, 1.0});
        lower_[a] = 0.0;
        upper_[a] = 0.0;
        value_[a] = 0.0;
        state_[a] = State::AtLower;
      } else {
        const double bound = act < lo ? lo : hi;
        value_[s] = bound;
        state_[s] = act < lo ? State::AtLower : State::AtUpper;
        const double r = act - bound;
        const double sigma = r > 0.0 ? -1.0 : 1.0;
        columns_[a].push_back({i, sigma});
        lower_[a] = 0.0;
        upper_[a] = kInf;
        value_[a] = std::abs(r);
        state_[a] = State::Basic;
        basis_[i] = a;
        binv_[i * m_ + i] = sigma;
      }
    }
    since_refactor_ = 0;
  }

  // Rebuilds the explicit basis inverse by Gauss-Jordan with partial pivoting.
  void refactor() {
    since_refactor_ = 0;
    if (m_ == 0) return;
    std::vector<double> b(m_ * m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k)
      for (const auto& e : columns_[basis_[k]]) b[e.row * m_ + k] = e.value;
    std::vector<double> inv(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      double best = std::abs(b[c * m_ + c]);
      for (std::size_t r = c + 1; r < m_; ++r) {
        if (std::abs(b[r * m_ + c]) > best) {
          best = std::abs(b[r * m_ + c]);
          piv = r;
        }
      }
      if (best < 1e-12) throw LpError("simplex: singular basis during refactorization");
      if (piv != c) {
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(b[piv * m_ + k], b[c * m_ + k]);
          std::swap(inv[piv * m_ + k], inv[c * m_ + k]);
        }
      }
      const double p = b[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        b[c * m_ + k] /= p;
        inv[c * m_ + k] /= p;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = b[r * m_ + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          b[r * m_ + k] -= f * b[c * m_ + k];
          inv[r * m_ + k] -= f * inv[c * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
  }

  void recompute_basic_values() {
    Vector rhs(m_, 0.0);
    for (std::size_t j = 0; j < total_; ++j) {
      if (is_basic(j) || value_[j] == 0.0) continue;
      for (const auto& e : columns_[j]) rhs[e.row] -= e.value * value_[j];
    }
    for (std::size_t k = 0; k < m_; ++k) {
      double s = 0.0;
      const double* row = &binv_[k * m_];
      for (std::size_t r = 0; r < m_; ++r) s += row[r] * rhs[r];
      value_[basis_[k]] = s;
    }
  }

  Vector duals_for(const Vector& cost) const {
    Vector y(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      const double cb = cost[basis_[k]];
      if (cb == 0.0) continue;
      const double* row = &binv_[k * m_];
      for (std::size_t r = 0; r < m_; ++r) y[r] += cb * row[r];
    }
    return y;
  }

  Vector basis_column(std::size_t q) const {
    Vector alpha(m_, 0.0);
    for (const auto& e : columns_[q]) {
      for (std::size_t k = 0; k < m_; ++k) alpha[k] += binv_[k * m_ + e.row] * e.value;
    }
    return alpha;
  }

  void pivot(std::size_t r, std::size_t q, const Vector& alpha) {
    double* prow = &binv_[r * m_];
    const double p = alpha[r];
    for (std::size_t k = 0; k < m_; ++k) prow[k] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      const double f = alpha[i];
      double* row = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
    basis_[r] = q;
    state_[q] = State::Basic;
    if (++since_refactor_ >= opt_.refactor_interval) {
      refactor();
      recompute_basic_values();
    }
  }

  // Returns false when an improving ray is found.
  bool iterate(const Vector& cost, bool phase_one) {
    double objective = 0.0;
    for (std::size_t j = 0; j < total_; ++j) objective += cost[j] * value_[j];
    std::size_t stall = 0;
    bool bland = false;
    const std::size_t stall_limit = 2 * (n_ + m_);
    while (true) {
      if (iterations_ >= max_iterations_)
        throw LpError("simplex: pivot limit of " + std::to_string(max_iterations_) +
                      " reached (numerical breakdown)");
      const Vector y = duals_for(cost);

      std::size_t q = total_;
      int dir = 0;
      double best = 0.0;
      for (std::size_t j = 0; j < total_; ++j) {
        const State st = state_[j];
        if (st == State::Basic) continue;
        if (lower_[j] == upper_[j]) continue;
        if (!phase_one && j >= n_ + m_) continue;
        const double d = cost[j] - dot_column(y, j);
        int dj = 0;
        if (st == State::AtLower && d < -opt_.optimality_tol) dj = 1;
        else if (st == State::AtUpper && d > opt_.optimality_tol) dj = -1;
        else if (st == State::FreeZero && std::abs(d) > opt_.optimality_tol) dj = d < 0 ? 1 : -1;
        if (dj == 0) continue;
        if (bland) {
          q = j;
          dir = dj;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dir = dj;
        }
      }
      if (q == total_) return true;

      const Vector alpha = basis_column(q);
      double theta = upper_[q] - lower_[q];
      if (std::isnan(theta)) theta = kInf;
      std::size_t leave = m_;
      double leave_pivot = 0.0;
      bool leave_to_lower = false;
      for (std::size_t k = 0; k < m_; ++k) {
        const double a = alpha[k];
        if (std::abs(a) < opt_.pivot_tol) continue;
        const std::size_t bj = basis_[k];
        const double delta = -dir * a;
        double limit;
        bool to_lower;
        if (delta < 0.0) {
          if (!std::isfinite(lower_[bj])) continue;
          limit = (value_[bj] - lower_[bj]) / (-delta);
          to_lower = true;
        } else {
          if (!std::isfinite(upper_[bj])) continue;
          limit = (upper_[bj] - value_[bj]) / delta;
          to_lower = false;
        }
        if (limit < 0.0) limit = 0.0;
        bool take = false;
        if (limit < theta - 1e-12) {
          take = true;
        } else if (limit <= theta + 1e-12 && leave != m_) {
          if (bland)
            take = bj < basis_[leave];
          else
            take = std::abs(a) > std::abs(leave_pivot);
        }
        if (take) {
          theta = std::min(theta, limit);
          leave = k;
          leave_pivot = a;
          leave_to_lower = to_lower;
        }
      }
      if (!std::isfinite(theta)) return false;

      ++iterations_;
      const double step = dir * theta;
      value_[q] += step;
      for (std::size_t k = 0; k < m_; ++k) {
        if (alpha[k] != 0.0) value_[basis_[k]] -= step * alpha[k];
      }
      if (leave == m_) {
        if (dir > 0) {
          value_[q] = upper_[q];
          state_[q] = State::AtUpper;
        } else {
          value_[q] = lower_[q];
          state_[q] = State::AtLower;
        }
      } else {
        const std::size_t out = basis_[leave];
        if (leave_to_lower) {
          value_[out] = lower_[out];
          state_[out] = State::AtLower;
        } else {
          value_[out] = upper_[out];
          state_[out] = State::AtUpper;
        }
        if (lower_[out] == upper_[out]) state_[out] = State::AtLower;
        pivot(leave, q, alpha);
      }

      double next = 0.0;
      for (std::size_t j = 0; j < total_; ++j) next += cost[j] * value_[j];
      if (objective - next > 1e-11 * (1.0 + std::abs(objective))) {
        stall = 0;
        bland = false;
      } else if (++stall > stall_limit) {
        bland = true;
      }
      objective = next;
    }
  }

  void drive_out_artificials() {
    bool changed = false;
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t a = basis_[r];
      if (a < n_ + m_) continue;
      const double* rho = &binv_[r * m_];
      std::size_t best_j = total_;
      double best = 1e-7;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (is_basic(j)) continue;
        double s = 0.0;
        for (const auto& e : columns_[j]) s += rho[e.row] * e.value;
        if (std::abs(s) > best) {
          best = std::abs(s);
          best_j = j;
        }
      }
      if (best_j == total_) continue;  // redundant row; artificial stays basic at zero
      const Vector alpha = basis_column(best_j);
      value_[a] = 0.0;
      state_[a] = State::AtLower;
      pivot(r, best_j, alpha);
      changed = true;
    }
    if (changed) {
      refactor();
      recompute_basic_values();
    }
  }

  const LinearProgram& lp_;
  LpOptions opt_;
  std::size_t n_ = 0, m_ = 0, total_ = 0;
  std::vector<std::vector<Entry>> columns_;
  Vector lower_, upper_, value_;
  std::vector<State> state_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_;
  std::size_t since_refactor_ = 0;
  std::size_t iterations_ = 0;
  std::size_t max_iterations_ = 0;
};

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp, const LpOptions& options = {}) {
  detail::check_dimensions(lp);
  detail::BoundedSimplex simplex(lp, options);
  return simplex.run();
}

struct CertificateTolerances {
  double feasibility = 1e-8;
  double duality_gap = 1e-7;
  double slackness = 1e-7;
};

/// Checks primal feasibility, dual sign feasibility, complementary slackness
/// and the duality gap of an Optimal solution. Empty result means certified.
inline std::vector<std::string> check_certificate(const LinearProgram& lp, const LpSolution& sol,
                                                  const CertificateTolerances& tol = {}) {
  std::vector<std::string> out;
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.num_rows();
  if (sol.status != LpStatus::Optimal) {
    out.push_back("status is not Optimal");
    return out;
  }
  if (sol.x.size() != n || sol.duals.size() != m) {
    out.push_back("solution dimensions do not match the program");
    return out;
  }
  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
  };
  double primal = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    primal += lp.cost[j] * sol.x[j];
    if (sol.x[j] < lp.lower[j] - tol.feasibility || sol.x[j] > lp.upper[j] + tol.feasibility)
      out.push_back("variable " + std::to_string(j) + " violates its bounds by " +
                    fmt(std::max(lp.lower[j] - sol.x[j], sol.x[j] - lp.upper[j])));
  }
  Vector reduced(lp.cost.begin(), lp.cost.end());
  double dual = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    double act = 0.0;
    for (const auto& t : row.terms) {
      act += t.coef * sol.x[t.var];
      reduced[t.var] -= sol.duals[i] * t.coef;
    }
    const double y = sol.duals[i];
    const double slack = act - row.rhs;
    const std::string name = "row " + std::to_string(i) + (row.label.empty() ? "" : " (" + row.label + ")");
    if ((row.sense == Sense::LessEqual && slack > tol.feasibility) ||
        (row.sense == Sense::GreaterEqual && slack < -tol.feasibility) ||
        (row.sense == Sense::Equal && std::abs(slack) > tol.feasibility))
      out.push_back(name + " infeasible: activity " + fmt(act) + " vs rhs " + fmt(row.rhs));
    if ((row.sense == Sense::LessEqual && y > tol.slackness) ||
        (row.sense == Sense::GreaterEqual && y < -tol.slackness))
      out.push_back(name + " dual has the wrong sign: " + fmt(y));
    if (row.sense != Sense::Equal && std::abs(y * slack) > tol.slackness)
      out.push_back(name + " violates complementary slackness: dual " + fmt(y) + ", slack " + fmt(slack));
    dual += y * row.rhs;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double d = reduced[j];
    const bool lo_finite = std::isfinite(lp.lower[j]);
    const bool hi_finite = std::isfinite(lp.upper[j]);
    if (d > 0.0) {
      if (!lo_finite && d > tol.slackness)
        out.push_back("variable " + std::to_string(j) + " reduced cost " + fmt(d) + " with no lower bound");
      if (lo_finite) {
        dual += d * lp.lower[j];
        if (d * (sol.x[j] - lp.lower[j]) > tol.slackness)
          out.push_back("variable " + std::to_string(j) + " violates complementary slackness at lower bound");
      }
    } else if (d < 0.0) {
      if (!hi_finite && -d > tol.slackness)
        out.push_back("variable " + std::to_string(j) + " reduced cost " + fmt(d) + " with no upper bound");
      if (hi_finite) {
        dual += d * lp.upper[j];
        if (-d * (lp.upper[j] - sol.x[j]) > tol.slackness)
          out.push_back("variable " + std::to_string(j) + " violates complementary slackness at upper bound");
      }
    }
  }
  if (std::abs(primal - dual) > tol.duality_gap * (1.0 + std::abs(primal)))
    out.push_back("duality gap " + fmt(primal - dual) + " (primal " + fmt(primal) + ", dual " + fmt(dual) + ")");
  return out;
}

/// Writes the program in fixed-column MPS for cross-checking with external
/// solvers. Infinite bounds become FR/MI/PL records.
inline void write_mps(std::ostream& os, const LinearProgram& lp, const std::string& name = "DHDSDDP") {
  auto row_name = [](std::size_t i) { return "R" + std::to_string(i); };
  auto col_name = [](std::size_t j) { return "C" + std::to_string(j); };
  auto field = [](const std::string& s, int width) {
    std::string out = s;
    if (static_cast<int>(out.size()) < width) out.append(static_cast<std::size_t>(width) - out.size(), ' ');
    return out;
  };
  auto num = [](double v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
  };
  os << "NAME          " << name << "\n";
  os << "ROWS\n";
  os << " N  OBJ\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const char* code = lp.rows[i].sense == Sense::LessEqual ? "L" : lp.rows[i].sense == Sense::Equal ? "E" : "G";
    os << " " << code << "  " << row_name(i) << "\n";
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(lp.num_vars());
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    for (const auto& t : lp.rows[i].terms) cols[t.var].push_back({i, t.coef});
  os << "COLUMNS\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    if (lp.cost[j] != 0.0)
      os << "    " << field(col_name(j), 10) << field("OBJ", 10) << num(lp.cost[j]) << "\n";
    for (const auto& [i, a] : cols[j])
      os << "    " << field(col_name(j), 10) << field(row_name(i), 10) << num(a) << "\n";
    if (lp.cost[j] == 0.0 && cols[j].empty())
      os << "    " << field(col_name(j), 10) << field("OBJ", 10) << "0\n";
  }
  os << "RHS\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    if (lp.rows[i].rhs != 0.0)
      os << "    " << field("RHS", 10) << field(row_name(i), 10) << num(lp.rows[i].rhs) << "\n";
  os << "BOUNDS\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    const std::string c = field(col_name(j), 10);
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      os << " FR BND       " << c << "\n";
      continue;
    }
    if (lo == hi) {
      os << " FX BND       " << c << num(lo) << "\n";
      continue;
    }
    if (std::isfinite(lo)) {
      if (lo != 0.0) os << " LO BND       " << c << num(lo) << "\n";
    } else {
      os << " MI BND       " << c << "\n";
    }
    if (std::isfinite(hi)) os << " UP BND       " << c << num(hi) << "\n";
  }
  os << "ENDATA\n";
}

}  // namespace dhdsddp
