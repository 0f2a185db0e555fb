#pragma once

// Dense two-phase tableau simplex with Bland's rule, generic over the scalar
// (double with a tolerance, or exact mpq_class with tolerance 0).

#include <cstddef>
#include <vector>

namespace icensus::lp {

enum class Sense { Le, Ge, Eq };
enum class Status { Optimal, Infeasible, Unbounded };

template <class T>
struct Problem {
  std::vector<T> objective;  // maximize objective . x, x >= 0
  std::vector<std::vector<T>> rows;
  std::vector<Sense> sense;
  std::vector<T> rhs;

  void add(std::vector<T> row, Sense s, T b) {
    rows.push_back(std::move(row));
    sense.push_back(s);
    rhs.push_back(std::move(b));
  }
};

template <class T>
struct Solution {
  Status status = Status::Infeasible;
  T value{};
  std::vector<T> x;
  std::vector<T> dual;  // one multiplier per constraint row, in the caller's sign convention
};

namespace detail {

template <class T>
class Tableau {
 public:
  Tableau(std::size_t m, std::size_t cols) : m_(m), cols_(cols), t_(m, std::vector<T>(cols + 1)), basis_(m) {}

  T& at(std::size_t i, std::size_t j) { return t_[i][j]; }
  T& rhs(std::size_t i) { return t_[i][cols_]; }
  std::size_t& basis(std::size_t i) { return basis_[i]; }

  // maximize cost . x over columns with allowed[j]; false when unbounded
  bool optimize(const std::vector<T>& cost, const std::vector<bool>& allowed, const T& eps) {
    std::vector<T> red(cols_);
    for (;;) {
      for (std::size_t j = 0; j < cols_; ++j) {
        red[j] = cost[j];
        for (std::size_t i = 0; i < m_; ++i) red[j] -= cost[basis_[i]] * t_[i][j];
      }
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (allowed[j] && red[j] > eps) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return true;
      std::size_t leave = m_;
      T best{};
      for (std::size_t i = 0; i < m_; ++i) {
        if (!(t_[i][enter] > eps)) continue;
        const T ratio = t_[i][cols_] / t_[i][enter];
        if (leave == m_ || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const T p = t_[r][c];
    for (auto& v : t_[r]) v /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || t_[i][c] == T(0)) continue;
      const T f = t_[i][c];
      for (std::size_t j = 0; j <= cols_; ++j) t_[i][j] -= f * t_[r][j];
    }
    basis_[r] = c;
  }

  T reduced(const std::vector<T>& cost, std::size_t j) const {
    T v = cost[j];
    for (std::size_t i = 0; i < m_; ++i) v -= cost[basis_[i]] * t_[i][j];
    return v;
  }

  T value(const std::vector<T>& cost) const {
    T v{};
    for (std::size_t i = 0; i < m_; ++i) v += cost[basis_[i]] * t_[i][cols_];
    return v;
  }

 private:
  std::size_t m_, cols_;
  std::vector<std::vector<T>> t_;
  std::vector<std::size_t> basis_;
};

template <class T>
T abs_of(const T& v) {
  return v < T(0) ? T(-v) : v;
}

}  // namespace detail

template <class T>
Solution<T> solve(const Problem<T>& p, const T& eps) {
  const std::size_t m = p.rows.size();
  const std::size_t n = p.objective.size();
  // column layout: x | slack/surplus (one per inequality) | artificial (one per Ge/Eq row)
  std::vector<std::size_t> slack_col(m, 0), art_col(m, 0);
  std::vector<Sense> sense = p.sense;
  std::vector<T> sign(m, T(1));
  for (std::size_t i = 0; i < m; ++i) {
    if (p.rhs[i] < T(0)) {
      sign[i] = T(-1);
      if (sense[i] == Sense::Le) sense[i] = Sense::Ge;
      else if (sense[i] == Sense::Ge) sense[i] = Sense::Le;
    }
  }
  std::size_t cols = n;
  for (std::size_t i = 0; i < m; ++i) {
    if (sense[i] != Sense::Eq) slack_col[i] = cols++;
  }
  const std::size_t first_art = cols;
  for (std::size_t i = 0; i < m; ++i) {
    if (sense[i] != Sense::Le) art_col[i] = cols++;
  }
  detail::Tableau<T> tab(m, cols);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign[i] * p.rows[i][j];
    tab.rhs(i) = sign[i] * p.rhs[i];
    if (sense[i] == Sense::Le) {
      tab.at(i, slack_col[i]) = T(1);
      tab.basis(i) = slack_col[i];
    } else {
      if (sense[i] == Sense::Ge) tab.at(i, slack_col[i]) = T(-1);
      tab.at(i, art_col[i]) = T(1);
      tab.basis(i) = art_col[i];
    }
  }

  Solution<T> out;
  std::vector<bool> allowed(cols, true);
  if (first_art < cols) {
    std::vector<T> phase1(cols, T(0));
    for (std::size_t j = first_art; j < cols; ++j) phase1[j] = T(-1);
    tab.optimize(phase1, allowed, eps);
    if (tab.value(phase1) < -eps) return out;  // infeasible
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis(i) < first_art) continue;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (detail::abs_of(tab.at(i, j)) > eps) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    for (std::size_t j = first_art; j < cols; ++j) allowed[j] = false;
  }
  std::vector<T> cost(cols, T(0));
  for (std::size_t j = 0; j < n; ++j) cost[j] = p.objective[j];
  if (!tab.optimize(cost, allowed, eps)) {
    out.status = Status::Unbounded;
    return out;
  }
  out.status = Status::Optimal;
  out.value = tab.value(cost);
  out.x.assign(n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis(i) < n) out.x[tab.basis(i)] = tab.rhs(i);
  }
  out.dual.assign(m, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T y;
    if (sense[i] == Sense::Le) y = -tab.reduced(cost, slack_col[i]);
    else if (sense[i] == Sense::Ge) y = tab.reduced(cost, slack_col[i]);
    else y = -tab.reduced(cost, art_col[i]);
    out.dual[i] = sign[i] * y;
  }
  return out;
}

}  // namespace icensus::lp
