/*
 * Copyright 2026 The lscid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Dense two-phase primal simplex with Bland's rule, generic over an exact
// field type (Rational or BigRational).
//
//   maximize c'x  subject to  rows,  x >= 0.

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace lscid {

enum class Sense { LessEqual, Equal, GreaterEqual };

template <class T>
struct LpRow {
  std::vector<std::pair<std::size_t, T>> terms;
  Sense sense = Sense::LessEqual;
  T rhs{};
};

template <class T>
struct LpProblem {
  std::size_t num_vars = 0;
  std::vector<T> objective;
  std::vector<LpRow<T>> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  T objective{};
  std::vector<T> x;
  std::size_t pivots = 0;
};

namespace detail {

template <class T>
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : cols_(cols), a_(rows, std::vector<T>(cols + 1)) {}

  T& at(std::size_t r, std::size_t c) { return a_[r][c]; }
  T& rhs(std::size_t r) { return a_[r][cols_]; }
  std::size_t rows() const { return a_.size(); }
  std::size_t cols() const { return cols_; }
  std::vector<T>& row(std::size_t r) { return a_[r]; }
  void erase_row(std::size_t r) { a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r)); }

 private:
  std::size_t cols_;
  std::vector<std::vector<T>> a_;
};

// Pivots on (pr, pc), updating the reduced-cost row as well. Only the
// nonzero columns of the pivot row are touched.
template <class T>
void pivot(Tableau<T>& tab, std::vector<T>& cost, std::vector<std::size_t>& basis, std::size_t pr,
           std::size_t pc) {
  std::vector<T>& prow = tab.row(pr);
  const T inv = T(1) / prow[pc];
  std::vector<std::size_t> nz;
  for (std::size_t j = 0; j <= tab.cols(); ++j) {
    if (prow[j] != T(0)) {
      prow[j] *= inv;
      nz.push_back(j);
    }
  }
  for (std::size_t r = 0; r < tab.rows(); ++r) {
    if (r == pr) continue;
    std::vector<T>& row = tab.row(r);
    if (row[pc] == T(0)) continue;
    const T f = row[pc];
    for (std::size_t j : nz) row[j] -= f * prow[j];
  }
  if (cost[pc] != T(0)) {
    const T f = cost[pc];
    for (std::size_t j : nz) cost[j] -= f * prow[j];
  }
  basis[pr] = pc;
}

// Runs primal iterations until optimal; returns false when unbounded.
template <class T>
bool iterate(Tableau<T>& tab, std::vector<T>& cost, std::vector<std::size_t>& basis,
             const std::vector<char>& banned, std::size_t& pivots) {
  for (;;) {
    std::size_t enter = tab.cols();
    for (std::size_t j = 0; j < tab.cols(); ++j) {
      if (!banned[j] && cost[j] > T(0)) {
        enter = j;
        break;
      }
    }
    if (enter == tab.cols()) return true;
    std::size_t leave = tab.rows();
    T best{};
    for (std::size_t r = 0; r < tab.rows(); ++r) {
      const T& a = tab.at(r, enter);
      if (!(a > T(0))) continue;
      T ratio = tab.rhs(r) / a;
      if (leave == tab.rows() || ratio < best || (ratio == best && basis[r] < basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == tab.rows()) return false;
    pivot(tab, cost, basis, leave, enter);
    ++pivots;
  }
}

}  // namespace detail

template <class T>
LpResult<T> solve_lp(const LpProblem<T>& lp) {
  const std::size_t n = lp.num_vars;
  const std::size_t m = lp.rows.size();

  // Column layout: structural | slack or surplus per inequality | artificial.
  std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
  std::vector<Sense> sense(m);
  std::vector<bool> flip(m, false);
  std::size_t next = n;
  for (std::size_t i = 0; i < m; ++i) {
    sense[i] = lp.rows[i].sense;
    if (lp.rows[i].rhs < T(0)) {
      flip[i] = true;
      if (sense[i] == Sense::LessEqual)
        sense[i] = Sense::GreaterEqual;
      else if (sense[i] == Sense::GreaterEqual)
        sense[i] = Sense::LessEqual;
    }
    if (sense[i] != Sense::Equal) slack_col[i] = next++;
  }
  const std::size_t first_art = next;
  for (std::size_t i = 0; i < m; ++i)
    if (sense[i] != Sense::LessEqual) art_col[i] = next++;
  const std::size_t cols = next;

  detail::Tableau<T> tab(m, cols);
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    const T sgn = flip[i] ? T(-1) : T(1);
    for (const auto& [j, a] : lp.rows[i].terms) tab.at(i, j) += sgn * a;
    tab.rhs(i) = sgn * lp.rows[i].rhs;
    if (slack_col[i] != SIZE_MAX) tab.at(i, slack_col[i]) = sense[i] == Sense::LessEqual ? T(1) : T(-1);
    if (art_col[i] != SIZE_MAX) {
      tab.at(i, art_col[i]) = T(1);
      basis[i] = art_col[i];
    } else {
      basis[i] = slack_col[i];
    }
  }

  LpResult<T> result;
  std::vector<char> banned(cols, 0);

  if (first_art < cols) {
    // Phase 1: maximize -sum(artificials).
    std::vector<T> cost(cols + 1);
    for (std::size_t i = 0; i < m; ++i) {
      if (art_col[i] == SIZE_MAX) continue;
      for (std::size_t j = 0; j <= cols; ++j)
        if (j < first_art || j == cols) cost[j] += tab.at(i, j);
    }
    detail::iterate(tab, cost, basis, banned, result.pivots);
    if (cost[cols] != T(0)) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive remaining (zero-level) artificials out of the basis.
    for (std::size_t r = 0; r < tab.rows();) {
      if (basis[r] < first_art) {
        ++r;
        continue;
      }
      std::size_t pc = first_art;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (tab.at(r, j) != T(0)) {
          pc = j;
          break;
        }
      }
      if (pc == first_art) {
        tab.erase_row(r);
        basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
        continue;
      }
      detail::pivot(tab, cost, basis, r, pc);
      ++result.pivots;
      ++r;
    }
    for (std::size_t j = first_art; j < cols; ++j) banned[j] = 1;
  }

  // Phase 2 reduced costs: d_j = c_j - c_B B^-1 A_j; the last entry holds -z.
  std::vector<T> cost(cols + 1);
  for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j];
  for (std::size_t r = 0; r < tab.rows(); ++r) {
    const std::size_t b = basis[r];
    if (b >= n || lp.objective[b] == T(0)) continue;
    const T cb = lp.objective[b];
    for (std::size_t j = 0; j <= cols; ++j)
      if (tab.at(r, j) != T(0)) cost[j] -= cb * tab.at(r, j);
  }
  if (!detail::iterate(tab, cost, basis, banned, result.pivots)) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  result.status = LpStatus::Optimal;
  result.x.assign(n, T(0));
  for (std::size_t r = 0; r < tab.rows(); ++r)
    if (basis[r] < n) result.x[basis[r]] = tab.rhs(r);
  result.objective = T(0) - cost[cols];
  return result;
}

}  // namespace lscid
