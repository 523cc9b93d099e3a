// SPDX-License-Identifier: Apache-2.0
//
// Square linear assignment (Hungarian / Kuhn-Munkres with potentials), O(n^3).
// Among cost-equal optima the lexicographically smallest permutation is
// returned: after the solve, rows are fixed in order to the smallest column
// that still admits a perfect matching on zero-reduced-cost edges.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "panocoach/error.hpp"

namespace panocoach {

template <typename Scalar>
struct Assignment {
  /// column assigned to each row
  std::vector<int> permutation;
  Scalar total = Scalar(0);
};

namespace detail {

template <typename Scalar>
struct Potentials {
  std::vector<Scalar> row;
  std::vector<Scalar> col;
  std::vector<int> row_to_col;
};

// Shortest augmenting path formulation; indices are 1-based internally with
// column 0 as the virtual root.
template <typename Derived>
Potentials<typename Derived::Scalar> solve_potentials(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(cost.rows());
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> u(n + 1, Scalar(0)), v(n + 1, Scalar(0));
  std::vector<int> col_owner(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    col_owner[0] = i;
    int j0 = 0;
    std::vector<Scalar> min_slack(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = col_owner[j0];
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const int j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Potentials<Scalar> result;
  result.row.assign(u.begin() + 1, u.end());
  result.col.assign(v.begin() + 1, v.end());
  result.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) result.row_to_col[col_owner[j] - 1] = j - 1;
  return result;
}

}  // namespace detail

template <typename Derived>
Assignment<typename Derived::Scalar> optimal_assignment(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  if (cost.rows() != cost.cols() || cost.rows() < 1) {
    throw Error(Errc::NonSquare, "cost matrix must be square and non-empty");
  }
  if (!cost.allFinite()) throw Error(Errc::NonFinite, "cost matrix has non-finite entries");

  const int n = static_cast<int>(cost.rows());
  auto pot = detail::solve_potentials(cost);

  using std::abs;
  const Scalar scale = std::max<Scalar>(Scalar(1), cost.cwiseAbs().maxCoeff());
  // Potentials accumulate O(n^2) rounding; this stays well above it.
  const Scalar tol = Scalar(1e-10) * scale * Scalar(n);
  const auto tight = [&](int i, int j) {
    return abs(cost(i, j) - pot.row[i] - pot.col[j]) <= tol;
  };

  // Any perfect matching on tight edges is optimal. Walk rows in order and
  // move each to the smallest tight column reachable by an alternating path
  // that frees its current column, keeping earlier rows fixed.
  std::vector<int>& row_to_col = pot.row_to_col;
  // For a column freed by the chain: the row giving it up and where that row goes.
  std::vector<int> giver_row(n), giver_target(n);
  std::vector<char> reachable(n);
  std::vector<int> frontier;
  for (int i = 0; i < n; ++i) {
    const int vacated = row_to_col[i];
    std::fill(reachable.begin(), reachable.end(), 0);
    reachable[vacated] = 1;
    frontier.assign(1, vacated);
    while (!frontier.empty()) {
      const int c = frontier.back();
      frontier.pop_back();
      for (int r = i + 1; r < n; ++r) {
        const int owned = row_to_col[r];
        if (reachable[owned] || !tight(r, c)) continue;
        reachable[owned] = 1;
        giver_row[owned] = r;
        giver_target[owned] = c;
        frontier.push_back(owned);
      }
    }
    int best = vacated;
    for (int c = 0; c < vacated; ++c) {
      if (reachable[c] && tight(i, c)) {
        best = c;
        break;
      }
    }
    if (best == vacated) continue;
    row_to_col[i] = best;
    for (int c = best; c != vacated;) {
      const int r = giver_row[c];
      c = giver_target[c];
      row_to_col[r] = c;
    }
  }

  Assignment<Scalar> out;
  out.permutation = row_to_col;
  for (int i = 0; i < n; ++i) out.total += cost(i, row_to_col[i]);
  return out;
}

}  // namespace panocoach
