#pragma once

// Generic interval-clustering dynamic program. The cost of a cluster is
// supplied as a callable (j, i, m) -> Scalar giving the intra-cluster cost of
// points j..i placed as the m-th cluster (all 1-based), which covers both
// plain models (m ignored) and index-dependent costs such as mixture
// assignment with per-component log-weights.

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "icluster/costs.hpp"
#include "icluster/error.hpp"

namespace icluster {

enum class SolveMode { Auto, Lut, OnDemand };

template <typename Scalar>
using RowMajorMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// E holds the optimal cost of clustering the first i points into m
/// clusters at storage (i-1, m-1); S holds the left index of the last
/// cluster for that cell (0 where unreachable). Unreachable cells of E are
/// +inf.
template <typename Scalar = double>
struct DpTables {
  RowMajorMatrix<Scalar> cost;
  RowMajorMatrix<Index> argmin;
  SolveMode mode = SolveMode::OnDemand;
  /// n x n table of e1 values (LUT mode only); entry (j-1, i-1).
  std::optional<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lut;

  Index rows() const { return cost.rows(); }
  Index cols() const { return cost.cols(); }
  Scalar e(Index i, Index m) const { return cost(i - 1, m - 1); }
  Index s(Index i, Index m) const { return argmin(i - 1, m - 1); }
};

/// Per-column size bounds (lower[m-1] <= |C_m| <= upper[m-1]).
struct ColumnBounds {
  std::vector<Index> lower;
  std::vector<Index> upper;
};

namespace detail {

template <typename Fn>
void parallel_rows(Index first, Index last, int threads, Fn&& fn) {
  if (threads <= 1 || last - first < 2 * threads) {
    for (Index i = first; i <= last; ++i) fn(i);
    return;
  }
  // Interleaved rows balance the triangular workload; each cell is written
  // by exactly one worker so results do not depend on scheduling.
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads - 1));
  for (int t = 1; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (Index i = first + t; i <= last; i += threads) fn(i);
    });
  }
  for (Index i = first; i <= last; i += threads) fn(i);
}

}  // namespace detail

/// Fills E and S column by column (m ascending) following
///   e(i, m) = min_j { e(j-1, m-1) (+) cost(j, i, m) }
/// with j restricted by the size bounds; ties go to the smallest j.
template <typename Scalar = double, typename CellCost>
DpTables<Scalar> fill_dp_tables(Index n, Index k, CellCost&& cell_cost,
                                Combine op, const ColumnBounds& bounds,
                                int threads = 1) {
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
  DpTables<Scalar> t;
  t.cost = RowMajorMatrix<Scalar>::Constant(n, k, inf);
  t.argmin = RowMajorMatrix<Index>::Zero(n, k);

  for (Index i = bounds.lower[0]; i <= std::min(n, bounds.upper[0]); ++i) {
    t.cost(i - 1, 0) = cell_cost(Index{1}, i, Index{1});
    t.argmin(i - 1, 0) = 1;
  }

  Index lower_prefix = bounds.lower[0];
  for (Index m = 2; m <= k; ++m) {
    const Index lo_m = bounds.lower[m - 1];
    const Index hi_m = bounds.upper[m - 1];
    const Index j_floor = std::max(m, 1 + lower_prefix);
    detail::parallel_rows(m, n, threads, [&](Index i) {
      const Index j_lo = std::max(j_floor, i + 1 - hi_m);
      const Index j_hi = i + 1 - lo_m;
      Scalar best = inf;
      Index best_j = 0;
      for (Index j = j_lo; j <= j_hi; ++j) {
        const Scalar prev = t.cost(j - 2, m - 2);
        if (prev == inf) continue;
        const Scalar cand = op == Combine::Sum
                                ? prev + cell_cost(j, i, m)
                                : std::max(prev, cell_cost(j, i, m));
        if (cand < best) {
          best = cand;
          best_j = j;
        }
      }
      t.cost(i - 1, m - 1) = best;
      t.argmin(i - 1, m - 1) = best_j;
    });
    lower_prefix += lo_m;
  }
  return t;
}

/// Left delimiters l_1 = 1 < ... < l_k recovered from S in O(k).
/// Throws InfeasibleConstraints when e(n, k) is unreachable.
template <typename Scalar>
std::vector<Index> backtrack(const DpTables<Scalar>& t, Index n, Index k) {
  if (!(t.e(n, k) < std::numeric_limits<Scalar>::infinity())) {
    throw Error(ErrorKind::InfeasibleConstraints,
                "no clustering satisfies the size constraints");
  }
  std::vector<Index> delims(static_cast<std::size_t>(k));
  Index right = n;
  for (Index m = k; m >= 1; --m) {
    const Index left = t.s(right, m);
    delims[static_cast<std::size_t>(m - 1)] = left;
    right = left - 1;
  }
  return delims;
}

}  // namespace icluster
