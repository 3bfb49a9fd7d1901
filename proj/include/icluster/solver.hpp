#pragma once

#include <optional>
#include <vector>

#include "icluster/costs.hpp"
#include "icluster/data.hpp"
#include "icluster/dp.hpp"

namespace icluster {

/// Lower and upper bounds on each cluster's size, in cluster order.
struct SizeConstraints {
  std::vector<Index> lower;
  std::vector<Index> upper;

  /// lower = 1, upper = n - k + 1: every cluster non-empty, nothing more.
  static SizeConstraints dummy(Index n, Index k);
  /// Explicit lower bounds with upper bounds left at n.
  static SizeConstraints with_lower(std::vector<Index> lower, Index n);
  /// Balanced bounds floor(n / (lambda k)) .. ceil(lambda n / k).
  static SizeConstraints balanced(Index n, Index k, Index lambda);

  /// Throws InfeasibleConstraints on malformed or unsatisfiable bounds.
  void validate(Index n, Index k) const;
  bool admits(const std::vector<Index>& sizes) const;
};

struct Cluster {
  Index left = 0;   // 1-based, inclusive
  Index right = 0;  // 1-based, inclusive
  double prototype = 0.0;
  double cost = 0.0;

  Index size() const { return right - left + 1; }
};

struct Clustering {
  std::vector<Cluster> clusters;
  /// Combined cost of `clusters`, recomputed by direct summation.
  double total_cost = 0.0;

  Index k() const { return static_cast<Index>(clusters.size()); }
  Index n() const { return clusters.empty() ? 0 : clusters.back().right; }
  std::vector<Index> delimiters() const;
  std::vector<Index> sizes() const;
  std::vector<double> prototypes() const;
};

struct SolveOptions {
  SolveMode mode = SolveMode::Auto;
  int threads = 1;
};

struct SolveResult {
  Clustering clustering;
  DpTables<double> tables;
};

/// Auto resolves to OnDemand for constant-time cost queries, Lut otherwise.
SolveMode resolve_mode(SolveMode requested, const CostModel& model);

/// Optimal interval clustering of `cost.dataset()` into k clusters.
/// Throws KTooLarge (k > n) and InfeasibleConstraints.
SolveResult solve(const RangeCost& cost, Index k,
                  const std::optional<SizeConstraints>& constraints = {},
                  const SolveOptions& options = {});
SolveResult solve(const SortedDataset& ds, const CostModel& model, Index k,
                  const std::optional<SizeConstraints>& constraints = {},
                  const SolveOptions& options = {});

/// n x n table of e1(j, i) at (j-1, i-1); +inf below the diagonal.
Eigen::MatrixXd precompute_lut(const RangeCost& cost, int threads = 1);

/// Builds a Clustering from 1-based left delimiters, recomputing every
/// prototype and cost by direct summation.
Clustering make_clustering(const RangeCost& cost,
                           const std::vector<Index>& delimiters);

/// f(k) added to e_k during model selection.
struct Penalty {
  enum class Kind { None, Linear, Table };
  Kind kind = Kind::None;
  double lambda = 0.0;
  std::vector<double> table;  // table[k-1] = f(k)

  static Penalty none() { return {}; }
  static Penalty linear(double lambda) { return {Kind::Linear, lambda, {}}; }
  static Penalty custom(std::vector<double> values) {
    return {Kind::Table, 0.0, std::move(values)};
  }
  double operator()(Index k) const;
};

struct SweepRow {
  Index k = 0;
  double cost = 0.0;         // e_k
  double ratio = 0.0;        // m(k) = e_k / e_1
  double regularized = 0.0;  // e_k + f(k)
};

struct SweepResult {
  std::vector<SweepRow> rows;
  Index best_k = 1;  // smallest k minimising the regularized cost
};

/// e_k for k = 1..k_max from a single k_max-column table.
SweepResult sweep_k(const RangeCost& cost, Index k_max,
                    const Penalty& penalty = Penalty::none(),
                    const SolveOptions& options = {});

struct VoronoiReport {
  bool consistent = true;
  std::vector<Index> violators;  // 1-based point indices
};

/// Checks that every point is at least as close (d^r of the model) to its
/// own prototype as to every other one, with 1e-12 absolute slack.
VoronoiReport voronoi_consistency(const RangeCost& cost,
                                  const Clustering& clustering);

}  // namespace icluster
