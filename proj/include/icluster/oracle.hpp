#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "icluster/costs.hpp"
#include "icluster/data.hpp"
#include "icluster/solver.hpp"

namespace icluster {

struct OracleResult {
  double best_cost = kInfinity;        // +inf when no partition is feasible
  std::vector<Index> best_delimiters;  // empty when infeasible
  std::int64_t partitions_examined = 0;
};

/// Exhaustive search over all C(n-1, k-1) interval partitions, enumerated
/// in lexicographic delimiter order. Among optimal partitions it returns
/// the one the DP backtracking selects: smallest last delimiter first, then
/// the cheapest prefix, then its smallest last delimiter, and so on.
/// Throws SearchSpaceTooLarge above 10^6 partitions.
OracleResult brute_force(const RangeCost& cost, Index k,
                         const std::optional<SizeConstraints>& constraints = {});

/// C(n, r) saturated at INT64_MAX.
std::int64_t binomial(std::int64_t n, std::int64_t r);

struct LloydResult {
  double cost = 0.0;
  std::vector<Index> assignment;  // 1-based cluster of each point
  std::vector<double> centers;
  int iterations = 0;
};

/// Weighted batch Lloyd iterations from the given centers until the
/// assignment stops changing.
LloydResult lloyd_from_centers(const SortedDataset& ds,
                               std::vector<double> centers);

/// Best of `restarts` Lloyd runs, each seeded with k distinct data points.
LloydResult lloyd_baseline(const SortedDataset& ds, Index k,
                           std::uint64_t seed, int restarts);

struct ScalingRow {
  Index n = 0;
  Index k = 0;
  SolveMode mode = SolveMode::OnDemand;
  double median_seconds = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::vector<double> ratios;  // rows[i] / rows[i-1]
};

/// Times solve on seeded uniform data in [1, 2) for each size (median of
/// `repetitions` runs on a monotonic clock).
ScalingReport scaling_probe(const CostModel& model,
                            const std::vector<Index>& sizes, Index k,
                            std::uint64_t seed,
                            const SolveOptions& options = {},
                            int repetitions = 5);

}  // namespace icluster
