#include "icluster/solver.hpp"

#include <cmath>
#include <numeric>

#include "icluster/error.hpp"

namespace icluster {

SizeConstraints SizeConstraints::dummy(Index n, Index k) {
  return {std::vector<Index>(static_cast<std::size_t>(k), 1),
          std::vector<Index>(static_cast<std::size_t>(k), n - k + 1)};
}

SizeConstraints SizeConstraints::with_lower(std::vector<Index> lower,
                                            Index n) {
  std::vector<Index> upper(lower.size(), n);
  return {std::move(lower), std::move(upper)};
}

SizeConstraints SizeConstraints::balanced(Index n, Index k, Index lambda) {
  if (lambda < 1 || k < 1) {
    throw Error(ErrorKind::InvalidArgument, "balanced bounds need lambda, k >= 1");
  }
  const Index lo = std::max<Index>(1, n / (lambda * k));
  const Index hi = (lambda * n + k - 1) / k;
  return {std::vector<Index>(static_cast<std::size_t>(k), lo),
          std::vector<Index>(static_cast<std::size_t>(k), hi)};
}

void SizeConstraints::validate(Index n, Index k) const {
  const auto fail = [](const std::string& why) {
    return Error(ErrorKind::InfeasibleConstraints, why);
  };
  if (static_cast<Index>(lower.size()) != k ||
      static_cast<Index>(upper.size()) != k) {
    throw fail("expected " + std::to_string(k) + " lower and upper bounds");
  }
  for (std::size_t c = 0; c < lower.size(); ++c) {
    if (lower[c] < 1 || upper[c] < lower[c]) {
      throw fail("bounds for cluster " + std::to_string(c + 1) +
                 " must satisfy 1 <= lower <= upper");
    }
  }
  const Index lo = std::accumulate(lower.begin(), lower.end(), Index{0});
  const Index hi = std::accumulate(upper.begin(), upper.end(), Index{0});
  if (lo > n) throw fail("sum of lower bounds exceeds n");
  if (hi < n) throw fail("sum of upper bounds is below n");
}

bool SizeConstraints::admits(const std::vector<Index>& sizes) const {
  if (sizes.size() != lower.size()) return false;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] < lower[c] || sizes[c] > upper[c]) return false;
  }
  return true;
}

std::vector<Index> Clustering::delimiters() const {
  std::vector<Index> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.left);
  return out;
}

std::vector<Index> Clustering::sizes() const {
  std::vector<Index> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.size());
  return out;
}

std::vector<double> Clustering::prototypes() const {
  std::vector<double> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.prototype);
  return out;
}

SolveMode resolve_mode(SolveMode requested, const CostModel& model) {
  if (requested != SolveMode::Auto) return requested;
  return model.query_complexity() == QueryComplexity::Constant
             ? SolveMode::OnDemand
             : SolveMode::Lut;
}

Eigen::MatrixXd precompute_lut(const RangeCost& cost, int threads) {
  const Index n = cost.size();
  Eigen::MatrixXd lut = Eigen::MatrixXd::Constant(n, n, kInfinity);
  detail::parallel_rows(1, n, threads, [&](Index j) {
    for (Index i = j; i <= n; ++i) lut(j - 1, i - 1) = cost(j, i);
  });
  return lut;
}

Clustering make_clustering(const RangeCost& cost,
                           const std::vector<Index>& delimiters) {
  const Index n = cost.size();
  const Index k = static_cast<Index>(delimiters.size());
  if (k < 1 || delimiters.front() != 1) {
    throw Error(ErrorKind::InvalidArgument, "delimiters must start at 1");
  }
  Clustering out;
  out.clusters.reserve(delimiters.size());
  for (Index m = 0; m < k; ++m) {
    const Index left = delimiters[static_cast<std::size_t>(m)];
    const Index right =
        m + 1 < k ? delimiters[static_cast<std::size_t>(m + 1)] - 1 : n;
    if (right < left || right > n) {
      throw Error(ErrorKind::InvalidArgument,
                  "delimiters must be strictly increasing and within 1..n");
    }
    const ClusterCostResult r = cost.direct(left, right);
    out.clusters.push_back({left, right, r.prototype, r.cost});
    out.total_cost =
        m == 0 ? r.cost : combine(cost.combine(), out.total_cost, r.cost);
  }
  return out;
}

SolveResult solve(const RangeCost& cost, Index k,
                  const std::optional<SizeConstraints>& constraints,
                  const SolveOptions& options) {
  const Index n = cost.size();
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (k > n) {
    throw Error(ErrorKind::KTooLarge, "k = " + std::to_string(k) +
                                          " exceeds n = " + std::to_string(n));
  }
  const SizeConstraints bounds =
      constraints ? *constraints : SizeConstraints::dummy(n, k);
  bounds.validate(n, k);
  const ColumnBounds columns{bounds.lower, bounds.upper};

  const SolveMode mode = resolve_mode(options.mode, cost.model());
  DpTables<double> tables;
  if (mode == SolveMode::Lut) {
    Eigen::MatrixXd lut = precompute_lut(cost, options.threads);
    tables = fill_dp_tables<double>(
        n, k, [&lut](Index j, Index i, Index) { return lut(j - 1, i - 1); },
        cost.combine(), columns, options.threads);
    tables.lut = std::move(lut);
  } else {
    tables = fill_dp_tables<double>(
        n, k, [&cost](Index j, Index i, Index) { return cost(j, i); },
        cost.combine(), columns, options.threads);
  }
  tables.mode = mode;

  SolveResult result;
  result.clustering = make_clustering(cost, backtrack(tables, n, k));
  result.tables = std::move(tables);
  return result;
}

SolveResult solve(const SortedDataset& ds, const CostModel& model, Index k,
                  const std::optional<SizeConstraints>& constraints,
                  const SolveOptions& options) {
  return solve(RangeCost(ds, model), k, constraints, options);
}

double Penalty::operator()(Index k) const {
  switch (kind) {
    case Kind::None: return 0.0;
    case Kind::Linear: return lambda * static_cast<double>(k);
    case Kind::Table:
      if (k < 1 || k > static_cast<Index>(table.size())) {
        throw Error(ErrorKind::InvalidArgument,
                    "penalty table has no entry for k = " + std::to_string(k));
      }
      return table[static_cast<std::size_t>(k - 1)];
  }
  return 0.0;
}

SweepResult sweep_k(const RangeCost& cost, Index k_max, const Penalty& penalty,
                    const SolveOptions& options) {
  const Index n = cost.size();
  if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 1");
  if (k_max > n) {
    throw Error(ErrorKind::KTooLarge, "k_max = " + std::to_string(k_max) +
                                          " exceeds n = " + std::to_string(n));
  }
  const ColumnBounds columns{
      std::vector<Index>(static_cast<std::size_t>(k_max), 1),
      std::vector<Index>(static_cast<std::size_t>(k_max), n)};

  DpTables<double> tables;
  if (resolve_mode(options.mode, cost.model()) == SolveMode::Lut) {
    const Eigen::MatrixXd lut = precompute_lut(cost, options.threads);
    tables = fill_dp_tables<double>(
        n, k_max, [&lut](Index j, Index i, Index) { return lut(j - 1, i - 1); },
        cost.combine(), columns, options.threads);
  } else {
    tables = fill_dp_tables<double>(
        n, k_max, [&cost](Index j, Index i, Index) { return cost(j, i); },
        cost.combine(), columns, options.threads);
  }

  SweepResult out;
  const double e1_full = tables.e(n, 1);
  double best = kInfinity;
  for (Index k = 1; k <= k_max; ++k) {
    SweepRow row;
    row.k = k;
    row.cost = tables.e(n, k);
    // A zero single-cluster cost means every e_k is zero as well.
    row.ratio = e1_full > 0.0 ? row.cost / e1_full : 1.0;
    row.regularized = row.cost + penalty(k);
    if (row.regularized < best) {
      best = row.regularized;
      out.best_k = k;
    }
    out.rows.push_back(row);
  }
  return out;
}

VoronoiReport voronoi_consistency(const RangeCost& cost,
                                  const Clustering& clustering) {
  constexpr double kSlack = 1e-12;
  const SortedDataset& ds = cost.dataset();
  VoronoiReport report;
  for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
    const Cluster& own = clustering.clusters[c];
    for (Index l = own.left; l <= own.right; ++l) {
      const double x = ds.x(l);
      const double d_own = cost.dissimilarity(x, own.prototype);
      for (std::size_t o = 0; o < clustering.clusters.size(); ++o) {
        if (o == c) continue;
        if (cost.dissimilarity(x, clustering.clusters[o].prototype) <
            d_own - kSlack) {
          report.violators.push_back(l);
          break;
        }
      }
    }
  }
  report.consistent = report.violators.empty();
  return report;
}

}  // namespace icluster
