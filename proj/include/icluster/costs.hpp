#pragma once

#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "icluster/data.hpp"
#include "icluster/generator.hpp"

namespace icluster {

/// Inter-cluster aggregation of per-cluster costs.
enum class Combine { Sum, Max };

inline double combine(Combine op, double a, double b) {
  return op == Combine::Sum ? a + b : (a < b ? b : a);
}

enum class ModelKind { KMeans, KMedian, KCenter, KMedoid, Bregman };

/// Whether a single intra-cluster cost query runs in constant (or
/// logarithmic) time from prefix tables, or needs a scan of the range.
enum class QueryComplexity { Constant, Linear };

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct CostModel {
  ModelKind kind = ModelKind::KMeans;
  /// Required for Bregman; the medoid base distance for KMedoid (absent
  /// means absolute deviation); squared for the Euclidean models.
  std::optional<BregmanGenerator> generator;
  /// Exponent applied to the per-point dissimilarity; kInfinity turns a
  /// Bregman model into the Bregman k-center (max-combined).
  double r = 1.0;
  bool discrete_prototype = false;
  Combine combine = Combine::Sum;
  /// Relative tolerance (fraction of the cluster span) for the iterative
  /// prototype searches.
  double tol = 1e-12;

  static CostModel kmeans();
  static CostModel kmedian();
  static CostModel kcenter();
  static CostModel kmedoid(std::optional<BregmanGenerator> base =
                               generators::squared());
  static CostModel bregman(BregmanGenerator gen, double r = 1.0);

  QueryComplexity query_complexity() const;
  /// Canonical method string, e.g. "kmeans" or "bregman:kl:r=2".
  std::string method_string() const;
  /// Generator backing the S3 prefix table.
  BregmanGenerator table_generator() const;
};

/// Parses kmeans | kmedian | kcenter | kmedoid[:<gen>|:abs] |
/// bregman:<gen>[:r=<r>|:r=inf]. Throws Error(InvalidArgument).
CostModel parse_method(std::string_view method);

struct ClusterCostResult {
  double cost = 0.0;
  double prototype = 0.0;
};

/// Standard form F(p) - F(q) - (p - q) F'(q), clamped at zero against
/// roundoff. Throws DomainViolation when p or q lies outside the domain.
double bregman_divergence(const BregmanGenerator& gen, double p, double q);

/// Closed-form Bregman information of points j..i from the prefix tables:
/// prototype is the weighted mean p, cost is
/// W (p F'(p) - F(p)) + SF - F'(p) Sx.
ClusterCostResult bregman_information(const BregmanGenerator& gen,
                                      const PrefixTables& pt, Index j, Index i);

/// min over p of max_l B_F(x_l : p). The max sits at an endpoint, so this
/// bisects B_F(x_j:p) = B_F(x_i:p) until the bracket is narrower than tol.
ClusterCostResult bregman_center_cost(const BregmanGenerator& gen,
                                      const SortedDataset& ds, Index j,
                                      Index i, double tol);

/// min over p in [x_j, x_i] of sum_l w_l B_F(x_l:p)^r. r = 1 uses the
/// closed form; r > 1 scans a 64-point grid and refines the best cell by
/// golden-section search (assumes the objective is quasi-convex).
ClusterCostResult lr_bregman_cost(const BregmanGenerator& gen,
                                  const SortedDataset& ds,
                                  const PrefixTables& pt, Index j, Index i,
                                  double r, double tol);

/// Intra-cluster cost e1 of points j..i under `model`, with bounds and
/// table checks. `pt` must have been built with model.table_generator().
ClusterCostResult e1(const CostModel& model, const SortedDataset& ds,
                     const PrefixTables& pt, Index j, Index i);

/// Bundles a dataset, its prefix tables and a model; the unit the solver
/// queries. Immutable after construction and safe to share across threads.
class RangeCost {
 public:
  /// Throws DomainViolation for data outside the generator domain and
  /// UnsupportedCombination for k-center on weighted data.
  RangeCost(SortedDataset ds, CostModel model);

  Index size() const { return ds_.size(); }
  Combine combine() const { return model_.combine; }
  const CostModel& model() const { return model_; }
  const SortedDataset& dataset() const { return ds_; }
  const PrefixTables& tables() const { return pt_; }

  /// Unchecked e1; 1 <= j <= i <= n.
  ClusterCostResult evaluate(Index j, Index i) const;
  double operator()(Index j, Index i) const { return evaluate(j, i).cost; }

  /// Recomputes the cost of points j..i by direct summation (no prefix
  /// differences) at the prototype the model selects.
  ClusterCostResult direct(Index j, Index i) const;

  /// Per-point dissimilarity d^r(x, p) under the model.
  double dissimilarity(double x, double p) const;

 private:
  SortedDataset ds_;
  CostModel model_;
  PrefixTables pt_;
};

}  // namespace icluster
