#pragma once

#include <Eigen/Core>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icluster/generator.hpp"

namespace icluster {

using Index = Eigen::Index;

struct WeightedPoint {
  double value = 0.0;
  double weight = 1.0;
};

/// One raw input record; a missing weight means unit weight.
struct RawPoint {
  double value = 0.0;
  std::optional<double> weight;
};

/// Distinct weighted scalars in strictly increasing order.
///
/// Range queries throughout the library use 1-based inclusive indices
/// (point l is x(l), 1 <= l <= size()), so that prefix-table differences
/// read s[i] - s[j-1].
class SortedDataset {
 public:
  SortedDataset() = default;

  Index size() const { return values_.size(); }
  double x(Index l) const { return values_[l - 1]; }
  double w(Index l) const { return weights_[l - 1]; }

  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  double total_weight() const { return weights_.sum(); }
  bool unit_weights() const { return (weights_.array() == 1.0).all(); }

  std::vector<WeightedPoint> points() const;

  bool operator==(const SortedDataset& other) const {
    return values_ == other.values_ && weights_ == other.weights_;
  }

 private:
  friend SortedDataset build_dataset(std::span<const RawPoint> raw);
  Eigen::VectorXd values_;
  Eigen::VectorXd weights_;
};

/// Sorts, validates and coalesces exact duplicates (weights summed).
/// Throws EmptyInput, NonPositiveWeight or NonFiniteValue.
SortedDataset build_dataset(std::span<const RawPoint> raw);
SortedDataset build_dataset(std::span<const WeightedPoint> points);
SortedDataset build_dataset(std::span<const double> values);

/// Parses one record per line: `value` or `value,weight` (comma or
/// whitespace separated). Blank lines and lines starting with '#' are
/// skipped. In histogram mode the second column is a count and must be
/// present. Throws Error(ParseError) with the offending line number.
std::vector<RawPoint> read_points(std::istream& in, bool histogram = false);
std::vector<RawPoint> read_points_file(const std::string& path,
                                       bool histogram = false);

/// Cumulative sums S1 = sum w, S2 = sum w x, S3 = sum w F(x), each of
/// length n + 1 with a leading zero. c1..c3 carry the rounding error of
/// each running sum, so s + c is the prefix sum to about twice double
/// precision and short ranges far into the table keep their digits.
struct PrefixTables {
  Eigen::VectorXd s1;
  Eigen::VectorXd s2;
  Eigen::VectorXd s3;
  Eigen::VectorXd c1;
  Eigen::VectorXd c2;
  Eigen::VectorXd c3;
  /// The points themselves (0-based), for short ranges summed directly.
  Eigen::VectorXd x;
  Eigen::VectorXd w;
  std::string generator_id;

  Index size() const { return s1.size() - 1; }
};

struct RangeSums {
  double weight = 0.0;  // W
  double sum_x = 0.0;   // Sx
  double sum_f = 0.0;   // SF
};

/// Single linear pass. Throws DomainViolation if a value lies outside the
/// generator's domain.
PrefixTables build_prefix_tables(const SortedDataset& ds,
                                 const BregmanGenerator& gen);

/// O(1) sums over points j..i (1-based, inclusive). Throws IndexOutOfRange.
RangeSums range_sums(const PrefixTables& pt, Index j, Index i);

/// hi[i] + lo[i] - hi[b] - lo[b] with the leading difference taken
/// exactly (TwoSum).
inline double compensated_difference(const Eigen::VectorXd& hi,
                                     const Eigen::VectorXd& lo, Index i,
                                     Index b) {
  const double a = hi[i];
  const double c = -hi[b];
  const double d = a + c;
  const double ap = d - c;
  const double err = (a - ap) + (c - (d - ap));
  return d + (err + (lo[i] - lo[b]));
}

/// Unchecked variant for inner loops; caller guarantees 1 <= j <= i <= n.
inline RangeSums range_sums_unchecked(const PrefixTables& pt, Index j,
                                      Index i) {
  return {compensated_difference(pt.s1, pt.c1, i, j - 1),
          compensated_difference(pt.s2, pt.c2, i, j - 1),
          compensated_difference(pt.s3, pt.c3, i, j - 1)};
}

}  // namespace icluster
