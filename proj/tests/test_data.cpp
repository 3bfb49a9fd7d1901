#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "icluster/data.hpp"
#include "icluster/error.hpp"

using namespace icluster;

namespace {

SortedDataset make(std::initializer_list<RawPoint> pts) {
  const std::vector<RawPoint> raw(pts);
  return build_dataset(std::span<const RawPoint>(raw));
}

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an icluster::Error";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(BuildDataset, SinglePoint) {
  const auto ds = make({{5.0, std::nullopt}});
  ASSERT_EQ(ds.size(), 1);
  EXPECT_EQ(ds.x(1), 5.0);
  EXPECT_EQ(ds.w(1), 1.0);
}

TEST(BuildDataset, CoalescesDuplicates) {
  const auto ds = make({{2, 1.0}, {1, 1.0}, {2, 1.0}});
  ASSERT_EQ(ds.size(), 2);
  EXPECT_EQ(ds.x(1), 1.0);
  EXPECT_EQ(ds.x(2), 2.0);
  EXPECT_EQ(ds.w(1), 1.0);
  EXPECT_EQ(ds.w(2), 2.0);
}

TEST(BuildDataset, SortsWeightedPoints) {
  const auto ds = make({{7, 0.5}, {6, 2.0}});
  EXPECT_EQ(ds.x(1), 6.0);
  EXPECT_EQ(ds.x(2), 7.0);
  EXPECT_EQ(ds.w(1), 2.0);
  EXPECT_EQ(ds.w(2), 0.5);
}

TEST(BuildDataset, Errors) {
  EXPECT_EQ(kind_of([] { build_dataset(std::span<const RawPoint>()); }),
            ErrorKind::EmptyInput);
  EXPECT_EQ(kind_of([] { make({{1.0, 0.0}}); }), ErrorKind::NonPositiveWeight);
  EXPECT_EQ(kind_of([] { make({{1.0, -2.0}}); }), ErrorKind::NonPositiveWeight);
  EXPECT_EQ(kind_of([] { make({{NAN, 1.0}}); }), ErrorKind::NonFiniteValue);
  EXPECT_EQ(kind_of([] { make({{INFINITY, std::nullopt}}); }),
            ErrorKind::NonFiniteValue);
}

TEST(BuildDataset, IdempotentAndWeightPreserving) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> v(0, 30);
  std::uniform_real_distribution<double> w(0.1, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RawPoint> raw;
    double total = 0.0;
    for (int l = 0; l < 60; ++l) {
      const double wt = w(rng);
      total += wt;
      raw.push_back({static_cast<double>(v(rng)), wt});
    }
    const auto ds = build_dataset(std::span<const RawPoint>(raw));
    for (Index l = 2; l <= ds.size(); ++l) ASSERT_LT(ds.x(l - 1), ds.x(l));
    EXPECT_NEAR(ds.total_weight(), total, 1e-12 * total);

    const auto pts = ds.points();
    const auto again = build_dataset(std::span<const WeightedPoint>(pts));
    EXPECT_EQ(again, ds);
  }
}

TEST(ReadPoints, FormatsAndComments) {
  std::istringstream in(
      "# header\n"
      "1.5\n"
      "2,3\n"
      "  4\t0.25\n"
      "\n"
      "-1e2 2\n");
  const auto pts = read_points(in);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[0].value, 1.5);
  EXPECT_FALSE(pts[0].weight.has_value());
  EXPECT_EQ(*pts[1].weight, 3.0);
  EXPECT_EQ(*pts[2].weight, 0.25);
  EXPECT_EQ(pts[3].value, -100.0);
}

TEST(ReadPoints, HistogramRequiresCounts) {
  std::istringstream ok("0,10\n1,4\n");
  EXPECT_EQ(read_points(ok, true).size(), 2u);
  std::istringstream bad("0,10\n1\n");
  EXPECT_EQ(kind_of([&] { read_points(bad, true); }), ErrorKind::ParseError);
  std::istringstream junk("1,abc\n");
  EXPECT_EQ(kind_of([&] { read_points(junk); }), ErrorKind::ParseError);
}

TEST(PrefixTables, SquaredExample) {
  const std::vector<double> xs{1, 2, 6, 7};
  const auto ds = build_dataset(std::span<const double>(xs));
  const auto pt = build_prefix_tables(ds, generators::squared());
  Eigen::VectorXd s1(5), s2(5), s3(5);
  s1 << 0, 1, 2, 3, 4;
  s2 << 0, 1, 3, 9, 16;
  s3 << 0, 1, 5, 41, 90;
  EXPECT_EQ(pt.s1, s1);
  EXPECT_EQ(pt.s2, s2);
  EXPECT_EQ(pt.s3, s3);

  const RangeSums r = range_sums(pt, 2, 3);
  EXPECT_EQ(r.weight, 2.0);
  EXPECT_EQ(r.sum_x, 8.0);
  EXPECT_EQ(r.sum_f, 40.0);

  const RangeSums full = range_sums(pt, 1, 4);
  EXPECT_EQ(full.weight, pt.s1[4]);
  EXPECT_EQ(full.sum_f, pt.s3[4]);

  const RangeSums single = range_sums(pt, 3, 3);
  EXPECT_EQ(single.sum_x, 6.0);
  EXPECT_EQ(single.sum_f, 36.0);
}

TEST(PrefixTables, WeightedSinglePoint) {
  const auto ds = make({{5.0, 2.0}});
  const auto pt = build_prefix_tables(ds, generators::squared());
  EXPECT_EQ(pt.s1[1], 2.0);
  EXPECT_EQ(pt.s2[1], 10.0);
  EXPECT_EQ(pt.s3[1], 50.0);
}

TEST(PrefixTables, DomainAndIndexErrors) {
  const std::vector<double> xs{-1, 1};
  const auto ds = build_dataset(std::span<const double>(xs));
  EXPECT_EQ(kind_of([&] { build_prefix_tables(ds, generators::itakura_saito()); }),
            ErrorKind::DomainViolation);
  const auto pt = build_prefix_tables(ds, generators::squared());
  EXPECT_EQ(kind_of([&] { range_sums(pt, 0, 1); }), ErrorKind::IndexOutOfRange);
  EXPECT_EQ(kind_of([&] { range_sums(pt, 2, 1); }), ErrorKind::IndexOutOfRange);
  EXPECT_EQ(kind_of([&] { range_sums(pt, 1, 3); }), ErrorKind::IndexOutOfRange);
}

TEST(PrefixTables, RandomRangesMatchDirectSums) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(0.1, 20.0);
  std::uniform_real_distribution<double> w(0.2, 5.0);
  for (const auto& gen : {generators::squared(), generators::kl(),
                          generators::itakura_saito(), generators::exp()}) {
    std::vector<RawPoint> raw;
    for (int l = 0; l < 200; ++l) raw.push_back({v(rng) / (gen.name == "exp" ? 4 : 1), w(rng)});
    const auto ds = build_dataset(std::span<const RawPoint>(raw));
    const auto pt = build_prefix_tables(ds, gen);
    ASSERT_EQ(pt.s1[0], 0.0);
    for (Index l = 1; l <= ds.size(); ++l) ASSERT_GT(pt.s1[l], pt.s1[l - 1]);

    std::uniform_int_distribution<Index> idx(1, ds.size());
    for (int q = 0; q < 1000; ++q) {
      Index j = idx(rng), i = idx(rng);
      if (j > i) std::swap(j, i);
      double sw = 0, sx = 0, sf = 0;
      for (Index l = j; l <= i; ++l) {
        sw += ds.w(l);
        sx += ds.w(l) * ds.x(l);
        sf += ds.w(l) * gen.f(ds.x(l));
      }
      const RangeSums r = range_sums(pt, j, i);
      EXPECT_NEAR(r.weight, sw, 1e-12 * std::abs(pt.s1[ds.size()]));
      EXPECT_NEAR(r.sum_x, sx, 1e-12 * std::abs(pt.s2[ds.size()]));
      // Cancellation in S3 differences is bounded by the table magnitude.
      double mag = 0;
      for (Index l = 1; l <= ds.size(); ++l) mag += std::abs(ds.w(l) * gen.f(ds.x(l)));
      EXPECT_NEAR(r.sum_f, sf, 1e-12 * mag);
    }
  }
}

TEST(PrefixTables, ShortRangeFarIntoLargeTable) {
  // 10^6 units of weight ahead of a pair whose own sums are tiny.
  std::vector<WeightedPoint> pts;
  for (int l = 0; l < 1000; ++l) pts.push_back({1.0 + l * 1e-3, 1000.0});
  pts.push_back({5.0, 1e-7});
  pts.push_back({5.1, 3e-7});
  const auto ds = build_dataset(std::span<const WeightedPoint>(pts));
  const auto pt = build_prefix_tables(ds, generators::kl());
  const auto s = range_sums(pt, 1001, 1002);
  EXPECT_NEAR(s.weight, 4e-7, 1e-12 * 4e-7);
  EXPECT_NEAR(s.sum_x, 5.0e-7 + 15.3e-7, 1e-12 * 20.3e-7);
  const double sf = 1e-7 * 5.0 * std::log(5.0) + 3e-7 * 5.1 * std::log(5.1);
  EXPECT_NEAR(s.sum_f, sf, 1e-12 * sf);
}
