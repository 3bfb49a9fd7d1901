#include "icluster/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "icluster/error.hpp"

namespace icluster {

namespace {

constexpr std::int64_t kMaxPartitions = 1'000'000;

// Lexicographic comparison of (C_k, l_k, C_{k-1}, l_{k-1}, ..., C_2, l_2);
// the first cluster's delimiter is always 1.
bool dp_order_less(const std::vector<double>& prefix_a,
                   const std::vector<Index>& delims_a,
                   const std::vector<double>& prefix_b,
                   const std::vector<Index>& delims_b) {
  for (std::size_t m = prefix_a.size(); m-- > 1;) {
    if (prefix_a[m] != prefix_b[m]) return prefix_a[m] < prefix_b[m];
    if (delims_a[m] != delims_b[m]) return delims_a[m] < delims_b[m];
  }
  return prefix_a[0] < prefix_b[0];
}

}  // namespace

std::int64_t binomial(std::int64_t n, std::int64_t r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  long double acc = 1.0L;
  std::int64_t exact = 1;
  for (std::int64_t i = 1; i <= r; ++i) {
    acc = acc * static_cast<long double>(n - r + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(std::numeric_limits<std::int64_t>::max() / 2)) {
      return std::numeric_limits<std::int64_t>::max();
    }
    exact = exact * (n - r + i) / i;  // stays integral at every step
  }
  return exact;
}

OracleResult brute_force(const RangeCost& cost, Index k,
                         const std::optional<SizeConstraints>& constraints) {
  const Index n = cost.size();
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (k > n) throw Error(ErrorKind::KTooLarge, "k exceeds n");
  const std::int64_t space = binomial(n - 1, k - 1);
  if (space > kMaxPartitions) {
    throw Error(ErrorKind::SearchSpaceTooLarge,
                "C(n-1, k-1) = " + std::to_string(space) + " partitions");
  }
  if (constraints) constraints->validate(n, k);

  const auto ku = static_cast<std::size_t>(k);
  std::vector<Index> delims(ku);
  for (std::size_t m = 0; m < ku; ++m) delims[m] = static_cast<Index>(m) + 1;
  std::vector<Index> sizes(ku);
  std::vector<double> prefix(ku);
  std::vector<Index> best_delims;
  std::vector<double> best_prefix;

  OracleResult out;
  while (true) {
    ++out.partitions_examined;
    for (std::size_t m = 0; m < ku; ++m) {
      const Index right = m + 1 < ku ? delims[m + 1] - 1 : n;
      sizes[m] = right - delims[m] + 1;
    }
    if (!constraints || constraints->admits(sizes)) {
      for (std::size_t m = 0; m < ku; ++m) {
        const Index right = m + 1 < ku ? delims[m + 1] - 1 : n;
        const double c = cost(delims[m], right);
        prefix[m] = m == 0 ? c : combine(cost.combine(), prefix[m - 1], c);
      }
      if (best_delims.empty() ||
          dp_order_less(prefix, delims, best_prefix, best_delims)) {
        best_delims = delims;
        best_prefix = prefix;
      }
    }

    // Next combination of delims[1..k-1] from {2..n} in lexicographic order.
    std::size_t pos = ku;
    while (pos-- > 1) {
      const Index limit = n - static_cast<Index>(ku - 1 - pos);
      if (delims[pos] < limit) break;
    }
    if (pos == 0 || ku == 1) break;
    ++delims[pos];
    for (std::size_t m = pos + 1; m < ku; ++m) delims[m] = delims[m - 1] + 1;
  }

  if (!best_delims.empty()) {
    out.best_cost = best_prefix.back();
    out.best_delimiters = std::move(best_delims);
  }
  return out;
}

LloydResult lloyd_from_centers(const SortedDataset& ds,
                               std::vector<double> centers) {
  const Index n = ds.size();
  const auto k = centers.size();
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "no initial centers");
  std::sort(centers.begin(), centers.end());

  LloydResult out;
  out.assignment.assign(static_cast<std::size_t>(n), 0);
  constexpr int kMaxIterations = 1000;
  for (int it = 1; it <= kMaxIterations; ++it) {
    bool changed = false;
    for (Index l = 1; l <= n; ++l) {
      const double x = ds.x(l);
      std::size_t best = 0;
      double best_d = std::abs(x - centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = std::abs(x - centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      auto& slot = out.assignment[static_cast<std::size_t>(l - 1)];
      if (slot != static_cast<Index>(best) + 1) {
        slot = static_cast<Index>(best) + 1;
        changed = true;
      }
    }
    out.iterations = it;
    if (!changed && it > 1) break;

    std::vector<double> sw(k, 0.0), swx(k, 0.0);
    for (Index l = 1; l <= n; ++l) {
      const auto c = static_cast<std::size_t>(out.assignment[static_cast<std::size_t>(l - 1)] - 1);
      sw[c] += ds.w(l);
      swx[c] += ds.w(l) * ds.x(l);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sw[c] > 0.0) centers[c] = swx[c] / sw[c];
    }
  }
  out.centers = centers;

  // Nearest-center cells are intervals in 1D, so each cluster is a
  // contiguous range; cost it exactly as the solver costs its clusters.
  const RangeCost kmeans(ds, CostModel::kmeans());
  out.cost = 0.0;
  Index left = 1;
  for (Index l = 2; l <= n + 1; ++l) {
    if (l == n + 1 || out.assignment[static_cast<std::size_t>(l - 1)] !=
                          out.assignment[static_cast<std::size_t>(l - 2)]) {
      out.cost += kmeans.direct(left, l - 1).cost;
      left = l;
    }
  }
  return out;
}

LloydResult lloyd_baseline(const SortedDataset& ds, Index k,
                           std::uint64_t seed, int restarts) {
  const Index n = ds.size();
  if (k < 1 || k > n) throw Error(ErrorKind::KTooLarge, "k must be in [1, n]");
  std::mt19937_64 rng(seed);
  std::vector<Index> indices(static_cast<std::size_t>(n));
  for (Index l = 0; l < n; ++l) indices[static_cast<std::size_t>(l)] = l + 1;

  LloydResult best;
  best.cost = kInfinity;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    // Partial Fisher-Yates: the first k entries become the sample.
    for (Index c = 0; c < k; ++c) {
      std::uniform_int_distribution<Index> pick(c, n - 1);
      std::swap(indices[static_cast<std::size_t>(c)],
                indices[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<double> centers;
    for (Index c = 0; c < k; ++c) {
      centers.push_back(ds.x(indices[static_cast<std::size_t>(c)]));
    }
    LloydResult run = lloyd_from_centers(ds, std::move(centers));
    if (run.cost < best.cost) best = std::move(run);
  }
  return best;
}

ScalingReport scaling_probe(const CostModel& model,
                            const std::vector<Index>& sizes, Index k,
                            std::uint64_t seed, const SolveOptions& options,
                            int repetitions) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw Error(ErrorKind::InvalidArgument, "sizes must be ascending");
  }
  ScalingReport report;
  for (const Index n : sizes) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(1.0, 2.0);
    std::vector<double> values(static_cast<std::size_t>(n));
    for (auto& v : values) v = unif(rng);
    const RangeCost cost(build_dataset(std::span<const double>(values)), model);

    std::vector<double> times;
    for (int r = 0; r < std::max(repetitions, 1); ++r) {
      const auto start = std::chrono::steady_clock::now();
      const SolveResult result = solve(cost, k, std::nullopt, options);
      const auto stop = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    report.rows.push_back(
        {cost.size(), k, resolve_mode(options.mode, model), times[times.size() / 2]});
  }
  for (std::size_t r = 1; r < report.rows.size(); ++r) {
    report.ratios.push_back(report.rows[r].median_seconds /
                            report.rows[r - 1].median_seconds);
  }
  return report;
}

}  // namespace icluster
