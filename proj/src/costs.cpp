#include "icluster/costs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "icluster/error.hpp"

namespace icluster {

namespace {

constexpr int kMaxIterations = 200;
constexpr int kGridPoints = 64;

void check_range(Index n, Index j, Index i) {
  if (j < 1 || i < j || i > n) {
    throw Error(ErrorKind::IndexOutOfRange,
                "range [" + std::to_string(j) + ", " + std::to_string(i) +
                    "] invalid for n = " + std::to_string(n));
  }
}

double clamp_nonneg(double v) { return v > 0.0 ? v : 0.0; }

constexpr Index kDirectRange = 16;

// Smallest m in [j, i] whose cumulative weight from j reaches half the range
// weight: the leftmost weighted median.
Index weighted_median_index(const PrefixTables& pt, Index j, Index i) {
  const double half = 0.5 * compensated_difference(pt.s1, pt.c1, i, j - 1);
  Index lo = j;
  Index hi = i;
  while (lo < hi) {
    const Index mid = lo + (hi - lo) / 2;
    if (compensated_difference(pt.s1, pt.c1, mid, j - 1) >= half) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// sum_{l=j}^{i} w_l |x_l - x_c| from prefix sums, for j <= c <= i.
double absolute_deviation_at(const SortedDataset& ds, const PrefixTables& pt,
                             Index j, Index i, Index c) {
  const double p = ds.x(c);
  const double wl = compensated_difference(pt.s1, pt.c1, c, j - 1);
  const double sl = compensated_difference(pt.s2, pt.c2, c, j - 1);
  const double wr = compensated_difference(pt.s1, pt.c1, i, c);
  const double sr = compensated_difference(pt.s2, pt.c2, i, c);
  return clamp_nonneg((p * wl - sl) + (sr - p * wr));
}

// sum_{l=j}^{i} w_l B_F(x_l : p) from prefix sums.
double bregman_sum_at(const BregmanGenerator& gen, const RangeSums& s,
                      double p) {
  return clamp_nonneg(std::fma(-s.weight, gen.f(p), s.sum_f) -
                      gen.fprime(p) * std::fma(-s.weight, p, s.sum_x));
}

double lr_objective(const BregmanGenerator& gen, const SortedDataset& ds,
                    Index j, Index i, double r, double p) {
  double total = 0.0;
  for (Index l = j; l <= i; ++l) {
    total += ds.w(l) * std::pow(bregman_divergence(gen, ds.x(l), p), r);
  }
  return total;
}

ClusterCostResult medoid_cost(const CostModel& model, const SortedDataset& ds,
                              const PrefixTables& pt, Index j, Index i) {
  ClusterCostResult best{kInfinity, ds.x(j)};
  const RangeSums s = range_sums_unchecked(pt, j, i);
  for (Index c = j; c <= i; ++c) {
    const double cost =
        model.generator ? bregman_sum_at(*model.generator, s, ds.x(c))
                        : absolute_deviation_at(ds, pt, j, i, c);
    if (cost < best.cost) best = {cost, ds.x(c)};
  }
  return best;
}

ClusterCostResult evaluate_unchecked(const CostModel& model,
                                     const SortedDataset& ds,
                                     const PrefixTables& pt, Index j,
                                     Index i) {
  if (j == i) return {0.0, ds.x(j)};
  switch (model.kind) {
    case ModelKind::KMeans:
      return bregman_information(*model.generator, pt, j, i);
    case ModelKind::KMedian: {
      const Index m = weighted_median_index(pt, j, i);
      return {absolute_deviation_at(ds, pt, j, i, m), ds.x(m)};
    }
    case ModelKind::KCenter:
      return {0.5 * (ds.x(i) - ds.x(j)), 0.5 * (ds.x(i) + ds.x(j))};
    case ModelKind::KMedoid:
      return medoid_cost(model, ds, pt, j, i);
    case ModelKind::Bregman: {
      const double span = ds.x(i) - ds.x(j);
      if (std::isinf(model.r)) {
        return bregman_center_cost(*model.generator, ds, j, i,
                                   model.tol * span);
      }
      return lr_bregman_cost(*model.generator, ds, pt, j, i, model.r,
                             model.tol * span);
    }
  }
  return {};
}

std::string format_r(double r) {
  if (std::isinf(r)) return "inf";
  std::ostringstream os;
  os << r;
  return os.str();
}

}  // namespace

CostModel CostModel::kmeans() {
  CostModel m;
  m.kind = ModelKind::KMeans;
  m.generator = generators::squared();
  return m;
}

CostModel CostModel::kmedian() {
  CostModel m;
  m.kind = ModelKind::KMedian;
  return m;
}

CostModel CostModel::kcenter() {
  CostModel m;
  m.kind = ModelKind::KCenter;
  m.combine = Combine::Max;
  return m;
}

CostModel CostModel::kmedoid(std::optional<BregmanGenerator> base) {
  CostModel m;
  m.kind = ModelKind::KMedoid;
  m.generator = std::move(base);
  m.discrete_prototype = true;
  return m;
}

CostModel CostModel::bregman(BregmanGenerator gen, double r) {
  if (!(r >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "exponent r must be >= 1");
  }
  CostModel m;
  m.kind = ModelKind::Bregman;
  m.generator = std::move(gen);
  m.r = r;
  m.combine = std::isinf(r) ? Combine::Max : Combine::Sum;
  return m;
}

QueryComplexity CostModel::query_complexity() const {
  switch (kind) {
    case ModelKind::KMeans:
    case ModelKind::KMedian:
    case ModelKind::KCenter:
      return QueryComplexity::Constant;
    case ModelKind::KMedoid:
      return QueryComplexity::Linear;
    case ModelKind::Bregman:
      return r == 1.0 ? QueryComplexity::Constant : QueryComplexity::Linear;
  }
  return QueryComplexity::Linear;
}

std::string CostModel::method_string() const {
  switch (kind) {
    case ModelKind::KMeans: return "kmeans";
    case ModelKind::KMedian: return "kmedian";
    case ModelKind::KCenter: return "kcenter";
    case ModelKind::KMedoid:
      return "kmedoid:" + (generator ? generator->name : std::string("abs"));
    case ModelKind::Bregman: {
      std::string s = "bregman:" + generator->name;
      if (r != 1.0) s += ":r=" + format_r(r);
      return s;
    }
  }
  return "unknown";
}

BregmanGenerator CostModel::table_generator() const {
  return generator ? *generator : generators::squared();
}

CostModel parse_method(std::string_view method) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto colon = method.find(':', pos);
    parts.push_back(method.substr(pos, colon - pos));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  const auto bad = [&] {
    return Error(ErrorKind::InvalidArgument,
                 "unrecognised method '" + std::string(method) + "'");
  };
  const std::string_view head = parts[0];
  if (parts.size() == 1) {
    if (head == "kmeans") return CostModel::kmeans();
    if (head == "kmedian") return CostModel::kmedian();
    if (head == "kcenter") return CostModel::kcenter();
    if (head == "kmedoid") return CostModel::kmedoid();
    throw bad();
  }
  if (head == "kmedoid" && parts.size() == 2) {
    if (parts[1] == "abs") return CostModel::kmedoid(std::nullopt);
    return CostModel::kmedoid(generator_by_name(parts[1]));
  }
  if (head == "bregman" && parts.size() <= 3) {
    double r = 1.0;
    if (parts.size() == 3) {
      const std::string_view spec = parts[2];
      if (spec.substr(0, 2) != "r=") throw bad();
      const std::string value(spec.substr(2));
      if (value == "inf") {
        r = kInfinity;
      } else {
        try {
          std::size_t used = 0;
          r = std::stod(value, &used);
          if (used != value.size()) throw bad();
        } catch (const std::logic_error&) {
          throw bad();
        }
      }
    }
    return CostModel::bregman(generator_by_name(parts[1]), r);
  }
  throw bad();
}

double bregman_divergence(const BregmanGenerator& gen, double p, double q) {
  if (!gen.contains(p) || !gen.contains(q)) {
    std::ostringstream msg;
    msg << "B_F(" << p << ":" << q << ") outside the domain of '" << gen.name
        << "'";
    throw Error(ErrorKind::DomainViolation, msg.str());
  }
  if (gen.divergence) return clamp_nonneg(gen.divergence(p, q));
  return clamp_nonneg(gen.f(p) - gen.f(q) - (p - q) * gen.fprime(q));
}

ClusterCostResult bregman_information(const BregmanGenerator& gen,
                                      const PrefixTables& pt, Index j,
                                      Index i) {
  const RangeSums s = range_sums(pt, j, i);
  const double p = s.sum_x / s.weight;
  if (!gen.contains(p)) {
    throw Error(ErrorKind::DomainViolation,
                "cluster mean left the generator domain");
  }
  if (j == i) return {0.0, p};
  // Short ranges lose most of their digits in SF - W F(p); sum them
  // directly instead.
  if (i - j < kDirectRange && gen.divergence) {
    double total = 0.0;
    for (Index l = j - 1; l < i; ++l) total += pt.w[l] * gen.divergence(pt.x[l], p);
    return {clamp_nonneg(total), p};
  }
  return {bregman_sum_at(gen, s, p), p};
}

ClusterCostResult bregman_center_cost(const BregmanGenerator& gen,
                                      const SortedDataset& ds, Index j,
                                      Index i, double tol) {
  check_range(ds.size(), j, i);
  const double xl = ds.x(j);
  const double xr = ds.x(i);
  if (j == i) return {0.0, xl};
  if (!gen.contains(xl) || !gen.contains(xr)) {
    throw Error(ErrorKind::DomainViolation,
                "cluster outside the generator domain");
  }

  // B(xl:p) - B(xr:p) is increasing in p on [xl, xr]: its derivative is
  // F''(p) (xr - xl) > 0.
  double lo = xl;
  double hi = xr;
  bool converged = false;
  for (int it = 0; it < kMaxIterations; ++it) {
    if (hi - lo <= tol) {
      converged = true;
      break;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      converged = true;  // bracket at floating-point resolution
      break;
    }
    const double gap =
        bregman_divergence(gen, xl, mid) - bregman_divergence(gen, xr, mid);
    if (gap < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!converged) {
    throw Error(ErrorKind::NoConvergence,
                "Bregman center bisection did not reach tolerance");
  }
  const double p = 0.5 * (lo + hi);
  return {std::max(bregman_divergence(gen, xl, p),
                   bregman_divergence(gen, xr, p)),
          p};
}

ClusterCostResult lr_bregman_cost(const BregmanGenerator& gen,
                                  const SortedDataset& ds,
                                  const PrefixTables& pt, Index j, Index i,
                                  double r, double tol) {
  check_range(ds.size(), j, i);
  if (!(r >= 1.0) || std::isinf(r)) {
    throw Error(ErrorKind::InvalidArgument, "r must be finite and >= 1");
  }
  if (r == 1.0) return bregman_information(gen, pt, j, i);
  if (j == i) return {0.0, ds.x(j)};

  const double xl = ds.x(j);
  const double xr = ds.x(i);
  const auto objective = [&](double p) {
    return lr_objective(gen, ds, j, i, r, p);
  };

  const double step = (xr - xl) / (kGridPoints - 1);
  std::array<double, kGridPoints> grid{};
  int best_g = 0;
  double best_val = kInfinity;
  for (int g = 0; g < kGridPoints; ++g) {
    grid[g] = g == kGridPoints - 1 ? xr : xl + g * step;
    const double v = objective(grid[g]);
    if (v < best_val) {
      best_val = v;
      best_g = g;
    }
  }

  // Golden-section search on the two grid cells around the best node.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = grid[std::max(best_g - 1, 0)];
  double b = grid[std::min(best_g + 1, kGridPoints - 1)];
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  bool converged = false;
  for (int it = 0; it < kMaxIterations; ++it) {
    if (b - a <= tol || c <= a || d >= b) {
      converged = true;
      break;
    }
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
    }
  }
  if (!converged) {
    throw Error(ErrorKind::NoConvergence,
                "golden-section search did not reach tolerance");
  }
  const double p = 0.5 * (a + b);
  const double fp = objective(p);
  if (fp <= best_val) return {fp, p};
  return {best_val, grid[best_g]};
}

ClusterCostResult e1(const CostModel& model, const SortedDataset& ds,
                     const PrefixTables& pt, Index j, Index i) {
  check_range(ds.size(), j, i);
  if (pt.size() != ds.size() ||
      pt.generator_id != model.table_generator().name) {
    throw Error(ErrorKind::InvalidArgument,
                "prefix tables do not match the dataset or model");
  }
  if (model.kind == ModelKind::KCenter && !ds.unit_weights()) {
    throw Error(ErrorKind::UnsupportedCombination,
                "k-center is defined for unit weights only");
  }
  return evaluate_unchecked(model, ds, pt, j, i);
}

RangeCost::RangeCost(SortedDataset ds, CostModel model)
    : ds_(std::move(ds)), model_(std::move(model)) {
  if ((model_.kind == ModelKind::Bregman || model_.kind == ModelKind::KMeans) &&
      !model_.generator) {
    throw Error(ErrorKind::InvalidArgument, "model requires a generator");
  }
  if (model_.kind == ModelKind::KCenter && !ds_.unit_weights()) {
    throw Error(ErrorKind::UnsupportedCombination,
                "k-center is defined for unit weights only");
  }
  pt_ = build_prefix_tables(ds_, model_.table_generator());
}

ClusterCostResult RangeCost::evaluate(Index j, Index i) const {
  return evaluate_unchecked(model_, ds_, pt_, j, i);
}

double RangeCost::dissimilarity(double x, double p) const {
  switch (model_.kind) {
    case ModelKind::KMeans: return (x - p) * (x - p);
    case ModelKind::KMedian:
    case ModelKind::KCenter: return std::abs(x - p);
    case ModelKind::KMedoid:
      return model_.generator ? bregman_divergence(*model_.generator, x, p)
                              : std::abs(x - p);
    case ModelKind::Bregman: {
      const double b = bregman_divergence(*model_.generator, x, p);
      return (std::isinf(model_.r) || model_.r == 1.0) ? b
                                                       : std::pow(b, model_.r);
    }
  }
  return 0.0;
}

ClusterCostResult RangeCost::direct(Index j, Index i) const {
  check_range(ds_.size(), j, i);
  if (j == i) return {0.0, ds_.x(j)};

  double p = 0.0;
  const bool mean_prototype =
      model_.kind == ModelKind::KMeans ||
      (model_.kind == ModelKind::Bregman && model_.r == 1.0);
  if (mean_prototype) {
    double sw = 0.0;
    double swx = 0.0;
    for (Index l = j; l <= i; ++l) {
      sw += ds_.w(l);
      swx += ds_.w(l) * ds_.x(l);
    }
    p = swx / sw;
  } else {
    p = evaluate(j, i).prototype;
  }

  double cost = 0.0;
  for (Index l = j; l <= i; ++l) {
    const double d = dissimilarity(ds_.x(l), p);
    cost = model_.combine == Combine::Sum ? cost + ds_.w(l) * d
                                          : std::max(cost, d);
  }
  return {cost, p};
}

}  // namespace icluster
