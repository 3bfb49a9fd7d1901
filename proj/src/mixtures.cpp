#include "icluster/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "icluster/costs.hpp"
#include "icluster/dp.hpp"
#include "icluster/error.hpp"
#include "icluster/solver.hpp"

namespace icluster {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_count(double x) { return x >= 0.0 && x == std::floor(x); }

void check_support(const FamilySpec& family, double x) {
  const auto fail = [&](const char* what) {
    std::ostringstream msg;
    msg << "x = " << x << " " << what << " for " << family.name();
    return Error(ErrorKind::SupportViolation, msg.str());
  };
  switch (family.id) {
    case Family::Poisson:
      if (!is_count(x)) throw fail("is not a non-negative integer");
      break;
    case Family::Rayleigh:
    case Family::Exponential:
      if (x < 0.0) throw fail("is negative");
      break;
    default:
      break;
  }
}

// sum w, sum w x, sum w x^2 and a family-specific auxiliary sum over a
// clustered dataset; for the zero-mean Gaussian x is already t(x) = x^2.
struct WeightedSums {
  double w = 0.0;
  double x = 0.0;
  double xx = 0.0;
  double aux = 0.0;
};

double aux_term(const FamilySpec& family, double x) {
  switch (family.id) {
    case Family::Poisson: return std::lgamma(x + 1.0);
    case Family::Rayleigh: return std::log(x);
    default: return 0.0;
  }
}

// Leftmost weighted median of points j..i (1-based) given cumulative weights.
Index median_index(const Eigen::VectorXd& cw, Index j, Index i) {
  const double base = cw[j - 1];
  const double half = 0.5 * (cw[i] - base);
  Index lo = j;
  Index hi = i;
  while (lo < hi) {
    const Index mid = lo + (hi - lo) / 2;
    if (cw[mid] - base >= half) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// Closed-form min over theta of sum w (-log p) for one cluster from its
// sums. `floor` is the variance floor (Gaussian, Rayleigh) or the mean
// floor (exponential).
double min_neg_loglik(const FamilySpec& family, const WeightedSums& s,
                      double floor, double abs_dev_at_median) {
  switch (family.id) {
    case Family::GaussianFixedSigma: {
      const double var = family.fixed * family.fixed;
      const double sse = std::max(0.0, s.xx - s.x * s.x / s.w);
      return 0.5 * s.w * (kLog2Pi + std::log(var)) + sse / (2.0 * var);
    }
    case Family::GaussianFreeSigma: {
      const double sse = std::max(0.0, s.xx - s.x * s.x / s.w);
      const double var = std::max(sse / s.w, floor);
      return 0.5 * s.w * (kLog2Pi + std::log(var)) + sse / (2.0 * var);
    }
    case Family::GaussianZeroMean: {
      const double var = std::max(s.x / s.w, floor);
      return 0.5 * s.w * (kLog2Pi + std::log(var)) + s.x / (2.0 * var);
    }
    case Family::Poisson: {
      if (s.x == 0.0) return s.aux;
      const double lambda = s.x / s.w;
      return s.x - s.x * std::log(lambda) + s.aux;
    }
    case Family::Rayleigh: {
      const double var = std::max(s.xx / (2.0 * s.w), floor);
      return -s.aux + s.w * std::log(var) + s.xx / (2.0 * var);
    }
    case Family::Exponential: {
      const double mean = std::max(s.x / s.w, floor);
      return s.w * std::log(mean) + s.x / mean;
    }
    case Family::LaplaceFixedScale: {
      const double b = family.fixed;
      return s.w * std::log(2.0 * b) + abs_dev_at_median / b;
    }
  }
  return 0.0;
}

// Prefix sums over a clustered dataset giving O(1) (O(log n) for Laplace)
// per-range minimal negative log-likelihood.
class MixtureRangeCost {
 public:
  MixtureRangeCost(const SortedDataset& ds, FamilySpec family, double floor)
      : ds_(ds), family_(family), floor_(floor) {
    const Index n = ds.size();
    cw_ = Eigen::VectorXd::Zero(n + 1);
    cx_ = Eigen::VectorXd::Zero(n + 1);
    cxx_ = Eigen::VectorXd::Zero(n + 1);
    caux_ = Eigen::VectorXd::Zero(n + 1);
    for (Index l = 1; l <= n; ++l) {
      const double x = ds.x(l);
      const double w = ds.w(l);
      cw_[l] = cw_[l - 1] + w;
      cx_[l] = cx_[l - 1] + w * x;
      cxx_[l] = cxx_[l - 1] + w * x * x;
      caux_[l] = caux_[l - 1] + w * aux_term(family_, x);
    }
  }

  double weight(Index j, Index i) const { return cw_[i] - cw_[j - 1]; }

  double base(Index j, Index i) const {
    const WeightedSums s{cw_[i] - cw_[j - 1], cx_[i] - cx_[j - 1],
                         cxx_[i] - cxx_[j - 1], caux_[i] - caux_[j - 1]};
    double abs_dev = 0.0;
    if (family_.id == Family::LaplaceFixedScale) {
      const Index m = median_index(cw_, j, i);
      const double p = ds_.x(m);
      abs_dev = std::max(0.0, (p * (cw_[m] - cw_[j - 1]) - (cx_[m] - cx_[j - 1])) +
                                  ((cx_[i] - cx_[m]) - p * (cw_[i] - cw_[m])));
    }
    return min_neg_loglik(family_, s, floor_, abs_dev);
  }

 private:
  const SortedDataset& ds_;
  FamilySpec family_;
  double floor_;
  Eigen::VectorXd cw_, cx_, cxx_, caux_;
};

// MLE on points j..i of a clustered dataset (values already t(x)).
MleResult mle_on_range(const FamilySpec& family, const SortedDataset& cds,
                       Index j, Index i, double floor) {
  double sw = 0.0;
  double sx = 0.0;
  for (Index l = j; l <= i; ++l) {
    sw += cds.w(l);
    sx += cds.w(l) * cds.x(l);
  }
  const double mean = sx / sw;
  MleResult r;
  const auto floored = [&](double v) {
    if (v < floor || !(v > 0.0)) {
      if (!(floor > 0.0)) {
        throw Error(ErrorKind::DegenerateCluster,
                    "cluster has zero spread; a floor is required");
      }
      r.floored = true;
      return floor;
    }
    return v;
  };

  switch (family.id) {
    case Family::GaussianFixedSigma:
    case Family::Poisson:
      r.theta = {mean, 0.0};
      break;
    case Family::GaussianFreeSigma: {
      double ss = 0.0;
      for (Index l = j; l <= i; ++l) {
        const double d = cds.x(l) - mean;
        ss += cds.w(l) * d * d;
      }
      r.theta = {mean, floored(ss / sw)};
      break;
    }
    case Family::GaussianZeroMean:
      r.theta = {floored(mean), 0.0};
      break;
    case Family::Rayleigh: {
      double sxx = 0.0;
      for (Index l = j; l <= i; ++l) sxx += cds.w(l) * cds.x(l) * cds.x(l);
      r.theta = {floored(sxx / (2.0 * sw)), 0.0};
      break;
    }
    case Family::Exponential:
      r.theta = {1.0 / floored(mean), 0.0};
      break;
    case Family::LaplaceFixedScale: {
      const double half = 0.5 * sw;
      double acc = 0.0;
      Index m = j;
      for (; m <= i; ++m) {
        acc += cds.w(m);
        if (acc >= half) break;
      }
      r.theta = {cds.x(std::min(m, i)), 0.0};
      break;
    }
  }
  return r;
}

struct Floors {
  double variance = 0.0;
  double mean = 0.0;
};

Floors data_floors(const SortedDataset& ds) {
  const double range = ds.x(ds.size()) - ds.x(1);
  const double scale =
      range > 0.0 ? range : std::max(std::abs(ds.x(1)), 1.0);
  return {(1e-6 * scale) * (1e-6 * scale), 1e-6 * scale};
}

double floor_for(const FamilySpec& family, const Floors& f) {
  return family.id == Family::Exponential ? f.mean : f.variance;
}

SortedDataset clustered_dataset(const SortedDataset& ds,
                                const FamilySpec& family) {
  if (!family.transforms()) return ds;
  std::vector<WeightedPoint> pts;
  pts.reserve(static_cast<std::size_t>(ds.size()));
  for (Index l = 1; l <= ds.size(); ++l) {
    pts.push_back({family.sufficient_statistic(ds.x(l)), ds.w(l)});
  }
  return build_dataset(std::span<const WeightedPoint>(pts));
}

// Component label (1-based) of every original point given delimiters on
// the clustered dataset.
std::vector<Index> labels_for(const SortedDataset& ds,
                              const SortedDataset& cds,
                              const FamilySpec& family,
                              const std::vector<Index>& delims) {
  std::vector<Index> labels;
  labels.reserve(static_cast<std::size_t>(ds.size()));
  const double* first = cds.values().data();
  const double* last = first + cds.size();
  for (Index l = 1; l <= ds.size(); ++l) {
    const double y = family.sufficient_statistic(ds.x(l));
    const Index pos = (std::lower_bound(first, last, y) - first) + 1;
    const auto it = std::upper_bound(delims.begin(), delims.end(), pos);
    labels.push_back(static_cast<Index>(it - delims.begin()));
  }
  return labels;
}

double complete_loglik(const SortedDataset& ds, const MixtureModel& model,
                       const std::vector<Index>& labels) {
  double lc = 0.0;
  for (Index l = 1; l <= ds.size(); ++l) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(l - 1)] - 1);
    lc += ds.w(l) * (std::log(model.alphas[c]) -
                     neg_log_density(model.family, ds.x(l), model.thetas[c]));
  }
  return lc;
}

void finish_report(FitReport& report, const SortedDataset& ds,
                   const FitOptions& options) {
  const double total = ds.total_weight();
  report.avg_complete_loglik = report.complete_loglik / total;
  const auto n = static_cast<std::int64_t>(std::llround(total));
  const auto q = aic_parameter_count(report.model.family, report.model.k(),
                                     options.aic_k);
  if (n > q + 1) {
    report.aic = aic(report.complete_loglik, n, q);
  } else {
    report.aic = kNaN;
    report.warnings.push_back("TooFewSamples: AIC undefined for n = " +
                              std::to_string(n) + " and " + std::to_string(q) +
                              " parameters");
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

FamilySpec FamilySpec::gaussian_fixed_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  }
  return {Family::GaussianFixedSigma, sigma};
}

FamilySpec FamilySpec::laplace_fixed_scale(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  }
  return {Family::LaplaceFixedScale, b};
}

std::string FamilySpec::name() const {
  switch (id) {
    case Family::GaussianFixedSigma:
      return "gaussian_fixed_sigma:" + format_double(fixed);
    case Family::GaussianFreeSigma: return "gaussian_free_sigma";
    case Family::GaussianZeroMean: return "gaussian_zero_mean";
    case Family::Poisson: return "poisson";
    case Family::Rayleigh: return "rayleigh";
    case Family::Exponential: return "exponential";
    case Family::LaplaceFixedScale:
      return "laplace_fixed_scale:" + format_double(fixed);
  }
  return "unknown";
}

std::vector<std::string> FamilySpec::parameter_names() const {
  switch (id) {
    case Family::GaussianFixedSigma: return {"mu"};
    case Family::GaussianFreeSigma: return {"mu", "sigma2"};
    case Family::GaussianZeroMean: return {"sigma2"};
    case Family::Poisson: return {"lambda"};
    case Family::Rayleigh: return {"sigma2"};
    case Family::Exponential: return {"rate"};
    case Family::LaplaceFixedScale: return {"mu"};
  }
  return {};
}

FamilySpec parse_family(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const bool has_arg = colon != std::string_view::npos;
  const auto bad = [&] {
    return Error(ErrorKind::InvalidArgument,
                 "unrecognised family '" + std::string(spec) + "'");
  };
  const auto arg = [&] {
    if (!has_arg) throw bad();
    const std::string value(spec.substr(colon + 1));
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw bad();
      return v;
    } catch (const std::logic_error&) {
      throw bad();
    }
  };
  if (head == "gaussian_fixed_sigma") return FamilySpec::gaussian_fixed_sigma(arg());
  if (head == "laplace_fixed_scale") return FamilySpec::laplace_fixed_scale(arg());
  if (has_arg) throw bad();
  if (head == "gaussian_free_sigma") return FamilySpec::gaussian_free_sigma();
  if (head == "gaussian_zero_mean") return FamilySpec::gaussian_zero_mean();
  if (head == "poisson") return FamilySpec::poisson();
  if (head == "rayleigh") return FamilySpec::rayleigh();
  if (head == "exponential") return FamilySpec::exponential();
  throw bad();
}

double neg_log_density(const FamilySpec& family, double x, const Theta& theta) {
  check_support(family, x);
  switch (family.id) {
    case Family::GaussianFixedSigma: {
      const double var = family.fixed * family.fixed;
      const double d = x - theta[0];
      return 0.5 * (kLog2Pi + std::log(var)) + d * d / (2.0 * var);
    }
    case Family::GaussianFreeSigma: {
      const double d = x - theta[0];
      return 0.5 * (kLog2Pi + std::log(theta[1])) + d * d / (2.0 * theta[1]);
    }
    case Family::GaussianZeroMean:
      return 0.5 * (kLog2Pi + std::log(theta[0])) + x * x / (2.0 * theta[0]);
    case Family::Poisson: {
      const double lambda = theta[0];
      if (lambda == 0.0) {
        return x == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      }
      return lambda - x * std::log(lambda) + std::lgamma(x + 1.0);
    }
    case Family::Rayleigh:
      if (x == 0.0) return std::numeric_limits<double>::infinity();
      return -std::log(x) + std::log(theta[0]) + x * x / (2.0 * theta[0]);
    case Family::Exponential:
      return -std::log(theta[0]) + theta[0] * x;
    case Family::LaplaceFixedScale:
      return std::log(2.0 * family.fixed) + std::abs(x - theta[0]) / family.fixed;
  }
  return 0.0;
}

double density(const FamilySpec& family, double x, const Theta& theta) {
  switch (family.id) {
    case Family::Poisson:
      if (!is_count(x)) return 0.0;
      break;
    case Family::Rayleigh:
    case Family::Exponential:
      if (x < 0.0) return 0.0;
      break;
    default:
      break;
  }
  return std::exp(-neg_log_density(family, x, theta));
}

MleResult mle_update(const FamilySpec& family,
                     std::span<const WeightedPoint> points, double floor) {
  if (points.empty()) {
    throw Error(ErrorKind::EmptyInput, "cannot fit an empty cluster");
  }
  for (const auto& p : points) check_support(family, p.value);
  const SortedDataset cds = clustered_dataset(build_dataset(points), family);
  return mle_on_range(family, cds, 1, cds.size(), floor);
}

double MixtureModel::component_density(Index c, double x) const {
  const auto idx = static_cast<std::size_t>(c);
  return alphas[idx] * icluster::density(family, x, thetas[idx]);
}

double MixtureModel::density(double x) const {
  double total = 0.0;
  for (Index c = 0; c < k(); ++c) total += component_density(c, x);
  return total;
}

std::int64_t aic_parameter_count(const FamilySpec& family, Index k,
                                 AicParameterCount policy) {
  if (policy == AicParameterCount::Clusters) return k;
  return k * (family.order() + 1) - 1;
}

double aic(double loglik, std::int64_t n, std::int64_t k_param) {
  if (n - k_param - 1 <= 0) {
    throw Error(ErrorKind::TooFewSamples,
                "AIC needs n > k + 1 (n = " + std::to_string(n) +
                    ", k = " + std::to_string(k_param) + ")");
  }
  const auto q = static_cast<double>(k_param);
  return -2.0 * loglik + 2.0 * q +
         2.0 * q * (q + 1.0) / static_cast<double>(n - k_param - 1);
}

double aic(const FitReport& report, std::int64_t n, std::int64_t k_param) {
  return aic(report.complete_loglik, n, k_param);
}

FitReport fit_hard_mixture(const SortedDataset& ds, const FamilySpec& family,
                           Index k, const FitOptions& options) {
  if (options.max_iters < 1) {
    throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 1");
  }
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  for (Index l = 1; l <= ds.size(); ++l) {
    check_support(family, ds.x(l));
    if (family.id == Family::Rayleigh && ds.x(l) == 0.0) {
      throw Error(ErrorKind::SupportViolation,
                  "rayleigh density vanishes at x = 0");
    }
  }

  const SortedDataset cds = clustered_dataset(ds, family);
  const Index n = cds.size();
  if (k > n) {
    throw Error(ErrorKind::KTooLarge,
                "k = " + std::to_string(k) + " exceeds the " +
                    std::to_string(n) + " distinct points");
  }
  const double floor = floor_for(family, data_floors(ds));
  const MixtureRangeCost range_cost(cds, family, floor);
  const SizeConstraints bounds = SizeConstraints::dummy(n, k);
  const ColumnBounds columns{bounds.lower, bounds.upper};
  const double total_weight = cds.total_weight();

  FitReport report;
  report.model.family = family;
  report.optimality_guaranteed = family.contiguity_guaranteed();
  if (!report.optimality_guaranteed) {
    report.warnings.push_back(
        "no optimality guarantee: component densities may cross twice");
  }

  std::vector<double> alpha(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
  std::vector<double> log_alpha(alpha.size());
  std::vector<Index> prev_delims;
  std::vector<bool> floored_components(alpha.size(), false);
  double prev_lc = -std::numeric_limits<double>::infinity();

  for (int it = 1; it <= options.max_iters; ++it) {
    for (std::size_t c = 0; c < alpha.size(); ++c) log_alpha[c] = std::log(alpha[c]);
    const auto tables = fill_dp_tables<double>(
        n, k,
        [&](Index j, Index i, Index m) {
          return range_cost.base(j, i) -
                 range_cost.weight(j, i) * log_alpha[static_cast<std::size_t>(m - 1)];
        },
        Combine::Sum, columns, options.threads);
    const std::vector<Index> delims = backtrack(tables, n, k);

    std::vector<double> next_alpha(alpha.size());
    std::vector<Theta> thetas(alpha.size());
    for (Index m = 1; m <= k; ++m) {
      const auto c = static_cast<std::size_t>(m - 1);
      const Index left = delims[c];
      const Index right = m < k ? delims[c + 1] - 1 : n;
      next_alpha[c] = range_cost.weight(left, right) / total_weight;
      const MleResult mle = mle_on_range(family, cds, left, right, floor);
      thetas[c] = mle.theta;
      floored_components[c] = mle.floored;
    }

    report.model.alphas = next_alpha;
    report.model.thetas = thetas;
    report.labels = labels_for(ds, cds, family, delims);
    const double lc = complete_loglik(ds, report.model, report.labels);
    report.loglik_trace.push_back(lc);
    report.complete_loglik = lc;
    report.iterations = it;

    // With unchanged weights the next assignment would reproduce `delims`.
    const bool fixed_point = delims == prev_delims || next_alpha == alpha;
    const bool stalled = it > 1 && lc - prev_lc < options.tol;
    alpha = next_alpha;
    prev_delims = delims;
    prev_lc = lc;
    if (fixed_point || stalled) {
      report.converged = true;
      break;
    }
  }

  for (std::size_t c = 0; c < floored_components.size(); ++c) {
    if (floored_components[c]) {
      report.warnings.push_back("DegenerateCluster: floor applied to component " +
                                std::to_string(c + 1));
    }
  }
  finish_report(report, ds, options);
  return report;
}

AicSweep select_k_by_aic(const SortedDataset& ds, const FamilySpec& family,
                         Index k_max, const FitOptions& options) {
  if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 1");
  AicSweep sweep;
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= k_max; ++k) {
    sweep.reports.push_back(fit_hard_mixture(ds, family, k, options));
    const double a = sweep.reports.back().aic;
    if (!std::isnan(a) && a < best) {
      best = a;
      sweep.best_k = k;
    }
  }
  return sweep;
}

GmmComparison gmm_comparison(const SortedDataset& ds, Index k,
                             const FitOptions& options) {
  const FamilySpec family = FamilySpec::gaussian_free_sigma();
  const double floor = data_floors(ds).variance;

  SolveOptions solve_options;
  solve_options.threads = options.threads;
  const SolveResult km = solve(ds, CostModel::kmeans(), k, std::nullopt, solve_options);
  const std::vector<Index> delims = km.clustering.delimiters();

  GmmComparison out;
  FitReport& g1 = out.gmm1;
  g1.model.family = family;
  const double total_weight = ds.total_weight();
  for (const Cluster& c : km.clustering.clusters) {
    double w = 0.0;
    for (Index l = c.left; l <= c.right; ++l) w += ds.w(l);
    g1.model.alphas.push_back(w / total_weight);
    const MleResult mle = mle_on_range(family, ds, c.left, c.right, floor);
    g1.model.thetas.push_back(mle.theta);
    if (mle.floored) {
      g1.warnings.push_back("DegenerateCluster: floor applied to component " +
                            std::to_string(g1.model.thetas.size()));
    }
  }
  g1.labels = labels_for(ds, ds, family, delims);
  g1.complete_loglik = complete_loglik(ds, g1.model, g1.labels);
  g1.loglik_trace = {g1.complete_loglik};
  g1.iterations = 1;
  g1.converged = true;
  finish_report(g1, ds, options);

  out.gmm2 = fit_hard_mixture(ds, family, k, options);
  out.delta_avg_loglik = out.gmm2.avg_complete_loglik - g1.avg_complete_loglik;
  return out;
}

Eigen::MatrixXd density_samples(const MixtureModel& model, double x_min,
                                double x_max, Index count) {
  if (count < 2 || !(x_min < x_max)) {
    throw Error(ErrorKind::InvalidArgument,
                "density grid needs count >= 2 and x_min < x_max");
  }
  const Index k = model.k();
  Eigen::MatrixXd table(count, k + 2);
  const double step = (x_max - x_min) / static_cast<double>(count - 1);
  for (Index r = 0; r < count; ++r) {
    const double x = r == count - 1 ? x_max : x_min + static_cast<double>(r) * step;
    table(r, 0) = x;
    double total = 0.0;
    for (Index c = 0; c < k; ++c) {
      table(r, c + 1) = model.component_density(c, x);
      total += table(r, c + 1);
    }
    table(r, k + 1) = total;
  }
  return table;
}

}  // namespace icluster
