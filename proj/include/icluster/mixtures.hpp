#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "icluster/data.hpp"

namespace icluster {

enum class Family {
  GaussianFixedSigma,
  GaussianFreeSigma,
  GaussianZeroMean,
  Poisson,
  Rayleigh,
  Exponential,
  LaplaceFixedScale,
};

/// A univariate parametric family plus its fixed hyper-parameter (sigma for
/// the fixed-sigma Gaussian, b for the fixed-scale Laplace).
struct FamilySpec {
  Family id = Family::GaussianFixedSigma;
  double fixed = 1.0;

  static FamilySpec gaussian_fixed_sigma(double sigma);
  static FamilySpec gaussian_free_sigma() { return {Family::GaussianFreeSigma, 0.0}; }
  static FamilySpec gaussian_zero_mean() { return {Family::GaussianZeroMean, 0.0}; }
  static FamilySpec poisson() { return {Family::Poisson, 0.0}; }
  static FamilySpec rayleigh() { return {Family::Rayleigh, 0.0}; }
  static FamilySpec exponential() { return {Family::Exponential, 0.0}; }
  static FamilySpec laplace_fixed_scale(double b);

  /// Number of free scalar parameters per component (D).
  int order() const { return id == Family::GaussianFreeSigma ? 2 : 1; }
  /// Clustering runs on t(x); only the zero-mean Gaussian uses t(x) = x^2.
  bool transforms() const { return id == Family::GaussianZeroMean; }
  double sufficient_statistic(double x) const {
    return transforms() ? x * x : x;
  }
  /// True when component densities cross at most once after the
  /// sufficient-statistic transform, which makes the DP assignment optimal.
  bool contiguity_guaranteed() const { return id != Family::GaussianFreeSigma; }

  std::string name() const;
  std::vector<std::string> parameter_names() const;
};

/// gaussian_fixed_sigma:<sigma> | gaussian_free_sigma | gaussian_zero_mean |
/// poisson | rayleigh | exponential | laplace_fixed_scale:<b>
FamilySpec parse_family(std::string_view spec);

/// Per-component parameters; the meaning of each slot follows
/// FamilySpec::parameter_names() (unused slots are zero).
using Theta = std::array<double, 2>;

/// -log p(x; theta). Throws SupportViolation outside the support
/// (negative x for rayleigh/exponential, non-integer or negative x for
/// poisson). Returns +inf where the density vanishes on the support.
double neg_log_density(const FamilySpec& family, double x, const Theta& theta);

/// p(x; theta), zero outside the support.
double density(const FamilySpec& family, double x, const Theta& theta);

struct MleResult {
  Theta theta{};
  bool floored = false;  // variance / scale floor applied
};

/// Closed-form weighted MLE on one cluster. `floor` bounds the variance
/// (Gaussian, Rayleigh) or the mean (exponential) from below; with floor 0
/// a degenerate cluster raises DegenerateCluster.
MleResult mle_update(const FamilySpec& family,
                     std::span<const WeightedPoint> points, double floor = 0.0);

struct MixtureModel {
  FamilySpec family;
  std::vector<double> alphas;
  std::vector<Theta> thetas;

  Index k() const { return static_cast<Index>(alphas.size()); }
  double component_density(Index c, double x) const;  // alpha_c p(x; theta_c)
  double density(double x) const;
};

enum class AicParameterCount { Params, Clusters };

struct FitOptions {
  int max_iters = 100;
  double tol = 1e-8;
  AicParameterCount aic_k = AicParameterCount::Params;
  int threads = 1;
};

struct FitReport {
  MixtureModel model;
  /// Component (1-based, left to right) of every dataset point.
  std::vector<Index> labels;
  double complete_loglik = 0.0;
  double avg_complete_loglik = 0.0;  // per unit of weight
  int iterations = 0;
  bool converged = false;
  bool optimality_guaranteed = true;
  /// NaN when the sample is too small for the corrected AIC.
  double aic = 0.0;
  std::vector<double> loglik_trace;
  std::vector<std::string> warnings;
};

/// Maximises the complete log-likelihood by alternating an optimal DP
/// interval assignment under -log p(x; theta) - log alpha with weight and
/// per-cluster MLE updates. Starts from uniform weights.
FitReport fit_hard_mixture(const SortedDataset& ds, const FamilySpec& family,
                           Index k, const FitOptions& options = {});

/// Corrected AIC: -2 l + 2 q + 2 q (q + 1) / (n - q - 1) for q free
/// parameters. Throws TooFewSamples when n <= q + 1.
double aic(double loglik, std::int64_t n, std::int64_t k_param);
double aic(const FitReport& report, std::int64_t n, std::int64_t k_param);

/// Free-parameter count g = k (D + 1) - 1, or k under the literal reading.
std::int64_t aic_parameter_count(const FamilySpec& family, Index k,
                                 AicParameterCount policy);

struct AicSweep {
  std::vector<FitReport> reports;  // reports[k-1]
  Index best_k = 1;
};

AicSweep select_k_by_aic(const SortedDataset& ds, const FamilySpec& family,
                         Index k_max, const FitOptions& options = {});

struct GmmComparison {
  FitReport gmm1;  // optimal Euclidean k-means + per-cluster Gaussian MLE
  FitReport gmm2;  // hard mixture fit with free per-component variance
  double delta_avg_loglik = 0.0;  // gmm2 - gmm1
};

GmmComparison gmm_comparison(const SortedDataset& ds, Index k,
                             const FitOptions& options = {});

/// count x (k + 2) table: x, alpha_c p(x; theta_c) for each component,
/// and their sum.
Eigen::MatrixXd density_samples(const MixtureModel& model, double x_min,
                                double x_max, Index count);

}  // namespace icluster
