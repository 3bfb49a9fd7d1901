#include "icluster/generator.hpp"

#include <cmath>
#include <string>

#include "icluster/error.hpp"

namespace icluster {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorKind::InfeasibleConstraints: return "InfeasibleConstraints";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::DegenerateCluster: return "DegenerateCluster";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

constexpr double kSeriesCutoff = 0.05;

// sum_{k>=2} c_k d^k with c_k = coef(k), for |d| <= kSeriesCutoff.
template <typename Coef>
double tail_series(double d, Coef coef) {
  double power = d * d;
  double total = 0.0;
  for (int k = 2; k < 16; ++k) {
    total += coef(k) * power;
    power *= d;
  }
  return total;
}

// (1 + d) log1p(d) - d
double kl_kernel(double d) {
  if (std::abs(d) > kSeriesCutoff) return (1.0 + d) * std::log1p(d) - d;
  return tail_series(d, [](int k) {
    return (k % 2 == 0 ? 1.0 : -1.0) / (static_cast<double>(k) * (k - 1));
  });
}

// d - log1p(d)
double is_kernel(double d) {
  if (std::abs(d) > kSeriesCutoff) return d - std::log1p(d);
  return tail_series(d, [](int k) { return (k % 2 == 0 ? 1.0 : -1.0) / k; });
}

// expm1(d) - d
double exp_kernel(double d) {
  if (std::abs(d) > kSeriesCutoff) return std::expm1(d) - d;
  double term = 0.5 * d * d;
  double total = 0.0;
  for (int k = 3; k < 18; ++k) {
    total += term;
    term *= d / k;
  }
  return total;
}

}  // namespace

namespace generators {

BregmanGenerator squared() {
  return {"squared", [](double x) { return x * x; },
          [](double x) { return 2.0 * x; },
          [](double p, double q) { return (p - q) * (p - q); }};
}

BregmanGenerator kl() {
  return {"kl", [](double x) { return x * std::log(x); },
          [](double x) { return std::log(x) + 1.0; },
          [](double p, double q) { return q * kl_kernel((p - q) / q); }, 0.0};
}

BregmanGenerator itakura_saito() {
  return {"itakura-saito", [](double x) { return -std::log(x); },
          [](double x) { return -1.0 / x; },
          [](double p, double q) { return is_kernel((p - q) / q); }, 0.0};
}

BregmanGenerator exp() {
  return {"exp", [](double x) { return std::exp(x); },
          [](double x) { return std::exp(x); },
          [](double p, double q) { return std::exp(q) * exp_kernel(p - q); }};
}

}  // namespace generators

BregmanGenerator generator_by_name(std::string_view name) {
  if (name == "squared") return generators::squared();
  if (name == "kl") return generators::kl();
  if (name == "itakura-saito") return generators::itakura_saito();
  if (name == "exp") return generators::exp();
  throw Error(ErrorKind::InvalidArgument,
              "unknown Bregman generator '" + std::string(name) + "'");
}

}  // namespace icluster
