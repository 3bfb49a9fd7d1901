#pragma once

#include <functional>
#include <limits>
#include <string>
#include <string_view>

namespace icluster {

/// A strictly convex, differentiable scalar function F together with its
/// derivative and the open interval on which it is defined. Induces the
/// Bregman divergence B_F(p:q) = F(p) - F(q) - (p - q) F'(q).
struct BregmanGenerator {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  /// B_F(p:q) in a form that keeps its digits when p is close to q; the
  /// plain formula is used when absent.
  std::function<double(double, double)> divergence;
  double domain_lo = -std::numeric_limits<double>::infinity();
  double domain_hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x > domain_lo && x < domain_hi; }
};

namespace generators {

BregmanGenerator squared();        // x^2 on R
BregmanGenerator kl();             // x log x on (0, inf)
BregmanGenerator itakura_saito();  // -log x on (0, inf)
BregmanGenerator exp();            // e^x on R

}  // namespace generators

/// Looks up a built-in generator: "squared", "kl", "itakura-saito", "exp".
/// Throws Error(InvalidArgument) for unknown names.
BregmanGenerator generator_by_name(std::string_view name);

}  // namespace icluster
