#pragma once
// Finite-index models of fractional powers of the Dirac delta: the box family
// k^a Theta(1/2k - |x|) and the Gaussian family k^a exp(-a (k x)^2 / 2) / (2 pi)^(a/2).

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kvh/errors.hpp"
#include "kvh/quadrature.hpp"

namespace kvh {

enum class DeltaFamily { Step, Gaussian };

struct GeneralizedDelta {
  DeltaFamily family = DeltaFamily::Gaussian;
  double exponent = 1.0;  // a in (0, 1]
  double index = 1.0;     // k > 0

  GeneralizedDelta() = default;
  GeneralizedDelta(DeltaFamily f, double a, double k) : family(f), exponent(a), index(k) {
    if (!(a > 0 && a <= 1)) throw Error(ErrorCode::InvalidArgument, "exponent must lie in (0, 1]");
    if (!(k > 0)) throw Error(ErrorCode::InvalidArgument, "index must be positive");
  }

  double operator()(double x) const {
    const double a = exponent, k = index;
    if (family == DeltaFamily::Step) {
      return std::abs(x) <= 0.5 / k ? std::pow(k, a) : 0.0;
    }
    const double kx = k * x;
    return std::pow(k, a) * std::exp(-0.5 * a * kx * kx) / std::pow(2 * 3.14159265358979323846, 0.5 * a);
  }

  /// Half-width outside which the model is negligible (exactly zero for the box).
  double support_radius() const {
    if (family == DeltaFamily::Step) return 0.5 / index;
    return std::sqrt(2 * 40.0 / exponent) / index;  // exp(-40)
  }
};

inline double eval(const GeneralizedDelta& d, double x) { return d(x); }

/// Integral of f against a box or Gaussian model, exact in the box support.
inline double integrate_against(const std::function<double(double)>& f, double radius,
                                const std::function<double(double)>& weight, int panels = 64) {
  return quad::integrate([&](double x) { return f(x) * weight(x); }, -radius, radius, panels,
                         quad::gl16());
}

struct ProductIdentityResult {
  double residual;    // |int g G^a G^b dx - g(0) c_k|
  double mass;        // c_k = int G^a G^b dx
  double integral;    // int g G^a G^b dx
};

/// Checks delta^a * delta^b ~ delta for a + b = 1 at finite k.
inline ProductIdentityResult product_identity_residual(double a, double b, double k,
                                                       const std::function<double(double)>& test_fn,
                                                       DeltaFamily family = DeltaFamily::Gaussian) {
  if (std::abs(a + b - 1.0) > 1e-12) {
    throw Error(ErrorCode::ExponentSumInvalid, "exponents must sum to one");
  }
  const GeneralizedDelta da(family, a, k), db(family, b, k);
  const double r = std::max(da.support_radius(), db.support_radius());
  auto w = [&](double x) { return da(x) * db(x); };
  const double mass = integrate_against([](double) { return 1.0; }, r, w);
  const double integral = integrate_against(test_fn, r, w);
  return {std::abs(integral - test_fn(0.0) * mass), mass, integral};
}

struct LadderEntry {
  double k;
  double value;
};

/// Empirical order log(v_i / v_{i+1}) / log(k_{i+1} / k_i) between successive entries.
inline std::vector<double> convergence_orders(const std::vector<LadderEntry>& ladder) {
  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    orders.push_back(std::log(std::abs(ladder[i].value) / std::abs(ladder[i + 1].value)) /
                     std::log(ladder[i + 1].k / ladder[i].k));
  }
  return orders;
}

}  // namespace kvh
