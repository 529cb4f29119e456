#pragma once
// Gauss-Legendre rules and the sin^2 substitution that absorbs inverse
// square-root endpoint behaviour at classical turning points.

#include <array>
#include <cmath>
#include <vector>

namespace kvh::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const double w = 2 / ((1 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

inline const Rule& gl64() {
  static const Rule rule = gauss_legendre(64);
  return rule;
}

inline const Rule& gl16() {
  static const Rule rule = gauss_legendre(16);
  return rule;
}

/// Composite Gauss-Legendre over `panels` equal sub-intervals.
template <class F>
auto integrate(F&& f, double a, double b, int panels = 1, const Rule& rule = gl64()) {
  using R = decltype(f(a));
  R sum{};
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * h;
    const double mid = lo + 0.5 * h;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      sum += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    }
  }
  return sum * (0.5 * h);
}

struct Estimate {
  double value;
  double error;
};

/// Integrates f over [a, b] after x = a + (b - a) sin^2(phi), which multiplies
/// the integrand by (b - a) sin(2 phi) and cancels sqrt-type endpoint
/// behaviour at either end.  The error estimate compares one and two panels.
template <class F>
Estimate integrate_sqrt_ends(F&& f, double a, double b) {
  if (a == b) return {0.0, 0.0};
  const double len = b - a;
  auto g = [&](double phi) {
    const double s = std::sin(phi);
    return f(a + len * s * s) * len * std::sin(2 * phi);
  };
  const double half_pi = 0.5 * 3.14159265358979323846;
  const double coarse = integrate(g, 0.0, half_pi, 1);
  const double fine = integrate(g, 0.0, half_pi, 2);
  return {fine, std::abs(fine - coarse)};
}

/// As above but only the endpoint `a` is singular; the substitution
/// x = a + (b - a)(1 - cos phi) keeps node density moderate at `b`.
template <class F>
Estimate integrate_sqrt_start(F&& f, double a, double b) {
  if (a == b) return {0.0, 0.0};
  const double len = b - a;
  auto g = [&](double phi) {
    return f(a + len * (1 - std::cos(phi))) * len * std::sin(phi);
  };
  const double half_pi = 0.5 * 3.14159265358979323846;
  const double coarse = integrate(g, 0.0, half_pi, 1);
  const double fine = integrate(g, 0.0, half_pi, 2);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace kvh::quad
