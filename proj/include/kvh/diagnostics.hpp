#pragma once
// Inner products, the physical-density check of section 2.2.3, the exact
// harmonic-oscillator oracle, and JWKB orthonormality measurements.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kvh/eigen.hpp"
#include "kvh/errors.hpp"
#include "kvh/grid.hpp"
#include "kvh/parallel.hpp"

namespace kvh {

// --- inner products ---------------------------------------------------------

/// Trapezoidal <a|b> = integral of conj(a) b dx.
inline cplx inner_product_config(const ConfigGrid& a, const ConfigGrid& b) {
  if (!a.x_axis.same_as(b.x_axis)) throw Error(ErrorCode::AxisMismatch, "configuration axes differ");
  const std::size_t n = a.values.size();
  cplx s = 0.5 * (std::conj(a.values[0]) * b.values[0] + std::conj(a.values[n - 1]) * b.values[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s += std::conj(a.values[i]) * b.values[i];
  return s * a.x_axis.step();
}

/// Two-dimensional trapezoidal <a|b> over phase space.
inline cplx inner_product_phase(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b) {
  if (!a.same_axes(b)) throw Error(ErrorCode::AxisMismatch, "phase-space axes differ");
  const std::size_t nx = a.x_axis.count, np = a.p_axis.count;
  cplx s = 0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double wx = (i == 0 || i + 1 == nx) ? 0.5 : 1.0;
    cplx row = 0;
    for (std::size_t j = 0; j < np; ++j) {
      const double wp = (j == 0 || j + 1 == np) ? 0.5 : 1.0;
      row += wp * std::conj(a.at(i, j)) * b.at(i, j);
    }
    s += wx * row;
  }
  return s * a.cell_area();
}

// --- finite differences -----------------------------------------------------

namespace detail {

/// Fourth-order first derivative of samples f(i * stride) (n >= 5), with
/// one-sided fourth-order closures on the two edge points at each end.
template <class T, class Get>
T diff4(Get&& f, std::size_t i, std::size_t n, double h) {
  if (i >= 2 && i + 2 < n) return (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / (12 * h);
  if (i == 0) return (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12 * h);
  if (i == 1) return (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / (12 * h);
  if (i + 1 == n) {
    return (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)) /
           (12 * h);
  }
  return (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) / (12 * h);
}

inline void require_p_decay(const PhaseSpaceGrid& g, double tol) {
  double peak = 0;
  for (const auto& v : g.values) peak = std::max(peak, std::abs(v));
  const std::size_t np = g.p_axis.count;
  for (std::size_t i = 0; i < g.x_axis.count; ++i) {
    if (std::abs(g.at(i, 0)) > tol * peak || std::abs(g.at(i, np - 1)) > tol * peak) {
      throw Error(ErrorCode::BoundaryLeak, "wavefunction does not decay at the momentum boundary");
    }
  }
}

}  // namespace detail

// --- physical density -------------------------------------------------------

struct DensityReport {
  std::size_t nx = 0, np = 0;
  std::vector<double> f_grid;        // physical density, row-major like the input grid
  std::vector<double> delta_f_grid;  // f - |psi|^2
  std::vector<double> integral_delta_f_per_x;
  std::map<std::string, std::vector<double>> weighted_integrals;  // int g delta_f dp per x
  double imaginary_residue = 0;      // max |Re{psi*, psi}|, discarded part of the bracket
  double max_abs_integral() const {
    double m = 0;
    for (double v : integral_delta_f_per_x) m = std::max(m, std::abs(v));
    return m;
  }
  double max_abs_weighted(const std::string& g) const {
    double m = 0;
    for (double v : weighted_integrals.at(g)) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Test functions g(x, p) of the weighted density integrals.
inline const std::vector<std::pair<std::string, std::function<double(double, double)>>>&
density_test_functions() {
  static const std::vector<std::pair<std::string, std::function<double(double, double)>>> g = {
      {"1", [](double, double) { return 1.0; }},
      {"x", [](double x, double) { return x; }},
      {"p", [](double, double p) { return p; }},
      {"x2", [](double x, double) { return x * x; }},
      {"p2", [](double, double p) { return p * p; }},
      {"xp", [](double x, double p) { return x * p; }},
  };
  return g;
}

/// f = |psi|^2 + d_p(p |psi|^2) + hbar Im{psi*, psi} in canonical coordinates,
/// with {a, b} = a_x b_p - a_p b_x and fourth-order differences.
inline DensityReport physical_density(const PhaseSpaceGrid& grid, double leak_tolerance = 1e-10,
                                      unsigned threads = 0) {
  grid.validate();
  const std::size_t nx = grid.x_axis.count, np = grid.p_axis.count;
  if (nx < 5 || np < 5) throw Error(ErrorCode::InvalidArgument, "density needs at least 5x5 nodes");
  detail::require_p_decay(grid, leak_tolerance);
  const double hx = grid.x_axis.step(), hp = grid.p_axis.step(), hbar = grid.hbar;
  DensityReport r;
  r.nx = nx;
  r.np = np;
  r.f_grid.assign(nx * np, 0.0);
  r.delta_f_grid.assign(nx * np, 0.0);
  std::vector<double> residue(nx, 0.0);
  parallel_for(
      nx,
      [&](std::size_t i) {
        auto along_p = [&](std::size_t j) { return grid.at(i, j); };
        auto flux = [&](std::size_t j) { return grid.p_axis[j] * std::norm(grid.at(i, j)); };
        for (std::size_t j = 0; j < np; ++j) {
          const cplx psi = grid.at(i, j);
          const cplx dx = detail::diff4<cplx>([&](std::size_t a) { return grid.at(a, j); }, i, nx, hx);
          const cplx dp = detail::diff4<cplx>(along_p, j, np, hp);
          const cplx bracket = std::conj(dx) * dp - std::conj(dp) * dx;  // {psi*, psi}
          residue[i] = std::max(residue[i], std::abs(bracket.real()));
          const double div = detail::diff4<double>(flux, j, np, hp);
          const double df = div + hbar * bracket.imag();
          r.delta_f_grid[i * np + j] = df;
          r.f_grid[i * np + j] = std::norm(psi) + df;
        }
      },
      threads);
  r.imaginary_residue = *std::max_element(residue.begin(), residue.end());
  auto trapezoid_p = [&](std::size_t i, const std::function<double(double, double)>& g) {
    double s = 0;
    for (std::size_t j = 0; j < np; ++j) {
      const double w = (j == 0 || j + 1 == np) ? 0.5 : 1.0;
      s += w * g(grid.x_axis[i], grid.p_axis[j]) * r.delta_f_grid[i * np + j];
    }
    return s * hp;
  };
  r.integral_delta_f_per_x.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    r.integral_delta_f_per_x[i] = trapezoid_p(i, density_test_functions().front().second);
  }
  for (const auto& [name, g] : density_test_functions()) {
    auto& seq = r.weighted_integrals[name];
    seq.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) seq[i] = trapezoid_p(i, g);
  }
  return r;
}

// --- exact harmonic oscillator ----------------------------------------------

/// Unit-normalized Hermite-Gaussian phi_n(x) by the three-term recurrence on
/// scaled functions (the Gaussian factor is applied after the recurrence, with
/// a running exponent so neither factor overflows).  Valid for n <= 200.
inline double exact_ho_value(double m, double omega, double hbar, int n, double x) {
  if (n < 0 || n > 200) throw Error(ErrorCode::InvalidArgument, "n must lie in [0, 200]");
  const double x0 = std::sqrt(hbar / (m * omega));
  const double xi = x / x0;
  double prev = 0.0, cur = 1.0;  // phi_{-1}, phi_0 without the Gaussian and constant
  double log_scale = 0.0;
  for (int k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > 1e150) {
      cur /= 1e150;
      prev /= 1e150;
      log_scale += std::log(1e150);
    }
  }
  const double c0 = std::pow(kPi, -0.25) / std::sqrt(x0);
  if (cur == 0) return 0.0;
  const double mag = std::log(std::abs(cur)) + log_scale - 0.5 * xi * xi;
  return (cur > 0 ? 1.0 : -1.0) * c0 * std::exp(mag);
}

inline ConfigGrid exact_ho_eigenfunction(double m, double omega, double hbar, int n, const Axis& x_axis) {
  ConfigGrid g(x_axis, 0.0, hbar);
  for (std::size_t i = 0; i < x_axis.count; ++i) g.values[i] = exact_ho_value(m, omega, hbar, n, x_axis[i]);
  return g;
}

/// ||(H - E_n) phi_n|| / ||phi_n|| with a fourth-order second-difference
/// kinetic operator, over interior nodes.
inline double schrodinger_residual(double m, double omega, double hbar, int n, const Axis& x_axis) {
  const auto g = exact_ho_eigenfunction(m, omega, hbar, n, x_axis);
  const double h = x_axis.step(), e = hbar * omega * (n + 0.5);
  double num = 0, den = 0;
  for (std::size_t i = 2; i + 2 < x_axis.count; ++i) {
    const auto& v = g.values;
    const double d2 = (-v[i - 2].real() + 16 * v[i - 1].real() - 30 * v[i].real() + 16 * v[i + 1].real() -
                       v[i + 2].real()) / (12 * h * h);
    const double x = x_axis[i];
    const double hv = -hbar * hbar / (2 * m) * d2 + 0.5 * m * omega * omega * x * x * v[i].real();
    num += (hv - e * v[i].real()) * (hv - e * v[i].real());
    den += v[i].real() * v[i].real();
  }
  return std::sqrt(num / den);
}

// --- comparisons against the exact oscillator ------------------------------

struct ExactComparison {
  int n = 0;
  Scheme scheme = Scheme::EBK;
  double relative_l2_error = 0;  // outside the turning-point windows
  double energy = 0;             // semiclassical energy under `scheme`
  double exact_energy = 0;
  double energy_error_ebk = 0;   // E_EBK - E_exact
  double energy_error_bs = 0;    // E_BS - E_exact
  double window_multiplier = 0;
  std::vector<std::pair<double, double>> segments;  // window-free integration segments
};

/// JWKB eigenfunction (stationary-phase amplitude a+ = (2 pi)^(-1/2)) against
/// the exact Hermite state, compared outside the turning-point windows.
inline ExactComparison compare_to_exact(const SeparableWell& ho, double omega, int n, Scheme scheme,
                                        double window_multiplier = 2.0) {
  if (ho.name() != "ho") throw Error(ErrorCode::InvalidArgument, "compare_to_exact needs the harmonic oscillator");
  const double m = ho.mass(), hbar = ho.hbar();
  const auto eig = quantize(ho, scheme, n, Normalization::StationaryPhase, window_multiplier);
  ExactComparison r;
  r.n = n;
  r.scheme = scheme;
  r.exact_energy = hbar * omega * (n + 0.5);
  r.energy = eig.chart.energy;
  r.energy_error_ebk = energy_of_action(ho, hbar * (n + 0.5)).energy - r.exact_energy;
  r.energy_error_bs = (n == 0 ? ho.u_min() : energy_of_action(ho, hbar * n).energy) - r.exact_energy;
  r.window_multiplier = window_multiplier;
  if (eig.degenerate()) {
    r.relative_l2_error = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.segments = window_free_segments({&eig});
  const double diff = integrate_outside_windows({&eig}, [&](double x) {
    const double d = eval_config_space(eig, x).value.real() - exact_ho_value(m, omega, hbar, n, x);
    return d * d;
  });
  const double ref = integrate_outside_windows({&eig}, [&](double x) {
    const double v = exact_ho_value(m, omega, hbar, n, x);
    return v * v;
  });
  r.relative_l2_error = std::sqrt(diff / ref);
  return r;
}

/// Gram matrix G_ij = integral of conj(phi_i) phi_j over the domain minus the
/// turning-point windows of both phi_i and phi_j.
inline std::vector<std::vector<cplx>> orthonormality_matrix(
    const std::vector<SemiclassicalEigenfunction>& eigs) {
  const std::size_t n = eigs.size();
  std::vector<std::vector<cplx>> g(n, std::vector<cplx>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const auto& a = eigs[i];
      const auto& b = eigs[j];
      const cplx v = integrate_outside_windows({&a, &b}, [&](double x) {
        return std::conj(eval_config_space(a, x).value) * eval_config_space(b, x).value;
      });
      g[i][j] = v;
      g[j][i] = std::conj(v);
    }
  }
  return g;
}

}  // namespace kvh
