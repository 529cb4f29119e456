#pragma once
// Finite-width phase-space eigenstates: the generalized eigenfunctions of
// section 3 carry a delta(J - J0) factor, represented here by the Gaussian
// delta models of the deltas module.

#include <cmath>
#include <string>

#include "kvh/deltas.hpp"
#include "kvh/diagnostics.hpp"
#include "kvh/eigen.hpp"
#include "kvh/grid.hpp"
#include "kvh/parallel.hpp"

namespace kvh {

enum class RidgeKind {
  /// Single-valued standard-KvH eigenstate
  /// exp(i[(J0 - hbar mu/4) theta + W(theta; J) - J theta] / hbar) [G_k((J - J0)/hbar) / hbar]^(1/2) / sqrt(2 pi),
  /// unit phase-space norm.  Uses the torus through each node.
  KvH,
  /// Semiclassical eigen-ridge psi_branch(x) G_k((J - J0)/hbar)/hbar |dJ/dp|^(1/2),
  /// whose momentum projection is the JWKB configuration-space eigenfunction.
  Semiclassical,
  /// Hamilton-Jacobi constrained ridge psi_branch(x) [G_k((J - J0)/hbar) / hbar]^(1/2) |dJ/dp|^(1/2):
  /// the phase depends on x only within each momentum branch.
  HamiltonJacobi,
};

struct RidgeOptions {
  RidgeKind kind = RidgeKind::KvH;
  double k = 8;                  // ridge index of the delta model
  double cutoff = 12;            // ridge evaluated where |J - J0| < cutoff hbar / k
  unsigned threads = 0;
};

namespace detail {

/// Phase-space data of the torus through (x, p).
struct LocalTorus {
  double action, omega, theta, w_bar;  // w_bar: action accumulated from theta = 0
};

inline LocalTorus local_torus(const SeparableWell& well, double x, double p) {
  const double e = well.hamiltonian(x, p);
  const ActionAngleChart c = chart_at_energy(well, e);
  const double xc = std::clamp(x, c.xi_minus, c.xi_plus);
  const Branch b = p > 0 ? Branch::Plus : Branch::Minus;
  const double theta = angle_of_position(c, xc, b);
  const double w_bar = b == Branch::Minus ? hamilton_principal_W(c, xc, Branch::Plus)
                                          : kPi * c.action + hamilton_principal_W(c, xc, Branch::Minus);
  return {c.action, c.omega, theta, w_bar};
}

}  // namespace detail

/// Builds a finite-k eigen-ridge of `eig` on the given axes (time 0).
inline PhaseSpaceGrid eigen_ridge(const SemiclassicalEigenfunction& eig, const Axis& x_axis,
                                  const Axis& p_axis, const RidgeOptions& opts = {}) {
  const auto& c = eig.chart;
  const auto& well = c.well;
  const double h = c.hbar();
  const double j0 = c.action;
  PhaseSpaceGrid g(x_axis, p_axis, 0.0, h);
  const GeneralizedDelta delta(DeltaFamily::Gaussian, 1.0, opts.k);
  const double band = opts.cutoff * h / opts.k;
  // energy band enclosing the J band (J(E) is increasing)
  const double e_lo = j0 - band > 0 ? energy_of_action(well, j0 - band).energy : well.u_min();
  const double e_hi = energy_of_action(well, std::min(j0 + band, max_action(well))).energy;
  const double mu = eig.scheme == Scheme::EBK ? c.maslov : 0;
  parallel_for(
      x_axis.count,
      [&](std::size_t ix) {
        const double x = x_axis[ix];
        for (std::size_t ip = 0; ip < p_axis.count; ++ip) {
          const double p = p_axis[ip];
          const double e = well.hamiltonian(x, p);
          if (!(e > e_lo && e < e_hi) || e <= well.u_min()) continue;
          const double j = action_of_energy(well, e);
          const double s = (j - j0) / h;
          if (std::abs(s) > opts.cutoff / opts.k) continue;
          const double g1 = delta(s) / h;  // G_k((J - J0)/hbar) / hbar
          cplx v;
          switch (opts.kind) {
            case RidgeKind::KvH: {
              const auto lt = detail::local_torus(well, x, p);
              const double phase =
                  ((j0 - h * mu / 4) * lt.theta + lt.w_bar - lt.action * lt.theta) / h;
              v = std::polar(std::sqrt(g1 / (2 * kPi)), phase);
              break;
            }
            case RidgeKind::Semiclassical:
            case RidgeKind::HamiltonJacobi: {
              const double xc = std::clamp(x, c.xi_minus, c.xi_plus);
              const Branch b = p > 0 ? Branch::Plus : Branch::Minus;
              const double jac = std::abs(p) / (well.mass() * c.omega);  // |dJ/dp| on the J0 torus
              const double env = opts.kind == RidgeKind::Semiclassical ? g1 : std::sqrt(g1);
              v = eval_phase_space(eig, xc, b) * env * std::sqrt(jac);
              break;
            }
          }
          g.at(ix, ip) = v;
        }
      },
      opts.threads);
  return g;
}

/// Normalized Gaussian blob centred at (x0, p0) with widths (sx, sp) and momentum kick phase.
inline PhaseSpaceGrid gaussian_blob(const Axis& x_axis, const Axis& p_axis, double x0, double p0,
                                    double sx, double sp, double hbar) {
  PhaseSpaceGrid g(x_axis, p_axis, 0.0, hbar);
  const double norm = 1.0 / std::sqrt(kPi * sx * sp);
  for (std::size_t i = 0; i < x_axis.count; ++i) {
    for (std::size_t j = 0; j < p_axis.count; ++j) {
      const double u = (x_axis[i] - x0) / sx, w = (p_axis[j] - p0) / sp;
      g.at(i, j) = norm * std::exp(-0.5 * (u * u + w * w));
    }
  }
  return g;
}

/// Appendix C Gram entry <Phi_0|Phi_1> of two square-root-delta eigen-ridge
/// models (RidgeKind::KvH, unit norm) on the given axes.  The charts must be
/// EBK-quantized tori of the same well.
inline cplx sqrt_delta_orthonormality(const ActionAngleChart& chart0, const ActionAngleChart& chart1,
                                      double k, const Axis& x_axis, const Axis& p_axis,
                                      unsigned threads = 0) {
  auto model = [&](const ActionAngleChart& c) {
    SemiclassicalEigenfunction eig{c};
    eig.scheme = Scheme::EBK;
    eig.n = static_cast<int>(std::lround(c.action / c.hbar() - c.maslov / 4.0));
    RidgeOptions o;
    o.kind = RidgeKind::KvH;
    o.k = k;
    o.threads = threads;
    return eigen_ridge(eig, x_axis, p_axis, o);
  };
  const auto a = model(chart0);
  const auto b = model(chart1);
  return inner_product_phase(a, b);
}

}  // namespace kvh
