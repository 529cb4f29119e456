#pragma once
// Action-angle charts of a single well, Bohr-Sommerfeld / EBK quantization and
// JWKB eigenfunctions in phase space and configuration space.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "kvh/errors.hpp"
#include "kvh/quadrature.hpp"
#include "kvh/systems.hpp"

namespace kvh {

enum class Scheme { BohrSommerfeld, EBK };

inline std::string to_string(Scheme s) { return s == Scheme::EBK ? "ebk" : "bs"; }

/// Phase-space branch: Plus is the upper sheet (p > 0), Minus the lower
/// sheet, Forbidden the decaying imaginary-momentum sheet.
enum class Branch { Plus, Minus, Forbidden };

enum class Region { Allowed, ForbiddenLeft, ForbiddenRight };

/// How a_plus is fixed when an eigenfunction is built.
enum class Normalization {
  UnitNormOutsideWindows,  // unit L2 norm with turning-point windows removed
  UnitAmplitude,           // a_plus = 1
  StationaryPhase,         // a_plus = (2 pi)^(-1/2), the orbit-average norm
};

/// Number of half turns of a single-well orbit.
inline constexpr int kSingleWellMaslov = 2;

// --- action / energy ------------------------------------------------------

/// J(E) = (1/pi) * integral of sqrt(2m(E - U)) between the turning points.
inline double action_of_energy(const SeparableWell& well, double energy) {
  if (energy == well.u_min()) return 0.0;
  const auto tp = turning_points(well, energy);
  const double m = well.mass();
  auto p = [&](double x) { return std::sqrt(std::max(0.0, 2 * m * (energy - well.potential(x)))); };
  return quad::integrate_sqrt_ends(p, tp.minus, tp.plus).value / kPi;
}

/// Full period T(E) = 2 * integral of m / p dx.
inline double orbit_period(const SeparableWell& well, double energy) {
  const auto tp = turning_points(well, energy);
  const double m = well.mass();
  const double a = tp.minus, len = tp.plus - tp.minus;
  // x = a + len sin^2(phi): dx / p is finite at both ends after the substitution
  auto g = [&](double phi) {
    const double s = std::sin(phi);
    const double x = a + len * s * s;
    const double k = 2 * m * (energy - well.potential(x));
    if (k <= 0) return 0.0;
    return m / std::sqrt(k) * len * std::sin(2 * phi);
  };
  return 2 * quad::integrate(g, 0.0, 0.5 * kPi, 2);
}

struct EnergyFrequency {
  double energy;
  double omega;
};

/// Small-oscillation frequency at the bottom of the well (zero for flat minima).
inline double bottom_frequency(const SeparableWell& well) {
  return std::sqrt(std::max(0.0, well.potential_curvature(well.x_min())) / well.mass());
}

/// Largest action whose orbit fits inside the domain.
inline double max_action(const SeparableWell& well) {
  const double e = well.max_energy();
  return action_of_energy(well, e - 1e-12 * std::max(1.0, std::abs(e - well.u_min())));
}

/// Inverts J(E) by safeguarded Newton iteration (dJ/dE = 1 / omega).
inline EnergyFrequency energy_of_action(const SeparableWell& well, double action) {
  if (action < 0) throw Error(ErrorCode::ActionOutOfRange, "action must be non-negative");
  if (action == 0) return {well.u_min(), bottom_frequency(well)};
  double lo = well.u_min();
  double hi = well.max_energy() - 1e-12 * std::max(1.0, std::abs(well.max_energy() - lo));
  if (action > action_of_energy(well, hi)) {
    throw Error(ErrorCode::ActionOutOfRange, "action exceeds the capacity of the domain");
  }
  // harmonic guess, clipped into the bracket
  const double w0 = bottom_frequency(well);
  double e = w0 > 0 ? lo + action * w0 : lo + 0.5 * (hi - lo) * 1e-3;
  if (!(e > lo && e < hi)) e = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double j = action_of_energy(well, e);
    const double r = j - action;
    if (r > 0) hi = e; else lo = e;
    if (std::abs(r) <= 1e-15 * action) break;
    const double omega = 2 * kPi / orbit_period(well, e);
    double next = e - r * omega;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == e || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::abs(e)) break;
    e = next;
  }
  return {e, 2 * kPi / orbit_period(well, e)};
}

// --- charts ---------------------------------------------------------------

/// One invariant torus of the well.
struct ActionAngleChart {
  SeparableWell well;
  double action = 0;
  double energy = 0;
  double omega = 0;
  double xi_minus = 0;
  double xi_plus = 0;
  int maslov = kSingleWellMaslov;
  bool degenerate = false;  // zero-radius orbit (J = 0)

  double hbar() const { return well.hbar(); }
};

inline ActionAngleChart make_chart(const SeparableWell& well, double action) {
  const auto ef = energy_of_action(well, action);
  ActionAngleChart c{well};
  c.action = action;
  c.energy = ef.energy;
  c.omega = ef.omega;
  if (action == 0) {
    c.degenerate = true;
    c.xi_minus = c.xi_plus = well.x_min();
  } else {
    const auto tp = turning_points(well, ef.energy);
    c.xi_minus = tp.minus;
    c.xi_plus = tp.plus;
  }
  return c;
}

/// Chart of the torus through energy E, built without inverting J(E).
inline ActionAngleChart chart_at_energy(const SeparableWell& well, double energy) {
  ActionAngleChart c{well};
  const auto tp = turning_points(well, energy);
  c.energy = energy;
  c.action = action_of_energy(well, energy);
  c.omega = 2 * kPi / orbit_period(well, energy);
  c.xi_minus = tp.minus;
  c.xi_plus = tp.plus;
  return c;
}

inline double real_momentum(const ActionAngleChart& c, double x) {
  return std::sqrt(std::max(0.0, 2 * c.well.mass() * (c.energy - c.well.potential(x))));
}

inline double imaginary_momentum(const ActionAngleChart& c, double x) {
  return std::sqrt(std::max(0.0, 2 * c.well.mass() * (c.well.potential(x) - c.energy)));
}

namespace detail {

inline double w_from(const ActionAngleChart& c, double from, double to) {
  return quad::integrate_sqrt_start([&](double x) { return real_momentum(c, x); }, from, to).value;
}

inline double time_from(const ActionAngleChart& c, double from, double to) {
  const double m = c.well.mass();
  auto f = [&](double x) {
    const double p = real_momentum(c, x);
    return p > 0 ? m / p : 0.0;
  };
  return std::abs(quad::integrate_sqrt_start(f, from, to).value);
}

inline void require_allowed(const ActionAngleChart& c, double x) {
  if (x < c.xi_minus || x > c.xi_plus) {
    throw Error(ErrorCode::OutsideAllowedRegion, "position outside the classically allowed region");
  }
}

}  // namespace detail

/// W_-(x) = int_{xi-}^{x} p dx (Branch::Minus) or W_+(x) = int_{x}^{xi+} p dx
/// (Branch::Plus).  The integral is taken from the nearer turning point and the
/// other one follows from W_- + W_+ = pi J.
inline double hamilton_principal_W(const ActionAngleChart& c, double x, Branch branch) {
  detail::require_allowed(c, x);
  if (branch == Branch::Forbidden) {
    throw Error(ErrorCode::RegionMismatch, "principal function is defined on allowed branches");
  }
  const double half = kPi * c.action;
  const double mid = 0.5 * (c.xi_minus + c.xi_plus);
  double w_minus, w_plus;
  if (x <= mid) {
    w_minus = std::abs(detail::w_from(c, c.xi_minus, x));
    w_plus = half - w_minus;
  } else {
    w_plus = std::abs(detail::w_from(c, c.xi_plus, x));
    w_minus = half - w_plus;
  }
  return branch == Branch::Minus ? w_minus : w_plus;
}

/// W~(x) = |int from the nearest turning point to x of |Im p| dx|.
inline double forbidden_action_Wtilde(const ActionAngleChart& c, double x) {
  if (x < c.well.x_lo() || x > c.well.x_hi()) {
    throw Error(ErrorCode::OutOfDomain, "position outside the well domain");
  }
  if (x >= c.xi_minus && x <= c.xi_plus && !(c.degenerate)) {
    if (x != c.xi_minus && x != c.xi_plus) {
      throw Error(ErrorCode::InsideAllowedRegion, "position inside the classically allowed region");
    }
    return 0.0;
  }
  const double xi = x > c.xi_plus ? c.xi_plus : c.xi_minus;
  auto q = [&](double y) { return imaginary_momentum(c, y); };
  return std::abs(quad::integrate_sqrt_start(q, xi, x).value);
}

/// Angle variable on the allowed sheets, theta = omega * (time of flight),
/// with theta = 0 at xi+ and the lower sheet covering (0, pi).
inline double angle_of_position(const ActionAngleChart& c, double x, Branch branch) {
  detail::require_allowed(c, x);
  if (branch == Branch::Forbidden) throw Error(ErrorCode::RegionMismatch, "angle needs an allowed branch");
  const double mid = 0.5 * (c.xi_minus + c.xi_plus);
  // lower-sheet angle from xi+ to x
  double lower;
  if (x > mid) lower = c.omega * detail::time_from(c, c.xi_plus, x);
  else lower = kPi - c.omega * detail::time_from(c, c.xi_minus, x);
  return branch == Branch::Minus ? lower : 2 * kPi - lower;
}

/// Imaginary angle in the forbidden region, omega * |int m / |p| dx| from
/// the nearest turning point; arccosh(x / xi) for the harmonic oscillator.
inline double forbidden_angle(const ActionAngleChart& c, double x) {
  const double xi = x > c.xi_plus ? c.xi_plus : c.xi_minus;
  const double m = c.well.mass();
  auto f = [&](double y) {
    const double q = imaginary_momentum(c, y);
    return q > 0 ? m / q : 0.0;
  };
  return c.omega * std::abs(quad::integrate_sqrt_start(f, xi, x).value);
}

/// |dp/dJ|_x = m omega / |p| on either sheet.
inline double momentum_action_jacobian(const ActionAngleChart& c, double x) {
  const double p = std::abs(std::sqrt(cplx(2 * c.well.mass() * (c.energy - c.well.potential(x)))));
  return c.well.mass() * c.omega / p;
}

/// Airy length (hbar^2 / (m |U'(xi)|))^(1/3) at a turning point.
inline double airy_length(const ActionAngleChart& c, double xi) {
  const double h = c.hbar();
  return std::cbrt(h * h / (c.well.mass() * std::abs(c.well.potential_gradient(xi))));
}

// --- eigenfunctions -------------------------------------------------------

struct SemiclassicalEigenfunction {
  ActionAngleChart chart;
  Scheme scheme = Scheme::EBK;
  int n = 0;
  cplx a_plus{1.0, 0.0};
  int nu = 0;                   // classical-mode index; 0 is the semiclassical sector
  double window_multiplier = 2.0;
  Normalization normalization = Normalization::UnitNormOutsideWindows;

  bool degenerate() const { return chart.degenerate; }
  int parity_sign() const { return n % 2 == 0 ? 1 : -1; }
  cplx a_minus() const { return static_cast<double>(parity_sign()) * a_plus; }
  double window_minus() const { return window_multiplier * airy_length(chart, chart.xi_minus); }
  double window_plus() const { return window_multiplier * airy_length(chart, chart.xi_plus); }
  double maslov_offset() const { return scheme == Scheme::EBK ? kPi / 4 : 0.0; }
};

inline Region region_of(const ActionAngleChart& c, double x) {
  if (x < c.xi_minus) return Region::ForbiddenLeft;
  if (x > c.xi_plus) return Region::ForbiddenRight;
  return Region::Allowed;
}

/// Phase-space amplitude on a sheet, without the delta(J - J0) support factor
/// and without exp(-iEt/hbar).  Upper sheet: a+ exp(i(pi/4 - W+/hbar)),
/// lower sheet: a+ exp(i(W+/hbar - pi/4)); forbidden: (+-1)^n a+ exp(-W~/hbar).
/// Bohr-Sommerfeld drops the pi/4 offsets.
inline cplx eval_phase_space(const SemiclassicalEigenfunction& eig, double x, Branch branch) {
  const auto& c = eig.chart;
  const Region region = region_of(c, x);
  const bool allowed = region == Region::Allowed;
  if ((branch == Branch::Forbidden) == allowed && !(x == c.xi_minus || x == c.xi_plus)) {
    throw Error(ErrorCode::RegionMismatch, "branch does not match the region of x");
  }
  const double h = c.hbar();
  if (branch == Branch::Forbidden) {
    const double w = forbidden_action_Wtilde(c, x);
    const cplx side = region == Region::ForbiddenLeft ? eig.a_minus() : eig.a_plus;
    return side * std::exp(-w / h);
  }
  const double wp = hamilton_principal_W(c, x, Branch::Plus);
  double phase = eig.maslov_offset() - wp / h;
  if (branch == Branch::Minus) phase = -phase;
  cplx value = eig.a_plus * std::polar(1.0, phase);
  if (eig.nu != 0) value *= std::polar(1.0, eig.nu * angle_of_position(c, x, branch));
  return value;
}

struct ConfigValue {
  cplx value;
  Region region;
  bool in_window;  // inside a turning-point exclusion window; value is not JWKB-valid there
};

inline bool in_turning_window(const SemiclassicalEigenfunction& eig, double x) {
  const auto& c = eig.chart;
  return std::abs(x - c.xi_minus) < eig.window_minus() || std::abs(x - c.xi_plus) < eig.window_plus();
}

namespace detail {

/// Configuration-space value with the amplitude a+ = 1.
inline double config_shape(const SemiclassicalEigenfunction& eig, double x) {
  const auto& c = eig.chart;
  const double h = c.hbar();
  const double factor_sq = momentum_action_jacobian(c, x);
  if (!std::isfinite(factor_sq)) return 0.0;
  const double factor = std::sqrt(factor_sq);
  const Region region = region_of(c, x);
  if (region == Region::Allowed) {
    const double off = eig.maslov_offset();
    const double mid = 0.5 * (c.xi_minus + c.xi_plus);
    if (x > mid) {
      return 2 * std::cos(hamilton_principal_W(c, x, Branch::Plus) / h - off) * factor;
    }
    return 2 * eig.parity_sign() * std::cos(hamilton_principal_W(c, x, Branch::Minus) / h - off) *
           factor;
  }
  const double sign = region == Region::ForbiddenLeft ? eig.parity_sign() : 1.0;
  return sign * std::exp(-forbidden_action_Wtilde(c, x) / h) * factor;
}

}  // namespace detail

/// JWKB configuration-space eigenfunction, 2 a+ cos(W/hbar - pi/4) |dp/dJ|^(1/2)
/// in the allowed region and (+-1)^n a+ exp(-W~/hbar) |dp/dJ|^(1/2) outside.
inline ConfigValue eval_config_space(const SemiclassicalEigenfunction& eig, double x) {
  if (eig.degenerate()) throw Error(ErrorCode::InvalidArgument, "degenerate (J = 0) state has no JWKB waveform");
  if (eig.nu != 0) throw Error(ErrorCode::InvalidArgument, "configuration space needs the nu = 0 sector");
  const auto& c = eig.chart;
  if (x < c.well.x_lo() || x > c.well.x_hi()) {
    throw Error(ErrorCode::OutOfDomain, "position outside the well domain");
  }
  return {eig.a_plus * detail::config_shape(eig, x), region_of(c, x), in_turning_window(eig, x)};
}

/// Segments of the domain outside the turning-point windows of every listed
/// eigenfunction.
inline std::vector<std::pair<double, double>> window_free_segments(
    const std::vector<const SemiclassicalEigenfunction*>& eigs) {
  const auto& well = eigs.front()->chart.well;
  std::vector<std::pair<double, double>> cuts;
  for (const auto* e : eigs) {
    cuts.emplace_back(e->chart.xi_minus - e->window_minus(), e->chart.xi_minus + e->window_minus());
    cuts.emplace_back(e->chart.xi_plus - e->window_plus(), e->chart.xi_plus + e->window_plus());
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> segs;
  double cursor = well.x_lo();
  for (const auto& [a, b] : cuts) {
    if (a > cursor) segs.emplace_back(cursor, std::min(a, well.x_hi()));
    cursor = std::max(cursor, b);
    if (cursor >= well.x_hi()) break;
  }
  if (cursor < well.x_hi()) segs.emplace_back(cursor, well.x_hi());
  return segs;
}

/// Integral of f over the window-free part of the domain; panels scale with
/// the number of nodes so oscillations stay resolved.
template <class F>
auto integrate_outside_windows(const std::vector<const SemiclassicalEigenfunction*>& eigs, F&& f) {
  int n_max = 0;
  for (const auto* e : eigs) n_max = std::max(n_max, e->n);
  using R = decltype(f(0.0));
  R sum{};
  for (const auto& [a, b] : window_free_segments(eigs)) {
    const auto& c = eigs.front()->chart;
    const bool allowed_overlap = b > c.xi_minus && a < c.xi_plus;
    const int panels = allowed_overlap ? 8 + 2 * n_max : 16;
    sum += quad::integrate(f, a, b, panels, quad::gl16());
  }
  return sum;
}

inline double norm_squared_outside_windows(const SemiclassicalEigenfunction& eig) {
  return integrate_outside_windows({&eig}, [&](double x) {
    const double v = std::abs(eig.a_plus) * detail::config_shape(eig, x);
    return v * v;
  });
}

/// Quantizes J = hbar n (Bohr-Sommerfeld) or J = hbar (n + mu/4) (EBK) and
/// fixes a+ by the requested normalization.
inline SemiclassicalEigenfunction quantize(const SeparableWell& well, Scheme scheme, int n,
                                           Normalization norm = Normalization::UnitNormOutsideWindows,
                                           double window_multiplier = 2.0) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "quantum number must be non-negative");
  const double j = scheme == Scheme::EBK ? n + kSingleWellMaslov / 4.0 : static_cast<double>(n);
  SemiclassicalEigenfunction eig{make_chart(well, j * well.hbar())};
  eig.scheme = scheme;
  eig.n = n;
  eig.window_multiplier = window_multiplier;
  eig.normalization = norm;
  if (eig.degenerate()) return eig;
  switch (norm) {
    case Normalization::UnitAmplitude: eig.a_plus = 1.0; break;
    case Normalization::StationaryPhase: eig.a_plus = 1.0 / std::sqrt(2 * kPi); break;
    case Normalization::UnitNormOutsideWindows: {
      eig.a_plus = 1.0;
      const double n2 = norm_squared_outside_windows(eig);
      if (!(n2 > 0)) {
        throw Error(ErrorCode::InvalidArgument, "turning-point windows cover the whole state");
      }
      eig.a_plus = 1.0 / std::sqrt(n2);
      break;
    }
  }
  return eig;
}

// --- spectrum -------------------------------------------------------------

struct SpectrumLine {
  std::string sector;  // "semiclassical" or "classical"
  int index = 0;       // n, or nu for classical lines
  double action = 0;
  double value = 0;    // energy, or nu * hbar * omega(J0) for classical lines
  bool degenerate = false;
};

struct SpectrumRequest {
  Scheme scheme = Scheme::EBK;
  int n_max = 0;
  bool include_classical = false;
  int nu_min = -2;
  int nu_max = 2;
  std::optional<double> classical_action;  // defaults to the lowest non-degenerate level
};

inline std::vector<SpectrumLine> spectrum(const SeparableWell& well, const SpectrumRequest& req) {
  if (req.n_max < 0) throw Error(ErrorCode::InvalidArgument, "n_max must be non-negative");
  std::vector<SpectrumLine> out;
  const double h = well.hbar();
  const double shift = req.scheme == Scheme::EBK ? kSingleWellMaslov / 4.0 : 0.0;
  for (int n = 0; n <= req.n_max; ++n) {
    const double j = h * (n + shift);
    // J = 0 is the bottom of the well exactly; inversion would only approach it
    const double e = j == 0 ? well.u_min() : energy_of_action(well, j).energy;
    out.push_back({"semiclassical", n, j, e, j == 0});
  }
  if (req.include_classical) {
    const double j0 = req.classical_action.value_or(h * (shift > 0 ? shift : 1.0));
    const double omega = energy_of_action(well, j0).omega;
    for (int nu = req.nu_min; nu <= req.nu_max; ++nu) {
      out.push_back({"classical", nu, j0, nu * h * omega, false});
    }
  }
  return out;
}

}  // namespace kvh
