#pragma once
// One-dimensional Hamiltonian systems: generic fields H(t, x, p) and the
// kinetic-plus-potential single wells used for quantization.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "kvh/errors.hpp"

namespace kvh {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Analytic Hamiltonian H(t, x, p) with first partials.  Momentum is complex so
/// that forbidden-region branches can be evaluated through the same field.
/// The second partials are optional; when absent they are obtained by central
/// differences of the first partials.
struct HamiltonianField {
  using Fn = std::function<cplx(double t, double x, cplx p)>;

  Fn h;
  Fn dh_dx;
  Fn dh_dp;
  Fn d2h_dx2;
  Fn d2h_dxdp;
  Fn d2h_dp2;
  double hbar = 1.0;
  bool time_dependent = false;
  std::string name = "custom";

  double energy(double t, double x, double p) const { return h(t, x, p).real(); }
  double velocity(double t, double x, double p) const { return dh_dp(t, x, p).real(); }
  double force(double t, double x, double p) const { return -dh_dx(t, x, p).real(); }

  /// Hessian entries (H_xx, H_xp, H_pp) at a real phase-space point.
  struct Hessian {
    double xx, xp, pp;
  };

  Hessian hessian(double t, double x, double p) const {
    if (d2h_dx2 && d2h_dxdp && d2h_dp2) {
      return {d2h_dx2(t, x, p).real(), d2h_dxdp(t, x, p).real(), d2h_dp2(t, x, p).real()};
    }
    const double ex = 1e-5 * std::max(1.0, std::abs(x));
    const double ep = 1e-5 * std::max(1.0, std::abs(p));
    const double hxx = (dh_dx(t, x + ex, p).real() - dh_dx(t, x - ex, p).real()) / (2 * ex);
    const double hpp = (dh_dp(t, x, p + ep).real() - dh_dp(t, x, p - ep).real()) / (2 * ep);
    const double hxp = (dh_dp(t, x + ex, p).real() - dh_dp(t, x - ex, p).real()) / (2 * ex);
    return {hxx, hxp, hpp};
  }
};

/// L_H = p * dH/dp - H along a real phase-space point.
inline double lagrangian(const HamiltonianField& field, double t, double x, double p) {
  return (cplx(p) * field.dh_dp(t, x, p) - field.h(t, x, p)).real();
}

/// H = p^2 / 2m + U(x) on a closed interval containing exactly one minimum.
class SeparableWell {
 public:
  using Potential = std::function<double(double)>;

  SeparableWell(double mass, Potential potential, Potential force_gradient, double x_lo,
                double x_hi, double hbar, std::string name = "custom",
                Potential curvature = {}, bool symmetric = false)
      : mass_(mass),
        u_(std::move(potential)),
        du_(std::move(force_gradient)),
        d2u_(std::move(curvature)),
        x_lo_(x_lo),
        x_hi_(x_hi),
        hbar_(hbar),
        name_(std::move(name)),
        symmetric_(symmetric) {
    if (!(mass_ > 0)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
    if (!(hbar_ > 0)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
    if (!(x_hi_ > x_lo_)) throw Error(ErrorCode::InvalidArgument, "empty domain");
    locate_minimum();
    if (!(u_(x_lo_) > u_min_ && u_(x_hi_) > u_min_)) {
      throw Error(ErrorCode::InvalidArgument, "well is not confining on its domain");
    }
  }

  double mass() const { return mass_; }
  double hbar() const { return hbar_; }
  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }
  double x_min() const { return x_min_; }
  double u_min() const { return u_min_; }
  bool symmetric() const { return symmetric_; }
  const std::string& name() const { return name_; }

  double potential(double x) const { return u_(x); }
  double potential_gradient(double x) const { return du_(x); }
  double potential_curvature(double x) const {
    if (d2u_) return d2u_(x);
    const double e = 1e-5 * std::max(1.0, std::abs(x));
    return (du_(x + e) - du_(x - e)) / (2 * e);
  }

  /// Highest energy whose orbit stays inside the domain.
  double max_energy() const { return std::min(u_(x_lo_), u_(x_hi_)); }

  double hamiltonian(double x, double p) const { return p * p / (2 * mass_) + u_(x); }

 private:
  void locate_minimum() {
    constexpr int kSamples = 1024;
    const double dx = (x_hi_ - x_lo_) / kSamples;
    int sign_changes = 0;
    double a = x_lo_, b = x_hi_;
    double prev = du_(x_lo_);
    double prev_x = x_lo_;
    for (int i = 1; i <= kSamples; ++i) {
      const double x = x_lo_ + i * dx;
      const double g = du_(x);
      // zeros are skipped so that a sample landing exactly on the minimum counts once
      if (g == 0) continue;
      if (prev < 0 && g > 0) {
        ++sign_changes;
        a = prev_x;
        b = x;
      } else if (prev > 0 && g < 0) {
        ++sign_changes;
      }
      prev = g;
      prev_x = x;
    }
    if (sign_changes != 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "potential must have exactly one interior minimum on the domain");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      if (du_(mid) < 0) a = mid; else b = mid;
    }
    x_min_ = 0.5 * (a + b);
    u_min_ = u_(x_min_);
  }

  double mass_;
  Potential u_;
  Potential du_;
  Potential d2u_;
  double x_lo_, x_hi_;
  double hbar_;
  std::string name_;
  bool symmetric_;
  double x_min_ = 0;
  double u_min_ = 0;
};

/// Length scale where the potential rise equals the localization energy,
/// U(x_min + x) - U_min = hbar^2 / (2 m x^2).  Reduces to sqrt(hbar / m omega)
/// for a harmonic well and stays finite when U'' vanishes at the minimum.
inline double characteristic_length(double mass, double hbar,
                                    const std::function<double(double)>& rise) {
  double a = 1e-12, b = 1.0;
  auto f = [&](double x) { return rise(x) - hbar * hbar / (2 * mass * x * x); };
  while (f(b) < 0) b *= 2;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    if (f(mid) < 0) a = mid; else b = mid;
  }
  return 0.5 * (a + b);
}

inline constexpr double kDomainHalfWidth = 20.0;

inline SeparableWell make_harmonic(double mass, double omega, double hbar) {
  if (!(omega > 0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
  if (!(mass > 0) || !(hbar > 0)) throw Error(ErrorCode::InvalidArgument, "mass and hbar must be positive");
  const double k = mass * omega * omega;
  const double half = kDomainHalfWidth * std::sqrt(hbar / (mass * omega));
  return SeparableWell(
      mass, [k](double x) { return 0.5 * k * x * x; }, [k](double x) { return k * x; }, -half,
      half, hbar, "ho", [k](double) { return k; }, true);
}

inline SeparableWell make_quartic(double mass, double lambda, double hbar) {
  if (!(lambda > 0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(mass > 0) || !(hbar > 0)) throw Error(ErrorCode::InvalidArgument, "mass and hbar must be positive");
  const double xc =
      characteristic_length(mass, hbar, [lambda](double x) { return 0.25 * lambda * x * x * x * x; });
  const double half = kDomainHalfWidth * xc;
  return SeparableWell(
      mass, [lambda](double x) { return 0.25 * lambda * x * x * x * x; },
      [lambda](double x) { return lambda * x * x * x; }, -half, half, hbar, "quartic",
      [lambda](double x) { return 3 * lambda * x * x; }, true);
}

/// Catalog lookup: "ho" uses m, omega; "quartic" uses m, lambda.  Missing
/// parameters default to 1.
inline SeparableWell make_well(const std::string& name, const std::map<std::string, double>& params,
                               double hbar) {
  auto get = [&](const char* key) {
    auto it = params.find(key);
    return it == params.end() ? 1.0 : it->second;
  };
  if (name == "ho") return make_harmonic(get("m"), get("omega"), hbar);
  if (name == "quartic") return make_quartic(get("m"), get("lambda"), hbar);
  throw Error(ErrorCode::InvalidArgument, "unknown system '" + name + "'");
}

/// H = p^2 / 2m + U(x) as a generic field.
inline HamiltonianField make_field(const SeparableWell& well) {
  HamiltonianField f;
  const double m = well.mass();
  f.h = [well, m](double, double x, cplx p) { return p * p / (2 * m) + well.potential(x); };
  f.dh_dx = [well](double, double x, cplx) { return cplx(well.potential_gradient(x)); };
  f.dh_dp = [m](double, double, cplx p) { return p / m; };
  f.d2h_dx2 = [well](double, double x, cplx) { return cplx(well.potential_curvature(x)); };
  f.d2h_dxdp = [](double, double, cplx) { return cplx(0.0); };
  f.d2h_dp2 = [m](double, double, cplx) { return cplx(1.0 / m); };
  f.hbar = well.hbar();
  f.name = well.name();
  return f;
}

/// H = p^2 / 2m.
inline HamiltonianField make_free_particle(double mass, double hbar) {
  HamiltonianField f;
  f.h = [mass](double, double, cplx p) { return p * p / (2 * mass); };
  f.dh_dx = [](double, double, cplx) { return cplx(0.0); };
  f.dh_dp = [mass](double, double, cplx p) { return p / mass; };
  f.d2h_dx2 = [](double, double, cplx) { return cplx(0.0); };
  f.d2h_dxdp = [](double, double, cplx) { return cplx(0.0); };
  f.d2h_dp2 = [mass](double, double, cplx) { return cplx(1.0 / mass); };
  f.hbar = hbar;
  f.name = "free";
  return f;
}

struct TurningPoints {
  double minus;
  double plus;
};

/// Solves U(xi) = E on each flank of the well.
inline TurningPoints turning_points(const SeparableWell& well, double energy) {
  if (!(energy > well.u_min())) {
    throw Error(ErrorCode::EnergyBelowWell, "energy does not exceed the well minimum");
  }
  if (!(energy < well.max_energy())) {
    throw Error(ErrorCode::EnergyAboveWell, "orbit is not bounded within the domain");
  }
  auto g = [&](double x) { return well.potential(x) - energy; };
  // bracket on a flank: g(inner) < 0 <= g(outer); coarse scan then bisection
  auto solve = [&](double inner, double outer) {
    constexpr int kScan = 256;
    double a = inner, b = outer;
    for (int i = 1; i <= kScan; ++i) {
      const double x = inner + (outer - inner) * i / kScan;
      if (g(x) >= 0) {
        b = x;
        a = inner + (outer - inner) * (i - 1) / kScan;
        break;
      }
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      if (g(mid) < 0) a = mid; else b = mid;
    }
    return std::abs(g(a)) < std::abs(g(b)) ? a : b;
  };
  return {solve(well.x_min(), well.x_lo()), solve(well.x_min(), well.x_hi())};
}

struct MomentumBranches {
  cplx plus;
  cplx minus;
};

/// p = +-sqrt(2m(E - U)), purely imaginary in the forbidden region.
inline MomentumBranches momentum_branches(const SeparableWell& well, double energy, double x) {
  const double k = 2 * well.mass() * (energy - well.potential(x));
  if (k >= 0) {
    const double p = std::sqrt(k);
    return {cplx(p, 0), cplx(-p, 0)};
  }
  const double q = std::sqrt(-k);
  return {cplx(0, q), cplx(0, -q)};
}

}  // namespace kvh
