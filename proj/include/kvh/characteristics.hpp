#pragma once
// Characteristic curves of the Liouville / KvN / KvH family: Hamilton's
// equations together with the accumulated action and the tangent map.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "kvh/errors.hpp"
#include "kvh/systems.hpp"

namespace kvh {

/// 2x2 tangent map M = d(x, p) / d(x0, p0), row-major.
struct TangentMap {
  double m00 = 1, m01 = 0, m10 = 0, m11 = 1;

  double det() const { return m00 * m11 - m01 * m10; }
  static TangentMap identity() { return {}; }
};

struct TrajectoryPoint {
  double t = 0;
  double x = 0;
  double p = 0;
  double action = 0;
  TangentMap tangent;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::string field_id;
  /// Refined times at which M00 = dx/dx0 crosses zero, in integration order.
  std::vector<double> caustic_times;

  const TrajectoryPoint& front() const { return points.front(); }
  const TrajectoryPoint& back() const { return points.back(); }
};

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0;  // 0 selects a heuristic
  double min_step = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 10'000'000;
  bool store_points = true;
  bool refine_caustics = true;
  double caustic_time_tol = 1e-10;
  /// Caustics are zeros of M00 + caustic_slope * M01, i.e. of dx/dx0 along an
  /// initial Lagrangian curve p0(x0) with slope dp0/dx0 = caustic_slope.
  double caustic_slope = 0.0;
};

namespace detail {

using State = std::array<double, 7>;  // x, p, S, M00, M01, M10, M11

inline State pack(double x, double p, double s, const TangentMap& m) {
  return {x, p, s, m.m00, m.m01, m.m10, m.m11};
}

inline State rhs(const HamiltonianField& f, double t, const State& y) {
  const double x = y[0], p = y[1];
  const double hp = f.dh_dp(t, x, p).real();
  const double hx = f.dh_dx(t, x, p).real();
  const double hh = f.h(t, x, p).real();
  const auto hs = f.hessian(t, x, p);
  // dM/dt = A M with A = [[H_px, H_pp], [-H_xx, -H_xp]]
  State d;
  d[0] = hp;
  d[1] = -hx;
  d[2] = p * hp - hh;
  d[3] = hs.xp * y[3] + hs.pp * y[5];
  d[4] = hs.xp * y[4] + hs.pp * y[6];
  d[5] = -hs.xx * y[3] - hs.xp * y[5];
  d[6] = -hs.xx * y[4] - hs.xp * y[6];
  return d;
}

/// Dormand-Prince 5(4) coefficients.
struct DP54 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct StepResult {
  State y;
  State err;
};

inline StepResult dp_step(const HamiltonianField& f, double t, const State& y, double h) {
  using C = DP54;
  auto axpy = [&](std::initializer_list<std::pair<double, const State*>> terms) {
    State out = y;
    for (const auto& [c, k] : terms) {
      for (int i = 0; i < 7; ++i) out[i] += h * c * (*k)[i];
    }
    return out;
  };
  const State k1 = rhs(f, t, y);
  const State k2 = rhs(f, t + C::c2 * h, axpy({{C::a21, &k1}}));
  const State k3 = rhs(f, t + C::c3 * h, axpy({{C::a31, &k1}, {C::a32, &k2}}));
  const State k4 = rhs(f, t + C::c4 * h, axpy({{C::a41, &k1}, {C::a42, &k2}, {C::a43, &k3}}));
  const State k5 = rhs(f, t + C::c5 * h,
                       axpy({{C::a51, &k1}, {C::a52, &k2}, {C::a53, &k3}, {C::a54, &k4}}));
  const State k6 = rhs(f, t + h,
                       axpy({{C::a61, &k1}, {C::a62, &k2}, {C::a63, &k3}, {C::a64, &k4},
                             {C::a65, &k5}}));
  const State y5 = axpy({{C::b1, &k1}, {C::b3, &k3}, {C::b4, &k4}, {C::b5, &k5}, {C::b6, &k6}});
  const State k7 = rhs(f, t + h, y5);
  StepResult r;
  r.y = y5;
  for (int i = 0; i < 7; ++i) {
    r.err[i] = h * (C::e1 * k1[i] + C::e3 * k3[i] + C::e4 * k4[i] + C::e5 * k5[i] +
                    C::e6 * k6[i] + C::e7 * k7[i]);
  }
  return r;
}

inline TrajectoryPoint to_point(double t, const State& y) {
  return {t, y[0], y[1], y[2], {y[3], y[4], y[5], y[6]}};
}

/// Bisects the zero of M00 inside an accepted step [t, t + h] by re-stepping
/// from its start with shorter single steps.
inline double monitored(const State& y, double slope) { return y[3] + slope * y[4]; }

inline double refine_zero(const HamiltonianField& f, double t, const State& y, double h,
                          double tol, double slope = 0.0) {
  double lo = 0, hi = h;
  const double s0 = monitored(y, slope);
  while (std::abs(hi - lo) > tol) {
    const double mid = 0.5 * (lo + hi);
    const double v = monitored(dp_step(f, t, y, mid).y, slope);
    if ((v > 0) == (s0 > 0) && v != 0) lo = mid; else hi = mid;
  }
  return t + 0.5 * (lo + hi);
}

}  // namespace detail

/// Integrates the joint (x, p, S, M) system from t0 to t1 (either direction)
/// with an embedded Runge-Kutta 5(4) controller.
inline Trajectory integrate(const HamiltonianField& field, double x0, double p0, double t0,
                            double t1, const IntegratorOptions& opts = {}) {
  Trajectory traj;
  traj.field_id = field.name;
  detail::State y = detail::pack(x0, p0, 0.0, TangentMap::identity());
  traj.points.push_back(detail::to_point(t0, y));
  if (t1 == t0) return traj;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  double h = opts.initial_step > 0 ? opts.initial_step : std::min(span, 1e-2);
  h = std::min(h, opts.max_step);
  double t = t0;
  long steps = 0;
  while (dir * (t1 - t) > 0) {
    if (++steps > opts.max_steps) throw StepFailureError("step budget exhausted", t);
    const bool last = h >= dir * (t1 - t);
    const double hs = last ? (t1 - t) : dir * h;
    const auto step = detail::dp_step(field, t, y, hs);
    double err = 0;
    for (int i = 0; i < 7; ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(step.y[i]));
      err = std::max(err, std::abs(step.err[i]) / sc);
    }
    if (!std::isfinite(err)) err = 1e10;
    if (err <= 1.0) {
      const double t_new = last ? t1 : t + hs;
      const double q0 = detail::monitored(y, opts.caustic_slope);
      const double q1 = detail::monitored(step.y, opts.caustic_slope);
      if (opts.refine_caustics && ((q0 > 0 && q1 <= 0) || (q0 < 0 && q1 >= 0))) {
        if (q1 != 0 || !last) {
          traj.caustic_times.push_back(detail::refine_zero(field, t, y, hs, opts.caustic_time_tol,
                                                           opts.caustic_slope));
        }
      }
      y = step.y;
      t = t_new;
      if (opts.store_points || dir * (t1 - t) <= 0) traj.points.push_back(detail::to_point(t, y));
    }
    const double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h = std::min(std::abs(hs) * fac, opts.max_step);
    if (h < opts.min_step) throw StepFailureError("step size underflow", t);
  }
  return traj;
}

/// Fourth-order symplectic (Yoshida) splitting for a separable well with fixed
/// step count; an independent route for cross-checking `integrate`.
inline Trajectory integrate_split(const SeparableWell& well, double x0, double p0, double t0,
                                  double t1, int steps) {
  Trajectory traj;
  traj.field_id = well.name();
  TrajectoryPoint pt{t0, x0, p0, 0.0, TangentMap::identity()};
  traj.points.push_back(pt);
  if (t1 == t0 || steps <= 0) return traj;
  const double cbrt2 = std::cbrt(2.0);
  const double w1 = 1 / (2 - cbrt2), w0 = -cbrt2 / (2 - cbrt2);
  const std::array<double, 4> c{w1 / 2, (w0 + w1) / 2, (w0 + w1) / 2, w1 / 2};
  const std::array<double, 3> d{w1, w0, w1};
  const double h = (t1 - t0) / steps;
  const double m = well.mass();
  auto drift = [&](double dt) {
    pt.action += dt * pt.p * pt.p / (2 * m);
    pt.x += dt * pt.p / m;
    auto& M = pt.tangent;
    M.m00 += dt / m * M.m10;
    M.m01 += dt / m * M.m11;
  };
  auto kick = [&](double dt) {
    pt.action -= dt * well.potential(pt.x);
    pt.p -= dt * well.potential_gradient(pt.x);
    auto& M = pt.tangent;
    const double k = dt * well.potential_curvature(pt.x);
    M.m10 -= k * M.m00;
    M.m11 -= k * M.m01;
  };
  for (int s = 0; s < steps; ++s) {
    // kick / drift halves of the potential flow are split symmetrically
    drift(c[0] * h);
    kick(d[0] * h);
    drift(c[1] * h);
    kick(d[1] * h);
    drift(c[2] * h);
    kick(d[2] * h);
    drift(c[3] * h);
    pt.t = t0 + (s + 1) * h;
    traj.points.push_back(pt);
  }
  return traj;
}

struct VanVleck {
  std::vector<double> factor;       // |M00|^(1/2) per point
  std::vector<bool> caustic;        // zero or sign change relative to the previous point
  int sign_changes = 0;
};

inline constexpr double kCausticTol = 1e-9;

inline VanVleck van_vleck_factor(const Trajectory& traj) {
  VanVleck out;
  out.factor.reserve(traj.points.size());
  double prev = 0;
  bool have_prev = false;
  for (const auto& pt : traj.points) {
    const double v = pt.tangent.m00;
    out.factor.push_back(std::sqrt(std::abs(v)));
    bool flag = std::abs(v) <= kCausticTol;
    if (have_prev && prev != 0 && ((prev > 0) != (v > 0)) && std::abs(v) > kCausticTol) {
      flag = true;
      ++out.sign_changes;
    }
    out.caustic.push_back(flag);
    if (std::abs(v) > kCausticTol) {
      prev = v;
      have_prev = true;
    }
  }
  return out;
}

/// Number of zeros of dx/dx0 over the trajectory window (half turns).
/// A zero sitting exactly on the final point counts once.
inline int maslov_count(const Trajectory& traj) {
  if (traj.points.size() < 2) return 0;
  int count = 0;
  double prev = traj.points.front().tangent.m00;
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    const double v = traj.points[i].tangent.m00;
    const bool at_end = i + 1 == traj.points.size();
    if (std::abs(v) <= kCausticTol) {
      if (at_end) ++count;
      continue;
    }
    if (std::abs(prev) > kCausticTol && (prev > 0) != (v > 0)) ++count;
    prev = v;
  }
  return count;
}

inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x,p,S,M00,M01,M10,M11\n";
  char buf[512];
  for (const auto& pt : traj.points) {
    std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e,%.16e,%.16e,%.16e,%.16e\n", pt.t,
                  pt.x, pt.p, pt.action, pt.tangent.m00, pt.tangent.m01, pt.tangent.m10,
                  pt.tangent.m11);
    os << buf;
  }
}

}  // namespace kvh
