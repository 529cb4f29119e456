#pragma once
// Semi-Lagrangian propagation of gridded wavefunctions: every output node is
// traced backward along its characteristic, the initial grid is interpolated
// at the foot point, and the kernel weight of the requested propagator applied.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kvh/characteristics.hpp"
#include "kvh/errors.hpp"
#include "kvh/grid.hpp"
#include "kvh/parallel.hpp"
#include "kvh/systems.hpp"

namespace kvh {

enum class PropagatorKind { Scalar, LVE, KvN, KvHPhaseSpace, KvHSemiclassical };

inline std::string to_string(PropagatorKind k) {
  switch (k) {
    case PropagatorKind::Scalar: return "scalar";
    case PropagatorKind::LVE: return "lve";
    case PropagatorKind::KvN: return "kvn";
    case PropagatorKind::KvHPhaseSpace: return "kvh-ps";
    case PropagatorKind::KvHSemiclassical: return "kvh-sc";
  }
  return "?";
}

inline PropagatorKind parse_propagator_kind(const std::string& s) {
  for (auto k : {PropagatorKind::Scalar, PropagatorKind::LVE, PropagatorKind::KvN,
                 PropagatorKind::KvHPhaseSpace, PropagatorKind::KvHSemiclassical}) {
    if (s == to_string(k)) return k;
  }
  if (s == "kvh") return PropagatorKind::KvHPhaseSpace;
  throw Error(ErrorCode::InvalidArgument, "unknown propagator kind '" + s + "'");
}

/// Region of phase space where the field may be evaluated.
struct ValidityBox {
  double x_lo, x_hi, p_lo, p_hi;
  bool contains(double x, double p) const {
    return x >= x_lo && x <= x_hi && p >= p_lo && p <= p_hi;
  }
};

struct PropagateOptions {
  Interpolation interpolation = Interpolation::Cubic;
  IntegratorOptions integrator = [] {
    IntegratorOptions o;
    o.rtol = 1e-10;
    o.atol = 1e-12;
    return o;
  }();
  /// Explicit validity box; by default the grid box widened on every side by
  /// box_inflation times its extent.
  std::optional<ValidityBox> validity_box;
  double box_inflation = 1.0;
  /// |dx/dx0| below this at the output time makes the semiclassical branch ambiguous.
  double caustic_tolerance = 1e-9;
  unsigned threads = 0;
};

/// Per-run diagnostics gathered while propagating.
struct PropagationStats {
  double max_det_deviation = 0;  // max |det dz0/dz - 1| over nodes
  std::size_t nodes = 0;
};

namespace detail {

inline ValidityBox default_box(const PhaseSpaceGrid& g, double inflation) {
  const double wx = g.x_axis.max - g.x_axis.min, wp = g.p_axis.max - g.p_axis.min;
  return {g.x_axis.min - inflation * wx, g.x_axis.max + inflation * wx,
          g.p_axis.min - inflation * wp, g.p_axis.max + inflation * wp};
}

inline void check_path(const Trajectory& tr, const ValidityBox& box) {
  for (const auto& pt : tr.points) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.p) || !box.contains(pt.x, pt.p)) {
      throw Error(ErrorCode::OutOfDomain, "characteristic left the validity box");
    }
  }
}

}  // namespace detail

/// Evolves grid (at time grid.t) to time t1 under the propagator `kind`.
///
/// Weights: Scalar 1; LVE |det dz0/dz|; KvN (det dz0/dz)^(1/2);
/// KvHPhaseSpace e^{i dS/hbar} (det dz0/dz)^(1/2); KvHSemiclassical
/// e^{i dS/hbar} (det dz0/dz) |dx/dx0|_{p0}^(1/2) e^{-i pi/2 c}, where c is the
/// number of sign changes of dx/dx0 along the forward characteristic (the
/// square-root branch convention that reproduces EBK; see docs/decisions.md).
inline PhaseSpaceGrid propagate(const HamiltonianField& field, const PhaseSpaceGrid& grid, double t1,
                                PropagatorKind kind, const PropagateOptions& opts = {},
                                PropagationStats* stats = nullptr) {
  grid.validate();
  if (t1 == grid.t) {
    if (stats) *stats = {0.0, grid.values.size()};
    return grid;
  }
  const ValidityBox box = opts.validity_box.value_or(detail::default_box(grid, opts.box_inflation));
  PhaseSpaceGrid out(grid.x_axis, grid.p_axis, t1, grid.hbar);
  const double t0 = grid.t;
  const double hbar = grid.hbar;
  const std::size_t np = grid.p_axis.count;
  std::vector<double> row_det_dev(grid.x_axis.count, 0.0);

  IntegratorOptions back = opts.integrator;
  back.store_points = true;  // the whole path is checked against the validity box
  back.refine_caustics = false;
  IntegratorOptions fwd = opts.integrator;
  fwd.store_points = false;
  fwd.refine_caustics = true;

  parallel_for(
      grid.x_axis.count,
      [&](std::size_t ix) {
        const double x = grid.x_axis[ix];
        for (std::size_t ip = 0; ip < np; ++ip) {
          const double p = grid.p_axis[ip];
          const Trajectory tr = integrate(field, x, p, t1, t0, back);
          detail::check_path(tr, box);
          const auto& foot = tr.back();
          const double det = foot.tangent.det();  // det dz0/dz
          row_det_dev[ix] = std::max(row_det_dev[ix], std::abs(det - 1.0));
          const cplx psi0 = grid.sample(foot.x, foot.p, opts.interpolation);
          // the backward action integral runs t1 -> t0, so dS = -S_back
          const double ds = -foot.action;
          cplx w;
          switch (kind) {
            case PropagatorKind::Scalar: w = 1.0; break;
            case PropagatorKind::LVE: w = std::abs(det); break;
            case PropagatorKind::KvN: w = std::sqrt(cplx(det)); break;
            case PropagatorKind::KvHPhaseSpace:
              w = std::polar(1.0, ds / hbar) * std::sqrt(cplx(det));
              break;
            case PropagatorKind::KvHSemiclassical: {
              const Trajectory f = integrate(field, foot.x, foot.p, t0, t1, fwd);
              const double dxdx0 = f.back().tangent.m00;
              if (std::abs(dxdx0) <= opts.caustic_tolerance) {
                throw CausticError(ErrorCode::CausticUnresolved,
                                   "output time sits on a caustic; square-root branch ambiguous", t1);
              }
              const double crossings = static_cast<double>(f.caustic_times.size());
              w = std::polar(std::sqrt(std::abs(dxdx0)) * det, ds / hbar - 0.5 * kPi * crossings);
              break;
            }
          }
          out.at(ix, ip) = psi0 * w;
        }
      },
      opts.threads);
  if (stats) {
    stats->nodes = out.values.size();
    stats->max_det_deviation = *std::max_element(row_det_dev.begin(), row_det_dev.end());
  }
  return out;
}

/// psi(t, x) = trapezoidal integral of psi_SC(t, x, p) over p.
/// Throws BoundaryLeak unless the values on the p-axis edges are below
/// leak_tolerance relative to the largest modulus on the grid.
inline ConfigGrid project_to_config(const PhaseSpaceGrid& grid, double leak_tolerance = 1e-10) {
  grid.validate();
  const std::size_t nx = grid.x_axis.count, np = grid.p_axis.count;
  double peak = 0;
  for (const auto& v : grid.values) peak = std::max(peak, std::abs(v));
  for (std::size_t ix = 0; ix < nx; ++ix) {
    if (std::abs(grid.at(ix, 0)) > leak_tolerance * peak ||
        std::abs(grid.at(ix, np - 1)) > leak_tolerance * peak) {
      throw Error(ErrorCode::BoundaryLeak, "wavefunction does not decay at the momentum boundary");
    }
  }
  ConfigGrid out(grid.x_axis, grid.t, grid.hbar);
  const double dp = grid.p_axis.step();
  for (std::size_t ix = 0; ix < nx; ++ix) {
    cplx s = 0.5 * (grid.at(ix, 0) + grid.at(ix, np - 1));
    for (std::size_t ip = 1; ip + 1 < np; ++ip) s += grid.at(ix, ip);
    out.values[ix] = s * dp;
  }
  return out;
}

// --- configuration-space propagation ---------------------------------------

struct ConfigPropagation {
  ConfigGrid grid;                // psi(t1, x) on a uniform axis spanning the image
  std::vector<double> image;      // x(t1) of every initial node
  std::vector<double> action;     // dS along every characteristic
  std::vector<double> stretch;    // dx/dx0 along every characteristic
  int branches = 1;               // the single-phase ansatz carries one branch
};

namespace detail {

/// Keys cubic interpolation of real samples on a uniform axis (clamped at the ends).
inline double sample_real(const std::vector<double>& v, const Axis& a, double x) {
  const double s = std::clamp(a.locate(x), 0.0, static_cast<double>(a.count - 1));
  const auto n = static_cast<long>(a.count);
  const long i = std::min(static_cast<long>(std::floor(s)), n - 2);
  const double f = s - static_cast<double>(i);
  auto at = [&](long j) {
    if (j < 0) return 2 * v[0] - v[1];  // linear extrapolation keeps end cells exact for lines
    if (j >= n) return 2 * v[static_cast<std::size_t>(n - 1)] - v[static_cast<std::size_t>(n - 2)];
    return v[static_cast<std::size_t>(j)];
  };
  double w[4];
  cubic_weights(f, w);
  return w[0] * at(i - 1) + w[1] * at(i) + w[2] * at(i + 1) + w[3] * at(i + 2);
}

}  // namespace detail

/// Evolves a single-branch configuration-space state psi0 with momentum field
/// p0(x) = dS/dx by forward characteristics.  Throws CausticReached (carrying
/// the earliest crossing time) if dx/dx0 vanishes before t1.
template <class MomentumField>
ConfigPropagation propagate_config(const HamiltonianField& field, const ConfigGrid& psi0,
                                   MomentumField&& p0_field, double t1,
                                   const PropagateOptions& opts = {}) {
  psi0.validate();
  const Axis& ax = psi0.x_axis;
  const std::size_t n = ax.count;
  ConfigPropagation res;
  if (t1 == psi0.t) {
    res.grid = psi0;
    res.image = ax.points();
    res.action.assign(n, 0.0);
    res.stretch.assign(n, 1.0);
    return res;
  }
  res.image.resize(n);
  res.action.resize(n);
  res.stretch.resize(n);
  std::vector<double> caustic(n, std::numeric_limits<double>::infinity());
  parallel_for(
      n,
      [&](std::size_t i) {
        const double x0 = ax[i];
        const double e = 1e-6 * std::max(1.0, std::abs(x0));
        const double slope = (p0_field(x0 + e) - p0_field(x0 - e)) / (2 * e);
        IntegratorOptions o = opts.integrator;
        o.store_points = false;
        o.refine_caustics = true;
        o.caustic_slope = slope;
        const Trajectory tr = integrate(field, x0, p0_field(x0), psi0.t, t1, o);
        if (!tr.caustic_times.empty()) {
          caustic[i] = tr.caustic_times.front();
          return;
        }
        const auto& end = tr.back();
        res.image[i] = end.x;
        res.action[i] = end.action;
        res.stretch[i] = end.tangent.m00 + slope * end.tangent.m01;
      },
      opts.threads);
  const double first = *std::min_element(caustic.begin(), caustic.end(), [&](double a, double b) {
    return std::abs(a - psi0.t) < std::abs(b - psi0.t);
  });
  if (std::isfinite(first)) {
    throw CausticError(ErrorCode::CausticReached, "single-branch solution reached a caustic", first);
  }
  for (double s : res.stretch) {
    if (std::abs(s) <= opts.caustic_tolerance) {
      throw CausticError(ErrorCode::CausticReached, "single-branch solution reached a caustic", t1);
    }
  }
  // x(x0) is monotone without caustics; invert it on a uniform image axis
  const bool increasing = res.image.back() > res.image.front();
  const double lo = std::min(res.image.front(), res.image.back());
  const double hi = std::max(res.image.front(), res.image.back());
  res.grid = ConfigGrid(Axis(lo, hi, n), t1, psi0.hbar);
  const double hbar = psi0.hbar;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = res.grid.x_axis[j];
    // bracket in the node list, then Newton on the cubic interpolant of x(x0)
    std::size_t a = 0, b = n - 1;
    while (b - a > 1) {
      const std::size_t mid = (a + b) / 2;
      if ((res.image[mid] < x) == increasing) a = mid; else b = mid;
    }
    double x0 = ax[a] + (x - res.image[a]) / (res.image[b] - res.image[a]) * (ax[b] - ax[a]);
    for (int it = 0; it < 30; ++it) {
      const double r = detail::sample_real(res.image, ax, x0) - x;
      const double d = detail::sample_real(res.stretch, ax, x0);
      const double step = r / d;
      x0 = std::clamp(x0 - step, ax.min, ax.max);
      if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x0))) break;
    }
    const double ds = detail::sample_real(res.action, ax, x0);
    const double stretch = detail::sample_real(res.stretch, ax, x0);
    res.grid.values[j] =
        psi0.sample(x0, opts.interpolation) * std::polar(1.0 / std::sqrt(std::abs(stretch)), ds / hbar);
  }
  return res;
}

}  // namespace kvh
