#pragma once
// Uniform complex grids on configuration space and phase space, with
// interpolation and the flat binary / CSV serializations.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "kvh/errors.hpp"

namespace kvh {

using cplx = std::complex<double>;

/// Uniform axis {min + i*step : i = 0..count-1}, step = (max - min)/(count - 1).
struct Axis {
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;

  Axis() = default;
  Axis(double lo, double hi, std::size_t n) : min(lo), max(hi), count(n) { validate(); }

  void validate() const {
    if (count < 2) throw Error(ErrorCode::InvalidArgument, "axis needs at least two points");
    if (!std::isfinite(min) || !std::isfinite(max) || !(max > min)) {
      throw Error(ErrorCode::InvalidArgument, "axis must be finite and strictly increasing");
    }
  }
  double step() const { return (max - min) / static_cast<double>(count - 1); }
  double operator[](std::size_t i) const {
    return i + 1 == count ? max : min + static_cast<double>(i) * step();
  }
  std::vector<double> points() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = (*this)[i];
    return v;
  }
  /// Fractional index of coordinate v.
  double locate(double v) const { return (v - min) / step(); }
  bool same_as(const Axis& o) const {
    const double tol = 1e-12 * std::max({1.0, std::abs(min), std::abs(max)});
    return count == o.count && std::abs(min - o.min) <= tol && std::abs(max - o.max) <= tol;
  }
};

/// Builds an axis from explicit samples, checking uniformity to 1e-12 (relative to the span).
inline Axis axis_from_points(const std::vector<double>& pts) {
  if (pts.size() < 2) throw Error(ErrorCode::InvalidArgument, "axis needs at least two points");
  Axis a(pts.front(), pts.back(), pts.size());
  const double tol = 1e-12 * std::max(1.0, a.max - a.min);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(pts[i] - a[i]) > tol) throw Error(ErrorCode::InvalidArgument, "axis is not uniform");
  }
  return a;
}

enum class Interpolation { Linear, Cubic };

namespace detail {

inline void check_finite(const std::vector<cplx>& v) {
  for (const auto& z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorCode::InvalidArgument, "grid values must be finite");
    }
  }
}

/// Keys cubic-convolution weights (a = -1/2) for fractional offset t in [0, 1).
inline void cubic_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = -0.5 * t3 + t2 - 0.5 * t;
  w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
  w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
  w[3] = 0.5 * t3 - 0.5 * t2;
}

}  // namespace detail

struct ConfigGrid {
  Axis x_axis;
  std::vector<cplx> values;
  double t = 0.0;
  double hbar = 1.0;

  ConfigGrid() = default;
  ConfigGrid(Axis x, double time, double h) : x_axis(x), values(x.count), t(time), hbar(h) {}

  void validate() const {
    x_axis.validate();
    if (values.size() != x_axis.count) throw Error(ErrorCode::InvalidArgument, "value count mismatch");
    detail::check_finite(values);
  }

  /// Interpolated value; zero outside the axis.
  cplx sample(double x, Interpolation order = Interpolation::Cubic) const {
    const double s = x_axis.locate(x);
    const auto n = static_cast<long>(x_axis.count);
    if (!(s > -1.0 && s < static_cast<double>(n))) return {};
    const long i = static_cast<long>(std::floor(s));
    const double f = s - static_cast<double>(i);
    auto at = [&](long j) { return (j < 0 || j >= n) ? cplx{} : values[static_cast<std::size_t>(j)]; };
    if (order == Interpolation::Linear) return (1 - f) * at(i) + f * at(i + 1);
    double w[4];
    detail::cubic_weights(f, w);
    return w[0] * at(i - 1) + w[1] * at(i) + w[2] * at(i + 1) + w[3] * at(i + 2);
  }
};

struct PhaseSpaceGrid {
  Axis x_axis;
  Axis p_axis;
  std::vector<cplx> values;  // row-major: index = ix * p_count + ip
  double t = 0.0;
  double hbar = 1.0;

  PhaseSpaceGrid() = default;
  PhaseSpaceGrid(Axis x, Axis p, double time, double h)
      : x_axis(x), p_axis(p), values(x.count * p.count), t(time), hbar(h) {}

  std::size_t index(std::size_t ix, std::size_t ip) const { return ix * p_axis.count + ip; }
  cplx& at(std::size_t ix, std::size_t ip) { return values[index(ix, ip)]; }
  const cplx& at(std::size_t ix, std::size_t ip) const { return values[index(ix, ip)]; }
  double cell_area() const { return x_axis.step() * p_axis.step(); }

  void validate() const {
    x_axis.validate();
    p_axis.validate();
    if (values.size() != x_axis.count * p_axis.count) {
      throw Error(ErrorCode::InvalidArgument, "value count mismatch");
    }
    detail::check_finite(values);
  }

  bool same_axes(const PhaseSpaceGrid& o) const {
    return x_axis.same_as(o.x_axis) && p_axis.same_as(o.p_axis);
  }

  /// Interpolated value; the grid is zero-padded outside its axes.
  cplx sample(double x, double p, Interpolation order = Interpolation::Cubic) const {
    const double sx = x_axis.locate(x), sp = p_axis.locate(p);
    const auto nx = static_cast<long>(x_axis.count), np = static_cast<long>(p_axis.count);
    if (!(sx > -1.0 && sx < static_cast<double>(nx) && sp > -1.0 && sp < static_cast<double>(np))) {
      return {};
    }
    const long i = static_cast<long>(std::floor(sx)), j = static_cast<long>(std::floor(sp));
    const double fx = sx - static_cast<double>(i), fp = sp - static_cast<double>(j);
    auto val = [&](long a, long b) {
      return (a < 0 || a >= nx || b < 0 || b >= np)
                 ? cplx{}
                 : values[static_cast<std::size_t>(a * np + b)];
    };
    if (order == Interpolation::Linear) {
      return (1 - fx) * ((1 - fp) * val(i, j) + fp * val(i, j + 1)) +
             fx * ((1 - fp) * val(i + 1, j) + fp * val(i + 1, j + 1));
    }
    double wx[4], wp[4];
    detail::cubic_weights(fx, wx);
    detail::cubic_weights(fp, wp);
    cplx acc{};
    for (int a = 0; a < 4; ++a) {
      if (wx[a] == 0.0) continue;
      cplx row{};
      for (int b = 0; b < 4; ++b) row += wp[b] * val(i - 1 + a, j - 1 + b);
      acc += wx[a] * row;
    }
    return acc;
  }
};

// ---------------------------------------------------------------------------
// Binary layout (all little-endian):
//   char[4] magic "KVHG", uint32 version (=1), uint32 rank (1 = config, 2 = phase space),
//   uint32 reserved (=0), then per axis {float64 min, float64 max, uint64 count},
//   float64 t, float64 hbar, then count_x[*count_p] pairs {float64 re, float64 im}
//   in row-major order (x outer, p inner).
// ---------------------------------------------------------------------------
namespace io {

inline constexpr char kMagic[4] = {'K', 'V', 'H', 'G'};
inline constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  auto raw = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = std::endian::native == std::endian::little ? raw[i] : raw[sizeof(T) - 1 - i];
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  std::array<unsigned char, sizeof(T)> raw{};
  is.read(reinterpret_cast<char*>(raw.data()), sizeof(T));
  if (!is) throw Error(ErrorCode::Io, "truncated grid file");
  if constexpr (std::endian::native != std::endian::little) {
    std::reverse(raw.begin(), raw.end());
  }
  return std::bit_cast<T>(raw);
}

inline void put_axis(std::ostream& os, const Axis& a) {
  put(os, a.min);
  put(os, a.max);
  put(os, static_cast<std::uint64_t>(a.count));
}

inline Axis get_axis(std::istream& is) {
  const double lo = get<double>(is), hi = get<double>(is);
  const auto n = get<std::uint64_t>(is);
  return Axis(lo, hi, static_cast<std::size_t>(n));
}

inline void put_header(std::ostream& os, std::uint32_t rank) {
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, rank);
  put(os, std::uint32_t{0});
}

inline std::uint32_t get_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw Error(ErrorCode::Io, "not a grid file (bad magic)");
  }
  if (get<std::uint32_t>(is) != kVersion) throw Error(ErrorCode::Io, "unsupported grid version");
  const auto rank = get<std::uint32_t>(is);
  (void)get<std::uint32_t>(is);
  return rank;
}

inline void put_values(std::ostream& os, const std::vector<cplx>& v) {
  for (const auto& z : v) {
    put(os, z.real());
    put(os, z.imag());
  }
}

inline void get_values(std::istream& is, std::vector<cplx>& v) {
  for (auto& z : v) {
    const double re = get<double>(is), im = get<double>(is);
    z = {re, im};
  }
}

}  // namespace io

inline void write_binary(std::ostream& os, const ConfigGrid& g) {
  io::put_header(os, 1);
  io::put_axis(os, g.x_axis);
  io::put(os, g.t);
  io::put(os, g.hbar);
  io::put_values(os, g.values);
}

inline void write_binary(std::ostream& os, const PhaseSpaceGrid& g) {
  io::put_header(os, 2);
  io::put_axis(os, g.x_axis);
  io::put_axis(os, g.p_axis);
  io::put(os, g.t);
  io::put(os, g.hbar);
  io::put_values(os, g.values);
}

inline ConfigGrid read_config_binary(std::istream& is) {
  if (io::get_header(is) != 1) throw Error(ErrorCode::Io, "grid file is not a configuration grid");
  ConfigGrid g;
  g.x_axis = io::get_axis(is);
  g.t = io::get<double>(is);
  g.hbar = io::get<double>(is);
  g.values.resize(g.x_axis.count);
  io::get_values(is, g.values);
  g.validate();
  return g;
}

inline PhaseSpaceGrid read_phase_binary(std::istream& is) {
  if (io::get_header(is) != 2) throw Error(ErrorCode::Io, "grid file is not a phase-space grid");
  PhaseSpaceGrid g;
  g.x_axis = io::get_axis(is);
  g.p_axis = io::get_axis(is);
  g.t = io::get<double>(is);
  g.hbar = io::get<double>(is);
  g.values.resize(g.x_axis.count * g.p_axis.count);
  io::get_values(is, g.values);
  g.validate();
  return g;
}

/// Formats a double in scientific notation with 17 significant digits.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline void write_csv(std::ostream& os, const ConfigGrid& g) {
  os << "x,Re,Im\n";
  for (std::size_t i = 0; i < g.x_axis.count; ++i) {
    os << fmt(g.x_axis[i]) << ',' << fmt(g.values[i].real()) << ',' << fmt(g.values[i].imag()) << '\n';
  }
}

inline void write_csv(std::ostream& os, const PhaseSpaceGrid& g) {
  os << "x,p,Re,Im\n";
  for (std::size_t i = 0; i < g.x_axis.count; ++i) {
    for (std::size_t j = 0; j < g.p_axis.count; ++j) {
      const cplx v = g.at(i, j);
      os << fmt(g.x_axis[i]) << ',' << fmt(g.p_axis[j]) << ',' << fmt(v.real()) << ',' << fmt(v.imag())
         << '\n';
    }
  }
}

template <class Grid>
void save_binary(const std::string& path, const Grid& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  write_binary(os, g);
  if (!os) throw Error(ErrorCode::Io, "write failed: " + path);
}

inline PhaseSpaceGrid load_phase_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_phase_binary(is);
}

inline ConfigGrid load_config_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_config_binary(is);
}

}  // namespace kvh
