#pragma once
// Command-line front end: spectrum | eigenfunction | propagate | project |
// density-check | compare.  `run` is the whole program so tests can drive it
// in-process; tools/kvh.cpp only forwards argv.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kvh/deltas.hpp"
#include "kvh/diagnostics.hpp"
#include "kvh/eigen.hpp"
#include "kvh/grid.hpp"
#include "kvh/propagators.hpp"
#include "kvh/ridges.hpp"
#include "kvh/systems.hpp"

namespace kvh::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kSuccess = 0, kUsage = 2, kNumerical = 3 };

inline constexpr std::size_t kMinGridCount = 16;

/// Settings shared by every command (global flags or the JSON config file).
struct RunConfig {
  std::string system = "ho";
  std::string params;            // k=v,...
  double hbar = 1.0;
  std::string x_axis, p_axis;    // min,max,count; empty selects a command default
  std::string scheme = "ebk";
  std::string tolerances;        // k=v,... with keys rtol, atol, caustic, leak
  std::string out = ".";
  std::string format = "csv";
  unsigned threads = 0;
};

namespace detail {

inline Error usage(const std::string& what) { return Error(ErrorCode::InvalidArgument, what); }

inline double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw usage("not a number: '" + s + "'");
  }
  if (used != s.size()) throw usage("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> v;
  for (const auto& t : split(s, ',')) v.push_back(to_double(t));
  return v;
}

inline std::map<std::string, double> parse_kv(const std::string& s) {
  std::map<std::string, double> m;
  if (s.empty()) return m;
  for (const auto& item : split(s, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw usage("expected key=value, got '" + item + "'");
    m[item.substr(0, eq)] = to_double(item.substr(eq + 1));
  }
  return m;
}

inline Axis parse_axis(const std::string& s, const char* name) {
  const auto v = to_doubles(s);
  if (v.size() != 3) throw usage(std::string(name) + " axis needs min,max,count");
  if (!(v[2] >= static_cast<double>(kMinGridCount)) || v[2] != std::floor(v[2])) {
    throw usage(std::string(name) + " axis count must be an integer >= 16");
  }
  Axis a(v[0], v[1], static_cast<std::size_t>(v[2]));
  a.validate();
  return a;
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "ebk") return Scheme::EBK;
  if (s == "bs") return Scheme::BohrSommerfeld;
  throw usage("scheme must be bs or ebk");
}

inline Normalization parse_normalization(const std::string& s) {
  if (s == "stationary-phase") return Normalization::StationaryPhase;
  if (s == "unit-amplitude") return Normalization::UnitAmplitude;
  if (s == "unit-norm") return Normalization::UnitNormOutsideWindows;
  throw usage("normalization must be stationary-phase, unit-amplitude or unit-norm");
}

inline SeparableWell make_system(const RunConfig& cfg) {
  const auto params = parse_kv(cfg.params);
  const std::map<std::string, std::vector<std::string>> allowed = {{"ho", {"m", "omega"}},
                                                                   {"quartic", {"m", "lambda"}}};
  const auto it = allowed.find(cfg.system);
  if (it == allowed.end()) throw usage("unknown system '" + cfg.system + "'");
  for (const auto& [k, v] : params) {
    if (std::find(it->second.begin(), it->second.end(), k) == it->second.end()) {
      throw usage("parameter '" + k + "' does not apply to system " + cfg.system);
    }
  }
  if (!(cfg.hbar > 0)) throw usage("hbar must be positive");
  return make_well(cfg.system, params, cfg.hbar);
}

struct Tolerances {
  double rtol = 1e-10, atol = 1e-12, caustic = 1e-9, leak = 1e-10;
};

inline Tolerances parse_tolerances(const std::string& s) {
  Tolerances t;
  for (const auto& [k, v] : parse_kv(s)) {
    if (!(v > 0)) throw usage("tolerance " + k + " must be positive");
    if (k == "rtol") t.rtol = v;
    else if (k == "atol") t.atol = v;
    else if (k == "caustic") t.caustic = v;
    else if (k == "leak") t.leak = v;
    else throw usage("unknown tolerance '" + k + "'");
  }
  return t;
}

/// Initial phase-space state: gaussian:x,p,sx,sp[,chirp] | eigen_ridge:n,k[,kvh|sc|hj] | file:path.
struct InitialSpec {
  enum class Kind { Gaussian, Ridge, File } kind = Kind::Gaussian;
  std::vector<double> numbers;
  std::optional<RidgeKind> ridge_kind;
  std::string path;
};

inline InitialSpec parse_initial(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw usage("initial spec needs a kind prefix, got '" + s + "'");
  const std::string head = s.substr(0, colon), body = s.substr(colon + 1);
  InitialSpec spec;
  if (head == "file") {
    if (body.empty()) throw usage("file: needs a path");
    spec.kind = InitialSpec::Kind::File;
    spec.path = body;
  } else if (head == "gaussian") {
    spec.numbers = to_doubles(body);
    if (spec.numbers.size() != 4 && spec.numbers.size() != 5) {
      throw usage("gaussian needs x,p,sx,sp[,chirp]");
    }
    if (!(spec.numbers[2] > 0 && spec.numbers[3] > 0)) throw usage("gaussian widths must be positive");
  } else if (head == "eigen_ridge") {
    spec.kind = InitialSpec::Kind::Ridge;
    auto parts = split(body, ',');
    if (parts.size() == 3) {
      const std::string k = parts.back();
      parts.pop_back();
      if (k == "kvh") spec.ridge_kind = RidgeKind::KvH;
      else if (k == "sc") spec.ridge_kind = RidgeKind::Semiclassical;
      else if (k == "hj") spec.ridge_kind = RidgeKind::HamiltonJacobi;
      else throw usage("ridge kind must be kvh, sc or hj");
    }
    if (parts.size() != 2) throw usage("eigen_ridge needs n,k[,kind]");
    for (const auto& p : parts) spec.numbers.push_back(to_double(p));
    if (spec.numbers[0] < 0 || spec.numbers[0] != std::floor(spec.numbers[0])) {
      throw usage("eigen_ridge n must be a non-negative integer");
    }
    if (!(spec.numbers[1] > 0)) throw usage("eigen_ridge k must be positive");
  } else {
    throw usage("unknown initial kind '" + head + "'");
  }
  return spec;
}

/// Default axes enclosing the torus of energy `e` with a margin.
inline std::pair<Axis, Axis> default_axes(const SeparableWell& well, double e) {
  const auto tp = turning_points(well, e);
  const double p_max = std::sqrt(2 * well.mass() * (e - well.u_min()));
  const double lx = 1.5 * std::max(std::abs(tp.minus), std::abs(tp.plus));
  const double lp = 1.5 * p_max;
  return {Axis(-lx, lx, 128), Axis(-lp, lp, 128)};
}

inline PhaseSpaceGrid build_initial(const RunConfig& cfg, const SeparableWell& well, const InitialSpec& spec,
                                    RidgeKind default_ridge) {
  if (spec.kind == InitialSpec::Kind::File) {
    auto g = load_phase_binary(spec.path);
    if (std::abs(g.hbar - cfg.hbar) > 1e-12 * cfg.hbar) throw usage("grid file hbar differs from --hbar");
    return g;
  }
  std::optional<Axis> xa, pa;
  if (!cfg.x_axis.empty()) xa = parse_axis(cfg.x_axis, "x");
  if (!cfg.p_axis.empty()) pa = parse_axis(cfg.p_axis, "p");
  if (spec.kind == InitialSpec::Kind::Gaussian) {
    const auto& v = spec.numbers;
    const Axis dx(-4, 4, 128);
    auto g = gaussian_blob(xa.value_or(dx), pa.value_or(dx), v[0], v[1], v[2], v[3], cfg.hbar);
    const double chirp = v.size() == 5 ? v[4] : 0.0;
    if (chirp != 0) {
      for (std::size_t i = 0; i < g.x_axis.count; ++i)
        for (std::size_t j = 0; j < g.p_axis.count; ++j)
          g.at(i, j) *= std::polar(1.0, chirp * (g.x_axis[i] - v[0]) * (g.p_axis[j] - v[1]) / cfg.hbar);
    }
    return g;
  }
  const int n = static_cast<int>(spec.numbers[0]);
  const auto eig = quantize(well, parse_scheme(cfg.scheme), n, Normalization::StationaryPhase);
  if (eig.degenerate()) throw usage("the J = 0 state has no eigen-ridge");
  const auto [dx, dp] = default_axes(well, eig.chart.energy);
  RidgeOptions ro;
  ro.kind = spec.ridge_kind.value_or(default_ridge);
  ro.k = spec.numbers[1];
  ro.threads = cfg.threads;
  return eigen_ridge(eig, xa.value_or(dx), pa.value_or(dp), ro);
}

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& stem, const std::string& ext) {
  std::filesystem::path dir(cfg.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + cfg.out);
  return dir / (stem + "." + ext);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

inline json axis_json(const Axis& a) { return {{"min", a.min}, {"max", a.max}, {"count", a.count}}; }

inline json values_json(const std::vector<cplx>& v) {
  json re = json::array(), im = json::array();
  for (const auto& z : v) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  return {{"re", re}, {"im", im}};
}

inline json grid_json(const ConfigGrid& g) {
  json j = {{"x", axis_json(g.x_axis)}, {"t", g.t}, {"hbar", g.hbar}};
  j.update(values_json(g.values));
  return j;
}

inline json grid_json(const PhaseSpaceGrid& g) {
  json j = {{"x", axis_json(g.x_axis)}, {"p", axis_json(g.p_axis)}, {"t", g.t}, {"hbar", g.hbar}};
  j.update(values_json(g.values));
  return j;
}

/// Writes a grid as <stem>.csv, <stem>.json or <stem>.bin.
template <class Grid>
std::filesystem::path write_grid(const RunConfig& cfg, const std::string& stem, const Grid& g) {
  if (cfg.format == "bin") {
    const auto path = output_path(cfg, stem, "bin");
    save_binary(path.string(), g);
    return path;
  }
  if (cfg.format == "json") {
    const auto path = output_path(cfg, stem, "json");
    write_file(path, grid_json(g).dump(1) + "\n");
    return path;
  }
  std::ostringstream os;
  write_csv(os, g);
  const auto path = output_path(cfg, stem, "csv");
  write_file(path, os.str());
  return path;
}

inline std::filesystem::path write_json(const RunConfig& cfg, const std::string& stem, const json& j) {
  const auto path = output_path(cfg, stem, "json");
  write_file(path, j.dump(1) + "\n");
  return path;
}

inline void require_tabular(const RunConfig& cfg, const char* cmd) {
  if (cfg.format == "bin") throw usage(std::string(cmd) + " writes tables; use --format csv or json");
}

inline json system_json(const RunConfig& cfg) {
  json p = json::object();
  for (const auto& [k, v] : parse_kv(cfg.params)) p[k] = v;
  return {{"name", cfg.system}, {"params", p}, {"hbar", cfg.hbar}};
}

inline std::string region_flag(const ConfigValue& v) {
  std::string s = v.region == Region::Allowed         ? "allowed"
                  : v.region == Region::ForbiddenLeft ? "forbidden_left"
                                                      : "forbidden_right";
  if (v.in_window) s += "_window";
  return s;
}

inline PropagateOptions propagate_options(const RunConfig& cfg) {
  const auto tol = parse_tolerances(cfg.tolerances);
  PropagateOptions o;
  o.integrator.rtol = tol.rtol;
  o.integrator.atol = tol.atol;
  o.caustic_tolerance = tol.caustic;
  o.threads = cfg.threads;
  return o;
}

inline double grid_mass(const PhaseSpaceGrid& g) {
  double s = 0;
  for (const auto& v : g.values) s += std::abs(v);
  return s * g.cell_area();
}

/// Stringifies a JSON config value the way it would be typed on the command line.
inline std::string config_token(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + config_token(e);
    return s;
  }
  if (v.is_object()) {
    std::string s;
    for (const auto& [k, e] : v.items()) s += (s.empty() ? "" : ",") + k + "=" + config_token(e);
    return s;
  }
  throw usage("unsupported config value " + v.dump());
}

/// Feeds a config value to an option unless the option was given on the command line.
inline void apply_config_value(CLI::App& app, CLI::App* sub, std::string key, const json& v) {
  std::replace(key.begin(), key.end(), '_', '-');
  CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
  if (!opt) opt = app.get_option_no_throw("--" + key);
  if (!opt) throw usage("unknown config key '" + key + "'");
  if (opt->count() > 0) return;  // the flag wins
  opt->add_result(config_token(v));
  opt->run_callback();
}

inline void apply_config(CLI::App& app, CLI::App* sub, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw usage(std::string("malformed config file: ") + e.what());
  }
  if (!doc.is_object()) throw usage("config file must hold a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "grid") {
      if (!v.is_object()) throw usage("grid must be an object with x and p axes");
      for (const auto& [ak, av] : v.items()) {
        if (ak != "x" && ak != "p") throw usage("unknown grid axis '" + ak + "'");
        apply_config_value(app, sub, ak + "-axis", av);
      }
    } else if (key == "output") {
      if (!v.is_object()) throw usage("output must be an object");
      for (const auto& [ok, ov] : v.items()) {
        if (ok == "dir") apply_config_value(app, sub, "out", ov);
        else if (ok == "format") apply_config_value(app, sub, "format", ov);
        else throw usage("unknown output key '" + ok + "'");
      }
    } else if (key == "tolerances") {
      apply_config_value(app, sub, "tol", v);
    } else if (v.is_object() && key != "params") {
      // command-specific section; applies only to the command being run
      if (!app.get_subcommand_no_throw(key)) throw usage("unknown config section '" + key + "'");
      if (sub && sub->get_name() == key) {
        for (const auto& [sk, sv] : v.items()) apply_config_value(app, sub, sk, sv);
      }
    } else {
      apply_config_value(app, sub, key, v);
    }
  }
}

inline std::vector<double> parse_ladder(const std::string& s) {
  auto v = to_doubles(s);
  if (v.size() < 2) throw usage("k ladder needs at least two values");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0) || (i > 0 && !(v[i] > v[i - 1]))) throw usage("k ladder must be positive and increasing");
  }
  return v;
}

}  // namespace detail

// --- commands ---------------------------------------------------------------

struct SpectrumArgs {
  int n_max = 10;
  bool include_classical = false;
  std::string nu_range = "-2,2";
  std::optional<double> classical_action;
};

inline int cmd_spectrum(const RunConfig& cfg, const SpectrumArgs& a, std::ostream& out, std::ostream& err) {
  detail::require_tabular(cfg, "spectrum");
  const auto well = detail::make_system(cfg);
  SpectrumRequest req;
  req.scheme = detail::parse_scheme(cfg.scheme);
  if (a.n_max < 0) throw detail::usage("--n-max must be non-negative");
  req.n_max = a.n_max;
  req.include_classical = a.include_classical;
  const auto nu = detail::to_doubles(a.nu_range);
  if (nu.size() != 2 || nu[0] > nu[1]) throw detail::usage("--nu-range needs lo,hi with lo <= hi");
  req.nu_min = static_cast<int>(nu[0]);
  req.nu_max = static_cast<int>(nu[1]);
  req.classical_action = a.classical_action;
  const auto lines = spectrum(well, req);
  for (const auto& l : lines) {
    if (l.degenerate) err << "note: level n=" << l.index << " has J = 0 (degenerate, no waveform)\n";
  }
  std::filesystem::path path;
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& l : lines) {
      arr.push_back({{"sector", l.sector}, {"n_or_nu", l.index}, {"J", l.action}, {"E_or_freq", l.value},
                     {"degenerate", l.degenerate}});
    }
    path = detail::write_json(cfg, "spectrum",
                              {{"system", detail::system_json(cfg)}, {"scheme", cfg.scheme}, {"lines", arr}});
  } else {
    std::ostringstream os;
    os << "sector,n_or_nu,J,E_or_freq\n";
    for (const auto& l : lines) {
      os << l.sector << ',' << l.index << ',' << fmt(l.action) << ',' << fmt(l.value) << '\n';
    }
    path = detail::output_path(cfg, "spectrum", "csv");
    detail::write_file(path, os.str());
  }
  out << path.string() << '\n';
  return kSuccess;
}

struct EigenfunctionArgs {
  int n = 0;
  std::string space = "config";
  std::string normalization = "stationary-phase";
  double window = 2.0;
};

inline int cmd_eigenfunction(const RunConfig& cfg, const EigenfunctionArgs& a, std::ostream& out) {
  detail::require_tabular(cfg, "eigenfunction");
  if (a.n < 0) throw detail::usage("--n must be non-negative");
  if (a.space != "config" && a.space != "phase") throw detail::usage("--space must be config or phase");
  const auto well = detail::make_system(cfg);
  const auto eig = quantize(well, detail::parse_scheme(cfg.scheme), a.n, detail::parse_normalization(a.normalization),
                            a.window);
  if (eig.degenerate()) throw detail::usage("the J = 0 state has no JWKB waveform");
  const auto& c = eig.chart;
  Axis xa;
  if (cfg.x_axis.empty()) {
    const double pad = 0.5 * (c.xi_plus - c.xi_minus);
    xa = Axis(c.xi_minus - pad, c.xi_plus + pad, 201);
  } else {
    xa = detail::parse_axis(cfg.x_axis, "x");
  }
  std::ostringstream os;
  json rows = json::array();
  if (a.space == "config") {
    os << "x,Re,Im,region_flag\n";
    for (std::size_t i = 0; i < xa.count; ++i) {
      const double x = xa[i];
      const auto v = eval_config_space(eig, x);
      os << fmt(x) << ',' << fmt(v.value.real()) << ',' << fmt(v.value.imag()) << ',' << detail::region_flag(v)
         << '\n';
      rows.push_back({{"x", x}, {"re", v.value.real()}, {"im", v.value.imag()}, {"region_flag", detail::region_flag(v)}});
    }
  } else {
    // theta holds the angle on the upper sheet in the allowed region and the
    // forbidden-region parameter outside it; both sheets share the forbidden value.
    os << "x,theta,Re_plus,Im_plus,Re_minus,Im_minus,region_flag\n";
    for (std::size_t i = 0; i < xa.count; ++i) {
      const double x = xa[i];
      const Region r = region_of(c, x);
      double theta;
      cplx up, dn;
      if (r == Region::Allowed) {
        theta = angle_of_position(c, x, Branch::Plus);
        up = eval_phase_space(eig, x, Branch::Plus);
        dn = eval_phase_space(eig, x, Branch::Minus);
      } else {
        theta = forbidden_angle(c, x);
        up = dn = eval_phase_space(eig, x, Branch::Forbidden);
      }
      const std::string flag = detail::region_flag({cplx{}, r, in_turning_window(eig, x)});
      os << fmt(x) << ',' << fmt(theta) << ',' << fmt(up.real()) << ',' << fmt(up.imag()) << ',' << fmt(dn.real())
         << ',' << fmt(dn.imag()) << ',' << flag << '\n';
      rows.push_back({{"x", x}, {"theta", theta}, {"re_plus", up.real()}, {"im_plus", up.imag()},
                      {"re_minus", dn.real()}, {"im_minus", dn.imag()}, {"region_flag", flag}});
    }
  }
  std::filesystem::path path;
  if (cfg.format == "json") {
    path = detail::write_json(cfg, "eigenfunction",
                              {{"system", detail::system_json(cfg)}, {"scheme", cfg.scheme}, {"n", a.n},
                               {"space", a.space}, {"energy", c.energy}, {"action", c.action},
                               {"a_plus", {eig.a_plus.real(), eig.a_plus.imag()}}, {"rows", rows}});
  } else {
    path = detail::output_path(cfg, "eigenfunction", "csv");
    detail::write_file(path, os.str());
  }
  out << path.string() << '\n';
  return kSuccess;
}

struct EvolveArgs {
  std::string kind;
  std::optional<double> t;
  std::string initial;
  double leak = -1;  // projection leak tolerance override
};

namespace detail {

inline RidgeKind ridge_for(const std::string& kind) {
  return !kind.empty() && parse_propagator_kind(kind) == PropagatorKind::KvHSemiclassical ? RidgeKind::Semiclassical
                                                                                         : RidgeKind::KvH;
}

/// Builds the initial grid and, when a time is given, evolves it.
inline std::pair<PhaseSpaceGrid, json> evolve(const RunConfig& cfg, const EvolveArgs& a, RidgeKind default_ridge) {
  const auto well = make_system(cfg);
  const auto spec = parse_initial(a.initial);
  auto g = build_initial(cfg, well, spec, default_ridge);
  json report = {{"system", system_json(cfg)}, {"initial", a.initial}, {"t0", g.t}};
  if (!a.t) return {std::move(g), report};
  if (a.kind.empty()) throw usage("--kind is required when --t is given");
  const auto kind = parse_propagator_kind(a.kind);
  PropagationStats st;
  const double n0 = inner_product_phase(g, g).real(), m0 = grid_mass(g);
  auto out = propagate(make_field(well), g, *a.t, kind, propagate_options(cfg), &st);
  report["kind"] = to_string(kind);
  report["t1"] = *a.t;
  report["norm_before"] = n0;
  report["norm_after"] = inner_product_phase(out, out).real();
  report["mass_before"] = m0;
  report["mass_after"] = grid_mass(out);
  report["max_det_deviation"] = st.max_det_deviation;
  report["nodes"] = st.nodes;
  return {std::move(out), report};
}

}  // namespace detail

inline int cmd_propagate(const RunConfig& cfg, const EvolveArgs& a, std::ostream& out) {
  auto [g, report] = detail::evolve(cfg, a, detail::ridge_for(a.kind));
  const auto path = detail::write_grid(cfg, "propagate", g);
  detail::write_json(cfg, "propagate_report", report);
  out << path.string() << '\n';
  return kSuccess;
}

inline int cmd_project(const RunConfig& cfg, const EvolveArgs& a, std::ostream& out) {
  auto [g, report] = detail::evolve(cfg, a, RidgeKind::Semiclassical);
  const double leak = a.leak > 0 ? a.leak : detail::parse_tolerances(cfg.tolerances).leak;
  const auto c = project_to_config(g, leak);
  const auto path = detail::write_grid(cfg, "project", c);
  out << path.string() << '\n';
  return kSuccess;
}

struct DensityArgs {
  std::string initial;
  std::string k_ladder;
  bool full = false;
};

namespace detail {

inline json density_summary(const DensityReport& r) {
  json w = json::object();
  for (const auto& [name, fn] : density_test_functions()) w[name] = r.max_abs_weighted(name);
  return {{"max_abs_integral", r.max_abs_integral()}, {"max_abs_weighted", w},
          {"imaginary_residue", r.imaginary_residue}};
}

}  // namespace detail

inline int cmd_density_check(const RunConfig& cfg, const DensityArgs& a, std::ostream& out) {
  const auto well = detail::make_system(cfg);
  const auto spec = detail::parse_initial(a.initial);
  const double leak = detail::parse_tolerances(cfg.tolerances).leak;
  const auto g = detail::build_initial(cfg, well, spec, RidgeKind::HamiltonJacobi);
  const auto r = physical_density(g, leak, cfg.threads);
  json report = {{"system", detail::system_json(cfg)}, {"initial", a.initial}, {"nx", r.nx}, {"np", r.np}};
  report.update(detail::density_summary(r));
  json xs = json::array();
  for (std::size_t i = 0; i < g.x_axis.count; ++i) xs.push_back(g.x_axis[i]);
  report["x"] = xs;
  report["integral_delta_f_per_x"] = r.integral_delta_f_per_x;
  report["weighted_integrals"] = r.weighted_integrals;
  if (a.full) {
    report["f_grid"] = r.f_grid;
    report["delta_f_grid"] = r.delta_f_grid;
  }
  if (!a.k_ladder.empty()) {
    if (spec.kind != detail::InitialSpec::Kind::Ridge) throw detail::usage("--k-ladder needs an eigen_ridge initial");
    json ladder = json::array();
    std::map<std::string, std::vector<LadderEntry>> series;
    for (double k : detail::parse_ladder(a.k_ladder)) {
      auto s = spec;
      s.numbers[1] = k;
      const auto rk = physical_density(detail::build_initial(cfg, well, s, RidgeKind::HamiltonJacobi), leak, cfg.threads);
      json e = {{"k", k}};
      e.update(detail::density_summary(rk));
      ladder.push_back(e);
      series["integral"].push_back({k, rk.max_abs_integral()});
      for (const auto& [name, fn] : density_test_functions()) series[name].push_back({k, rk.max_abs_weighted(name)});
    }
    json orders = json::object();
    for (const auto& [name, s] : series) orders[name] = convergence_orders(s);
    report["k_ladder"] = ladder;
    report["orders"] = orders;
  }
  const auto path = detail::write_json(cfg, "density_report", report);
  out << path.string() << '\n';
  return kSuccess;
}

struct CompareArgs {
  int n_min = 2, n_max = 6;
  double window = 2.0;
  bool gram = false;
};

inline int cmd_compare(const RunConfig& cfg, const CompareArgs& a, std::ostream& out) {
  detail::require_tabular(cfg, "compare");
  if (cfg.system != "ho") throw detail::usage("compare needs --system ho (the exact oracle)");
  if (a.n_min < 0 || a.n_max < a.n_min) throw detail::usage("need 0 <= --n-min <= --n-max");
  const auto well = detail::make_system(cfg);
  const auto params = detail::parse_kv(cfg.params);
  const double omega = params.count("omega") ? params.at("omega") : 1.0;
  const Scheme scheme = detail::parse_scheme(cfg.scheme);
  std::vector<ExactComparison> rows;
  for (int n = a.n_min; n <= a.n_max; ++n) rows.push_back(compare_to_exact(well, omega, n, scheme, a.window));
  std::ostringstream os;
  os << "n,scheme,relative_l2_error,energy,exact_energy,energy_error_ebk,energy_error_bs\n";
  json arr = json::array();
  for (const auto& r : rows) {
    os << r.n << ',' << to_string(r.scheme) << ',' << fmt(r.relative_l2_error) << ',' << fmt(r.energy) << ','
       << fmt(r.exact_energy) << ',' << fmt(r.energy_error_ebk) << ',' << fmt(r.energy_error_bs) << '\n';
    arr.push_back({{"n", r.n}, {"relative_l2_error", r.relative_l2_error}, {"energy", r.energy},
                   {"exact_energy", r.exact_energy}, {"energy_error_ebk", r.energy_error_ebk},
                   {"energy_error_bs", r.energy_error_bs}});
  }
  std::filesystem::path path;
  if (cfg.format == "json") {
    json doc = {{"system", detail::system_json(cfg)}, {"scheme", cfg.scheme}, {"window_multiplier", a.window},
                {"levels", arr}};
    if (a.gram) {
      std::vector<SemiclassicalEigenfunction> eigs;
      for (int n = a.n_min; n <= a.n_max; ++n) eigs.push_back(quantize(well, scheme, n, Normalization::UnitNormOutsideWindows, a.window));
      json re = json::array(), im = json::array();
      for (const auto& row : orthonormality_matrix(eigs)) {
        json rr = json::array(), ii = json::array();
        for (const auto& z : row) {
          rr.push_back(z.real());
          ii.push_back(z.imag());
        }
        re.push_back(rr);
        im.push_back(ii);
      }
      doc["gram"] = {{"re", re}, {"im", im}};
    }
    path = detail::write_json(cfg, "compare", doc);
  } else {
    if (a.gram) throw detail::usage("--gram needs --format json");
    path = detail::output_path(cfg, "compare", "csv");
    detail::write_file(path, os.str());
  }
  out << path.string() << '\n';
  return kSuccess;
}

// --- entry point -------------------------------------------------------------

/// Maps library failures onto the documented exit codes.
inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Io:
    case ErrorCode::AxisMismatch:
    case ErrorCode::ExponentSumInvalid:
      return kUsage;
    default:
      return kNumerical;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Semiclassical Koopman-van Hove toolkit"};
  app.name("kvh");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunConfig cfg;
  std::string config_path;
  app.add_option("--system", cfg.system, "ho | quartic");
  app.add_option("--params", cfg.params, "system parameters k=v,... (m, omega, lambda)");
  app.add_option("--hbar", cfg.hbar, "reduced Planck constant");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--format", cfg.format, "csv | json | bin")->check(CLI::IsMember({"csv", "json", "bin"}));
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
  app.add_option("--scheme", cfg.scheme, "bs | ebk")->check(CLI::IsMember({"bs", "ebk"}));
  app.add_option("--x-axis", cfg.x_axis, "x axis min,max,count");
  app.add_option("--p-axis", cfg.p_axis, "p axis min,max,count");
  app.add_option("--tol", cfg.tolerances, "tolerances k=v,... (rtol, atol, caustic, leak)");

  SpectrumArgs sa;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "semiclassical (and classical) spectrum");
  spectrum_cmd->add_option("--n-max", sa.n_max, "highest quantum number");
  spectrum_cmd->add_flag("--include-classical", sa.include_classical, "append classical-mode lines");
  spectrum_cmd->add_option("--nu-range", sa.nu_range, "classical mode range lo,hi");
  spectrum_cmd->add_option("--classical-action", sa.classical_action, "torus action of the classical lines");

  EigenfunctionArgs ea;
  auto* eigen_cmd = app.add_subcommand("eigenfunction", "JWKB eigenfunction table");
  eigen_cmd->add_option("--n", ea.n, "quantum number")->required();
  eigen_cmd->add_option("--space", ea.space, "config | phase");
  eigen_cmd->add_option("--normalization", ea.normalization, "stationary-phase | unit-amplitude | unit-norm");
  eigen_cmd->add_option("--window", ea.window, "turning-point window in Airy lengths");

  EvolveArgs pa;
  auto* prop_cmd = app.add_subcommand("propagate", "evolve a phase-space grid");
  prop_cmd->add_option("--kind", pa.kind, "scalar | lve | kvn | kvh-ps | kvh-sc")->required();
  prop_cmd->add_option("--t", pa.t, "final time")->required();
  prop_cmd->add_option("--initial", pa.initial, "gaussian:x,p,sx,sp[,chirp] | eigen_ridge:n,k[,kind] | file:path")
      ->required();

  EvolveArgs ja;
  auto* proj_cmd = app.add_subcommand("project", "project a phase-space state to configuration space");
  proj_cmd->add_option("--initial", ja.initial, "initial phase-space state")->required();
  proj_cmd->add_option("--kind", ja.kind, "propagator used when --t is given");
  proj_cmd->add_option("--t", ja.t, "evolve to this time before projecting");
  proj_cmd->add_option("--leak", ja.leak, "momentum-boundary decay tolerance relative to the peak");

  DensityArgs da;
  auto* dens_cmd = app.add_subcommand("density-check", "physical-density paradox diagnostics");
  dens_cmd->add_option("--initial", da.initial, "initial phase-space state")->required();
  dens_cmd->add_option("--k-ladder", da.k_ladder, "ridge indices k1,k2,... for a convergence ladder");
  dens_cmd->add_flag("--full", da.full, "include the full f and delta-f grids");

  CompareArgs ca;
  auto* cmp_cmd = app.add_subcommand("compare", "JWKB versus exact harmonic-oscillator states");
  cmp_cmd->add_option("--n-min", ca.n_min, "lowest quantum number");
  cmp_cmd->add_option("--n-max", ca.n_max, "highest quantum number");
  cmp_cmd->add_option("--window", ca.window, "turning-point window in Airy lengths");
  cmp_cmd->add_flag("--gram", ca.gram, "include the Gram matrix (json only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!config_path.empty()) detail::apply_config(app, sub, config_path);
    if (sub == spectrum_cmd) return cmd_spectrum(cfg, sa, out, err);
    if (sub == eigen_cmd) return cmd_eigenfunction(cfg, ea, out);
    if (sub == prop_cmd) return cmd_propagate(cfg, pa, out);
    if (sub == proj_cmd) return cmd_project(cfg, ja, out);
    if (sub == dens_cmd) return cmd_density_check(cfg, da, out);
    return cmd_compare(cfg, ca, out);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CausticError& e) {
    err << "error: " << e.what() << " (t = " << fmt(e.time()) << ")\n";
    return exit_code_for(e.code());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace kvh::cli
