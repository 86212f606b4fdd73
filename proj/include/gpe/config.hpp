#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gpe/classic.hpp"
#include "gpe/initial.hpp"

namespace gpe {

/// Malformed, missing or unknown configuration entry. `key()` names it.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what) : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct MultigridLevel {
  int points = 0;
  double tol = 0.0;
  friend bool operator==(const MultigridLevel&, const MultigridLevel&) = default;
};

/// Everything one run needs. `method` is pg, pcg or an imaginary-time scheme.
struct RunConfig {
  GridSpec grid;
  ModelParams model;
  std::string method = "pcg";
  SolverConfig solver;
  SchemeConfig scheme;
  std::optional<InitialKind> init;  ///< unset: Thomas-Fermi if eta > 0, else gaussian
  std::vector<MultigridLevel> multigrid;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  bool imaginary_time() const { return method != "pg" && method != "pcg"; }

  InitialKind initial_kind() const {
    if (init) return *init;
    return model.eta > 0.0 ? InitialKind::thomas_fermi : InitialKind::gaussian;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key, key + ": expected a number, got '" + v + "'");
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key, key + ": expected an integer, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, key + ": expected true or false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class F>
auto wrap_enum(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(key, key + ": " + e.what());
  }
}

inline bool is_method(const std::string& m) {
  if (m == "pg" || m == "pcg") return true;
  for (auto k : {SchemeKind::fe, SchemeKind::fe_lambda, SchemeKind::be, SchemeKind::be_lambda,
                 SchemeKind::cn, SchemeKind::cn_lambda})
    if (m == to_string(k)) return true;
  return false;
}

}  // namespace detail

/// Flat `key = value` pairs; `[section]` headers prefix following keys with
/// "section.". Later entries override earlier ones.
inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("", "line " + std::to_string(lineno) + ": bad section");
      section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(std::string_view(t).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    kv[key] = detail::trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

inline RunConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
  using namespace detail;
  for (const char* req : {"grid.d", "grid.L", "grid.M", "model.eta"})
    if (!kv.count(req)) throw ConfigError(req, std::string("missing required key ") + req);

  RunConfig c;
  std::optional<std::vector<int>> levels;
  std::optional<std::vector<double>> tols;
  static const char* axes[] = {"x", "y", "z"};

  for (const auto& [key, v] : kv) {
    auto num = [&] { return parse_double(key, v); };
    auto axis_of = [&](std::string_view prefix) -> int {
      for (int a = 0; a < 3; ++a)
        if (key == std::string(prefix) + axes[a]) return a;
      return -1;
    };

    if (key == "grid.d") c.grid.dim = parse_int<int>(key, v);
    else if (key == "grid.L") c.grid.half_width = num();
    else if (key == "grid.M") c.grid.points = parse_int<int>(key, v);
    else if (key == "model.eta") c.model.eta = num();
    else if (key == "model.omega") c.model.omega = num();
    else if (key == "potential.kind")
      c.model.potential.kind = wrap_enum(key, [&] { return parse_potential_kind(v); });
    else if (int a = axis_of("potential.gamma_"); a >= 0) c.model.potential.gamma[a] = num();
    else if (int a = axis_of("potential.kappa_"); a >= 0) c.model.potential.lattice_amplitude[a] = num();
    else if (int a = axis_of("potential.q_"); a >= 0) c.model.potential.lattice_wavenumber[a] = num();
    else if (key == "potential.alpha") c.model.potential.quartic_alpha = num();
    else if (key == "potential.kappa") c.model.potential.quartic_kappa = num();
    else if (key == "potential.lattice_argument") {
      if (v == "nu_squared") c.model.potential.lattice_argument = LatticeArgument::nu_squared;
      else if (v == "nu") c.model.potential.lattice_argument = LatticeArgument::nu;
      else throw ConfigError(key, key + ": expected nu_squared or nu");
    } else if (key == "solver.method") {
      if (!is_method(v)) throw ConfigError(key, key + ": unknown method '" + v + "'");
      c.method = v;
    } else if (key == "solver.precond")
      c.solver.precond = wrap_enum(key, [&] { return parse_preconditioner_kind(v); });
    else if (key == "solver.precond_shift")
      c.solver.shift = v == "adaptive" ? ShiftPolicy::adaptive() : ShiftPolicy::fixed_at(num());
    else if (key == "solver.stop")
      c.solver.stop = wrap_enum(key, [&] { return parse_stop_criterion(v); });
    else if (key == "solver.tol") c.solver.tol = num();
    else if (key == "solver.max_iter") c.solver.max_iter = parse_int<int>(key, v);
    else if (key == "solver.theta_default") c.solver.theta_default = num();
    else if (key == "solver.backtrack_factor") c.solver.backtrack_factor = num();
    else if (key == "solver.max_backtracks") c.solver.max_backtracks = parse_int<int>(key, v);
    else if (key == "solver.full_linesearch") c.solver.full_linesearch = parse_bool(key, v);
    else if (key == "solver.refresh_interval") c.solver.refresh_interval = parse_int<int>(key, v);
    else if (key == "solver.fixed_theta")
      c.solver.fixed_theta = v == "none" ? std::nullopt : std::optional<double>(num());
    else if (key == "solver.dt") c.scheme.dt = num();
    else if (key == "solver.inner_tol") c.scheme.inner_tol = num();
    else if (key == "solver.inner_max_iter") c.scheme.inner_max_iter = parse_int<int>(key, v);
    else if (key == "init.kind")
      c.init = v == "auto" ? std::nullopt
                           : std::optional<InitialKind>(wrap_enum(key, [&] { return parse_initial_kind(v); }));
    else if (key == "multigrid.levels") {
      std::vector<int> l;
      for (const auto& s : split_list(v)) l.push_back(parse_int<int>(key, s));
      levels = l;
    } else if (key == "multigrid.tols") {
      std::vector<double> t;
      for (const auto& s : split_list(v)) t.push_back(parse_double(key, s));
      tols = t;
    } else if (key == "output.dir") c.output_dir = v;
    else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, v);
    else throw ConfigError(key, "unknown key " + key);
  }

  if (c.imaginary_time()) c.scheme.kind = parse_scheme_kind(c.method);
  c.scheme.precond = c.solver.precond;
  c.scheme.shift = c.solver.shift.fixed;

  if (levels) {
    if (tols && tols->size() != levels->size())
      throw ConfigError("multigrid.tols", "multigrid.tols must match multigrid.levels in length");
    for (std::size_t i = 0; i < levels->size(); ++i) {
      const double t = tols ? (*tols)[i] : c.solver.tol;
      c.multigrid.push_back({(*levels)[i], t});
    }
  } else if (tols) {
    throw ConfigError("multigrid.levels", "multigrid.tols given without multigrid.levels");
  }

  // validation, reported against the offending key
  try {
    c.grid.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("grid", std::string("grid: ") + e.what());
  }
  try {
    c.model.potential.validate(c.grid.dim);
  } catch (const Error& e) {
    throw ConfigError("potential", std::string("potential: ") + e.what());
  }
  try {
    c.solver.validate();
    if (c.imaginary_time()) c.scheme.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("solver", std::string("solver: ") + e.what());
  }
  for (std::size_t i = 0; i < c.multigrid.size(); ++i) {
    const auto& lv = c.multigrid[i];
    if (lv.points < 4 || lv.points % 2 != 0)
      throw ConfigError("multigrid.levels", "multigrid levels must be even and >= 4");
    if (i > 0 && lv.points <= c.multigrid[i - 1].points)
      throw ConfigError("multigrid.levels", "multigrid levels must be strictly increasing");
    if (!(lv.tol > 0.0)) throw ConfigError("multigrid.tols", "multigrid tolerances must be positive");
  }
  return c;
}

inline RunConfig parse_config(std::string_view text) { return config_from_key_values(parse_key_values(text)); }

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
  using io::format_double;
  std::string out;
  auto put = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  static const char* axes[] = {"x", "y", "z"};
  const auto& p = c.model.potential;

  put("grid.d", std::to_string(c.grid.dim));
  put("grid.L", format_double(c.grid.half_width));
  put("grid.M", std::to_string(c.grid.points));
  put("model.eta", format_double(c.model.eta));
  put("model.omega", format_double(c.model.omega));
  put("potential.kind", std::string(to_string(p.kind)));
  for (int a = 0; a < 3; ++a) put(std::string("potential.gamma_") + axes[a], format_double(p.gamma[a]));
  for (int a = 0; a < 3; ++a)
    put(std::string("potential.kappa_") + axes[a], format_double(p.lattice_amplitude[a]));
  for (int a = 0; a < 3; ++a)
    put(std::string("potential.q_") + axes[a], format_double(p.lattice_wavenumber[a]));
  put("potential.alpha", format_double(p.quartic_alpha));
  put("potential.kappa", format_double(p.quartic_kappa));
  put("potential.lattice_argument", p.lattice_argument == LatticeArgument::nu ? "nu" : "nu_squared");
  put("solver.method", c.method);
  put("solver.precond", std::string(to_string(c.solver.precond)));
  put("solver.precond_shift", c.solver.shift.fixed ? format_double(*c.solver.shift.fixed) : "adaptive");
  put("solver.stop", std::string(to_string(c.solver.stop)));
  put("solver.tol", format_double(c.solver.tol));
  put("solver.max_iter", std::to_string(c.solver.max_iter));
  put("solver.theta_default", format_double(c.solver.theta_default));
  put("solver.backtrack_factor", format_double(c.solver.backtrack_factor));
  put("solver.max_backtracks", std::to_string(c.solver.max_backtracks));
  put("solver.full_linesearch", c.solver.full_linesearch ? "true" : "false");
  put("solver.refresh_interval", std::to_string(c.solver.refresh_interval));
  put("solver.fixed_theta", c.solver.fixed_theta ? format_double(*c.solver.fixed_theta) : "none");
  put("solver.dt", format_double(c.scheme.dt));
  put("solver.inner_tol", format_double(c.scheme.inner_tol));
  put("solver.inner_max_iter", std::to_string(c.scheme.inner_max_iter));
  put("init.kind", c.init ? std::string(to_string(*c.init)) : "auto");
  if (!c.multigrid.empty()) {
    std::string l, t;
    for (std::size_t i = 0; i < c.multigrid.size(); ++i) {
      if (i) {
        l += ',';
        t += ',';
      }
      l += std::to_string(c.multigrid[i].points);
      t += format_double(c.multigrid[i].tol);
    }
    put("multigrid.levels", l);
    put("multigrid.tols", t);
  }
  put("output.dir", c.output_dir);
  put("seed", std::to_string(c.seed));
  return out;
}

/// Applies `key=value` overrides on top of a parsed key/value map.
inline void apply_override(std::map<std::string, std::string>& kv, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("", "override must look like key=value: " + assignment);
  kv[detail::trim(std::string_view(assignment).substr(0, eq))] =
      detail::trim(std::string_view(assignment).substr(eq + 1));
}

}  // namespace gpe
