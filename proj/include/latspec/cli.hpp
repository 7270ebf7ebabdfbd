#ifndef LATSPEC_CLI_HPP
#define LATSPEC_CLI_HPP

/// \file cli.hpp
/// Command-line front end. `run` is the whole program minus process
/// plumbing so tests can drive it in-process.
///
/// Exit codes: 0 success, 2 usage or configuration error, 3 numeric
/// non-convergence, 4 oracle mismatch.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "latspec/io.hpp"
#include "latspec/multiplier.hpp"
#include "latspec/oracle.hpp"
#include "latspec/spectral.hpp"
#include "latspec/torus_quadrature.hpp"

namespace latspec::cli {

enum ExitCode : int { ok = 0, usage = 2, numeric = 3, oracle_mismatch = 4 };

/// Thrown for configuration problems detected after flag parsing.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string psi;
  std::string spec_file;
  double alpha = 1.0;
  double mass = 1.0;
  double beta = 2.0;
  double bcoef = 1.0;
  double drift = 0.0;
  std::vector<std::string> atoms;
  int dim = 1;
  QuadratureOptions quad;
  std::string format = "json";
  std::string out;
};

inline MultiplierSpec resolve_spec(const RunConfig& c) {
  if (c.psi.empty() == c.spec_file.empty())
    throw ConfigError("exactly one of --psi or --spec-file is required");
  if (!c.spec_file.empty()) {
    std::ifstream in(c.spec_file);
    if (!in)
      throw ConfigError("cannot read spec file '" + c.spec_file + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("spec file is not valid JSON: ") + e.what());
    }
    return multiplier_from_json(j);
  }
  switch (parse_kind(c.psi)) {
  case MultiplierKind::Identity: return MultiplierSpec::identity();
  case MultiplierKind::Fractional: return MultiplierSpec::fractional(c.alpha);
  case MultiplierKind::Relativistic: return MultiplierSpec::relativistic(c.alpha, c.mass);
  case MultiplierKind::JumpDiffusion: return MultiplierSpec::jump_diffusion(c.alpha, c.bcoef);
  case MultiplierKind::GeometricStable: return MultiplierSpec::geometric_stable(c.alpha);
  case MultiplierKind::HigherOrder: return MultiplierSpec::higher_order(c.beta);
  case MultiplierKind::Bernstein: {
    std::vector<LevyAtom> atoms;
    for (const auto& a : c.atoms) {
      const auto colon = a.find(':');
      if (colon == std::string::npos)
        throw ConfigError("--atom expects w:y, got '" + a + "'");
      try {
        atoms.push_back({std::stod(a.substr(0, colon)), std::stod(a.substr(colon + 1))});
      } catch (const std::exception&) {
        throw ConfigError("--atom expects numbers, got '" + a + "'");
      }
    }
    return MultiplierSpec::bernstein(c.drift, std::move(atoms));
  }
  }
  throw ConfigError("unknown multiplier");
}

/// "min:max:steps" (inclusive linspace) or a single number. The tokens v0 and
/// v2 stand for the threshold couplings and are substituted by the caller.
struct CouplingRange {
  std::string lo, hi;
  int steps = 1;
};

inline CouplingRange parse_range(const std::string& text) {
  CouplingRange r;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');)
    parts.push_back(item);
  if (parts.size() == 1) {
    r.lo = r.hi = parts[0];
    return r;
  }
  if (parts.size() != 3)
    throw ConfigError("--v expects min:max:steps");
  r.lo = parts[0];
  r.hi = parts[1];
  try {
    r.steps = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("--v steps must be an integer");
  }
  if (r.steps < 1)
    throw ConfigError("--v steps must be >= 1");
  return r;
}

inline std::pair<int, int> parse_dims(const std::string& text) {
  try {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
      const int d = std::stoi(text);
      return {d, d};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("--dims expects lo:hi");
  }
}

inline std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("--grid expects a comma separated list of integers");
    }
  }
  if (out.empty())
    throw ConfigError("--grid is empty");
  return out;
}

namespace detail {

inline nlohmann::json header(const MultiplierSpec& spec, int d) {
  return {{"schema", json_schema_version}, {"psi", to_json(spec)}, {"dim", d}};
}

inline std::string cmd_classify(const MultiplierSpec& spec, const RunConfig& c) {
  const auto th = thresholds(spec, c.dim, c.quad);
  const auto win = spectral_window(spec);
  const auto ex = edge_exponents(spec);
  const auto bottom = classify_edge(spec, c.dim, Edge::Bottom, th);
  const auto top = classify_edge(spec, c.dim, Edge::Top, th);
  if (c.format == "csv") {
    std::ostringstream os;
    os << "edge,behavior,threshold\n";
    for (const auto& b : {bottom, top})
      os << edge_name(b.edge) << ',' << behavior_name(b.behavior) << ','
         << format_number(*b.threshold) << '\n';
    return os.str();
  }
  auto j = header(spec, c.dim);
  j["window"] = {{"lo", win.lo}, {"hi", win.hi}};
  j["exponents"] = {{"a", ex.a}, {"b", ex.b}};
  j["v0"] = th.v0;
  j["v2"] = th.v2;
  j["bottom"] = to_json(bottom);
  j["top"] = to_json(top);
  return j.dump(2) + "\n";
}

inline std::string cmd_thresholds(const MultiplierSpec& spec, const RunConfig& c) {
  const auto th = thresholds(spec, c.dim, c.quad);
  if (c.format == "csv")
    return "v0,v2\n" + format_number(th.v0) + "," + format_number(th.v2) + "\n";
  auto j = header(spec, c.dim);
  j.update(to_json(th));
  return j.dump(2) + "\n";
}

inline std::string cmd_eigencurve(const MultiplierSpec& spec, const RunConfig& c,
                                  const std::string& range_text) {
  const auto range = parse_range(range_text);
  std::optional<ThresholdReport> th;
  auto value_of = [&](const std::string& tok) {
    if (tok == "v0" || tok == "v2") {
      if (!th)
        th = thresholds(spec, c.dim, c.quad);
      return tok == "v0" ? th->v0 : th->v2;
    }
    try {
      std::size_t used = 0;
      const double x = std::stod(tok, &used);
      if (used != tok.size())
        throw ConfigError("");
      return x;
    } catch (const std::exception&) {
      throw ConfigError("--v: cannot parse '" + tok + "'");
    }
  };
  const double lo = value_of(range.lo), hi = value_of(range.hi);
  std::vector<double> vs;
  for (int i = 0; i < range.steps; ++i)
    vs.push_back(range.steps == 1 ? lo : lo + (hi - lo) * i / (range.steps - 1));
  const auto pts = eigencurve(spec, c.dim, vs, c.quad);

  auto status = [](const std::optional<EigencurvePoint>& p) -> std::string {
    if (!p)
      return "none";
    if (p->at_edge)
      return "edge_mode";
    return p->resolved ? "eigenvalue" : "unresolved";
  };
  if (c.format == "csv") {
    std::ostringstream os;
    os << "v,E,status\n";
    for (std::size_t i = 0; i < vs.size(); ++i) {
      os << format_number(vs[i]) << ',';
      if (pts[i])
        os << format_number(pts[i]->E);
      os << ',' << status(pts[i]) << '\n';
    }
    return os.str();
  }
  auto j = header(spec, c.dim);
  j["bottom"] = std::string(behavior_name(classify_edge(spec, c.dim, Edge::Bottom).behavior));
  j["top"] = std::string(behavior_name(classify_edge(spec, c.dim, Edge::Top).behavior));
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    nlohmann::json p = pts[i] ? to_json(*pts[i]) : nlohmann::json{{"v", vs[i]}, {"E", nullptr}};
    p["status"] = status(pts[i]);
    arr.push_back(p);
  }
  j["points"] = arr;
  return j.dump(2) + "\n";
}

inline std::string cmd_table(const std::optional<MultiplierSpec>& spec, const RunConfig& c,
                             const std::string& dims, const std::vector<double>& exponents) {
  const auto [lo, hi] = parse_dims(dims);
  if (lo < 1 || hi > max_dimension || lo > hi)
    throw ConfigError("--dims must be a range inside 1..8");
  std::vector<BehaviorRow> rows;
  if (!exponents.empty()) {
    if (exponents.size() != 2 || !(exponents[0] > 0.0) || !(exponents[1] > 0.0))
      throw ConfigError("--exponents expects two positive numbers a,b");
    rows = behavior_table(EdgeExponents{exponents[0], exponents[1]}, lo, hi);
  } else {
    rows = behavior_table(*spec, lo, hi);
  }
  if (c.format == "csv")
    return behavior_table_csv(rows);
  nlohmann::json j{{"schema", json_schema_version}};
  if (spec)
    j["psi"] = to_json(*spec);
  else
    j["exponents"] = {{"a", exponents[0]}, {"b", exponents[1]}};
  j["rows"] = to_json(rows);
  return j.dump(2) + "\n";
}

inline std::string cmd_oracle(const MultiplierSpec& spec, const RunConfig& c, double v,
                              const std::string& grid_text, int& exit_code) {
  const auto grid = parse_grid(grid_text);
  std::ostringstream os;
  if (v == 0.0) {
    // Unperturbed operator: the spectrum is the set of band samples.
    nlohmann::json samples = nlohmann::json::array();
    if (c.format == "csv")
      os << "N,g,multiplicity\n";
    for (int n : grid) {
      const auto h = latspec::detail::histogram(build_grid_operator(spec, c.dim, n, 0.0).g_values);
      for (std::size_t i = 0; i < h.value.size(); ++i) {
        if (c.format == "csv")
          os << n << ',' << format_number(h.value[i]) << ',' << h.count[i] << '\n';
        else
          samples.push_back({{"N", n}, {"g", h.value[i]}, {"multiplicity", h.count[i]}});
      }
    }
    if (c.format == "csv")
      return os.str();
    auto j = header(spec, c.dim);
    j["v"] = 0.0;
    j["band_samples"] = samples;
    return j.dump(2) + "\n";
  }
  const auto st = convergence_study(spec, c.dim, v, grid, 1e-3, 1e-10, c.quad);
  if (!st.converged)
    exit_code = oracle_mismatch;
  if (c.format == "csv")
    return convergence_csv(st);
  auto j = header(spec, c.dim);
  j["v"] = v;
  j["reference"] = st.reference;
  j["bound_state"] = st.bound_state;
  j["converged"] = st.converged;
  auto arr = nlohmann::json::array();
  for (const auto& r : st.rows)
    arr.push_back({{"N", r.N}, {"E_N", r.E_N}, {"abs_error", r.abs_error}});
  j["rows"] = arr;
  return j.dump(2) + "\n";
}

inline std::string cmd_integral(const MultiplierSpec& spec, const RunConfig& c,
                                const std::string& which, const std::string& energy,
                                int& exit_code) {
  EdgeOffset off;
  if (energy == "top" || energy == "bottom") {
    off = {energy == "top" ? Edge::Top : Edge::Bottom, 0.0};
  } else {
    double e = 0.0;
    try {
      e = std::stod(energy);
    } catch (const std::exception&) {
      throw ConfigError("--energy expects a number, 'top' or 'bottom'");
    }
    off = locate_energy(spec, e);
  }
  const TorusDomain dom{c.dim};
  const auto est = which == "I" ? integral_I(spec, dom, off, c.quad) : integral_J(spec, dom, off, c.quad);
  if (est.finite && !est.converged)
    exit_code = numeric;
  if (c.format == "csv") {
    std::ostringstream os;
    os << "finite,value,abs_error\n"
       << (est.finite ? "true" : "false") << ','
       << (est.value ? format_number(*est.value) : std::string()) << ','
       << format_number(est.abs_error) << '\n';
    return os.str();
  }
  auto j = header(spec, c.dim);
  j["integral"] = which;
  j["E"] = energy_of(spec, off);
  j["estimate"] = to_json(est);
  return j.dump(2) + "\n";
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete spectrum and spectral-edge classification of non-local lattice "
               "Schroedinger operators Psi(L) + v delta_0"};
  app.require_subcommand(1);
  RunConfig c;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--psi", c.psi, "multiplier kind: identity, fractional, relativistic, "
                                    "jump_diffusion, geometric_stable, higher_order, bernstein");
    sub->add_option("--spec-file", c.spec_file, "multiplier as a JSON file");
    sub->add_option("--alpha", c.alpha, "stability index in (0, 2)");
    sub->add_option("--mass", c.mass, "relativistic mass m >= 0");
    sub->add_option("--beta", c.beta, "higher-order exponent > 1");
    sub->add_option("--bcoef", c.bcoef, "jump-diffusion coefficient > 0");
    sub->add_option("--drift", c.drift, "Bernstein drift >= 0");
    sub->add_option("--atom", c.atoms, "Bernstein Levy atom w:y (repeatable)");
    sub->add_option("--dim", c.dim, "lattice dimension 1..8");
    sub->add_option("--tol-int", c.quad.tol_exterior, "relative tolerance away from the edges");
    sub->add_option("--tol-edge", c.quad.tol_edge, "relative tolerance at the edges");
    sub->add_option("--max-shells", c.quad.max_shells, "refinement budget of the edge quadrature")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", c.out, "output path (default: standard output)");
  };

  auto* classify = app.add_subcommand("classify", "edge behaviour and thresholds");
  auto* thresh = app.add_subcommand("thresholds", "threshold couplings v0 and v2");
  auto* curve = app.add_subcommand("eigencurve", "branch energies E(v) over a coupling range");
  auto* table = app.add_subcommand("table", "mode/resonance table over dimensions");
  auto* oracle = app.add_subcommand("oracle", "finite-grid convergence check");
  auto* integral = app.add_subcommand("integral", "resolvent integral J(E) or I(E)");
  for (auto* s : {classify, thresh, curve, table, oracle, integral})
    add_common(s);

  std::string v_range = "1";
  curve->add_option("--v", v_range, "couplings min:max:steps (v0/v2 allowed)")->required();
  std::string dims = "1:5";
  std::vector<double> exponents;
  table->add_option("--dims", dims, "dimension range lo:hi");
  table->add_option("--exponents", exponents, "explicit edge exponents a,b")->delimiter(',');
  double oracle_v = 1.0;
  std::string grid = "16,64,256";
  oracle->add_option("--v", oracle_v, "coupling");
  oracle->add_option("--grid", grid, "points per axis, e.g. 16,64,256");
  std::string which = "J", energy;
  integral->add_option("--which", which, "J or I")->check(CLI::IsMember({"J", "I"}));
  integral->add_option("--energy", energy, "energy, or 'top' / 'bottom' for the edges")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return usage;
  }

  int code = ok;
  std::string text;
  try {
    if (c.dim < 1 || c.dim > max_dimension)
      throw ConfigError("--dim must lie in 1..8");
    std::optional<MultiplierSpec> spec;
    if (!(table->parsed() && !exponents.empty()))
      spec = resolve_spec(c);
    if (classify->parsed())
      text = detail::cmd_classify(*spec, c);
    else if (thresh->parsed())
      text = detail::cmd_thresholds(*spec, c);
    else if (curve->parsed())
      text = detail::cmd_eigencurve(*spec, c, v_range);
    else if (table->parsed())
      text = detail::cmd_table(spec, c, dims, exponents);
    else if (oracle->parsed())
      text = detail::cmd_oracle(*spec, c, oracle_v, grid, code);
    else
      text = detail::cmd_integral(*spec, c, which, energy, code);
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << "\n";
    return numeric;
  } catch (const NoCoupling& e) {
    err << "numeric failure: " << e.what() << "\n";
    return numeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }

  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << c.out << "'\n";
      return usage;
    }
    f << text;
  }
  return code;
}

} // namespace latspec::cli

#endif // LATSPEC_CLI_HPP
