#ifndef LATSPEC_IO_HPP
#define LATSPEC_IO_HPP

/// \file io.hpp
/// JSON encodings of the library types and the fixed CSV layouts used by
/// the command-line tool. Field names are part of the external contract.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "latspec/multiplier.hpp"
#include "latspec/oracle.hpp"
#include "latspec/spectral.hpp"
#include "latspec/torus_quadrature.hpp"

namespace latspec {

inline constexpr int json_schema_version = 1;

inline nlohmann::json to_json(const MultiplierSpec& s) {
  nlohmann::json j;
  j["kind"] = std::string(kind_name(s.kind()));
  switch (s.kind()) {
  case MultiplierKind::Identity:
    break;
  case MultiplierKind::Fractional:
  case MultiplierKind::GeometricStable:
    j["alpha"] = s.alpha();
    break;
  case MultiplierKind::Relativistic:
    j["alpha"] = s.alpha();
    j["mass"] = s.mass();
    break;
  case MultiplierKind::JumpDiffusion:
    j["alpha"] = s.alpha();
    j["bcoef"] = s.bcoef();
    break;
  case MultiplierKind::HigherOrder:
    j["beta"] = s.beta();
    break;
  case MultiplierKind::Bernstein: {
    j["drift"] = s.drift();
    auto atoms = nlohmann::json::array();
    for (const auto& a : s.atoms())
      atoms.push_back({{"w", a.w}, {"y", a.y}});
    j["atoms"] = atoms;
    break;
  }
  }
  return j;
}

/// Inverse of to_json; missing or mistyped fields raise InvalidSpec.
inline MultiplierSpec multiplier_from_json(const nlohmann::json& j) {
  try {
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    auto num = [&](const char* key) { return j.at(key).get<double>(); };
    switch (kind) {
    case MultiplierKind::Identity: return MultiplierSpec::identity();
    case MultiplierKind::Fractional: return MultiplierSpec::fractional(num("alpha"));
    case MultiplierKind::GeometricStable: return MultiplierSpec::geometric_stable(num("alpha"));
    case MultiplierKind::Relativistic: return MultiplierSpec::relativistic(num("alpha"), num("mass"));
    case MultiplierKind::JumpDiffusion: return MultiplierSpec::jump_diffusion(num("alpha"), num("bcoef"));
    case MultiplierKind::HigherOrder: return MultiplierSpec::higher_order(num("beta"));
    case MultiplierKind::Bernstein: {
      std::vector<LevyAtom> atoms;
      for (const auto& a : j.value("atoms", nlohmann::json::array()))
        atoms.push_back({a.at("w").get<double>(), a.at("y").get<double>()});
      return MultiplierSpec::bernstein(j.value("drift", 0.0), std::move(atoms));
    }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("malformed multiplier JSON: ") + e.what());
  }
  throw InvalidSpec("unhandled multiplier kind");
}

inline nlohmann::json to_json(const IntegralEstimate& e) {
  nlohmann::json j;
  j["finite"] = e.finite;
  j["value"] = e.value ? nlohmann::json(*e.value) : nlohmann::json(nullptr);
  j["abs_error"] = e.abs_error;
  j["trace"] = e.trace;
  j["converged"] = e.converged;
  j["method"] = std::string(method_name(e.method));
  return j;
}

inline nlohmann::json to_json(const ThresholdReport& t) {
  return {{"schema", json_schema_version},
          {"v2", t.v2},
          {"v0", t.v0},
          {"top_integral", to_json(t.top)},
          {"bottom_integral", to_json(t.bottom)}};
}

inline nlohmann::json to_json(const EdgeBehavior& b) {
  nlohmann::json j{{"edge", std::string(edge_name(b.edge))},
                   {"behavior", std::string(behavior_name(b.behavior))}};
  j["threshold"] = b.threshold ? nlohmann::json(*b.threshold) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const EigencurvePoint& p) {
  return {{"v", p.v},
          {"E", p.E},
          {"edge", std::string(edge_name(p.offset.edge))},
          {"gap", p.offset.gap},
          {"at_edge", p.at_edge},
          {"resolved", p.resolved}};
}

/// Shortest decimal text that round-trips the double.
inline std::string format_number(double x) {
  return nlohmann::json(x).dump();
}

inline std::string behavior_table_csv(const std::vector<BehaviorRow>& rows) {
  std::ostringstream os;
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  os << "d,top_mode,top_resonance,bottom_mode,bottom_resonance\n";
  for (const auto& r : rows)
    os << r.d << ',' << yn(r.top_mode) << ',' << yn(r.top_resonance) << ',' << yn(r.bottom_mode)
       << ',' << yn(r.bottom_resonance) << '\n';
  return os.str();
}

inline nlohmann::json to_json(const std::vector<BehaviorRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"d", r.d},
                   {"top_mode", r.top_mode},
                   {"top_resonance", r.top_resonance},
                   {"bottom_mode", r.bottom_mode},
                   {"bottom_resonance", r.bottom_resonance}});
  return arr;
}

inline std::string convergence_csv(const ConvergenceStudy& st) {
  std::ostringstream os;
  os << "N,E_N,abs_error\n";
  for (const auto& r : st.rows)
    os << r.N << ',' << format_number(r.E_N) << ',' << format_number(r.abs_error) << '\n';
  return os.str();
}

} // namespace latspec

#endif // LATSPEC_IO_HPP
