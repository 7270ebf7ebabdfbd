#ifndef LATSPEC_SPECTRAL_HPP
#define LATSPEC_SPECTRAL_HPP

/// \file spectral.hpp
/// Discrete spectrum of H_v = Psi(L) + v delta_0 on Z^d.
///
/// E outside the band [Psi(0), Psi(2)] is an eigenvalue for exactly one
/// coupling, v = (2 pi)^d / J(E). At an edge the behaviour is fixed by the
/// finiteness of J and I there: J infinite means eigenvalues detach for every
/// coupling of that sign, J finite with I infinite is a resonance at the
/// threshold coupling, and I finite makes the edge energy itself an
/// eigenvalue (a mode) at threshold.

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latspec/errors.hpp"
#include "latspec/multiplier.hpp"
#include "latspec/torus_quadrature.hpp"

namespace latspec {

/// The energy is not an eigenvalue of H_v for any coupling.
class NotAnEigenvalue : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

enum class VerdictReason { OK, I_divergent, J_zero, InteriorEnergy };

inline std::string_view reason_name(VerdictReason r) {
  switch (r) {
  case VerdictReason::OK: return "OK";
  case VerdictReason::I_divergent: return "I_divergent";
  case VerdictReason::J_zero: return "J_zero";
  case VerdictReason::InteriorEnergy: return "InteriorEnergy";
  }
  return "unknown";
}

struct EigenvalueVerdict {
  bool is_eigenvalue = false;
  VerdictReason reason = VerdictReason::OK;
  std::optional<double> coupling;
};

enum class Behavior { Unconditional, Resonance, Mode };

inline std::string_view behavior_name(Behavior b) {
  switch (b) {
  case Behavior::Unconditional: return "Unconditional";
  case Behavior::Resonance: return "Resonance";
  case Behavior::Mode: return "Mode";
  }
  return "unknown";
}

struct EdgeBehavior {
  Edge edge = Edge::Top;
  Behavior behavior = Behavior::Unconditional;
  /// v2 (top) or v0 (bottom) when requested; 0 for unconditional edges.
  std::optional<double> threshold;
};

/// Threshold couplings v2 >= 0 >= v0; zero marks an edge with divergent J.
struct ThresholdReport {
  double v2 = 0.0;
  double v0 = 0.0;
  IntegralEstimate top;
  IntegralEstimate bottom;
};

/// One point (v, E) of the branch E_+(v) (Top) or E_-(v) (Bottom).
struct EigencurvePoint {
  double v = 0.0;
  double E = 0.0;
  EdgeOffset offset;
  /// The edge energy itself at threshold coupling (mode case).
  bool at_edge = false;
  /// False when the root lies below the smallest representable gap; E is
  /// then the edge energy plus that gap.
  bool resolved = true;
};

struct BehaviorRow {
  int d = 1;
  bool top_mode = false;
  bool top_resonance = false;
  bool bottom_mode = false;
  bool bottom_resonance = false;
  friend bool operator==(const BehaviorRow&, const BehaviorRow&) = default;
};

inline Edge edge_for_coupling(double v) { return v > 0.0 ? Edge::Top : Edge::Bottom; }

namespace detail {

inline Behavior behavior_from(const FinitenessVerdict& f) {
  if (!f.J_finite)
    return Behavior::Unconditional;
  return f.I_finite ? Behavior::Mode : Behavior::Resonance;
}

inline double checked_value(const IntegralEstimate& est, const char* what) {
  if (!est.finite || !est.value)
    throw NoCoupling(std::string(what) + " diverges");
  if (!est.converged)
    throw NumericFailure(std::string(what) + " did not converge (abs_error " +
                         std::to_string(est.abs_error) + ")");
  return *est.value;
}

/// Smallest gap the shell quadrature still resolves for this edge.
inline double min_resolvable_gap(const MultiplierSpec& spec, Edge edge, const QuadratureOptions& opt) {
  const double r = std::ldexp(pi, -(opt.max_shells - 30));
  const double t = half_angle_t(r);
  const double h = edge == Edge::Top ? spec.drop(t) : spec.rise(t);
  return std::max(1e-280, 100.0 * h);
}

} // namespace detail

/// Behaviour of the edge reached by couplings of one sign: v > 0 probes Psi(2)
/// with exponent b, v < 0 probes Psi(0) with exponent a.
inline EdgeBehavior classify_edge(const MultiplierSpec& spec, int d, Edge edge) {
  const auto ex = edge_exponents(spec);
  EdgeBehavior out;
  out.edge = edge;
  out.behavior = detail::behavior_from(edge_finiteness(edge_exponent(ex, edge), d));
  return out;
}

inline EdgeBehavior classify_edge(const MultiplierSpec& spec, int d, Edge edge,
                                  const ThresholdReport& th) {
  auto out = classify_edge(spec, d, edge);
  out.threshold = edge == Edge::Top ? th.v2 : th.v0;
  return out;
}

/// Edge table for explicit (a, b) exponents, d in [d_lo, d_hi].
inline std::vector<BehaviorRow> behavior_table(const EdgeExponents& ex, int d_lo, int d_hi) {
  if (d_lo > d_hi)
    throw std::invalid_argument("empty dimension range");
  std::vector<BehaviorRow> rows;
  for (int d = d_lo; d <= d_hi; ++d) {
    const auto top = detail::behavior_from(edge_finiteness(ex.b, d));
    const auto bot = detail::behavior_from(edge_finiteness(ex.a, d));
    rows.push_back({d, top == Behavior::Mode, top == Behavior::Resonance, bot == Behavior::Mode,
                    bot == Behavior::Resonance});
  }
  return rows;
}

inline std::vector<BehaviorRow> behavior_table(const MultiplierSpec& spec, int d_lo, int d_hi) {
  return behavior_table(edge_exponents(spec), d_lo, d_hi);
}

/// v2 = (2 pi)^d / J(Psi(2)) and v0 = (2 pi)^d / J(Psi(0)), zero where J diverges.
inline ThresholdReport thresholds(const MultiplierSpec& spec, int d, const QuadratureOptions& opt = {}) {
  const TorusDomain dom{d};
  ThresholdReport rep;
  rep.top = integral_J(spec, dom, EdgeOffset{Edge::Top, 0.0}, opt);
  rep.bottom = integral_J(spec, dom, EdgeOffset{Edge::Bottom, 0.0}, opt);
  if (rep.top.finite)
    rep.v2 = dom.volume() / detail::checked_value(rep.top, "J(Psi(2))");
  if (rep.bottom.finite)
    rep.v0 = dom.volume() / detail::checked_value(rep.bottom, "J(Psi(0))");
  return rep;
}

/// Threshold for one edge only; 0 when J diverges there.
inline double threshold_for(const MultiplierSpec& spec, int d, Edge edge,
                            const QuadratureOptions& opt = {}) {
  const TorusDomain dom{d};
  const auto est = integral_J(spec, dom, EdgeOffset{edge, 0.0}, opt);
  return est.finite ? dom.volume() / detail::checked_value(est, "edge J") : 0.0;
}

/// Eigenvalue test: E is an eigenvalue of some H_v iff I(E) < inf and J(E) != 0.
inline EigenvalueVerdict is_eigenvalue(const MultiplierSpec& spec, int d, const EdgeOffset& off,
                                       const QuadratureOptions& opt = {}) {
  const TorusDomain dom{d};
  dom.validate();
  EigenvalueVerdict out;
  if (off.gap == 0.0) {
    const auto fin = edge_finiteness(edge_exponent(edge_exponents(spec), off.edge), d);
    if (!fin.I_finite) {
      out.reason = VerdictReason::I_divergent;
      return out;
    }
  }
  const double j = detail::checked_value(integral_J(spec, dom, off, opt), "J(E)");
  if (j == 0.0) {
    out.reason = VerdictReason::J_zero;
    return out;
  }
  out.is_eigenvalue = true;
  out.coupling = dom.volume() / j;
  return out;
}

inline EigenvalueVerdict is_eigenvalue(const MultiplierSpec& spec, int d, double e,
                                       const QuadratureOptions& opt = {}) {
  spec.validate();
  if (spectral_window(spec).in_interior(e))
    return {false, VerdictReason::InteriorEnergy, std::nullopt};
  return is_eigenvalue(spec, d, locate_energy(spec, e), opt);
}

/// v = (2 pi)^d / J(E); also defined at an edge whenever J is finite there.
inline double coupling_for_energy(const MultiplierSpec& spec, int d, const EdgeOffset& off,
                                  const QuadratureOptions& opt = {}) {
  const TorusDomain dom{d};
  const double j = detail::checked_value(integral_J(spec, dom, off, opt), "J(E)");
  if (j == 0.0)
    throw NoCoupling("J(E) vanishes");
  return dom.volume() / j;
}

inline double coupling_for_energy(const MultiplierSpec& spec, int d, double e,
                                  const QuadratureOptions& opt = {}) {
  return coupling_for_energy(spec, d, locate_energy(spec, e), opt);
}

/// Branch energy for coupling v given the threshold of the matching edge
/// (v2 for v > 0, v0 for v < 0).
inline std::optional<EigencurvePoint> energy_for_coupling(const MultiplierSpec& spec, int d,
                                                          double v, double threshold,
                                                          const QuadratureOptions& opt = {}) {
  if (v == 0.0 || !std::isfinite(v))
    throw std::invalid_argument("coupling must be finite and nonzero");
  const Edge edge = edge_for_coupling(v);
  const double mag = std::abs(v);
  const double thr = std::abs(threshold);

  if (thr > 0.0) {
    if (mag < thr)
      return std::nullopt;
    if (mag == thr) {
      if (classify_edge(spec, d, edge).behavior != Behavior::Mode)
        return std::nullopt;
      const EdgeOffset off{edge, 0.0};
      return EigencurvePoint{v, energy_of(spec, off), off, true, true};
    }
  }

  // |coupling| grows strictly with the gap and |coupling(gap)| >= gap, so the
  // root lies in (0, |v|]. Solve in log(gap) to reach exponentially small gaps.
  const double gap_min = detail::min_resolvable_gap(spec, edge, opt);
  auto residual = [&](double log_gap) {
    return std::abs(coupling_for_energy(spec, d, EdgeOffset{edge, std::exp(log_gap)}, opt)) - mag;
  };
  const double lo = std::log(gap_min);
  const double hi = std::log(mag);
  EigencurvePoint pt;
  pt.v = v;
  if (hi <= lo) {
    pt.offset = {edge, gap_min};
    pt.resolved = false;
  } else {
    const double f_lo = residual(lo);
    if (f_lo >= 0.0) {
      pt.offset = {edge, gap_min};
      pt.resolved = f_lo == 0.0;
    } else {
      const double f_hi = residual(hi);
      if (f_hi < 0.0)
        throw NumericFailure("coupling bracket failed: |v(E)| < |v| at gap = |v|");
      std::uintmax_t iters = 200;
      const auto [a, b] = boost::math::tools::toms748_solve(
          residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(46), iters);
      if (iters >= 200)
        throw NumericFailure("coupling root search did not converge");
      pt.offset = {edge, std::exp(0.5 * (a + b))};
    }
  }
  pt.E = energy_of(spec, pt.offset);
  return pt;
}

/// E_+(v) for v > v2 or E_-(v) for v < v0; empty on the no-eigenvalue side.
inline std::optional<EigencurvePoint> energy_for_coupling(const MultiplierSpec& spec, int d,
                                                          double v, const QuadratureOptions& opt = {}) {
  if (v == 0.0 || !std::isfinite(v))
    throw std::invalid_argument("coupling must be finite and nonzero");
  const Edge edge = edge_for_coupling(v);
  double thr = 0.0;
  if (classify_edge(spec, d, edge).behavior != Behavior::Unconditional)
    thr = threshold_for(spec, d, edge, opt);
  return energy_for_coupling(spec, d, v, thr, opt);
}

/// Branch points for a list of couplings; thresholds are computed once.
inline std::vector<std::optional<EigencurvePoint>>
eigencurve(const MultiplierSpec& spec, int d, const std::vector<double>& couplings,
           const QuadratureOptions& opt = {}) {
  std::optional<double> v2, v0;
  std::vector<std::optional<EigencurvePoint>> out;
  for (double v : couplings) {
    if (v == 0.0) {
      out.push_back(std::nullopt);
      continue;
    }
    const Edge edge = edge_for_coupling(v);
    auto& thr = edge == Edge::Top ? v2 : v0;
    if (!thr) {
      thr = classify_edge(spec, d, edge).behavior == Behavior::Unconditional
                ? 0.0
                : threshold_for(spec, d, edge, opt);
    }
    out.push_back(energy_for_coupling(spec, d, v, *thr, opt));
  }
  return out;
}

using LatticeSite = std::vector<int>;

/// l2-normalized eigenvector amplitudes Phi(x) at the requested sites, with
/// the phase fixed by Phi(0) > 0.
inline std::vector<double> eigenvector_profile(const MultiplierSpec& spec, int d,
                                               const EdgeOffset& off,
                                               const std::vector<LatticeSite>& sites,
                                               const QuadratureOptions& opt = {}) {
  const TorusDomain dom{d};
  const auto verdict = is_eigenvalue(spec, d, off, opt);
  if (!verdict.is_eigenvalue)
    throw NotAnEigenvalue("energy is not an eigenvalue (" +
                          std::string(reason_name(verdict.reason)) + ")");
  const double norm2 = detail::checked_value(integral_I(spec, dom, off, opt), "I(E)");
  const double sign = off.edge == Edge::Top ? 1.0 : -1.0;
  const double scale = sign / std::sqrt(dom.volume() * norm2);
  std::vector<double> out;
  for (const auto& x : sites) {
    const auto c = resolvent_fourier_coefficient(spec, dom, off, x, opt);
    out.push_back(scale * detail::checked_value(c, "resolvent Fourier coefficient"));
  }
  return out;
}

inline std::vector<double> eigenvector_profile(const MultiplierSpec& spec, int d, double e,
                                               const std::vector<LatticeSite>& sites,
                                               const QuadratureOptions& opt = {}) {
  spec.validate();
  if (spectral_window(spec).in_interior(e))
    throw InteriorEnergy("energy lies inside the continuous spectrum");
  return eigenvector_profile(spec, d, locate_energy(spec, e), sites, opt);
}

} // namespace latspec

#endif // LATSPEC_SPECTRAL_HPP
