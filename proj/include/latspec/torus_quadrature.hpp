#ifndef LATSPEC_TORUS_QUADRATURE_HPP
#define LATSPEC_TORUS_QUADRATURE_HPP

/// \file torus_quadrature.hpp
/// Resolvent integrals of the lattice symbol over the torus [-pi, pi]^d:
///
///   J(E) = int dtheta / (E - g(theta)),   I(E) = int dtheta / (E - g(theta))^2,
///   g(theta) = Psi((1/d) sum_j (cos theta_j + 1)).
///
/// Energies are handled relative to the nearest spectral edge. With
/// t(phi) = 2 sin^2(phi/2) and s = (1/d) sum_j t(phi_j) the integrand becomes
///
///   above the band:  E - g = gap + drop(s),     phi = theta,
///   below the band:  E - g = -(gap + rise(s)),  phi = theta - pi,
///
/// so both edges sit at phi = 0 and gaps far below machine epsilon relative to
/// Psi(2) stay representable. The integrand depends on phi only through the
/// symmetric sum s, which the quadrature exploits by enumerating multisets of
/// tensor-rule nodes instead of the full tensor grid.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latspec/errors.hpp"
#include "latspec/multiplier.hpp"

namespace latspec {

inline constexpr double pi = std::numbers::pi;
inline constexpr int max_dimension = 8;

/// The d-torus [-pi, pi]^d with opposite faces identified.
struct TorusDomain {
  int dim = 1;

  void validate() const {
    if (dim < 1 || dim > max_dimension)
      throw std::invalid_argument("torus dimension must lie in 1.." + std::to_string(max_dimension));
  }

  /// (2 pi)^d
  double volume() const { return std::pow(2.0 * pi, dim); }
};

/// g(theta) = Psi((1/d) sum_j (cos theta_j + 1)).
inline double symbol_g(const MultiplierSpec& spec, std::span<const double> theta) {
  if (theta.empty())
    throw std::invalid_argument("symbol_g: empty angle vector");
  double x = 0.0;
  for (double th : theta)
    x += std::cos(th) + 1.0;
  x /= static_cast<double>(theta.size());
  return spec(std::clamp(x, 0.0, 2.0));
}

enum class Edge { Bottom, Top };

inline std::string_view edge_name(Edge e) { return e == Edge::Top ? "top" : "bottom"; }

/// A non-interior energy written as E = Psi(2) + gap (Top) or E = Psi(0) - gap (Bottom).
struct EdgeOffset {
  Edge edge = Edge::Top;
  double gap = 0.0;
};

inline double energy_of(const MultiplierSpec& spec, const EdgeOffset& off) {
  return off.edge == Edge::Top ? spec(2.0) + off.gap : spec.at_zero() - off.gap;
}

/// Splits E into edge + gap; throws InteriorEnergy for E in (Psi(0), Psi(2)).
inline EdgeOffset locate_energy(const MultiplierSpec& spec, double e) {
  if (!std::isfinite(e))
    throw std::invalid_argument("energy must be finite");
  const double lo = spec.at_zero();
  const double hi = spec(2.0);
  if (e >= hi)
    return {Edge::Top, e - hi};
  if (e <= lo)
    return {Edge::Bottom, lo - e};
  throw InteriorEnergy("energy " + std::to_string(e) + " lies inside the continuous spectrum [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

enum class QuadratureMethod { PeriodicRectangle, GradedShells, Divergent };

inline std::string_view method_name(QuadratureMethod m) {
  switch (m) {
  case QuadratureMethod::PeriodicRectangle: return "periodic_rectangle";
  case QuadratureMethod::GradedShells: return "graded_shells";
  case QuadratureMethod::Divergent: return "divergent";
  }
  return "unknown";
}

/// Value and provenance of one resolvent integral.
///
/// For finite integrals `trace` holds the successive approximations and
/// `abs_error` is the difference of the last two. For divergent edge integrals
/// `value` is empty and `trace` holds the growing partial sums over dyadic
/// shells around the singular point.
struct IntegralEstimate {
  bool finite = false;
  std::optional<double> value;
  double abs_error = 0.0;
  std::vector<double> trace;
  bool converged = false;
  QuadratureMethod method = QuadratureMethod::GradedShells;
};

/// Radial integrability of 1/(E - g) and 1/(E - g)^2 at an edge where
/// |E - g| ~ |theta|^{2e}: J finite iff d > 2e, I finite iff d > 4e.
struct FinitenessVerdict {
  bool I_finite = false;
  bool J_finite = false;
  double exponent_used = 0.0;
  std::string criterion;
};

inline FinitenessVerdict edge_finiteness(double e, int d) {
  if (!(e > 0.0))
    throw std::invalid_argument("edge exponent must be positive");
  TorusDomain{d}.validate();
  FinitenessVerdict v;
  v.exponent_used = e;
  v.J_finite = static_cast<double>(d) > 2.0 * e;
  v.I_finite = static_cast<double>(d) > 4.0 * e;
  v.criterion = "J finite iff d > 2e; I finite iff d > 4e";
  return v;
}

/// Exponent governing the edge: a at Psi(0), b at Psi(2).
inline double edge_exponent(const EdgeExponents& ex, Edge edge) {
  return edge == Edge::Top ? ex.b : ex.a;
}

struct QuadratureOptions {
  double tol_exterior = 1e-8;
  double tol_edge = 1e-4;
  int min_axis_points = 8;
  int max_axis_points = 1024;
  /// Symmetric cell evaluations allowed for one rectangle-rule level.
  double max_cells = 4.0e6;
  /// Gauss-Legendre points per interval; 0 picks by dimension.
  int gauss_order = 0;
  int max_shells = 500;
  /// Shells summed when tracing a divergent edge integral.
  int divergent_shells = 40;
  /// Dyadic levels toward the far corner, where Psi may be non-smooth.
  int far_levels = 20;
};

/// True when Psi is analytic on [0, 2], so the periodic rectangle rule
/// converges geometrically for exterior energies.
inline bool is_smooth_multiplier(const MultiplierSpec& spec) {
  switch (spec.kind()) {
  case MultiplierKind::Identity:
  case MultiplierKind::Bernstein:
    return true;
  case MultiplierKind::Relativistic:
    return spec.mass() > 0.0;
  case MultiplierKind::HigherOrder:
    return spec.beta() == std::floor(spec.beta());
  default:
    return false;
  }
}

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct GaussRule {
  std::vector<double> x; ///< nodes on [-1, 1]
  std::vector<double> w;
};

/// Gauss-Legendre rule by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  const auto un = static_cast<unsigned>(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(un, z);
      const double pm = std::legendre(un - 1, z);
      dp = n * (z * p - pm) / (z * z - 1.0);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    const double pm = std::legendre(un - 1, z);
    dp = n * (z * std::legendre(un, z) - pm) / (z * z - 1.0);
    r.x[i] = -z;
    r.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

inline int default_gauss_order(int d) { return d <= 4 ? 10 : 8; }

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

/// t(phi) = 2 sin^2(phi / 2) = 1 - cos(phi), accurate near phi = 0.
inline double half_angle_t(double phi) {
  const double s = std::sin(0.5 * phi);
  return 2.0 * s * s;
}

/// Node values t(phi) and weights of a Gauss rule mapped onto [lo, hi].
struct AxisNodes {
  std::vector<double> t;
  std::vector<double> w;
};

inline AxisNodes map_rule(const GaussRule& rule, double lo, double hi) {
  AxisNodes out;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    out.t.push_back(half_angle_t(mid + half * rule.x[i]));
    out.w.push_back(half * rule.w[i]);
  }
  return out;
}

struct WeightedSum {
  double t;
  double w;
};

/// All multisets of size m drawn from the axis nodes, each reduced to its
/// t-sum and its tensor weight times the number of orderings.
inline std::vector<WeightedSum> multisets(const AxisNodes& nodes, int m) {
  std::vector<WeightedSum> out;
  const int p = static_cast<int>(nodes.t.size());
  // Factorials up to max_dimension are exact in double.
  std::array<double, max_dimension + 1> fact{};
  fact[0] = 1.0;
  for (int i = 1; i <= max_dimension; ++i)
    fact[i] = fact[i - 1] * i;
  auto rec = [&](auto&& self, int start, int remaining, double tsum, double wprod,
                 double inv_fact) -> void {
    if (remaining == 0) {
      out.push_back({tsum, wprod * inv_fact * fact[m]});
      return;
    }
    if (start == p)
      return;
    double tpow = 0.0, wpow = 1.0;
    for (int c = 0; c <= remaining; ++c) {
      if (c > 0) {
        tpow += nodes.t[start];
        wpow *= nodes.w[start];
      }
      if (start == p - 1 && c != remaining)
        continue;
      self(self, start + 1, remaining - c, tsum + tpow, wprod * wpow, inv_fact / fact[c]);
    }
  };
  rec(rec, 0, m, 0.0, 1.0, 1.0);
  return out;
}

/// Integrand as a function of the t-sum, for one edge and one power.
struct ResolventKernel {
  const MultiplierSpec* spec;
  Edge edge;
  double gap;
  int dim;
  int power; ///< 1 for J, 2 for I

  double height(double s) const {
    s = std::min(s, 2.0);
    return edge == Edge::Top ? spec->drop(s) : spec->rise(s);
  }

  double operator()(double tsum) const {
    const double inv = 1.0 / (gap + height(tsum / dim));
    if (power == 2)
      return inv * inv;
    return edge == Edge::Top ? inv : -inv;
  }
};

/// Integral over the C(d, m) boxes A^m x B^{d-m} (all axis assignments).
template <class Kernel>
double symmetric_box(const Kernel& f, int d, const AxisNodes& a, int m, const AxisNodes& b) {
  const auto ga = multisets(a, m);
  const auto gb = multisets(b, d - m);
  CompensatedSum acc;
  for (const auto& x : ga) {
    CompensatedSum inner;
    for (const auto& y : gb)
      inner.add(y.w * f(x.t + y.t));
    acc.add(x.w * inner.value());
  }
  return binomial(d, m) * acc.value();
}

/// Everything in [0, pi]^d except the origin cube [0, pi/2]^d: the mixed
/// cubes plus the far cube graded toward (pi, ..., pi).
template <class Kernel>
double bulk_region(const Kernel& f, int d, const GaussRule& rule, int far_levels) {
  CompensatedSum acc;
  const auto low = map_rule(rule, 0.0, pi / 2);
  const auto high = map_rule(rule, pi / 2, pi);
  for (int m = 1; m < d; ++m)
    acc.add(symmetric_box(f, d, high, m, low));
  double h = pi / 2;
  for (int j = 1; j <= far_levels; ++j) {
    h *= 0.5;
    const auto outer = map_rule(rule, pi - 2 * h, pi - h);
    const auto inner = map_rule(rule, pi - h, pi);
    for (int m = 1; m <= d; ++m)
      acc.add(symmetric_box(f, d, outer, m, inner));
  }
  acc.add(symmetric_box(f, d, map_rule(rule, pi - h, pi), d, AxisNodes{}));
  return acc.value();
}

/// Shell k >= 1 around the origin: [0, 2h]^d minus [0, h]^d, h = pi 2^{-k-1}.
template <class Kernel>
double origin_shell(const Kernel& f, int d, const GaussRule& rule, int k) {
  const double h = std::ldexp(pi, -k - 1);
  const auto outer = map_rule(rule, h, 2 * h);
  const auto inner = map_rule(rule, 0.0, h);
  CompensatedSum acc;
  for (int m = 1; m <= d; ++m)
    acc.add(symmetric_box(f, d, outer, m, inner));
  return acc.value();
}

/// Level of the periodic rectangle rule with N points per axis on the grid
/// phi_k = 2 pi k / N, folded by the reflection and permutation symmetries.
template <class Kernel>
double rectangle_level(const Kernel& f, int d, int n) {
  AxisNodes nodes;
  const double h = 2.0 * pi / n;
  for (int k = 0; k <= n / 2; ++k) {
    nodes.t.push_back(half_angle_t(h * k));
    nodes.w.push_back((k == 0 || k == n / 2) ? h : 2.0 * h);
  }
  CompensatedSum acc;
  for (const auto& c : multisets(nodes, d))
    acc.add(c.w * f(c.t));
  return acc.value();
}

inline double rectangle_cells(int d, int n) { return binomial(n / 2 + d, d); }

/// First shell index whose outer radius is deep inside the region where the
/// gap dominates the integrand height.
inline int gap_resolved_shell(const ResolventKernel& f, int max_shells) {
  if (f.gap <= 0.0)
    return 1;
  for (int k = 1; k <= max_shells; ++k) {
    const double t = half_angle_t(std::ldexp(pi, -k));
    if (f.height(t) <= 0.01 * f.gap)
      return k;
  }
  return max_shells + 1;
}

/// Sums the bulk plus dyadic shells toward the singular point, extrapolating
/// the geometric tail of the shell contributions. `shell(k)` returns the
/// contribution of shell k >= 1; convergence is only accepted from shell
/// `first_check` on.
template <class Shell>
IntegralEstimate graded_sum(double bulk, Shell&& shell, int first_check,
                            const QuadratureOptions& opt, double tol, bool finite_expected) {
  IntegralEstimate est;
  est.method = finite_expected ? QuadratureMethod::GradedShells : QuadratureMethod::Divergent;
  est.finite = finite_expected;

  CompensatedSum partial;
  partial.add(bulk);

  if (!finite_expected) {
    for (int k = 1; k <= opt.divergent_shells; ++k) {
      partial.add(shell(k));
      est.trace.push_back(partial.value());
    }
    return est;
  }

  first_check = std::max(6, first_check);
  double prev_c = 0.0, prev_est = 0.0;
  int settled = 0;
  for (int k = 1; k <= opt.max_shells; ++k) {
    const double c = shell(k);
    partial.add(c);
    double tail = 0.0;
    bool extrapolable = false;
    if (k >= 2 && c == 0.0) {
      // Shell weights underflowed; every later shell is smaller still.
      extrapolable = true;
    } else if (k >= 2 && prev_c != 0.0) {
      const double rho = c / prev_c;
      if (rho >= 0.0 && rho < 0.95) {
        tail = c * rho / (1.0 - rho);
        extrapolable = true;
      }
    }
    const double cur = partial.value() + tail;
    est.trace.push_back(cur);
    if (k >= 2) {
      est.abs_error = std::abs(cur - prev_est);
      // Shells outside the gap region decay no faster than inside it, so a
      // negligible extrapolated tail bounds the remainder before first_check.
      const bool negligible = std::abs(c) + std::abs(tail) <= 1e-3 * tol * std::abs(cur);
      if (extrapolable && (k >= first_check || (k >= 6 && negligible)) &&
          est.abs_error <= tol * std::abs(cur)) {
        if (++settled >= 2) {
          est.converged = true;
          break;
        }
      } else {
        settled = 0;
      }
    }
    prev_c = c;
    prev_est = cur;
  }
  est.value = est.trace.back();
  return est;
}

inline GaussRule rule_for(int d, const QuadratureOptions& opt) {
  return gauss_legendre(opt.gauss_order > 0 ? opt.gauss_order : default_gauss_order(d));
}

inline IntegralEstimate graded_integral(const ResolventKernel& f, const QuadratureOptions& opt,
                                        double tol, bool finite_expected) {
  const int d = f.dim;
  const GaussRule rule = rule_for(d, opt);
  const double sym = std::ldexp(1.0, d); // reflections phi_j -> -phi_j
  return graded_sum(
      sym * bulk_region(f, d, rule, opt.far_levels),
      [&](int k) { return sym * origin_shell(f, d, rule, k); },
      gap_resolved_shell(f, opt.max_shells), opt, tol, finite_expected);
}

/// Periodic rectangle rule with per-axis doubling; empty when the cell
/// budget runs out before the relative change drops below tol.
inline std::optional<IntegralEstimate> rectangle_integral(const ResolventKernel& f,
                                                          const QuadratureOptions& opt, double tol) {
  IntegralEstimate est;
  est.method = QuadratureMethod::PeriodicRectangle;
  est.finite = true;
  for (int n = opt.min_axis_points; n <= opt.max_axis_points; n *= 2) {
    if (rectangle_cells(f.dim, n) > opt.max_cells)
      return std::nullopt;
    est.trace.push_back(rectangle_level(f, f.dim, n));
    const std::size_t m = est.trace.size();
    if (m >= 2) {
      est.abs_error = std::abs(est.trace[m - 1] - est.trace[m - 2]);
      if (est.abs_error <= tol * std::abs(est.trace[m - 1])) {
        est.converged = true;
        est.value = est.trace.back();
        return est;
      }
    }
  }
  return std::nullopt;
}

/// Rough radius below which the gap dominates; used to skip the rectangle
/// rule when its grid cannot resolve the near-edge peak.
inline double gap_radius(const ResolventKernel& f) {
  double r = pi;
  for (int k = 0; k < 2000 && r > 0.0; ++k) {
    if (f.height(half_angle_t(r)) <= f.gap)
      return r;
    r *= 0.5;
  }
  return 0.0;
}

inline IntegralEstimate resolvent_integral(const MultiplierSpec& spec, const TorusDomain& dom,
                                           const EdgeOffset& off, int power,
                                           const QuadratureOptions& opt) {
  spec.validate();
  dom.validate();
  if (!(off.gap >= 0.0) || !std::isfinite(off.gap))
    throw std::invalid_argument("edge offset must be a finite non-negative gap");
  const ResolventKernel f{&spec, off.edge, off.gap, dom.dim, power};

  if (off.gap == 0.0) {
    const auto verdict = edge_finiteness(edge_exponent(edge_exponents(spec), off.edge), dom.dim);
    const bool finite = power == 1 ? verdict.J_finite : verdict.I_finite;
    return graded_integral(f, opt, opt.tol_edge, finite);
  }

  if (is_smooth_multiplier(spec)) {
    // Geometric convergence needs roughly N * r_gap > 25 points per axis.
    int n_max = opt.min_axis_points;
    while (n_max * 2 <= opt.max_axis_points && rectangle_cells(dom.dim, n_max * 2) <= opt.max_cells)
      n_max *= 2;
    if (gap_radius(f) * n_max > 25.0) {
      if (auto est = rectangle_integral(f, opt, opt.tol_exterior))
        return *est;
    }
  }
  auto est = graded_integral(f, opt, opt.tol_exterior, true);
  return est;
}

} // namespace detail

/// J(E) = int_T dtheta / (E - g). Throws InteriorEnergy inside the band.
inline IntegralEstimate integral_J(const MultiplierSpec& spec, const TorusDomain& dom,
                                   const EdgeOffset& off, const QuadratureOptions& opt = {}) {
  return detail::resolvent_integral(spec, dom, off, 1, opt);
}

inline IntegralEstimate integral_J(const MultiplierSpec& spec, const TorusDomain& dom, double e,
                                   const QuadratureOptions& opt = {}) {
  return integral_J(spec, dom, locate_energy(spec, e), opt);
}

/// I(E) = int_T dtheta / (E - g)^2. Throws InteriorEnergy inside the band.
inline IntegralEstimate integral_I(const MultiplierSpec& spec, const TorusDomain& dom,
                                   const EdgeOffset& off, const QuadratureOptions& opt = {}) {
  return detail::resolvent_integral(spec, dom, off, 2, opt);
}

inline IntegralEstimate integral_I(const MultiplierSpec& spec, const TorusDomain& dom, double e,
                                   const QuadratureOptions& opt = {}) {
  return integral_I(spec, dom, locate_energy(spec, e), opt);
}

namespace detail {

/// Axis nodes carrying the separable factor cos(x_j phi) for one site component.
struct WeightedAxis {
  std::vector<double> t;
  std::vector<double> w; ///< quadrature weight times the cosine factor
};

inline WeightedAxis fourier_axis(const GaussRule& rule, double lo, double hi, int site) {
  // At most half a period of cos(site * phi) per sub-interval.
  const int nsub = 1 + static_cast<int>(std::floor(std::abs(site) * (hi - lo) / pi));
  WeightedAxis out;
  const double len = (hi - lo) / nsub;
  for (int q = 0; q < nsub; ++q) {
    const double a = lo + q * len;
    const double mid = a + 0.5 * len, half = 0.5 * len;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double phi = mid + half * rule.x[i];
      out.t.push_back(half_angle_t(phi));
      out.w.push_back(half * rule.w[i] * std::cos(site * phi));
    }
  }
  return out;
}

/// Integral of prod_j cos(x_j phi_j) f(sum_j t_j) over all C(d, m) boxes
/// A^m x B^{d-m}; the site breaks permutation symmetry so each axis
/// assignment is summed over its full tensor grid.
template <class Kernel>
double fourier_box(const Kernel& f, std::span<const int> site, const GaussRule& rule,
                   std::array<double, 2> a, int m, std::array<double, 2> b) {
  const int d = static_cast<int>(site.size());
  CompensatedSum acc;
  std::vector<WeightedAxis> axes(d);
  std::vector<std::size_t> idx(d);
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    if (std::popcount(mask) != m)
      continue;
    for (int j = 0; j < d; ++j) {
      const auto& iv = (mask >> j) & 1u ? a : b;
      axes[j] = fourier_axis(rule, iv[0], iv[1], site[j]);
    }
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double tsum = 0.0, w = 1.0;
      for (int j = 0; j < d; ++j) {
        tsum += axes[j].t[idx[j]];
        w *= axes[j].w[idx[j]];
      }
      acc.add(w * f(tsum));
      int j = 0;
      while (j < d && ++idx[j] == axes[j].t.size())
        idx[j++] = 0;
      if (j == d)
        break;
    }
  }
  return acc.value();
}

} // namespace detail

/// Fourier coefficient of the resolvent symbol at lattice site x:
/// int_T cos(x . theta) / (E - g(theta)) dtheta. Site 0 gives J(E).
inline IntegralEstimate resolvent_fourier_coefficient(const MultiplierSpec& spec,
                                                      const TorusDomain& dom,
                                                      const EdgeOffset& off,
                                                      std::span<const int> site,
                                                      const QuadratureOptions& opt = {}) {
  spec.validate();
  dom.validate();
  if (static_cast<int>(site.size()) != dom.dim)
    throw std::invalid_argument("site dimension does not match the torus dimension");
  if (!(off.gap >= 0.0) || !std::isfinite(off.gap))
    throw std::invalid_argument("edge offset must be a finite non-negative gap");
  const int d = dom.dim;
  const detail::ResolventKernel f{&spec, off.edge, off.gap, d, 1};
  const bool finite =
      off.gap > 0.0 ||
      edge_finiteness(edge_exponent(edge_exponents(spec), off.edge), d).J_finite;

  // theta = phi + pi below the band flips the sign of cos(x_j theta_j) for odd x_j.
  double parity = std::ldexp(1.0, d);
  if (off.edge == Edge::Bottom) {
    for (int x : site)
      if (x % 2 != 0)
        parity = -parity;
  }
  const auto rule = detail::rule_for(d, opt);

  detail::CompensatedSum bulk;
  for (int m = 1; m < d; ++m)
    bulk.add(detail::fourier_box(f, site, rule, {pi / 2, pi}, m, {0.0, pi / 2}));
  double h = pi / 2;
  for (int j = 1; j <= opt.far_levels; ++j) {
    h *= 0.5;
    for (int m = 1; m <= d; ++m)
      bulk.add(detail::fourier_box(f, site, rule, {pi - 2 * h, pi - h}, m, {pi - h, pi}));
  }
  bulk.add(detail::fourier_box(f, site, rule, {pi - h, pi}, d, {pi - h, pi}));

  auto shell = [&](int k) {
    const double hk = std::ldexp(pi, -k - 1);
    detail::CompensatedSum acc;
    for (int m = 1; m <= d; ++m)
      acc.add(detail::fourier_box(f, site, rule, {hk, 2 * hk}, m, {0.0, hk}));
    return parity * acc.value();
  };
  const double tol = off.gap > 0.0 ? opt.tol_exterior : opt.tol_edge;
  return detail::graded_sum(parity * bulk.value(), shell,
                            detail::gap_resolved_shell(f, opt.max_shells), opt, tol, finite);
}

/// Divergence trace of I(E) for an interior energy: level l integrates
/// min(1/(E - g)^2, 1/eps_l^2) with eps_l = width / 2^(l+2) on N = 32 * 2^l
/// points per axis. The capped integrand is bounded, and the grid shrinks with
/// the cap, so every level is resolved to a similar relative accuracy. Entries
/// are monotone in the cap and grow like 1/eps_l because g crosses E on a
/// hypersurface, whereas a finite integral would stabilize.
inline std::vector<double> interior_divergence_trace(const MultiplierSpec& spec,
                                                     const TorusDomain& dom, double e,
                                                     int levels = 6) {
  spec.validate();
  dom.validate();
  const double psi2 = spec(2.0);
  const double width = spectral_window(spec).width();
  std::vector<double> trace;
  int n = 32;
  for (int l = 0; l < levels; ++l, n *= 2) {
    const double eps = std::ldexp(width, -(l + 2));
    auto f = [&](double tsum) {
      const double g = psi2 - spec.drop(std::min(tsum / dom.dim, 2.0));
      const double den = std::max(std::abs(e - g), eps);
      return 1.0 / (den * den);
    };
    trace.push_back(detail::rectangle_level(f, dom.dim, n));
  }
  return trace;
}

} // namespace latspec

#endif // LATSPEC_TORUS_QUADRATURE_HPP
