#ifndef LATSPEC_MULTIPLIER_HPP
#define LATSPEC_MULTIPLIER_HPP

/// \file multiplier.hpp
/// Catalogue of kinetic multipliers Psi acting on the normalized lattice
/// Laplacian symbol u = (1/d) sum_j (cos theta_j + 1) in [0, 2].
///
/// Every catalogue entry is strictly increasing on [0, 2] with Psi(0) = 0
/// taken as the right limit. Besides Psi itself each entry provides two
/// cancellation-free differences used by the edge quadrature:
///
///   rise(x) = Psi(x) - Psi(0)       (bottom edge, x -> 0+)
///   drop(y) = Psi(2) - Psi(2 - y)   (top edge, y -> 0+)

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "latspec/errors.hpp"

namespace latspec {

enum class MultiplierKind {
  Identity,        ///< Psi(u) = u
  Fractional,      ///< Psi(u) = u^{alpha/2}
  Relativistic,    ///< Psi(u) = (u + m^{2/alpha})^{alpha/2} - m
  JumpDiffusion,   ///< Psi(u) = u + b u^{alpha/2}
  GeometricStable, ///< Psi(u) = log(1 + u^{alpha/2})
  HigherOrder,     ///< Psi(u) = u^beta
  Bernstein,       ///< Psi(u) = b u + sum_i w_i (1 - exp(-u y_i))
};

inline std::string_view kind_name(MultiplierKind k) {
  switch (k) {
  case MultiplierKind::Identity: return "identity";
  case MultiplierKind::Fractional: return "fractional";
  case MultiplierKind::Relativistic: return "relativistic";
  case MultiplierKind::JumpDiffusion: return "jump_diffusion";
  case MultiplierKind::GeometricStable: return "geometric_stable";
  case MultiplierKind::HigherOrder: return "higher_order";
  case MultiplierKind::Bernstein: return "bernstein";
  }
  return "unknown";
}

/// Accepts the canonical names and their hyphenated spellings.
inline MultiplierKind parse_kind(std::string_view name) {
  std::string n(name);
  std::replace(n.begin(), n.end(), '-', '_');
  for (auto k : {MultiplierKind::Identity, MultiplierKind::Fractional, MultiplierKind::Relativistic,
                 MultiplierKind::JumpDiffusion, MultiplierKind::GeometricStable,
                 MultiplierKind::HigherOrder, MultiplierKind::Bernstein}) {
    if (kind_name(k) == n)
      return k;
  }
  throw InvalidSpec("unknown multiplier kind '" + std::string(name) + "'");
}

/// Point mass w at jump size y of a finite discrete Levy measure.
struct LevyAtom {
  double w = 0.0;
  double y = 0.0;
  friend bool operator==(const LevyAtom&, const LevyAtom&) = default;
};

/// Power-law exponents of Psi at the two ends of [0, 2]:
/// Psi(x) - Psi(0) ~ x^a and Psi(2) - Psi(2 - x) ~ x^b as x -> 0+.
struct EdgeExponents {
  double a = 1.0;
  double b = 1.0;
  friend bool operator==(const EdgeExponents&, const EdgeExponents&) = default;
};

/// The continuous spectrum [Psi(0), Psi(2)] of Psi(L).
struct SpectralWindow {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool in_interior(double e) const { return e > lo && e < hi; }
};

class MultiplierSpec {
public:
  static MultiplierSpec identity() { return MultiplierSpec(MultiplierKind::Identity); }

  static MultiplierSpec fractional(double alpha) {
    MultiplierSpec s(MultiplierKind::Fractional);
    s.alpha_ = alpha;
    s.validate();
    return s;
  }

  static MultiplierSpec relativistic(double alpha, double mass) {
    MultiplierSpec s(MultiplierKind::Relativistic);
    s.alpha_ = alpha;
    s.mass_ = mass;
    s.validate();
    return s;
  }

  static MultiplierSpec jump_diffusion(double alpha, double bcoef) {
    MultiplierSpec s(MultiplierKind::JumpDiffusion);
    s.alpha_ = alpha;
    s.bcoef_ = bcoef;
    s.validate();
    return s;
  }

  static MultiplierSpec geometric_stable(double alpha) {
    MultiplierSpec s(MultiplierKind::GeometricStable);
    s.alpha_ = alpha;
    s.validate();
    return s;
  }

  static MultiplierSpec higher_order(double beta) {
    MultiplierSpec s(MultiplierKind::HigherOrder);
    s.beta_ = beta;
    s.validate();
    return s;
  }

  static MultiplierSpec bernstein(double drift, std::vector<LevyAtom> atoms) {
    MultiplierSpec s(MultiplierKind::Bernstein);
    s.drift_ = drift;
    s.atoms_ = std::move(atoms);
    s.validate();
    return s;
  }

  MultiplierKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double mass() const { return mass_; }
  double bcoef() const { return bcoef_; }
  double beta() const { return beta_; }
  double drift() const { return drift_; }
  const std::vector<LevyAtom>& atoms() const { return atoms_; }

  /// Throws InvalidSpec when a parameter is outside its admissible range.
  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    auto need_alpha = [&] {
      if (!finite(alpha_) || alpha_ <= 0.0 || alpha_ >= 2.0)
        throw InvalidSpec(std::string(kind_name(kind_)) + ": alpha must lie in (0, 2)");
    };
    switch (kind_) {
    case MultiplierKind::Identity:
      break;
    case MultiplierKind::Fractional:
    case MultiplierKind::GeometricStable:
      need_alpha();
      break;
    case MultiplierKind::Relativistic:
      need_alpha();
      if (!finite(mass_) || mass_ < 0.0)
        throw InvalidSpec("relativistic: mass must be >= 0");
      break;
    case MultiplierKind::JumpDiffusion:
      need_alpha();
      if (!finite(bcoef_) || bcoef_ <= 0.0)
        throw InvalidSpec("jump_diffusion: bcoef must be > 0");
      break;
    case MultiplierKind::HigherOrder:
      if (!finite(beta_) || beta_ <= 1.0)
        throw InvalidSpec("higher_order: beta must be > 1");
      break;
    case MultiplierKind::Bernstein:
      if (!finite(drift_) || drift_ < 0.0)
        throw InvalidSpec("bernstein: drift must be >= 0");
      for (const auto& at : atoms_) {
        if (!finite(at.w) || !finite(at.y) || at.w <= 0.0 || at.y <= 0.0)
          throw InvalidSpec("bernstein: atom weights and locations must be > 0");
      }
      if (drift_ == 0.0 && atoms_.empty())
        throw InvalidSpec("bernstein: zero drift and no atoms is not strictly increasing");
      break;
    }
  }

  /// Psi(u) for u in [0, 2].
  double operator()(double u) const {
    check_argument(u);
    return rise(u);
  }

  /// Psi(0); zero for every catalogue entry.
  double at_zero() const { return 0.0; }

  /// Psi(x) - Psi(0), accurate to full relative precision as x -> 0+.
  double rise(double x) const {
    const double s = alpha_ / 2.0;
    switch (kind_) {
    case MultiplierKind::Identity:
      return x;
    case MultiplierKind::Fractional:
      return std::pow(x, s);
    case MultiplierKind::Relativistic: {
      if (mass_ == 0.0)
        return std::pow(x, s);
      const double mu = std::pow(mass_, 2.0 / alpha_);
      return std::pow(mu, s) * std::expm1(s * std::log1p(x / mu));
    }
    case MultiplierKind::JumpDiffusion:
      return x + bcoef_ * std::pow(x, s);
    case MultiplierKind::GeometricStable:
      return std::log1p(std::pow(x, s));
    case MultiplierKind::HigherOrder:
      return std::pow(x, beta_);
    case MultiplierKind::Bernstein: {
      double r = drift_ * x;
      for (const auto& at : atoms_)
        r -= at.w * std::expm1(-x * at.y);
      return r;
    }
    }
    return 0.0;
  }

  /// Psi(2) - Psi(2 - y), accurate to full relative precision as y -> 0+.
  double drop(double y) const {
    const double s = alpha_ / 2.0;
    // 2^p - (2 - y)^p without cancellation.
    auto power_drop = [](double p, double base, double y_) {
      return -std::pow(base, p) * std::expm1(p * std::log1p(-y_ / base));
    };
    switch (kind_) {
    case MultiplierKind::Identity:
      return y;
    case MultiplierKind::Fractional:
      return power_drop(s, 2.0, y);
    case MultiplierKind::Relativistic: {
      const double mu = mass_ == 0.0 ? 0.0 : std::pow(mass_, 2.0 / alpha_);
      return power_drop(s, 2.0 + mu, y);
    }
    case MultiplierKind::JumpDiffusion:
      return y + bcoef_ * power_drop(s, 2.0, y);
    case MultiplierKind::GeometricStable: {
      const double inner = power_drop(s, 2.0, y);
      return std::log1p(inner / (1.0 + std::pow(2.0 - y, s)));
    }
    case MultiplierKind::HigherOrder:
      return power_drop(beta_, 2.0, y);
    case MultiplierKind::Bernstein: {
      double r = drift_ * y;
      for (const auto& at : atoms_)
        r += at.w * std::exp(-2.0 * at.y) * std::expm1(y * at.y);
      return r;
    }
    }
    return 0.0;
  }

  friend bool operator==(const MultiplierSpec&, const MultiplierSpec&) = default;

private:
  explicit MultiplierSpec(MultiplierKind k) : kind_(k) {}

  static void check_argument(double u) {
    if (!(u >= 0.0 && u <= 2.0))
      throw std::domain_error("multiplier argument must lie in [0, 2]");
  }

  MultiplierKind kind_;
  double alpha_ = 1.0;
  double mass_ = 0.0;
  double bcoef_ = 1.0;
  double beta_ = 2.0;
  double drift_ = 0.0;
  std::vector<LevyAtom> atoms_;
};

inline double eval_psi(const MultiplierSpec& spec, double u) {
  spec.validate();
  return spec(u);
}

inline SpectralWindow spectral_window(const MultiplierSpec& spec) {
  spec.validate();
  return {spec(0.0), spec(2.0)};
}

/// Analytic (a, b) exponents of the catalogue entry.
inline EdgeExponents edge_exponents(const MultiplierSpec& spec) {
  spec.validate();
  switch (spec.kind()) {
  case MultiplierKind::Fractional:
  case MultiplierKind::JumpDiffusion:
  case MultiplierKind::GeometricStable:
    return {spec.alpha() / 2.0, 1.0};
  case MultiplierKind::Relativistic:
    return spec.mass() > 0.0 ? EdgeExponents{1.0, 1.0} : EdgeExponents{spec.alpha() / 2.0, 1.0};
  case MultiplierKind::HigherOrder:
    return {spec.beta(), 1.0};
  case MultiplierKind::Identity:
  case MultiplierKind::Bernstein:
    break;
  }
  return {1.0, 1.0};
}

/// Raised when the local log-log slopes do not settle within tolerance.
class EstimationFailure : public NumericFailure {
public:
  EstimationFailure(const std::string& what, std::vector<double> slopes_a,
                    std::vector<double> slopes_b)
      : NumericFailure(what), slopes_a_(std::move(slopes_a)), slopes_b_(std::move(slopes_b)) {}

  const std::vector<double>& slopes_a() const { return slopes_a_; }
  const std::vector<double>& slopes_b() const { return slopes_b_; }

private:
  std::vector<double> slopes_a_;
  std::vector<double> slopes_b_;
};

namespace detail {

/// Local slopes of log f between consecutive points x_k = 2^{-k}, k = 1..samples.
template <class F>
std::vector<double> dyadic_slopes(F&& f, int samples) {
  std::vector<double> slopes;
  double prev = f(0.5);
  for (int k = 2; k <= samples; ++k) {
    const double cur = f(std::ldexp(1.0, -k));
    slopes.push_back(std::log2(prev / cur));
    prev = cur;
  }
  return slopes;
}

/// Least-squares slope over the second half of the samples, and the spread of
/// the local slopes over the same range.
template <class F>
std::pair<double, double> tail_regression(F&& f, int samples) {
  const int first = samples / 2 + 1;
  std::vector<double> lx, ly;
  for (int k = first; k <= samples; ++k) {
    const double x = std::ldexp(1.0, -k);
    lx.push_back(std::log(x));
    ly.push_back(std::log(f(x)));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const auto local = dyadic_slopes(f, samples);
  const auto tail_begin = local.begin() + (first - 1);
  const auto [lo, hi] = std::minmax_element(tail_begin, local.end());
  return {sxy / sxx, *hi - *lo};
}

} // namespace detail

/// Numerical corroboration of edge_exponents by log-log regression over the
/// geometric points x = 2^{-k}, k = 1..samples.
inline EdgeExponents estimate_edge_exponents(const MultiplierSpec& spec, int samples = 32,
                                             double tol = 0.02) {
  spec.validate();
  if (samples < 4)
    throw std::invalid_argument("estimate_edge_exponents: need at least 4 samples");
  auto rise = [&](double x) { return spec.rise(x); };
  auto drop = [&](double y) { return spec.drop(y); };
  const auto [a, spread_a] = detail::tail_regression(rise, samples);
  const auto [b, spread_b] = detail::tail_regression(drop, samples);
  if (!(spread_a <= tol) || !(spread_b <= tol) || !std::isfinite(a) || !std::isfinite(b)) {
    throw EstimationFailure("edge exponent slopes did not settle (spread a=" +
                                std::to_string(spread_a) + ", b=" + std::to_string(spread_b) + ")",
                            detail::dyadic_slopes(rise, samples),
                            detail::dyadic_slopes(drop, samples));
  }
  return {a, b};
}

/// One instance of every catalogue kind with default parameters.
inline std::vector<MultiplierSpec> default_catalogue() {
  return {
      MultiplierSpec::identity(),
      MultiplierSpec::fractional(1.0),
      MultiplierSpec::relativistic(1.0, 1.0),
      MultiplierSpec::jump_diffusion(1.0, 1.0),
      MultiplierSpec::geometric_stable(1.0),
      MultiplierSpec::higher_order(2.0),
      MultiplierSpec::bernstein(0.0, {{1.0, 2.0}}),
  };
}

} // namespace latspec

#endif // LATSPEC_MULTIPLIER_HPP
