#ifndef LATSPEC_ORACLE_HPP
#define LATSPEC_ORACLE_HPP

/// \file oracle.hpp
/// Finite Fourier-grid model of H_v: the diagonal of symbol samples on the
/// grid theta_k = -pi + 2 pi k / N per axis plus the rank-one term
/// (v / N^d) * ones. Its secular equation 1 = (v / N^d) sum_k 1/(E - g_k) is
/// the Riemann sum of the continuum coupling formula, so the extremal root
/// converges to the continuum branch energy as N grows.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "latspec/multiplier.hpp"
#include "latspec/spectral.hpp"
#include "latspec/torus_quadrature.hpp"

namespace latspec {

inline constexpr double max_grid_size = 1e7;
inline constexpr double max_dense_size = 4000;

struct GridOperator {
  int d = 1;
  int N = 2;
  std::vector<double> g_values; ///< axis 0 varies fastest
  double v = 0.0;

  std::size_t size() const { return g_values.size(); }
};

struct SecularSolution {
  std::optional<double> top_eigenvalue;
  std::optional<double> bottom_eigenvalue;
  double residual = 0.0;
};

inline GridOperator build_grid_operator(const MultiplierSpec& spec, int d, int n, double v) {
  spec.validate();
  TorusDomain{d}.validate();
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("grid points per axis must be even and >= 2");
  if (std::pow(static_cast<double>(n), d) > max_grid_size)
    throw std::length_error("grid operator exceeds 1e7 points");
  GridOperator op;
  op.d = d;
  op.N = n;
  op.v = v;
  std::vector<double> cos1(n);
  for (int k = 0; k < n; ++k)
    cos1[k] = std::cos(-pi + 2.0 * pi * k / n) + 1.0;
  std::size_t total = 1;
  for (int j = 0; j < d; ++j)
    total *= static_cast<std::size_t>(n);
  op.g_values.resize(total);
  std::vector<int> idx(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    double x = 0.0;
    for (int j = 0; j < d; ++j)
      x += cos1[idx[j]];
    op.g_values[i] = spec(std::clamp(x / d, 0.0, 2.0));
    for (int j = 0; j < d && ++idx[j] == n; ++j)
      idx[j] = 0;
  }
  return op;
}

namespace detail {

/// Distinct grid values with multiplicities, for fast secular sums.
struct Histogram {
  std::vector<double> value;
  std::vector<double> count;
};

inline Histogram histogram(std::vector<double> g) {
  std::sort(g.begin(), g.end());
  Histogram h;
  for (double x : g) {
    if (!h.value.empty() && h.value.back() == x) {
      h.count.back() += 1.0;
    } else {
      h.value.push_back(x);
      h.count.push_back(1.0);
    }
  }
  return h;
}

/// 1 - (v / M) sum_k 1/(E - g_k) at E = edge + sign(v) delta, with
/// |E - g_k| = delta + |edge - g_k| formed without cancellation. `edge` is the
/// extremal grid value on the side of the root.
inline double secular_function(const Histogram& h, double v, double m, double edge, double delta) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < h.value.size(); ++i)
    acc.add(h.count[i] / (delta + std::abs(edge - h.value[i])));
  return 1.0 - std::abs(v) / m * acc.value();
}

} // namespace detail

/// Extremal root of the secular equation by bisection: above max g for v > 0,
/// below min g for v < 0. For v = 0 the spectrum is the grid itself and no
/// root is reported.
inline SecularSolution secular_eigenvalue(const GridOperator& op) {
  SecularSolution sol;
  if (op.v == 0.0 || op.g_values.empty())
    return sol;
  const auto h = detail::histogram(op.g_values);
  const double m = static_cast<double>(op.size());
  const bool top = op.v > 0.0;
  const double edge = top ? h.value.back() : h.value.front();
  // f < 0 next to the extremal pole and f >= 0 at offset |v|.
  double near = 0.0;
  double far = std::abs(op.v);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (near + far);
    if (mid == near || mid == far)
      break;
    if (detail::secular_function(h, op.v, m, edge, mid) < 0.0)
      near = mid;
    else
      far = mid;
  }
  // The bracket is now one ulp wide; keep the end with the smaller residual.
  const double r_near = near > 0.0 ? std::abs(detail::secular_function(h, op.v, m, edge, near)) : HUGE_VAL;
  const double r_far = std::abs(detail::secular_function(h, op.v, m, edge, far));
  const double delta = r_near < r_far ? near : far;
  sol.residual = std::min(r_near, r_far);
  const double root = top ? edge + delta : edge - delta;
  (top ? sol.top_eigenvalue : sol.bottom_eigenvalue) = root;
  return sol;
}

/// Full ascending spectrum of diag(g) + (v / N^d) ones by dense
/// self-adjoint eigendecomposition.
inline std::vector<double> dense_check(const GridOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  if (static_cast<double>(n) > max_dense_size)
    throw std::length_error("dense check limited to N^d <= 4000");
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, op.v / static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    a(i, i) += op.g_values[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericFailure("dense eigendecomposition failed");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

struct ConvergenceRow {
  int N = 0;
  double E_N = 0.0;
  double abs_error = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// Continuum branch energy, or the band edge when v is on the
  /// no-eigenvalue side and the discrete root is absorbed by the band.
  double reference = 0.0;
  bool bound_state = false;
  /// Errors never grow beyond `error_floor` and the last one is below `max_final_error`.
  bool converged = false;
};

/// Discrete extremal roots for each N against the continuum branch energy.
inline ConvergenceStudy convergence_study(const MultiplierSpec& spec, int d, double v,
                                          const std::vector<int>& grid, double max_final_error = 1e-3,
                                          double error_floor = 1e-10,
                                          const QuadratureOptions& opt = {}) {
  if (v == 0.0)
    throw std::invalid_argument("convergence study needs a nonzero coupling");
  if (grid.empty())
    throw std::invalid_argument("empty grid list");
  ConvergenceStudy st;
  const auto pt = energy_for_coupling(spec, d, v, opt);
  st.bound_state = pt.has_value();
  st.reference = pt ? pt->E : energy_of(spec, EdgeOffset{edge_for_coupling(v), 0.0});
  for (int n : grid) {
    const auto sol = secular_eigenvalue(build_grid_operator(spec, d, n, v));
    const double e = v > 0.0 ? *sol.top_eigenvalue : *sol.bottom_eigenvalue;
    st.rows.push_back({n, e, std::abs(e - st.reference)});
  }
  st.converged = st.rows.back().abs_error < max_final_error;
  for (std::size_t i = 1; i < st.rows.size(); ++i) {
    if (st.rows[i].abs_error > std::max(st.rows[i - 1].abs_error, error_floor))
      st.converged = false;
  }
  return st;
}

} // namespace latspec

#endif // LATSPEC_ORACLE_HPP
