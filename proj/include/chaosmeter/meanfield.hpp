#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaosmeter/model.hpp"

namespace chaosmeter {

/// Discretized probability density on a uniform grid over [lo, hi];
/// values are density samples at the nodes and the trapezoidal integral is 1.
struct GridDensity {
  double lo = -1.0;
  double hi = 1.0;
  int m = 0;
  std::vector<double> values;
  double log_norm = 0.0;  // log of the mass divided out by the last normalization

  double dx() const { return (hi - lo) / double(m - 1); }
  double node(int i) const { return lo + double(i) * dx(); }

  double trapz() const {
    double s = 0.5 * (values.front() + values.back());
    for (int i = 1; i + 1 < m; ++i) s += values[i];
    return s * dx();
  }

  void normalize() {
    const double mass = trapz();
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw std::domain_error("GridDensity: cannot normalize zero or non-finite mass");
    for (double& v : values) v /= mass;
    log_norm += std::log(mass);
  }

  void validate() const {
    if (m < 64) throw std::invalid_argument("GridDensity: m must be >= 64");
    if (int(values.size()) != m) throw std::invalid_argument("GridDensity: size mismatch");
    if (!(lo < hi)) throw std::invalid_argument("GridDensity: requires lo < hi");
    for (double v : values)
      if (v < 0.0 || !std::isfinite(v))
        throw std::invalid_argument("GridDensity: values must be finite and nonnegative");
    if (std::abs(trapz() - 1.0) > 1e-10)
      throw std::invalid_argument("GridDensity: mass deviates from 1 beyond 1e-10");
  }

  double l1_distance(const GridDensity& other) const {
    if (other.m != m || other.lo != lo || other.hi != hi)
      throw std::invalid_argument("GridDensity: grids differ");
    double s = 0.5 * (std::abs(values[0] - other.values[0]) +
                      std::abs(values[m - 1] - other.values[m - 1]));
    for (int i = 1; i + 1 < m; ++i) s += std::abs(values[i] - other.values[i]);
    return s * dx();
  }

  static GridDensity gaussian(double lo, double hi, int m, double mu, double var) {
    GridDensity g;
    g.lo = lo;
    g.hi = hi;
    g.m = m;
    g.values.resize(std::size_t(m));
    const double h = (hi - lo) / double(m - 1);
    for (int i = 0; i < m; ++i) {
      const double x = lo + i * h;
      g.values[std::size_t(i)] = std::exp(-0.5 * (x - mu) * (x - mu) / var);
    }
    g.normalize();
    return g;
  }

  static GridDensity uniform(double lo, double hi, int m) {
    GridDensity g;
    g.lo = lo;
    g.hi = hi;
    g.m = m;
    g.values.assign(std::size_t(m), 1.0);
    g.normalize();
    return g;
  }

  /// Two-column CSV: x,density.
  void write_csv(std::ostream& out) const {
    out << "x,density\n";
    char buf[96];
    for (int i = 0; i < m; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", node(i), values[std::size_t(i)]);
      out << buf;
    }
  }
};

enum class ReferenceMeasure { GibbsConfinement, UniformInterval };

struct GridSpec {
  double lo;
  double hi;
  int m;
};

/// Truncation [-8 sigma, 8 sigma] with sigma = 1/sqrt(beta kappa); the
/// neglected Gaussian tail mass is below 1e-14.
inline GridSpec default_grid(const ModelSpec& spec, int m = 2048) {
  const double sigma = 1.0 / std::sqrt(spec.beta * spec.kappa);
  return {-8.0 * sigma, 8.0 * sigma, m};
}

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 2000;
  ReferenceMeasure reference = ReferenceMeasure::GibbsConfinement;
  const GridDensity* init = nullptr;  // defaults to the normalized reference
};

struct FixedPointResult {
  GridDensity density;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct NonConvergenceError : std::runtime_error {
  GridDensity last_iterate;
  double residual;
  int iterations;
  NonConvergenceError(GridDensity last, double res, int iters)
      : std::runtime_error("fixed-point iteration diverging: residual increased for 50 "
                           "consecutive iterations (residual " +
                           std::to_string(res) + " after " + std::to_string(iters) +
                           " iterations)"),
        last_iterate(std::move(last)),
        residual(res),
        iterations(iters) {}
};

namespace detail {

inline void require_solvable(const ModelSpec& spec, const GridSpec& grid) {
  if (spec.dimension != 1)
    throw std::invalid_argument("meanfield: the grid solver is one-dimensional");
  if (!(grid.lo < grid.hi)) throw std::invalid_argument("meanfield: requires lo < hi");
  if (grid.m < 64) throw std::invalid_argument("meanfield: grid needs m >= 64 points");
}

/// Interaction kernel sampled at lag distances j*dx; V(x,y) depends on x-y
/// for every built-in kind.
inline std::vector<double> kernel_table(const ModelSpec& spec, const GridSpec& grid) {
  std::vector<double> kernel(std::size_t(grid.m));
  const double h = (grid.hi - grid.lo) / double(grid.m - 1);
  Eigen::VectorXd zero(1), y(1);
  zero[0] = 0.0;
  for (int j = 0; j < grid.m; ++j) {
    y[0] = -double(j) * h;
    kernel[std::size_t(j)] = interaction_value(spec, zero, y);
  }
  return kernel;
}

inline std::vector<double> reference_log_density(const ModelSpec& spec, const GridSpec& grid,
                                                 ReferenceMeasure ref) {
  std::vector<double> logref(std::size_t(grid.m), 0.0);
  if (ref == ReferenceMeasure::GibbsConfinement) {
    const double h = (grid.hi - grid.lo) / double(grid.m - 1);
    Eigen::VectorXd x(1);
    for (int i = 0; i < grid.m; ++i) {
      x[0] = grid.lo + i * h;
      logref[std::size_t(i)] = -spec.beta * confinement_value(spec, x);
    }
  }
  return logref;
}

inline GridDensity normalized_from_log(const GridSpec& grid, const std::vector<double>& logw) {
  GridDensity out;
  out.lo = grid.lo;
  out.hi = grid.hi;
  out.m = grid.m;
  out.values.resize(std::size_t(grid.m));
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : logw) peak = std::max(peak, v);
  for (int i = 0; i < grid.m; ++i) out.values[std::size_t(i)] = std::exp(logw[std::size_t(i)] - peak);
  out.log_norm = peak;
  out.normalize();
  return out;
}

/// One application of the self-consistency map:
/// T(nu)(x) = exp(-beta [U(x) + <nu, V(x, .)>]) / Z on the grid, with the
/// interaction integral evaluated by direct O(m^2) trapezoidal summation.
inline GridDensity apply_map(const ModelSpec& spec, const GridSpec& grid,
                             const std::vector<double>& kernel,
                             const std::vector<double>& logref, const GridDensity& nu) {
  const int m = grid.m;
  const double h = (grid.hi - grid.lo) / double(m - 1);
  std::vector<double> logw(std::size_t(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double integral = 0.5 * (kernel[std::size_t(std::abs(i - 0))] * nu.values[0] +
                             kernel[std::size_t(std::abs(i - (m - 1)))] * nu.values[std::size_t(m - 1)]);
    for (int j = 1; j + 1 < m; ++j)
      integral += kernel[std::size_t(std::abs(i - j))] * nu.values[std::size_t(j)];
    integral *= h;
    logw[std::size_t(i)] = logref[std::size_t(i)] - spec.beta * integral;
  }
  return normalized_from_log(grid, logw);
}

}  // namespace detail

/// Damped self-consistent iteration for the one-particle fixed point.
/// The reported residual is the L1 distance between the returned density and
/// its one-step image, so the output certifies itself.
inline FixedPointResult solve_fixed_point(const ModelSpec& spec, const GridSpec& grid,
                                          const FixedPointOptions& opts = {}) {
  detail::require_solvable(spec, grid);
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw std::invalid_argument("solve_fixed_point: damping must lie in (0, 1]");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_fixed_point: tol must be positive");

  const auto kernel = detail::kernel_table(spec, grid);
  const auto logref = detail::reference_log_density(spec, grid, opts.reference);

  GridDensity nu;
  if (opts.init != nullptr) {
    nu = *opts.init;
    if (nu.m != grid.m || nu.lo != grid.lo || nu.hi != grid.hi)
      throw std::invalid_argument("solve_fixed_point: init density grid mismatch");
  } else {
    nu = detail::normalized_from_log(grid, logref);
  }

  double prev_residual = std::numeric_limits<double>::infinity();
  int increasing_run = 0;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const GridDensity image = detail::apply_map(spec, grid, kernel, logref, nu);
    const double residual = nu.l1_distance(image);
    if (residual <= opts.tol) return {nu, iter, residual, true};

    if (residual > prev_residual) {
      if (++increasing_run >= 50) throw NonConvergenceError(nu, residual, iter);
    } else {
      increasing_run = 0;
    }
    prev_residual = residual;

    for (int i = 0; i < grid.m; ++i)
      nu.values[std::size_t(i)] = (1.0 - opts.damping) * nu.values[std::size_t(i)] +
                                  opts.damping * image.values[std::size_t(i)];
    nu.normalize();
    if (iter == opts.max_iter) return {nu, iter, residual, false};
  }
  return {nu, opts.max_iter, prev_residual, false};
}

/// L1 distance between nu and its one-step image under the map above.
inline double fixed_point_residual(const ModelSpec& spec, const GridDensity& nu,
                                   ReferenceMeasure ref = ReferenceMeasure::GibbsConfinement) {
  const GridSpec grid{nu.lo, nu.hi, nu.m};
  detail::require_solvable(spec, grid);
  const auto kernel = detail::kernel_table(spec, grid);
  const auto logref = detail::reference_log_density(spec, grid, ref);
  return nu.l1_distance(detail::apply_map(spec, grid, kernel, logref, nu));
}

/// Large-deviation rate functional J(nu) = beta <nu^{x2}, V> + H(nu | lambda),
/// with lambda the normalized reference on the grid. Returns +infinity when
/// nu puts mass where lambda vanishes.
inline double rate_functional(const ModelSpec& spec, const GridDensity& nu,
                              ReferenceMeasure ref = ReferenceMeasure::GibbsConfinement) {
  const GridSpec grid{nu.lo, nu.hi, nu.m};
  detail::require_solvable(spec, grid);
  const int m = grid.m;
  const double h = nu.dx();
  const auto kernel = detail::kernel_table(spec, grid);
  const GridDensity lambda =
      detail::normalized_from_log(grid, detail::reference_log_density(spec, grid, ref));

  auto weight = [&](int i) { return (i == 0 || i == m - 1) ? 0.5 * h : h; };

  double pair = 0.0;
  for (int i = 0; i < m; ++i) {
    double inner = 0.0;
    for (int j = 0; j < m; ++j)
      inner += weight(j) * kernel[std::size_t(std::abs(i - j))] * nu.values[std::size_t(j)];
    pair += weight(i) * nu.values[std::size_t(i)] * inner;
  }

  double entropy = 0.0;
  for (int i = 0; i < m; ++i) {
    const double p = nu.values[std::size_t(i)];
    if (p == 0.0) continue;
    const double l = lambda.values[std::size_t(i)];
    if (l == 0.0) return std::numeric_limits<double>::infinity();
    entropy += weight(i) * p * std::log(p / l);
  }
  return spec.beta * pair + entropy;
}

}  // namespace chaosmeter
