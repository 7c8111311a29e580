#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>

namespace chaosmeter {

/// A bound evaluator refused to run because a hypothesis of the statement
/// fails; the message names the hypothesis.
struct ApplicabilityError : std::invalid_argument {
  explicit ApplicabilityError(const std::string& hypothesis)
      : std::invalid_argument("bound not applicable: " + hypothesis) {}
};

/// Constants feeding the theoretical right-hand sides. Only the fields used
/// by a given evaluator need to be meaningful.
struct BoundParams {
  double M = 0.0;       // second-moment constant
  double gamma = 0.0;   // transport-type inequality constant
  double eta = 0.0;     // log-Sobolev constant (reversed-entropy bound)
  double beta = 1.0;    // inverse temperature
  double epsilon = 0.1; // slack parameter of the reversed-entropy bound
  double kappa = 1.0;   // lower Hessian bound of U
  double L = 0.0;       // upper Hessian bound of V
  double c_mu = 0.0;    // Poincare constant of mu
  int d = 1;
};

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kE = 2.71828182845904523536;

// (beta sqrt(gamma))^(n-k) in log space; underflows cleanly to zero.
inline double decay_pow(double base, std::int64_t exponent) {
  if (base == 0.0) return exponent == 0 ? 1.0 : 0.0;
  const double t = double(exponent) * std::log(base);
  return t < -745.0 ? 0.0 : std::exp(t);
}

}  // namespace detail

/// Constant of the high-temperature Fisher bound:
/// C = (8 pi / log(1/(beta^2 gamma))) ((1 + beta^2 gamma)/(1 - beta sqrt(gamma))^2
///      + 4 / (e log(1/(beta^2 gamma)))).
inline double thm_main_constant(const BoundParams& p) {
  if (!(p.beta > 0.0)) throw ApplicabilityError("beta > 0 is required");
  if (!(p.gamma > 0.0)) throw ApplicabilityError("gamma > 0 is required");
  const double bg = p.beta * p.beta * p.gamma;
  if (!(bg < 1.0)) throw ApplicabilityError("high-temperature condition gamma beta^2 < 1 fails");
  const double lg = std::log(1.0 / bg);
  const double bs = p.beta * std::sqrt(p.gamma);
  return (8.0 * detail::kPi / lg) *
         ((1.0 + bg) / ((1.0 - bs) * (1.0 - bs)) + 4.0 / (detail::kE * lg));
}

/// Fisher-information bound I(P^n_k | mu^{ox k}) <=
/// k M beta^2 (C sqrt(k-1)/(n-1) + (beta sqrt(gamma))^(n-k))^2.
inline double thm_main_rhs(const BoundParams& p, std::int64_t n, std::int64_t k) {
  if (!(n > k && k > 1)) throw ApplicabilityError("integers n > k > 1 are required");
  if (p.M < 0.0) throw ApplicabilityError("M >= 0 is required");
  const double C = thm_main_constant(p);
  const double tail = detail::decay_pow(p.beta * std::sqrt(p.gamma), n - k);
  const double inner = C * std::sqrt(double(k - 1)) / double(n - 1) + tail;
  return double(k) * p.M * p.beta * p.beta * inner * inner;
}

struct ConvexRhs {
  double fisher;
  double kl;
  double w2;
};

/// Constant of the convex-potential corollary, in terms of r = L/kappa:
/// C = (4 pi / ((1-r)^2 log(1/r))) ((1 + r^2)/(1-r)^2 + 2/(e log(1/r))).
inline double cor_convex_constant(const BoundParams& p) {
  if (!(p.kappa > 0.0)) throw ApplicabilityError("kappa > 0 is required");
  if (!(p.L < p.kappa)) throw ApplicabilityError("strict convexity dominance L < kappa fails");
  if (!(p.L > 0.0)) throw ApplicabilityError("L > 0 is required for the constant");
  const double r = p.L / p.kappa;
  const double lr = std::log(1.0 / r);
  return (4.0 * detail::kPi / ((1.0 - r) * (1.0 - r) * lr)) *
         ((1.0 + r * r) / ((1.0 - r) * (1.0 - r)) + 2.0 / (detail::kE * lr));
}

/// Convex-potential bounds: the Fisher estimate
/// I <= k (beta L^2 d / kappa) (C sqrt(k-1)/(n-1) + (L/kappa)^(n-k))^2,
/// propagated to KL and W2^2 through W2^2 <= (2/(beta kappa)) H <= I/(beta kappa)^2.
inline ConvexRhs cor_convex_rhs(const BoundParams& p, std::int64_t n, std::int64_t k) {
  if (!(n > k && k > 1)) throw ApplicabilityError("integers n > k > 1 are required");
  if (!(p.beta > 0.0)) throw ApplicabilityError("beta > 0 is required");
  if (!(p.kappa > 0.0)) throw ApplicabilityError("kappa > 0 is required");
  if (p.L < 0.0) throw ApplicabilityError("L >= 0 is required");
  if (!(p.L < p.kappa)) throw ApplicabilityError("strict convexity dominance L < kappa fails");
  if (p.L == 0.0) return {0.0, 0.0, 0.0};  // no interaction: all distances vanish
  const double C = cor_convex_constant(p);
  const double tail = detail::decay_pow(p.L / p.kappa, n - k);
  const double inner = C * std::sqrt(double(k - 1)) / double(n - 1) + tail;
  const double fisher =
      double(k) * (p.beta * p.L * p.L * double(p.d) / p.kappa) * inner * inner;
  return {fisher, fisher / (2.0 * p.beta * p.kappa),
          fisher / (p.beta * p.beta * p.kappa * p.kappa)};
}

namespace detail {

inline double rev_ratio_term(double alpha, std::int64_t n, std::int64_t k) {
  const double ratio = (1.0 + alpha * double(k)) / (1.0 + alpha * double(n - 1));
  return std::pow(ratio, std::min(2.0, 1.0 / alpha));
}

inline void check_alpha(double alpha) {
  if (std::abs(alpha - 0.5) < 1e-12)
    throw ApplicabilityError("alpha = 1/2; choose a smaller epsilon");
  if (!(alpha > 0.0)) throw ApplicabilityError("alpha > 0 is required");
}

}  // namespace detail

/// Reversed relative entropy bound, alpha = eta gamma beta^2 (1 + epsilon):
/// H(mu^{ox k} | P^n_k) <=
///   ((1+2a)^(2 v 1/a) / (eps gamma beta^2 a |1-2a|) + 2 eta M beta^2)
///   ((1 + a k)/(1 + a (n-1)))^(2 ^ 1/a).
inline double thm_main_rev_rhs(const BoundParams& p, std::int64_t n, std::int64_t k) {
  if (!(n > k && k >= 1)) throw ApplicabilityError("integers n > k >= 1 are required");
  if (!(p.eta > 0.0)) throw ApplicabilityError("eta > 0 is required");
  if (!(p.gamma > 0.0)) throw ApplicabilityError("gamma > 0 is required");
  if (!(p.epsilon > 0.0)) throw ApplicabilityError("epsilon > 0 is required");
  if (!(p.beta > 0.0)) throw ApplicabilityError("beta > 0 is required");
  const double alpha = p.eta * p.gamma * p.beta * p.beta * (1.0 + p.epsilon);
  detail::check_alpha(alpha);
  const double prefactor =
      std::pow(1.0 + 2.0 * alpha, std::max(2.0, 1.0 / alpha)) /
          (p.epsilon * p.gamma * p.beta * p.beta * alpha * std::abs(1.0 - 2.0 * alpha)) +
      2.0 * p.eta * p.M * p.beta * p.beta;
  return prefactor * detail::rev_ratio_term(alpha, n, k);
}

/// Constant of the convex-potential reversed bound, alpha = (1+eps)(L/kappa)^2:
/// C = (1 + 1/eps) (1+2a)^(2 v 1/a) / (2 beta kappa a^2 |1-2a|) + a d.
inline double cor_convex_rev_constant(const BoundParams& p) {
  if (!(p.kappa > 0.0)) throw ApplicabilityError("kappa > 0 is required");
  if (!(p.beta > 0.0)) throw ApplicabilityError("beta > 0 is required");
  if (!(p.epsilon > 0.0)) throw ApplicabilityError("epsilon > 0 is required");
  if (!(p.L > 0.0))
    throw ApplicabilityError("L > 0 is required (alpha = 0 leaves the constant undefined)");
  const double alpha = (1.0 + p.epsilon) * (p.L / p.kappa) * (p.L / p.kappa);
  detail::check_alpha(alpha);
  return (1.0 + 1.0 / p.epsilon) * std::pow(1.0 + 2.0 * alpha, std::max(2.0, 1.0 / alpha)) /
             (2.0 * p.beta * p.kappa * alpha * alpha * std::abs(1.0 - 2.0 * alpha)) +
         alpha * double(p.d);
}

inline double cor_convex_rev_rhs(const BoundParams& p, std::int64_t n, std::int64_t k) {
  if (!(n > k && k >= 1)) throw ApplicabilityError("integers n > k >= 1 are required");
  const double C = cor_convex_rev_constant(p);
  const double alpha = (1.0 + p.epsilon) * (p.L / p.kappa) * (p.L / p.kappa);
  return C * detail::rev_ratio_term(alpha, n, k);
}

/// Entropy subadditivity baseline: H(P^n_k | mu^{ox k}) <= (2k/n) H(P^n | mu^{ox n}).
inline double subadditivity_bound(double h_global, std::int64_t n, std::int64_t k) {
  if (h_global < 0.0) throw std::invalid_argument("subadditivity_bound: H must be >= 0");
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("subadditivity_bound: need 1 <= k <= n");
  return 2.0 * double(k) / double(n) * h_global;
}

/// Transport constant of the quadratic-interaction Gaussian model:
/// gamma = b^2 / (a+b)^2.
inline double gaussian_gamma(double a, double b) {
  if (!(a > 0.0)) throw std::invalid_argument("gaussian_gamma: a must be positive");
  if (b < 0.0) throw std::invalid_argument("gaussian_gamma: b must be nonnegative");
  return b * b / ((a + b) * (a + b));
}

struct HammingPinskerBounds {
  double w1_hamming_sq;  // W_{1,H}^2 <= k c_mu I
  double tv;             // ||.||_TV <= sqrt(2 KL)
};

inline HammingPinskerBounds hamming_pinsker_bounds(double c_mu, std::int64_t k,
                                                   double fisher_val, double kl_val) {
  if (c_mu < 0.0 || fisher_val < 0.0 || kl_val < 0.0)
    throw std::invalid_argument("hamming_pinsker_bounds: inputs must be nonnegative");
  return {double(k) * c_mu * fisher_val, std::sqrt(2.0 * kl_val)};
}

// ---------------------------------------------------------------------------

/// One evaluated bound, optionally paired with an exact or empirical
/// left-hand side. CSV schema: name,n,k,rhs,lhs,satisfied,params-json.
struct BoundReport {
  std::string name;
  std::int64_t n = 0;
  std::int64_t k = 0;
  double rhs = 0.0;
  std::optional<double> lhs;
  std::optional<bool> satisfied;
  std::string params_json;

  static std::string csv_header() { return "name,n,k,rhs,lhs,satisfied,params-json"; }

  std::string csv_row() const {
    char num[64];
    std::string row = name + ',' + std::to_string(n) + ',' + std::to_string(k) + ',';
    std::snprintf(num, sizeof(num), "%.17g", rhs);
    row += num;
    row += ',';
    if (lhs) {
      std::snprintf(num, sizeof(num), "%.17g", *lhs);
      row += num;
    }
    row += ',';
    if (satisfied) row += (*satisfied ? "true" : "false");
    row += ',';
    // params-json contains commas; quote per RFC 4180.
    std::string quoted = "\"";
    for (char c : params_json) {
      if (c == '"') quoted += "\"\"";
      else quoted += c;
    }
    quoted += '"';
    row += quoted;
    return row;
  }

  static BoundReport make(std::string name, std::int64_t n, std::int64_t k, double rhs,
                          std::optional<double> lhs, std::string params_json) {
    BoundReport r;
    r.name = std::move(name);
    r.n = n;
    r.k = k;
    r.rhs = rhs;
    r.lhs = lhs;
    if (lhs) r.satisfied = (*lhs <= rhs);
    r.params_json = std::move(params_json);
    return r;
  }
};

}  // namespace chaosmeter
