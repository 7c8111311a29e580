#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace chaosmeter {

/// Covariance structure of the n-particle equicorrelated Gaussian:
/// Sigma_n = d_n (I_n + c_n J_n) with d_n = 1/(a + b n/(n-1)), c_n = b/(a(n-1)).
struct GaussianCovSpec {
  double a;
  double b;
  std::int64_t n;
  double d_n;
  double c_n;

  static GaussianCovSpec make(double a, double b, std::int64_t n) {
    if (!(a > 0.0)) throw std::invalid_argument("GaussianCovSpec: a must be positive");
    if (b < 0.0) throw std::invalid_argument("GaussianCovSpec: b must be nonnegative");
    if (n < 2) throw std::invalid_argument("GaussianCovSpec: n must be >= 2");
    GaussianCovSpec s;
    s.a = a;
    s.b = b;
    s.n = n;
    s.d_n = 1.0 / (a + b * double(n) / double(n - 1));
    s.c_n = b / (a * double(n - 1));
    return s;
  }
};

/// Centered Gaussian with dense SPD covariance and derived log-normalizer
/// log Z = (k/2) log(2 pi) + (1/2) log det cov.
struct CenteredGaussian {
  Eigen::MatrixXd cov;
  double log_norm = 0.0;

  int dim() const { return int(cov.rows()); }

  static CenteredGaussian from_cov(Eigen::MatrixXd cov) {
    if (cov.rows() != cov.cols() || cov.rows() < 1)
      throw std::invalid_argument("CenteredGaussian: covariance must be square, k >= 1");
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-14)
      throw std::invalid_argument("CenteredGaussian: covariance not symmetric to 1e-14");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("CenteredGaussian: covariance not positive definite");
    double logdet = 0.0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
    CenteredGaussian g;
    g.cov = std::move(cov);
    g.log_norm = 0.5 * double(g.cov.rows()) * std::log(2.0 * 3.14159265358979323846) +
                 0.5 * logdet;
    return g;
  }

  static CenteredGaussian isotropic(int k, double variance) {
    return from_cov(variance * Eigen::MatrixXd::Identity(k, k));
  }
};

/// Covariance of the k-coordinate marginal: Sigma_{n,k} = d_n (I_k + c_n J_k).
/// Eigenvalues are d_n (multiplicity k-1) and d_n (1 + c_n k) (multiplicity 1).
inline CenteredGaussian marginal_cov(const GaussianCovSpec& spec, std::int64_t k) {
  if (k < 1 || k > spec.n) throw std::out_of_range("marginal_cov: k out of range [1, n]");
  const Eigen::Index kk = Eigen::Index(k);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(kk, kk, spec.d_n * spec.c_n);
  cov.diagonal().array() += spec.d_n;
  return CenteredGaussian::from_cov(std::move(cov));
}

namespace detail {

inline Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_sqrt: eigensolver failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("sym_sqrt: matrix not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

inline void check_same_dim(const CenteredGaussian& g1, const CenteredGaussian& g2,
                           const char* who) {
  if (g1.dim() != g2.dim()) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace detail

inline constexpr double kCommutationTol = 1e-10;

/// Squared quadratic Wasserstein distance between centered Gaussians with
/// commuting covariances: Tr((Sigma_1^{1/2} - Sigma_2^{1/2})^2).
inline double w2_commuting(const CenteredGaussian& g1, const CenteredGaussian& g2) {
  detail::check_same_dim(g1, g2, "w2_commuting");
  const double comm = (g1.cov * g2.cov - g2.cov * g1.cov).cwiseAbs().maxCoeff();
  if (comm > kCommutationTol)
    throw std::invalid_argument("w2_commuting: covariances do not commute (max deviation " +
                                std::to_string(comm) + ")");
  const Eigen::MatrixXd diff = detail::sym_sqrt(g1.cov) - detail::sym_sqrt(g2.cov);
  return diff.squaredNorm();
}

/// W_2^2(P^n_k, mu^{otimes k}) in closed form:
/// (k-1)(a+b)^{-1} (sqrt(d_n (a+b)) - 1)^2
///   + (a+b)^{-1} (sqrt(d_n (a+b)(1 + k c_n)) - 1)^2.
/// Small differences are computed without cancellation so the value stays
/// accurate out to n ~ 1e6 and beyond.
inline double w2_marginal_exact(double a, double b, std::int64_t n, std::int64_t k) {
  if (!(a > 0.0)) throw std::invalid_argument("w2_marginal_exact: a must be positive");
  if (b < 0.0) throw std::invalid_argument("w2_marginal_exact: b must be nonnegative");
  if (n < 2) throw std::invalid_argument("w2_marginal_exact: n must be >= 2");
  if (k < 1 || k > n) throw std::out_of_range("w2_marginal_exact: k out of range [1, n]");

  const double ab = a + b;
  const double eps = b / (double(n - 1) * ab);     // d_n (a+b) = 1/(1+eps)
  const double x = 1.0 / (1.0 + eps);
  const double sx_m1 = (x - 1.0) / (std::sqrt(x) + 1.0);  // sqrt(x) - 1, stable
  const double kcn = double(k) * b / (a * double(n - 1));
  const double y = (1.0 + kcn) / (1.0 + eps);
  const double y_m1 = (kcn - eps) / (1.0 + eps);
  const double sy_m1 = y_m1 / (std::sqrt(y) + 1.0);
  return (double(k - 1) * sx_m1 * sx_m1 + sy_m1 * sy_m1) / ab;
}

/// Limit of (n/k)^2 W_2^2(P^n_k, mu^{otimes k}) along n -> infinity, k -> k*:
/// b^2 / (4 (a+b)^3 k*) + (a+b)^{-1} (b/(2a) - b/(2 k* (a+b)))^2,
/// with 1/k* = 0 when k* is infinite (pass std::nullopt).
inline double w2_limit(double a, double b, std::optional<std::int64_t> kstar) {
  if (!(a > 0.0)) throw std::invalid_argument("w2_limit: a must be positive");
  if (b < 0.0) throw std::invalid_argument("w2_limit: b must be nonnegative");
  if (kstar && *kstar < 1) throw std::invalid_argument("w2_limit: k* must be >= 1 or infinite");
  const double inv_k = kstar ? 1.0 / double(*kstar) : 0.0;
  const double ab = a + b;
  const double second = b / (2.0 * a) - b * inv_k / (2.0 * ab);
  return b * b * inv_k / (4.0 * ab * ab * ab) + second * second / ab;
}

/// Relative entropy between centered Gaussians:
/// H(g1 | g2) = (1/2) [ Tr(Sigma_2^{-1} Sigma_1) - k + log det Sigma_2 - log det Sigma_1 ].
inline double kl_centered(const CenteredGaussian& g1, const CenteredGaussian& g2) {
  detail::check_same_dim(g1, g2, "kl_centered");
  const int k = g1.dim();
  Eigen::LLT<Eigen::MatrixXd> llt2(g2.cov);
  if (llt2.info() != Eigen::Success)
    throw std::invalid_argument("kl_centered: second covariance not positive definite");
  const double tr = llt2.solve(g1.cov).trace();
  double logdet1 = 0.0, logdet2 = 0.0;
  {
    Eigen::LLT<Eigen::MatrixXd> llt1(g1.cov);
    if (llt1.info() != Eigen::Success)
      throw std::invalid_argument("kl_centered: first covariance not positive definite");
    for (int i = 0; i < k; ++i) {
      logdet1 += 2.0 * std::log(llt1.matrixLLT()(i, i));
      logdet2 += 2.0 * std::log(llt2.matrixLLT()(i, i));
    }
  }
  return std::max(0.0, 0.5 * (tr - double(k) + logdet2 - logdet1));
}

/// Relative Fisher information between centered Gaussians:
/// I(g1 | g2) = Tr((Sigma_2^{-1} - Sigma_1^{-1}) Sigma_1 (Sigma_2^{-1} - Sigma_1^{-1})),
/// evaluated as ||Sigma_1^{1/2} D||_F^2 with D the precision difference.
inline double fisher_centered(const CenteredGaussian& g1, const CenteredGaussian& g2) {
  detail::check_same_dim(g1, g2, "fisher_centered");
  const int k = g1.dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  Eigen::LLT<Eigen::MatrixXd> llt1(g1.cov), llt2(g2.cov);
  if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success)
    throw std::invalid_argument("fisher_centered: covariance not positive definite");
  const Eigen::MatrixXd D = llt2.solve(id) - llt1.solve(id);
  return (detail::sym_sqrt(g1.cov) * D).squaredNorm();
}

// ---------------------------------------------------------------------------
// Scalar spectral route. Sigma_{n,k} has eigenvalues d_n (multiplicity k-1)
// and d_n (1 + k c_n) (multiplicity 1); the product reference has variance
// v = 1/(a+b). All pair statistics follow per eigenvalue. Valid for any
// 1 <= k <= n, including the global case k = n, at O(1) cost.

struct ExactPairStats {
  double w2sq;
  double kl_forward;   // H(P^n_k | mu^{otimes k})
  double kl_reversed;  // H(mu^{otimes k} | P^n_k)
  double fisher_forward;
};

inline ExactPairStats exact_pair_stats(double a, double b, std::int64_t n, std::int64_t k) {
  if (!(a > 0.0)) throw std::invalid_argument("exact_pair_stats: a must be positive");
  if (b < 0.0) throw std::invalid_argument("exact_pair_stats: b must be nonnegative");
  if (n < 2) throw std::invalid_argument("exact_pair_stats: n must be >= 2");
  if (k < 1 || k > n) throw std::out_of_range("exact_pair_stats: k out of range [1, n]");
  const auto spec = GaussianCovSpec::make(a, b, n);
  const double v = 1.0 / (a + b);
  const double lam[2] = {spec.d_n, spec.d_n * (1.0 + spec.c_n * double(k))};
  const double mult[2] = {double(k - 1), 1.0};
  auto f = [](double t) { return t - 1.0 - std::log(t); };
  ExactPairStats st{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    const double sqd = std::sqrt(lam[i]) - std::sqrt(v);
    st.w2sq += mult[i] * sqd * sqd;
    st.kl_forward += 0.5 * mult[i] * f(lam[i] / v);
    st.kl_reversed += 0.5 * mult[i] * f(v / lam[i]);
    const double pd = 1.0 / v - 1.0 / lam[i];
    st.fisher_forward += mult[i] * pd * pd * lam[i];
  }
  return st;
}

/// H(P^n | mu^{otimes n}), the global relative entropy (k = n case).
inline double kl_global_exact(double a, double b, std::int64_t n) {
  return exact_pair_stats(a, b, n, n).kl_forward;
}

/// Exact second-moment constant for the quadratic-difference interaction:
/// M = b^2 E_{P^n_2}[x_2^2] = b^2 d_n (1 + c_n).
inline double moment_constant_exact(double a, double b, std::int64_t n) {
  const auto spec = GaussianCovSpec::make(a, b, n);
  return b * b * spec.d_n * (1.0 + spec.c_n);
}

/// Reversed-entropy second-moment constant, taken under mu^{otimes 2}:
/// M = b^2 E_mu[y^2] = b^2 / (a+b).
inline double moment_constant_rev_exact(double a, double b) {
  if (!(a > 0.0)) throw std::invalid_argument("moment_constant_rev_exact: a must be positive");
  return b * b / (a + b);
}

// ---------------------------------------------------------------------------
// Score identity for the marginal density (d = 1). Left side from the
// explicit Gaussian densities, right side from the conditional-mean form;
// the two routes must agree to ~1e-10 on sane inputs.

struct Lemma31Result {
  Eigen::VectorXd lhs;
  Eigen::VectorXd rhs;
  double max_abs_diff;
};

inline Lemma31Result lemma31_check(double a, double b, std::int64_t n, std::int64_t k,
                                   const Eigen::VectorXd& x) {
  if (k >= n) throw std::invalid_argument("lemma31_check: requires k < n");
  if (k < 2) throw std::invalid_argument("lemma31_check: requires k >= 2");
  if (x.size() != Eigen::Index(k)) throw std::invalid_argument("lemma31_check: x must have length k");
  const auto spec = GaussianCovSpec::make(a, b, n);

  // lhs_i = -(d/dx_i) log (dP^n_k / dmu^{otimes k})(x) = (Sigma_{n,k}^{-1} x)_i - (a+b) x_i,
  // with the solve done by generic Cholesky on the assembled covariance.
  const CenteredGaussian marg = marginal_cov(spec, k);
  Eigen::LLT<Eigen::MatrixXd> llt(marg.cov);
  const Eigen::VectorXd precision_x = llt.solve(x);
  const Eigen::VectorXd lhs = precision_x - (a + b) * x;

  // rhs_i = (n-1)^{-1} sum_{j<=k, j!=i} (-b x_j) + ((n-k)/(n-1)) (-b m(x)),
  // where m(x) = c_n sum_j x_j / (1 + k c_n) is the conditional mean of the
  // (k+1)-th coordinate. Uses grad_1 V(x,y) = b(x-y) and <mu, grad_1 V(x_i, .)> = b x_i.
  const double s = x.sum();
  const double cond_mean = spec.c_n * s / (1.0 + double(k) * spec.c_n);
  Eigen::VectorXd rhs(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    rhs[i] = -(b / double(n - 1)) * (s - x[i]) -
             b * (double(n - k) / double(n - 1)) * cond_mean;
  }
  return {lhs, rhs, (lhs - rhs).cwiseAbs().maxCoeff()};
}

}  // namespace chaosmeter
