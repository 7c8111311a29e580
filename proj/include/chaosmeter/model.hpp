#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaosmeter {

enum class ConfinementKind { Quadratic, QuarticQuadratic };
enum class InteractionKind { QuadraticDifference, TabulatedGradient };

/// Radial interaction profile given by samples of the gradient magnitude
/// g(r) = W'(r) on an ascending grid starting at r = 0 with g(0) = 0.
/// Between nodes g is linear; beyond the last node it is held constant
/// (bounded gradient). W(r) is recovered by integrating g from 0.
struct TabulatedGradient {
  std::vector<double> r;
  std::vector<double> g;
};

/// Pairwise-interaction Gibbs model: inverse temperature, confinement U,
/// interaction V, with the exact convexity constants of the built-in kinds.
struct ModelSpec {
  double beta = 1.0;

  ConfinementKind confinement = ConfinementKind::Quadratic;
  double a = 1.0;  // quadratic coefficient of U
  double q = 0.0;  // quartic coefficient of U (QuarticQuadratic only)

  InteractionKind interaction = InteractionKind::QuadraticDifference;
  double b = 0.0;  // quadratic-difference strength
  TabulatedGradient tab;

  int dimension = 1;
  double kappa = 1.0;       // lower Hessian bound of U
  double lipschitz_L = 0.0; // upper Hessian bound of V

  static ModelSpec quadratic(double a, double b, double beta = 1.0, int dim = 1) {
    ModelSpec s;
    s.beta = beta;
    s.a = a;
    s.b = b;
    s.dimension = dim;
    s.kappa = a;
    s.lipschitz_L = b;
    s.validate();
    return s;
  }

  static ModelSpec quartic(double a, double q, double b, double beta = 1.0, int dim = 1) {
    ModelSpec s = quadratic(a, b, beta, dim);
    s.confinement = ConfinementKind::QuarticQuadratic;
    s.q = q;
    s.validate();
    return s;
  }

  static ModelSpec tabulated(double a, TabulatedGradient tab, double kappa, double L,
                             double beta = 1.0) {
    ModelSpec s;
    s.beta = beta;
    s.a = a;
    s.interaction = InteractionKind::TabulatedGradient;
    s.tab = std::move(tab);
    s.dimension = 1;
    s.kappa = kappa;
    s.lipschitz_L = L;
    s.validate();
    return s;
  }

  void validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("ModelSpec: beta must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("ModelSpec: confinement coefficient a must be positive");
    if (q < 0.0) throw std::invalid_argument("ModelSpec: quartic coefficient q must be nonnegative");
    if (b < 0.0) throw std::invalid_argument("ModelSpec: interaction strength b must be nonnegative");
    if (dimension < 1) throw std::invalid_argument("ModelSpec: dimension must be >= 1");
    if (!(kappa > 0.0)) throw std::invalid_argument("ModelSpec: kappa must be positive");
    if (lipschitz_L < 0.0) throw std::invalid_argument("ModelSpec: lipschitz_L must be nonnegative");
    if (interaction == InteractionKind::TabulatedGradient) {
      if (tab.r.size() != tab.g.size() || tab.r.size() < 2)
        throw std::invalid_argument("ModelSpec: tabulated gradient needs >= 2 matching nodes");
      if (tab.r.front() != 0.0 || tab.g.front() != 0.0)
        throw std::invalid_argument("ModelSpec: tabulated gradient must start at r=0 with g(0)=0");
      for (std::size_t i = 1; i < tab.r.size(); ++i)
        if (!(tab.r[i] > tab.r[i - 1]))
          throw std::invalid_argument("ModelSpec: tabulated radii must be strictly increasing");
    }
  }
};

/// Positions of n particles in R^d, one row per particle.
struct Configuration {
  Eigen::MatrixXd x;  // n x d

  int n() const { return int(x.rows()); }
  int d() const { return int(x.cols()); }

  static Configuration from_values(std::initializer_list<double> vals) {
    Configuration c;
    c.x.resize(Eigen::Index(vals.size()), 1);
    Eigen::Index i = 0;
    for (double v : vals) c.x(i++, 0) = v;
    return c;
  }
};

namespace detail {

inline double tab_gradient_at(const TabulatedGradient& t, double r) {
  if (r <= 0.0) return 0.0;
  if (r >= t.r.back()) return t.g.back();
  auto it = std::upper_bound(t.r.begin(), t.r.end(), r);
  const std::size_t j = std::size_t(it - t.r.begin());
  const double w = (r - t.r[j - 1]) / (t.r[j] - t.r[j - 1]);
  return t.g[j - 1] + w * (t.g[j] - t.g[j - 1]);
}

// W(r) = int_0^r g; exact for the piecewise-linear g (trapezoid per segment),
// linear continuation past the last node.
inline double tab_value_at(const TabulatedGradient& t, double r) {
  r = std::abs(r);
  double acc = 0.0;
  for (std::size_t j = 1; j < t.r.size(); ++j) {
    if (r <= t.r[j]) {
      const double gr = tab_gradient_at(t, r);
      return acc + 0.5 * (t.g[j - 1] + gr) * (r - t.r[j - 1]);
    }
    acc += 0.5 * (t.g[j - 1] + t.g[j]) * (t.r[j] - t.r[j - 1]);
  }
  return acc + t.g.back() * (r - t.r.back());
}

}  // namespace detail

inline double confinement_value(const ModelSpec& s, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double r2 = x.squaredNorm();
  double u = 0.5 * s.a * r2;
  if (s.confinement == ConfinementKind::QuarticQuadratic) u += 0.25 * s.q * r2 * r2;
  return u;
}

inline Eigen::VectorXd confinement_grad(const ModelSpec& s,
                                        const Eigen::Ref<const Eigen::VectorXd>& x) {
  double c = s.a;
  if (s.confinement == ConfinementKind::QuarticQuadratic) c += s.q * x.squaredNorm();
  return c * x;
}

inline double interaction_value(const ModelSpec& s, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (s.interaction == InteractionKind::QuadraticDifference)
    return 0.5 * s.b * (x - y).squaredNorm();
  return detail::tab_value_at(s.tab, (x - y).norm());
}

/// Gradient of V in its first argument.
inline Eigen::VectorXd interaction_grad1(const ModelSpec& s,
                                         const Eigen::Ref<const Eigen::VectorXd>& x,
                                         const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (s.interaction == InteractionKind::QuadraticDifference) return s.b * (x - y);
  const Eigen::VectorXd diff = x - y;
  const double r = diff.norm();
  if (r == 0.0) return Eigen::VectorXd::Zero(diff.size());
  return (detail::tab_gradient_at(s.tab, r) / r) * diff;
}

/// Full Gibbs exponent: beta * [ sum_i U(x_i) + (n-1)^-1 sum_{i<j} V(x_i, x_j) ],
/// so the target density is proportional to exp(-energy).
inline double energy(const ModelSpec& spec, const Configuration& cfg) {
  const int n = cfg.n();
  if (n < 2) throw std::invalid_argument("energy: need at least 2 particles");
  if (cfg.d() != spec.dimension)
    throw std::invalid_argument("energy: configuration dimension mismatch");
  if (!cfg.x.allFinite()) throw std::domain_error("energy: non-finite configuration");

  double conf = 0.0;
  for (int i = 0; i < n; ++i) conf += confinement_value(spec, cfg.x.row(i).transpose());

  double inter = 0.0;
  if (spec.interaction == InteractionKind::QuadraticDifference) {
    // sum_{i<j} |x_i-x_j|^2 = n sum_i |x_i|^2 - |sum_i x_i|^2
    const double sumsq = cfg.x.squaredNorm();
    const Eigen::RowVectorXd colsum = cfg.x.colwise().sum();
    inter = 0.5 * spec.b * (double(n) * sumsq - colsum.squaredNorm());
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        inter += interaction_value(spec, cfg.x.row(i).transpose(), cfg.x.row(j).transpose());
  }
  return spec.beta * (conf + inter / double(n - 1));
}

/// Langevin drift of particle i (0-based):
/// -beta * (grad U(x_i) + (n-1)^-1 sum_{j != i} grad_1 V(x_i, x_j)).
inline Eigen::VectorXd drift(const ModelSpec& spec, const Configuration& cfg, int i) {
  const int n = cfg.n();
  if (n < 2) throw std::invalid_argument("drift: need at least 2 particles");
  if (i < 0 || i >= n) throw std::out_of_range("drift: particle index out of range");
  if (!cfg.x.allFinite()) throw std::domain_error("drift: non-finite configuration");

  const Eigen::VectorXd xi = cfg.x.row(i).transpose();
  Eigen::VectorXd g = confinement_grad(spec, xi);
  if (spec.interaction == InteractionKind::QuadraticDifference) {
    const Eigen::VectorXd colsum = cfg.x.colwise().sum().transpose();
    g += (spec.b / double(n - 1)) * (double(n) * xi - colsum);
  } else {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(cfg.d());
    for (int j = 0; j < n; ++j)
      if (j != i) acc += interaction_grad1(spec, xi, cfg.x.row(j).transpose());
    g += acc / double(n - 1);
  }
  return -spec.beta * g;
}

/// Drift of every particle at once; row i equals drift(spec, cfg, i).
inline Eigen::MatrixXd drift_all(const ModelSpec& spec, const Configuration& cfg) {
  const int n = cfg.n();
  const int d = cfg.d();
  if (n < 2) throw std::invalid_argument("drift_all: need at least 2 particles");
  Eigen::MatrixXd g(n, d);
  if (spec.interaction == InteractionKind::QuadraticDifference) {
    const Eigen::RowVectorXd colsum = cfg.x.colwise().sum();
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd xi = cfg.x.row(i).transpose();
      g.row(i) = (confinement_grad(spec, xi) +
                  (spec.b / double(n - 1)) * (double(n) * xi - colsum.transpose()))
                     .transpose();
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd xi = cfg.x.row(i).transpose();
      Eigen::VectorXd acc = confinement_grad(spec, xi);
      Eigen::VectorXd pair = Eigen::VectorXd::Zero(d);
      for (int j = 0; j < n; ++j)
        if (j != i) pair += interaction_grad1(spec, xi, cfg.x.row(j).transpose());
      g.row(i) = (acc + pair / double(n - 1)).transpose();
    }
  }
  return -spec.beta * g;
}

// ---------------------------------------------------------------------------
// Flat key=value serialization; doubles printed with 17 significant digits so
// the round trip is value-exact.

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(xs[i]);
  }
  return out;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

inline std::string to_config_string(const ModelSpec& s) {
  std::string out;
  out += "beta = " + detail::fmt_double(s.beta) + "\n";
  out += "dimension = " + std::to_string(s.dimension) + "\n";
  out += "kappa = " + detail::fmt_double(s.kappa) + "\n";
  out += "lipschitz_L = " + detail::fmt_double(s.lipschitz_L) + "\n";
  out += std::string("confinement.kind = ") +
         (s.confinement == ConfinementKind::Quadratic ? "quadratic" : "quartic_quadratic") + "\n";
  out += "confinement.a = " + detail::fmt_double(s.a) + "\n";
  out += "confinement.q = " + detail::fmt_double(s.q) + "\n";
  out += std::string("interaction.kind = ") +
         (s.interaction == InteractionKind::QuadraticDifference ? "quadratic_difference"
                                                                : "tabulated_gradient") +
         "\n";
  out += "interaction.b = " + detail::fmt_double(s.b) + "\n";
  if (s.interaction == InteractionKind::TabulatedGradient) {
    out += "interaction.grad_r = " + detail::fmt_list(s.tab.r) + "\n";
    out += "interaction.grad_g = " + detail::fmt_list(s.tab.g) + "\n";
  }
  return out;
}

inline ModelSpec from_config_string(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("ModelSpec config: missing key " + key);
    return it->second;
  };
  ModelSpec s;
  s.beta = std::stod(need("beta"));
  s.dimension = std::stoi(need("dimension"));
  s.kappa = std::stod(need("kappa"));
  s.lipschitz_L = std::stod(need("lipschitz_L"));
  const std::string ck = need("confinement.kind");
  if (ck == "quadratic")
    s.confinement = ConfinementKind::Quadratic;
  else if (ck == "quartic_quadratic")
    s.confinement = ConfinementKind::QuarticQuadratic;
  else
    throw std::invalid_argument("ModelSpec config: unknown confinement.kind " + ck);
  s.a = std::stod(need("confinement.a"));
  s.q = std::stod(need("confinement.q"));
  const std::string ik = need("interaction.kind");
  if (ik == "quadratic_difference")
    s.interaction = InteractionKind::QuadraticDifference;
  else if (ik == "tabulated_gradient")
    s.interaction = InteractionKind::TabulatedGradient;
  else
    throw std::invalid_argument("ModelSpec config: unknown interaction.kind " + ik);
  s.b = std::stod(need("interaction.b"));
  if (s.interaction == InteractionKind::TabulatedGradient) {
    s.tab.r = detail::parse_list(need("interaction.grad_r"));
    s.tab.g = detail::parse_list(need("interaction.grad_g"));
  }
  s.validate();
  return s;
}

inline void save_model(const ModelSpec& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << to_config_string(s);
}

inline ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_config_string(ss.str());
}

}  // namespace chaosmeter
