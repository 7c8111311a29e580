#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaosmeter/model.hpp"
#include "chaosmeter/parallel.hpp"
#include "chaosmeter/rng.hpp"

namespace chaosmeter {

struct SamplerConfig {
  double step = 0.0;        // <= 0 selects 0.1 / (beta (kappa + 2L))
  std::int64_t burn_in = -1;  // < 0 selects ceil(10 / (h beta kappa)) steps
  std::int64_t thin = -1;     // < 0 targets lag-1 autocorrelation of sum x_i^2 below 0.2
  std::int64_t n_samples = 1000;
  std::uint64_t seed = 0;
  bool mala = true;
  int chains = 1;
};

struct DivergenceError : std::runtime_error {
  std::int64_t step;
  int chain;
  DivergenceError(std::int64_t s, int c)
      : std::runtime_error("sampler diverged: non-finite state at step " + std::to_string(s) +
                           " of chain " + std::to_string(c)),
        step(s),
        chain(c) {}
};

struct ParticleEnsemble {
  std::int64_t S = 0;
  int n = 0;
  int d = 0;
  std::vector<double> samples;  // S x n x d, row-major
  ModelSpec model;
  SamplerConfig config;  // resolved values
  double acceptance_rate = std::numeric_limits<double>::quiet_NaN();
  std::string warning;

  double at(std::int64_t s, int i, int dim) const {
    return samples[std::size_t((s * n + i) * d + dim)];
  }
};

/// Fills in the model-scaled defaults; validates the explicit-scheme
/// stability requirement h beta (kappa + 2L) < 2.
inline SamplerConfig resolve_defaults(const ModelSpec& spec, SamplerConfig cfg) {
  const double stiffness = spec.beta * (spec.kappa + 2.0 * spec.lipschitz_L);
  if (cfg.step <= 0.0) cfg.step = 0.1 / stiffness;
  if (cfg.step * stiffness >= 2.0)
    throw std::invalid_argument("SamplerConfig: step violates h beta (kappa + 2L) < 2");
  if (cfg.burn_in < 0)
    cfg.burn_in = std::int64_t(std::ceil(10.0 / (cfg.step * spec.beta * spec.kappa)));
  if (cfg.thin < 0) {
    // Slowest quadratic statistic decays at rate 2 beta kappa; lag-1
    // autocorrelation exp(-2 beta kappa h thin) < 0.2 needs thin > ln(5)/(2 beta kappa h).
    cfg.thin = std::max<std::int64_t>(
        1, std::int64_t(std::ceil(std::log(5.0) / (2.0 * spec.beta * spec.kappa * cfg.step))));
  }
  if (cfg.thin < 1) throw std::invalid_argument("SamplerConfig: thin must be >= 1");
  if (cfg.n_samples < 1) throw std::invalid_argument("SamplerConfig: n_samples must be >= 1");
  if (cfg.chains < 1) throw std::invalid_argument("SamplerConfig: chains must be >= 1");
  return cfg;
}

namespace detail {

struct ChainResult {
  std::vector<double> samples;
  std::int64_t accepted = 0;
  std::int64_t proposals = 0;
};

// One chain of Euler-Maruyama / MALA. Noise is addressed by
// (seed; stream=chain; index=step; slot), so trajectories are reproducible
// for any worker count. Slot 0 carries the acceptance uniform; proposal
// normals live in slots 1..ceil(nd/2).
inline ChainResult run_chain(const ModelSpec& spec, int n, const SamplerConfig& cfg, int chain,
                             std::int64_t take) {
  const int d = spec.dimension;
  const double h = cfg.step;
  const double noise_scale = std::sqrt(2.0 * h);
  const RandomStream rng(cfg.seed, std::uint32_t(chain));

  Configuration state;
  state.x.resize(n, d);
  {
    const double sd0 = 1.0 / std::sqrt(spec.beta * spec.kappa);
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int dim = 0; dim < d; ++dim, ++idx) {
        const auto z = rng.normal_pair(0, std::uint32_t(1 + idx / 2));
        state.x(i, dim) = sd0 * (idx % 2 == 0 ? z.first : z.second);
      }
  }

  double e_current = energy(spec, state);
  Eigen::MatrixXd g_current = drift_all(spec, state);

  ChainResult out;
  out.samples.reserve(std::size_t(take) * std::size_t(n) * std::size_t(d));

  Configuration proposal;
  proposal.x.resize(n, d);
  Eigen::MatrixXd noise(n, d);

  const std::int64_t total_steps = cfg.burn_in + (take - 1) * cfg.thin + 1;
  std::int64_t collected = 0;
  for (std::int64_t step = 0; step < total_steps; ++step) {
    const std::uint64_t noise_index = std::uint64_t(step) + 1;
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int dim = 0; dim < d; ++dim, ++idx) {
        const auto z = rng.normal_pair(noise_index, std::uint32_t(1 + idx / 2));
        noise(i, dim) = (idx % 2 == 0 ? z.first : z.second);
      }
    proposal.x = state.x + h * g_current + noise_scale * noise;

    if (cfg.mala) {
      const double e_prop = energy(spec, proposal);
      const Eigen::MatrixXd g_prop = drift_all(spec, proposal);
      const double forward = (proposal.x - state.x - h * g_current).squaredNorm();
      const double backward = (state.x - proposal.x - h * g_prop).squaredNorm();
      const double log_accept = (e_current - e_prop) + (forward - backward) / (4.0 * h);
      const double u = rng.uniform(noise_index, 0);
      if (step >= cfg.burn_in) ++out.proposals;
      if (std::log(u) < log_accept) {
        state.x.swap(proposal.x);
        e_current = e_prop;
        g_current = g_prop;
        if (step >= cfg.burn_in) ++out.accepted;
      }
    } else {
      state.x.swap(proposal.x);
      g_current = drift_all(spec, state);
    }

    if (!state.x.allFinite()) throw DivergenceError(step, chain);

    if (step >= cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0 && collected < take) {
      for (int i = 0; i < n; ++i)
        for (int dim = 0; dim < d; ++dim) out.samples.push_back(state.x(i, dim));
      ++collected;
    }
  }
  return out;
}

}  // namespace detail

/// Samples the n-particle Gibbs measure by discretized Langevin dynamics,
/// Metropolis-corrected by default so the invariant law is exact.
/// Deterministic for a fixed seed, independent of the worker count.
inline ParticleEnsemble sample_gibbs(const ModelSpec& spec, int n, SamplerConfig cfg = {}) {
  if (n < 2) throw std::invalid_argument("sample_gibbs: n must be >= 2");
  spec.validate();
  cfg = resolve_defaults(spec, cfg);

  // Split samples across chains; chain c takes the c-th share.
  std::vector<std::int64_t> take(std::size_t(cfg.chains));
  for (int c = 0; c < cfg.chains; ++c)
    take[std::size_t(c)] = cfg.n_samples / cfg.chains + (c < cfg.n_samples % cfg.chains ? 1 : 0);

  std::vector<detail::ChainResult> results(std::size_t(cfg.chains));
  parallel_for(std::size_t(cfg.chains), [&](std::size_t c) {
    if (take[c] > 0) results[c] = detail::run_chain(spec, n, cfg, int(c), take[c]);
  });

  ParticleEnsemble ens;
  ens.S = cfg.n_samples;
  ens.n = n;
  ens.d = spec.dimension;
  ens.model = spec;
  ens.config = cfg;
  ens.samples.reserve(std::size_t(cfg.n_samples) * std::size_t(n) * std::size_t(spec.dimension));
  std::int64_t accepted = 0, proposals = 0;
  for (const auto& r : results) {
    ens.samples.insert(ens.samples.end(), r.samples.begin(), r.samples.end());
    accepted += r.accepted;
    proposals += r.proposals;
  }
  if (cfg.mala && proposals > 0) {
    ens.acceptance_rate = double(accepted) / double(proposals);
    if (ens.acceptance_rate < 0.3 || ens.acceptance_rate > 0.9) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "MALA acceptance rate %.3f outside [0.3, 0.9]; consider adjusting the step",
                    ens.acceptance_rate);
      ens.warning = buf;
    }
  }
  return ens;
}

/// First k coordinates of every sample (S x k x d). By exchangeability any
/// k-subset has the same law.
inline std::vector<double> marginal_slice(const ParticleEnsemble& ens, int k) {
  if (k < 1 || k > ens.n) throw std::out_of_range("marginal_slice: k out of range [1, n]");
  std::vector<double> out;
  out.reserve(std::size_t(ens.S) * std::size_t(k) * std::size_t(ens.d));
  for (std::int64_t s = 0; s < ens.S; ++s)
    for (int i = 0; i < k; ++i)
      for (int dim = 0; dim < ens.d; ++dim) out.push_back(ens.at(s, i, dim));
  return out;
}

/// Slice of an arbitrary coordinate subset; used to exercise exchangeability.
inline std::vector<double> subset_slice(const ParticleEnsemble& ens,
                                        const std::vector<int>& coords) {
  std::vector<double> out;
  out.reserve(std::size_t(ens.S) * coords.size() * std::size_t(ens.d));
  for (std::int64_t s = 0; s < ens.S; ++s)
    for (int i : coords) {
      if (i < 0 || i >= ens.n) throw std::out_of_range("subset_slice: coordinate out of range");
      for (int dim = 0; dim < ens.d; ++dim) out.push_back(ens.at(s, i, dim));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Flat binary persistence: magic "CHME", then little-endian 64-bit fields
// version, S, n, d, seed, followed by S*n*d IEEE-754 doubles, row-major.

namespace detail {

static_assert(std::numeric_limits<double>::is_iec559, "IEEE-754 doubles required");

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = (unsigned char)(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(out, bits);
}

inline double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace detail

inline constexpr std::uint64_t kEnsembleFormatVersion = 1;

inline void save_ensemble(const ParticleEnsemble& ens, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_ensemble: cannot open " + path);
  out.write("CHME", 4);
  detail::put_u64(out, kEnsembleFormatVersion);
  detail::put_u64(out, std::uint64_t(ens.S));
  detail::put_u64(out, std::uint64_t(ens.n));
  detail::put_u64(out, std::uint64_t(ens.d));
  detail::put_u64(out, ens.config.seed);
  for (double x : ens.samples) detail::put_f64(out, x);
  if (!out) throw std::runtime_error("save_ensemble: write failed for " + path);
}

/// Restores geometry, seed and samples; model and the remaining sampler
/// settings are not part of the format.
inline ParticleEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_ensemble: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CHME", 4) != 0)
    throw std::runtime_error("load_ensemble: bad magic in " + path);
  const std::uint64_t version = detail::get_u64(in);
  if (version != kEnsembleFormatVersion)
    throw std::runtime_error("load_ensemble: unsupported version in " + path);
  ParticleEnsemble ens;
  ens.S = std::int64_t(detail::get_u64(in));
  ens.n = int(detail::get_u64(in));
  ens.d = int(detail::get_u64(in));
  ens.config.seed = detail::get_u64(in);
  const std::size_t count = std::size_t(ens.S) * std::size_t(ens.n) * std::size_t(ens.d);
  ens.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) ens.samples[i] = detail::get_f64(in);
  if (!in) throw std::runtime_error("load_ensemble: truncated file " + path);
  return ens;
}

/// CSV export of the first k coordinates, one sample per row.
inline void write_marginals_csv(const ParticleEnsemble& ens, int k, std::ostream& out) {
  if (k < 1 || k > ens.n) throw std::out_of_range("write_marginals_csv: k out of range");
  for (int i = 0; i < k; ++i)
    for (int dim = 0; dim < ens.d; ++dim) {
      if (i || dim) out << ',';
      out << "coord_" << (i + 1);
      if (ens.d > 1) out << "_dim_" << (dim + 1);
    }
  out << '\n';
  char buf[40];
  for (std::int64_t s = 0; s < ens.S; ++s) {
    for (int i = 0; i < k; ++i)
      for (int dim = 0; dim < ens.d; ++dim) {
        if (i || dim) out << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", ens.at(s, i, dim));
        out << buf;
      }
    out << '\n';
  }
}

}  // namespace chaosmeter
