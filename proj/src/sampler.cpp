#include "dipsmc/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dipsmc/errors.hpp"
#include "dipsmc/estimates.hpp"
#include "dipsmc/parallel.hpp"

namespace dipsmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// key prefix separating ensemble-level draws from per-particle streams
constexpr std::uint64_t kResampleTag = 0x5245534D504C4531ull;

double log_sum_exp(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

std::vector<double> Ensemble::weights() const {
  std::vector<double> w(log_weights.size());
  for (std::size_t p = 0; p < w.size(); ++p) w[p] = std::exp(log_weights[p]);
  return w;
}

double ess(const std::vector<double>& weights) {
  if (weights.empty()) throw NumericalError("ess of empty weight vector");
  double sum = 0.0, sum2 = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw NumericalError("ess: weights must be non-negative and finite");
    sum += w;
    sum2 += w * w;
  }
  if (sum <= 0.0) throw NumericalError("ess: all weights are zero");
  return (sum * sum) / sum2;
}

double ess_from_log(const std::vector<double>& log_weights) {
  if (log_weights.empty()) throw NumericalError("ess of empty weight vector");
  const double lse = log_sum_exp(log_weights);
  if (lse == -kInf) throw NumericalError("ess: all weights are zero");
  double sum2 = 0.0;
  for (double lw : log_weights) {
    if (std::isnan(lw)) throw NumericalError("ess: NaN log weight");
    const double w = std::exp(lw - lse);
    sum2 += w * w;
  }
  return 1.0 / sum2;
}

std::vector<int> systematic_resample(rng::Stream& rng, const std::vector<double>& weights,
                                     std::size_t n_out) {
  const std::size_t n = weights.size();
  if (n == 0) throw NumericalError("systematic_resample: empty weights");
  if (n_out == 0) n_out = n;
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw NumericalError("systematic_resample: invalid weight");
    sum += w;
  }
  if (sum <= 0.0) throw NumericalError("systematic_resample: all weights are zero");

  const double u = rng.uniform();
  std::vector<int> ancestors(n_out);
  std::size_t i = 0;
  double cum = weights[0] / sum;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double pos = (u + static_cast<double>(j)) / static_cast<double>(n_out);
    while (pos >= cum && i + 1 < n) {
      ++i;
      cum += weights[i] / sum;
    }
    ancestors[j] = static_cast<int>(i);
  }
  return ancestors;
}

namespace {

struct Tentative {
  std::vector<double> logw;  // normalized
  double ess_val = 0.0;
};

Tentative reweight(const std::vector<double>& logw, const std::vector<double>& loglik,
                   double delta) {
  Tentative t;
  t.logw.resize(logw.size());
  for (std::size_t p = 0; p < logw.size(); ++p) {
    if (std::isnan(loglik[p])) throw NumericalError("propose_delta: NaN log likelihood");
    t.logw[p] = logw[p] + delta * loglik[p];
  }
  const double lse = log_sum_exp(t.logw);
  if (lse == -kInf || std::isnan(lse))
    throw NumericalError("propose_delta: all particle weights vanished");
  for (auto& lw : t.logw) lw -= lse;
  t.ess_val = ess_from_log(t.logw);
  return t;
}

}  // namespace

DeltaResult propose_delta(const std::vector<double>& log_weights,
                          const std::vector<double>& log_lik, double f,
                          const AdaptConfig& adapt) {
  if (log_weights.size() != log_lik.size() || log_weights.empty())
    throw std::invalid_argument("propose_delta: size mismatch");
  if (!(f >= 0.0 && f < 1.0)) throw std::invalid_argument("propose_delta: f outside [0, 1)");

  DeltaResult res;
  res.ess_old = ess_from_log(log_weights);
  const double band_lo = adapt.ess_ratio_min;
  const double band_hi = adapt.ess_ratio_max;
  const double cap = 1.0 - f;

  auto ratio_of = [&](const Tentative& t) { return t.ess_val / res.ess_old; };
  auto finish = [&](double delta, bool at_boundary, bool terminal) {
    Tentative t = reweight(log_weights, log_lik, delta);
    res.delta = delta;
    res.ratio = ratio_of(t);
    res.ess_new = t.ess_val;
    res.new_log_weights = std::move(t.logw);
    res.at_boundary = at_boundary;
    res.terminal = terminal;
    return res;
  };

  if (cap <= adapt.delta_max) {
    // the step reaching f = 1 exactly is exempt from the ratio band:
    // bisecting here could stall termination
    return finish(cap, false, true);
  }

  double hi = adapt.delta_max;
  Tentative t_hi = reweight(log_weights, log_lik, hi);
  double delta;
  bool at_boundary = false;
  if (ratio_of(t_hi) >= band_lo) {
    // in the band, or too conservative even at the cap: delta_max is binding
    delta = hi;
    at_boundary = ratio_of(t_hi) > band_hi;
  } else {
    double lo = adapt.delta_min;
    Tentative t_lo = reweight(log_weights, log_lik, lo);
    if (ratio_of(t_lo) < band_lo) {
      delta = lo;  // even the smallest step is too aggressive
      at_boundary = true;
    } else {
      // bracket: ratio(lo) >= band_lo > ratio(hi); bisect for the band
      bool found = false;
      for (int it = 0; it < adapt.bisection_max_iters && hi - lo > adapt.bisection_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        Tentative t_mid = reweight(log_weights, log_lik, mid);
        const double r = ratio_of(t_mid);
        if (r < band_lo) {
          hi = mid;
          t_hi = std::move(t_mid);
        } else if (r > band_hi) {
          lo = mid;
          t_lo = std::move(t_mid);
        } else {
          delta = mid;
          found = true;
          break;
        }
      }
      if (!found) {
        // collapsed interval: pick the bound whose ratio is closest to the band
        auto dist = [&](double r) {
          if (r < band_lo) return band_lo - r;
          if (r > band_hi) return r - band_hi;
          return 0.0;
        };
        delta = dist(ratio_of(t_lo)) <= dist(ratio_of(t_hi)) ? lo : hi;
        at_boundary = true;
      }
    }
  }

  if (cap - delta < adapt.delta_min) {
    // never leave a remainder below delta_min: the eventual terminal step
    // must itself satisfy delta >= delta_min.  The margin keeps the
    // remainder above delta_min despite rounding in the f update.
    delta = std::max(cap - adapt.delta_min * (1.0 + 1e-10), adapt.delta_min);
    at_boundary = true;
  }
  return finish(delta, at_boundary, false);
}

SamplerOutput run(std::uint64_t seed, const Topography& b, const LeadField& lf,
                  const SourceGrid& grid, const NoiseModel& noise, const PriorParams& prior,
                  const MoveParams& moves, const AdaptConfig& adapt) {
  if (adapt.n_particles < 2) throw ConfigError("sampler needs at least two particles");
  if (lf.n_cells() != grid.n_cells())
    throw DataError("lead-field has " + std::to_string(lf.n_cells()) + " cells but grid has " +
                    std::to_string(grid.n_cells()));
  if (b.values.size() != lf.n_sensors())
    throw DataError("topography size " + std::to_string(b.values.size()) +
                    " does not match lead-field sensor count " + std::to_string(lf.n_sensors()));

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t np = static_cast<std::size_t>(adapt.n_particles);

  SamplerOutput out;
  out.seed = seed;
  Ensemble& ens = out.ensemble;
  ens.particles.resize(np);
  ens.log_weights.assign(np, -std::log(static_cast<double>(np)));
  ens.f = 0.0;
  ens.iteration = 1;

  std::vector<double> loglik(np);
  par::parallel_for(np, [&](std::size_t p) {
    auto st = rng::make_stream(seed, {0, p});
    ens.particles[p] = sample_prior(st, prior, grid.n_cells());
    loglik[p] = log_likelihood(b, ens.particles[p], lf, noise);
  });

  auto record = [&](double delta, double ess_val, double ratio, double ess_post, bool resampled,
                    bool at_boundary, bool terminal) {
    IterationRecord rec;
    rec.iteration = ens.iteration;
    rec.f = ens.f;
    rec.delta = delta;
    rec.ess = ess_val;
    rec.ess_ratio = ratio;
    rec.ess_post = ess_post;
    rec.resampled = resampled;
    rec.at_boundary = at_boundary;
    rec.terminal = terminal;
    rec.sigma_i = ens.f > 0.0 ? noise.sigma() / std::sqrt(ens.f) : kInf;
    rec.posterior_nd = posterior_n_dipoles(ens, prior.max_dipoles);
    out.history.push_back(std::move(rec));
  };
  record(0.0, static_cast<double>(np), kNaN, static_cast<double>(np), false, false, false);

  while (ens.f < 1.0) {
    ens.iteration += 1;
    DeltaResult dr = propose_delta(ens.log_weights, loglik, ens.f, adapt);
    ens.log_weights = std::move(dr.new_log_weights);
    const double f_new = dr.terminal ? 1.0 : ens.f + dr.delta;

    bool resampled = false;
    if (dr.ess_new < adapt.resample_fraction * static_cast<double>(np)) {
      auto rs = rng::make_stream(seed, {kResampleTag, static_cast<std::uint64_t>(ens.iteration)});
      const std::vector<int> ancestors = systematic_resample(rs, ens.weights());
      std::vector<SourceConfig> next(np);
      std::vector<double> next_ll(np);
      for (std::size_t p = 0; p < np; ++p) {
        next[p] = ens.particles[static_cast<std::size_t>(ancestors[p])];
        next_ll[p] = loglik[static_cast<std::size_t>(ancestors[p])];
      }
      ens.particles = std::move(next);
      loglik = std::move(next_ll);
      ens.log_weights.assign(np, -std::log(static_cast<double>(np)));
      resampled = true;
    }
    const double ess_post = resampled ? ess(ens.weights()) : dr.ess_new;

    const LogTarget target = [&, f_new](const SourceConfig& c) {
      return tempered_log_target(b, c, lf, noise, prior, grid, f_new);
    };
    par::parallel_for(np, [&](std::size_t p) {
      auto st = rng::make_stream(seed, {static_cast<std::uint64_t>(ens.iteration), p});
      ens.particles[p] = full_sweep(st, ens.particles[p], target, grid, prior, moves);
      loglik[p] = log_likelihood(b, ens.particles[p], lf, noise);
    });

    ens.f = f_new;
    record(dr.delta, dr.ess_new, dr.ratio, ess_post, resampled, dr.at_boundary, dr.terminal);
    if (ens.iteration > 200000)
      throw NumericalError("adaptive tempering failed to reach f = 1");
  }

  out.wall_time_s =
      std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() -
                                                                t0)
          .count();
  return out;
}

}  // namespace dipsmc
