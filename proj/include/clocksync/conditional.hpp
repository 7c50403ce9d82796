#pragma once

// Event-conditioned moment engine.
//
// Conditioned on the realized message times (but not on which pair spoke
// or on the noise), the expected statistics (R, D, d) obey an exact
// recursion:
//   * across a message-free window of length dt:
//       R += sigma^2 dt + 2 b d dt + b^2 dt^2,  D += 2 sigma^2 dt,  d += b dt
//   * across one message event, averaging over the sender/receiver draw:
//       (R, D)^T -> K (R, D)^T  and  d -> k_N d
// with K and k_N from DerivedScalars. Two consequences are implemented
// here:
//   * conditional_given_count: the expected statistics given exactly n
//     events by time t, averaged over the n event times (which are then
//     distributed as sorted uniforms), in closed form via geometric-type
//     sums of the eigenvalues of K;
//   * rao_blackwell_ensemble: a variance-reduced unbiased estimator that
//     samples only the event times and runs the exact recursion, so all
//     pair-choice and noise randomness is integrated out analytically.

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "clocksync/common.hpp"
#include "clocksync/model.hpp"
#include "clocksync/numerics.hpp"
#include "clocksync/rng.hpp"
#include "clocksync/stats.hpp"

namespace clocksync {

// A realized set of message times on [0, t_end), strictly increasing.
struct EpochSequence {
  double t_end = 0.0;
  std::vector<double> taus;

  void validate() const {
    require(finite(t_end) && t_end >= 0.0, errc::invalid_input,
            "EpochSequence: t_end must be finite and >= 0");
    double prev = 0.0;
    for (double tau : taus) {
      require(finite(tau) && tau > prev && tau < t_end, errc::invalid_input,
              "EpochSequence: times must be strictly increasing in (0, t_end)");
      prev = tau;
    }
  }
};

// Samples the Poisson message flow (rate delta_N) on [0, t_end).
inline EpochSequence sample_epoch_sequence(double delta, double t_end,
                                           rng::Stream& stream) {
  require(finite(delta) && delta > 0.0, errc::invalid_input,
          "sample_epoch_sequence: rate must be > 0");
  require(finite(t_end) && t_end >= 0.0, errc::invalid_input,
          "sample_epoch_sequence: t_end must be finite and >= 0");
  EpochSequence seq;
  seq.t_end = t_end;
  double t = stream.exponential(delta);
  while (t < t_end) {
    seq.taus.push_back(t);
    t += stream.exponential(delta);
  }
  return seq;
}

// Expected statistics over a message-free window, conditioned on the
// window containing no events (exact over noise and drift).
inline MomentVector free_moment_step(const ModelParams& p,
                                     const MomentVector& m, double dt) {
  require(finite(dt) && dt >= 0.0, errc::invalid_input,
          "free_moment_step: dt must be finite and >= 0");
  const double sig2 = p.sigma * p.sigma;
  const double b = p.v - p.r;
  MomentVector out;
  out.R = m.R + sig2 * dt + 2.0 * b * m.d * dt + b * b * dt * dt;
  out.D = (p.N >= 2) ? m.D + 2.0 * sig2 * dt : 0.0;
  out.d = m.d + b * dt;
  return out;
}

// Expected statistics across one message event, averaged over the random
// sender/receiver pair. Requires a positive merged rate.
inline MomentVector jump_moment_step(const ModelParams& p,
                                     const MomentVector& m) {
  const DerivedScalars s = derived_scalars(p);
  require(s.k_defined, errc::degenerate_rates,
          "jump_moment_step: merged message rate is zero");
  const Vec2 mapped = s.K * Vec2{m.R, m.D};
  MomentVector out;
  out.R = mapped.x;
  out.D = (p.N >= 2) ? mapped.y : 0.0;
  out.d = s.k_N * m.d;
  return out;
}

// Exact expected statistics at seq.t_end conditioned on the event times in
// seq: alternate free windows and averaged jumps.
inline MomentVector conditional_moments(const ModelParams& p,
                                        const MomentVector& init,
                                        const EpochSequence& seq) {
  p.validate();
  seq.validate();
  if (!seq.taus.empty()) {
    const DerivedScalars s = derived_scalars(p);
    require(s.k_defined, errc::degenerate_rates,
            "conditional_moments: events listed but merged rate is zero");
  }
  MomentVector m = init;
  double t_prev = 0.0;
  for (double tau : seq.taus) {
    m = free_moment_step(p, m, tau - t_prev);
    m = jump_moment_step(p, m);
    t_prev = tau;
  }
  return free_moment_step(p, m, seq.t_end - t_prev);
}

// ---------------------------------------------------------------------------
// Geometric-type sums used by conditional_given_count, written to stay
// accurate for n up to 10^6 and eigenvalues anywhere in (-1, 1]:
//   S_n(a)    = sum_{j=0..n} a^j
//   G_n(x,y)  = sum_{j=0..n} x^j y^{n-j}
//   M_n(a)    = sum_{j=0..n} (j+1) a^j
//   W_n(x,y)  = sum_{i=0..n} x^{n-i} sum_{m=0..i} y^m
// The _literal variants are the direct compensated loops; they serve as
// oracles in the test suite and as fallbacks where the closed forms lose
// precision (flagged by small (n+2)(1-a)).
// ---------------------------------------------------------------------------
namespace detail {

inline double s_literal(double a, std::int64_t n) {
  neumaier_sum acc;
  double pw = 1.0;
  for (std::int64_t j = 0; j <= n; ++j) {
    acc.add(pw);
    pw *= a;
  }
  return acc.value();
}

inline double g_literal(double x, double y, std::int64_t n) {
  neumaier_sum acc;
  // x^j y^{n-j}: accumulate with two running powers to avoid pow() calls.
  double xp = 1.0;
  for (std::int64_t j = 0; j <= n; ++j) {
    acc.add(xp * std::pow(y, static_cast<double>(n - j)));
    xp *= x;
  }
  return acc.value();
}

inline double m_literal(double a, std::int64_t n) {
  neumaier_sum acc;
  double pw = 1.0;
  for (std::int64_t j = 0; j <= n; ++j) {
    acc.add(static_cast<double>(j + 1) * pw);
    pw *= a;
  }
  return acc.value();
}

inline double w_literal(double x, double y, std::int64_t n) {
  // W_n = x W_{n-1} + S_n(y); forward recurrence, all terms >= 0 here.
  double s = 1.0;  // S_0(y)
  double w = 1.0;  // W_0
  for (std::int64_t i = 1; i <= n; ++i) {
    s = y * s + 1.0;
    w = x * w + s;
  }
  return w;
}

inline double geometric_sum(double a, std::int64_t n) {
  if (a == 1.0) return static_cast<double>(n + 1);
  if (a > 0.5) {
    // 1 - a^{n+1} via expm1/log1p keeps full precision as a -> 1.
    const double num = -std::expm1(static_cast<double>(n + 1) * std::log1p(a - 1.0));
    return num / (1.0 - a);
  }
  return (1.0 - std::pow(a, static_cast<double>(n + 1))) / (1.0 - a);
}

inline double cross_geometric_sum(double x, double y, std::int64_t n) {
  if (n == 0) return 1.0;
  if (x == y) return static_cast<double>(n + 1) * std::pow(x, static_cast<double>(n));
  if (x > 0.0 && y > 0.0) {
    const double p = std::log(x);
    const double q = std::log(y);
    const double gap = static_cast<double>(n + 1) * (p - q);
    if (std::abs(gap) < 1.0) {
      // Near-equal arguments: factor out y^n; the remaining ratio of
      // expm1 terms is cancellation-free.
      return std::exp(static_cast<double>(n) * q) * std::expm1(gap) /
             std::expm1(p - q);
    }
  }
  return (std::pow(x, static_cast<double>(n + 1)) -
          std::pow(y, static_cast<double>(n + 1))) /
         (x - y);
}

inline double ramp_geometric_sum(double a, std::int64_t n) {
  if (a == 1.0)
    return 0.5 * static_cast<double>(n + 1) * static_cast<double>(n + 2);
  if (a > 0.0 && static_cast<double>(n + 2) * (1.0 - a) < 0.1)
    return m_literal(a, n);
  const double an1 = std::pow(a, static_cast<double>(n + 1));
  const double one_m = 1.0 - a;
  return (1.0 - static_cast<double>(n + 2) * an1 +
          static_cast<double>(n + 1) * an1 * a) /
         (one_m * one_m);
}

inline double nested_geometric_sum(double x, double y, std::int64_t n) {
  if (y == 1.0) {
    // sum_i (i+1) x^{n-i} = (n+2) S_n(x) - M_n(x).
    return static_cast<double>(n + 2) * geometric_sum(x, n) -
           ramp_geometric_sum(x, n);
  }
  if (y > 0.0 && static_cast<double>(n + 2) * (1.0 - y) < 0.1)
    return w_literal(x, y, n);
  return (geometric_sum(x, n) - y * cross_geometric_sum(x, y, n)) / (1.0 - y);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Expected statistics at time t given exactly n events occurred in [0, t],
// averaged over the event times (sorted uniforms). Closed form: with
// eigenvalues a1 = K11, a2 = K22 of K and the decomposition of inputs in
// K's eigenbasis, the answer is a combination of the geometric-type sums
// above with the uniform-spacing moments
//   E gap = t/(n+1),  E gap^2 = 2t^2/((n+1)(n+2)),
//   E gap_i gap_j = t^2/((n+1)(n+2))  (i != j).
// ---------------------------------------------------------------------------
inline MomentVector conditional_given_count(const ModelParams& p,
                                            const MomentVector& init,
                                            std::int64_t n, double t) {
  p.validate();
  require(finite(init.R) && finite(init.D) && finite(init.d),
          errc::invalid_input, "conditional_given_count: non-finite init");
  require(finite(t) && t >= 0.0, errc::invalid_input,
          "conditional_given_count: t must be finite and >= 0");
  require(n >= 0 && n <= 1000000, errc::invalid_input,
          "conditional_given_count: n must lie in [0, 1e6]");
  const DerivedScalars s = derived_scalars(p);
  require(s.k_defined, errc::degenerate_rates,
          "conditional_given_count: merged message rate is zero");

  const double a1 = s.K.m11;
  const double a2 = s.K.m22;
  const double k21 = s.K.m21;
  // Second component of K's first eigenvector (1, e12); a1 - a2 =
  // (alpha_N + 2 beta_N)/delta_N > 0, computed directly from the rates.
  const double e12 = 2.0 * s.alpha_N / (s.alpha_N + 2.0 * s.beta_N);

  const double sig2 = p.sigma * p.sigma;
  const double b = s.b;
  const double nd = static_cast<double>(n);
  const double a1n = std::pow(a1, nd);
  const double a2n = std::pow(a2, nd);

  auto combine = [&](double coef1, double coef2) {
    return Vec2{coef1, coef1 * e12 + coef2};
  };

  // T0: homogeneous decay K^n applied to the initial pair.
  const double kn21 =
      (n >= 1) ? k21 * detail::cross_geometric_sum(a1, a2, n - 1) : 0.0;
  Vec2 V{a1n * init.R, kn21 * init.R + a2n * init.D};

  // T1: noise input sigma^2 (1, 2)^T per unit gap.
  {
    const double c1 = sig2;
    const double c2 = 2.0 * sig2 - sig2 * e12;
    const double w = t / (nd + 1.0);
    V = V + w * combine(c1 * detail::geometric_sum(a1, n),
                        c2 * detail::geometric_sum(a2, n));
  }

  // T2: coupling to the initial mean offset, input 2 b d0 (1, 0)^T per
  // unit gap, with the offset itself contracted by k_N = a1 per event.
  if (b != 0.0 && init.d != 0.0) {
    const double c1 = 1.0;
    const double c2 = -e12;
    const double w = 2.0 * b * init.d * t / (nd + 1.0);
    V = V + w * combine(c1 * (nd + 1.0) * a1n,
                        c2 * detail::cross_geometric_sum(a1, a2, n));
  }

  // T3: squared-skew input b^2 (1, 0)^T, quadratic in the gaps (diagonal
  // second moments plus the cross terms accumulated through the offset).
  if (b != 0.0) {
    const double c1 = 1.0;
    const double c2 = -e12;
    const double w = 2.0 * b * b * t * t / ((nd + 1.0) * (nd + 2.0));
    V = V + w * combine(c1 * detail::ramp_geometric_sum(a1, n),
                        c2 * detail::nested_geometric_sum(a2, a1, n));
  }

  MomentVector out;
  out.R = V.x;
  out.D = (p.N >= 2) ? V.y : 0.0;
  out.d = a1n * init.d + b * (t / (nd + 1.0)) * detail::geometric_sum(a1, n);
  return out;
}

// ---------------------------------------------------------------------------
// Variance-reduced ensemble estimator: per replica, sample only the Poisson
// event times and run the exact conditional recursion, snapshotting at each
// observation time. Unbiased for the expected statistics, with strictly
// smaller replica variance than the direct simulator whenever noise or pair
// choice contributes variance (Rao-Blackwell property of conditioning).
// Observation times falling on an event time are taken just before the
// event. Thread count affects wall time only, never the statistics.
// ---------------------------------------------------------------------------
inline EnsembleStats rao_blackwell_ensemble(const ModelParams& p,
                                            const MomentVector& init,
                                            std::span<const double> obs_times,
                                            std::int64_t n_samples,
                                            std::uint64_t master_seed,
                                            int threads = 0) {
  p.validate();
  require(finite(init.R) && finite(init.D) && finite(init.d) &&
              init.R >= 0.0 && init.D >= 0.0,
          errc::invalid_input, "rao_blackwell_ensemble: bad initial moments");
  detail::validate_obs_times(obs_times);
  require(n_samples >= 1, errc::invalid_input,
          "rao_blackwell_ensemble: need at least one sample");
  const DerivedScalars s = derived_scalars(p);
  require(s.delta_N > 0.0, errc::degenerate_rates,
          "rao_blackwell_ensemble: merged message rate must be positive");

  const double delta = s.delta_N;
  const double sig2 = p.sigma * p.sigma;
  const double b = s.b;
  const bool pairs = p.N >= 2;
  const Mat2 K = s.K;
  const double k = s.k_N;
  auto replica_fn = [&, delta, sig2, b, pairs, K, k](
                        std::int64_t replica, std::span<MomentVector> out) {
    rng::Stream stream(master_seed, static_cast<std::uint64_t>(replica));
    MomentVector m = init;
    double t_cur = 0.0;
    double t_next_event = stream.exponential(delta);
    auto free_step = [&](double dt) {
      m.R += sig2 * dt + 2.0 * b * m.d * dt + b * b * dt * dt;
      if (pairs) m.D += 2.0 * sig2 * dt;
      m.d += b * dt;
    };
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double t_obs = obs_times[j];
      while (t_next_event < t_obs) {
        free_step(t_next_event - t_cur);
        const Vec2 mapped = K * Vec2{m.R, m.D};
        m.R = mapped.x;
        m.D = pairs ? mapped.y : 0.0;
        m.d = k * m.d;
        t_cur = t_next_event;
        t_next_event += stream.exponential(delta);
      }
      free_step(t_obs - t_cur);
      t_cur = t_obs;
      out[j] = m;
    }
  };
  const auto rows = detail::run_replicas_parallel(n_samples, obs_times.size(),
                                                  threads, replica_fn);
  return detail::reduce_replicas(obs_times, rows);
}

}  // namespace clocksync
