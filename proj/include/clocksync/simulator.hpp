#pragma once

// Direct Monte Carlo simulator for the clock network.
//
// State is tracked as sensor offsets y_j = x_j - x_server, which evolve as
// independent drifting Brownian motions dy = (v - r) dt + sigma dW between
// messages and are overwritten by message jumps:
//   server -> sensor j : y_j := 0 (exactly),
//   sensor i -> sensor j : y_j := y_i.
// Between events a sensor's offset is advanced lazily: its Brownian
// increment is sampled only when the sensor is next touched (as a message
// participant or at an observation time). By independence of Brownian
// increments this is distributionally exact.
//
// Per event the draw order is fixed: (1) inter-event gap, (2) sender
// uniform, (3) receiver uniform, (4) the sender's pending Brownian
// increment when the sender is a sensor. Observation times falling exactly
// on an event time are read just before the event. Every replica gets its
// own counter-derived RNG stream, so ensembles are reproducible and
// independent of the thread count.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "clocksync/common.hpp"
#include "clocksync/model.hpp"
#include "clocksync/rng.hpp"
#include "clocksync/stats.hpp"

namespace clocksync {

// Initial configuration: zero offsets, i.i.d. Gaussian sensor offsets, or
// an explicit absolute configuration (server first).
struct InitialCondition {
  enum class Kind { zeros, gaussian, explicit_values };
  Kind kind = Kind::zeros;
  double mean = 0.0;   // gaussian only
  double sd = 0.0;     // gaussian only, >= 0
  std::vector<double> x;  // explicit_values only, size N+1, server first

  void validate(std::int64_t N) const {
    switch (kind) {
      case Kind::zeros:
        break;
      case Kind::gaussian:
        require(finite(mean) && finite(sd) && sd >= 0.0, errc::invalid_input,
                "InitialCondition: gaussian needs finite mean and sd >= 0");
        break;
      case Kind::explicit_values: {
        require(x.size() == static_cast<std::size_t>(N) + 1,
                errc::invalid_input,
                "InitialCondition: explicit values must list server plus N "
                "sensors");
        for (double v : x)
          require(finite(v), errc::invalid_input,
                  "InitialCondition: non-finite value");
        break;
      }
    }
  }
};

// Expected statistics of the initial configuration, for seeding the
// closed-form and ODE formulas: Gaussian offsets with mean m and spread s
// give R0 = m^2 + s^2, D0 = 2 s^2, d0 = m.
inline MomentVector initial_moments(const ModelParams& p,
                                    const InitialCondition& init) {
  p.validate();
  init.validate(p.N);
  switch (init.kind) {
    case InitialCondition::Kind::zeros:
      return {0.0, 0.0, 0.0};
    case InitialCondition::Kind::gaussian: {
      MomentVector m;
      m.R = init.mean * init.mean + init.sd * init.sd;
      m.D = (p.N >= 2) ? 2.0 * init.sd * init.sd : 0.0;
      m.d = init.mean;
      return m;
    }
    case InitialCondition::Kind::explicit_values: {
      ClockConfig cfg;
      cfg.x = init.x;
      return moments_of_config(cfg);
    }
  }
  fail(errc::invalid_input, "InitialCondition: unknown kind");
}

// Full simulation request.
struct SimConfig {
  ModelParams params;
  InitialCondition init;
  std::vector<double> obs_times;
  std::int64_t replicas = 1;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  rng::InterEventLaw law = rng::InterEventLaw::exponential();

  void validate() const {
    params.validate();
    init.validate(params.N);
    detail::validate_obs_times(obs_times);
    require(replicas >= 1, errc::invalid_input,
            "SimConfig: replicas must be >= 1");
    require(threads >= 0, errc::invalid_input,
            "SimConfig: threads must be >= 0");
    law.validate();
  }
};

// Eagerly evolves an explicit configuration across a message-free window:
// the server advances by r*dt, each sensor (in index order) by
// v*dt + sigma*sqrt(dt)*Normal. Exposed for distributional tests; the
// replica engine below uses the equivalent lazy form.
inline ClockConfig free_step(const ModelParams& p, const ClockConfig& cfg,
                             double dt, rng::Stream& stream) {
  p.validate();
  cfg.validate();
  require(cfg.sensor_count() == p.N, errc::invalid_input,
          "free_step: configuration size does not match N");
  require(finite(dt) && dt >= 0.0, errc::invalid_input,
          "free_step: dt must be finite and >= 0");
  ClockConfig out = cfg;
  out.x[0] += p.r * dt;
  const double sig_sqrt = p.sigma * std::sqrt(dt);
  for (std::int64_t j = 1; j <= p.N; ++j)
    out.node(j + 1) += p.v * dt + sig_sqrt * stream.normal();
  return out;
}

namespace detail {

// One replica: lazy offset evolution, jumps, observation snapshots.
inline void run_replica_into(const ModelParams& p, const InitialCondition& init,
                             std::span<const double> obs_times,
                             const rng::InterEventLaw& law,
                             std::uint64_t master_seed, std::int64_t replica,
                             std::span<MomentVector> out) {
  rng::Stream stream(master_seed, static_cast<std::uint64_t>(replica));
  const auto n_sensors = static_cast<std::size_t>(p.N);
  const double b = p.v - p.r;

  std::vector<double> y(n_sensors, 0.0);   // offsets vs server
  std::vector<double> u(n_sensors, 0.0);   // last-advanced times
  double x1_0 = 0.0;
  switch (init.kind) {
    case InitialCondition::Kind::zeros:
      break;
    case InitialCondition::Kind::gaussian:
      for (std::size_t j = 0; j < n_sensors; ++j)
        y[j] = init.mean + init.sd * stream.normal();
      break;
    case InitialCondition::Kind::explicit_values:
      x1_0 = init.x[0];
      for (std::size_t j = 0; j < n_sensors; ++j)
        y[j] = init.x[j + 1] - x1_0;
      break;
  }

  auto advance = [&](std::size_t j, double t) {
    const double dt = t - u[j];
    if (dt > 0.0) {
      y[j] += b * dt + p.sigma * std::sqrt(dt) * stream.normal();
      u[j] = t;
    }
  };

  const DerivedScalars s = derived_scalars(p);
  const double p_server = s.delta_N > 0.0 ? p.alpha / s.delta_N : 0.0;
  double t_event = s.delta_N > 0.0
                       ? law.sample(stream, s.delta_N)
                       : std::numeric_limits<double>::infinity();

  ClockConfig snapshot;
  snapshot.x.resize(n_sensors + 1);
  for (std::size_t obs = 0; obs < out.size(); ++obs) {
    const double t_obs = obs_times[obs];
    while (t_event < t_obs) {
      const double u1 = stream.uniform01();
      if (u1 < p_server) {
        // Server sends: the receiver's clock is overwritten, so its
        // pending Brownian increment is irrelevant and never sampled.
        const double u2 = stream.uniform01();
        auto recv = static_cast<std::size_t>(u2 * static_cast<double>(n_sensors));
        if (recv >= n_sensors) recv = n_sensors - 1;
        y[recv] = 0.0;
        u[recv] = t_event;
      } else {
        auto send = static_cast<std::size_t>(
            (u1 - p_server) / (1.0 - p_server) * static_cast<double>(n_sensors));
        if (send >= n_sensors) send = n_sensors - 1;
        const double u2 = stream.uniform01();
        auto k = static_cast<std::size_t>(u2 * static_cast<double>(n_sensors - 1));
        if (k >= n_sensors - 1) k = n_sensors - 2;
        const std::size_t recv = k + (k >= send ? 1 : 0);
        advance(send, t_event);
        y[recv] = y[send];
        u[recv] = t_event;
      }
      t_event += law.sample(stream, s.delta_N);
    }
    for (std::size_t j = 0; j < n_sensors; ++j) advance(j, t_obs);
    snapshot.x[0] = x1_0 + p.r * t_obs;
    for (std::size_t j = 0; j < n_sensors; ++j)
      snapshot.x[j + 1] = snapshot.x[0] + y[j];
    out[obs] = moments_of_config(snapshot);
  }
}

}  // namespace detail

// Runs a single replica and returns its statistics at each observation
// time. Replica index selects the RNG stream; results are identical to the
// corresponding row of run_ensemble.
inline std::vector<MomentVector> run_replica(const SimConfig& cfg,
                                             std::int64_t replica) {
  cfg.validate();
  require(replica >= 0, errc::invalid_input, "run_replica: bad replica index");
  std::vector<MomentVector> out(cfg.obs_times.size());
  detail::run_replica_into(cfg.params, cfg.init, cfg.obs_times, cfg.law,
                           cfg.master_seed, replica,
                           std::span<MomentVector>(out));
  return out;
}

// Runs the full ensemble. Statistics are byte-identical for any thread
// count: replicas use counter-derived streams and the reduction is a
// fixed-order compensated sum over replica indices.
inline EnsembleStats run_ensemble(const SimConfig& cfg) {
  cfg.validate();
  auto fn = [&cfg](std::int64_t replica, std::span<MomentVector> out) {
    detail::run_replica_into(cfg.params, cfg.init, cfg.obs_times, cfg.law,
                             cfg.master_seed, replica, out);
  };
  const auto rows = detail::run_replicas_parallel(
      cfg.replicas, cfg.obs_times.size(), cfg.threads, fn);
  return detail::reduce_replicas(cfg.obs_times, rows);
}

}  // namespace clocksync
