#pragma once

// Core model of the clock network: one reference node ("server", node 1)
// whose clock advances perfectly at rate r, plus N identical sensor nodes
// (nodes 2..N+1) whose clocks drift at rate v with Brownian noise of
// strength sigma. Messages are sent at exponential rates (alpha in total
// from the server to a uniformly random sensor, beta from each sensor to a
// uniformly random other sensor); a received message makes the receiver
// adopt the sender's clock value instantly.
//
// Node indexing convention: the public API uses 1-based node ids matching
// the description above (node 1 = server). ClockConfig stores readings in a
// contiguous vector with x[0] = server, x[j-1] = node j.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clocksync/common.hpp"

namespace clocksync {

// ---------------------------------------------------------------------------
// Physical parameters of the network.
// ---------------------------------------------------------------------------
struct ModelParams {
  std::int64_t N = 1;   // number of sensor nodes (>= 1)
  double r = 0.0;       // server clock frequency (s/s)
  double v = 0.0;       // sensor clock frequency (s/s)
  double sigma = 0.0;   // sensor noise strength (s per sqrt(s)), >= 0
  double alpha = 0.0;   // total server->sensor message rate (1/s), >= 0
  double beta = 0.0;    // per-sensor sensor->sensor message rate (1/s), >= 0

  void validate() const {
    require(N >= 1, errc::invalid_input, "ModelParams: N must be >= 1");
    require(finite(r) && finite(v), errc::invalid_input,
            "ModelParams: frequencies must be finite");
    require(finite(sigma) && sigma >= 0.0, errc::invalid_input,
            "ModelParams: sigma must be finite and >= 0");
    require(finite(alpha) && alpha >= 0.0, errc::invalid_input,
            "ModelParams: alpha must be finite and >= 0");
    require(finite(beta) && beta >= 0.0, errc::invalid_input,
            "ModelParams: beta must be finite and >= 0");
    require(!(beta > 0.0 && N < 2), errc::invalid_input,
            "ModelParams: sensor-to-sensor messages (beta > 0) require N >= 2");
  }
};

// ---------------------------------------------------------------------------
// One instantaneous realization of all N+1 clock readings.
// ---------------------------------------------------------------------------
struct ClockConfig {
  std::vector<double> x;  // size N+1; x[0] = server reading

  static ClockConfig zeros(std::int64_t N) {
    ClockConfig c;
    c.x.assign(static_cast<std::size_t>(N + 1), 0.0);
    return c;
  }

  std::int64_t sensor_count() const {
    return static_cast<std::int64_t>(x.size()) - 1;
  }

  // Reading of the 1-based node id (node 1 = server).
  double& node(std::int64_t id) { return x[static_cast<std::size_t>(id - 1)]; }
  double node(std::int64_t id) const {
    return x[static_cast<std::size_t>(id - 1)];
  }

  void validate() const {
    require(x.size() >= 2, errc::invalid_input,
            "ClockConfig: need the server plus at least one sensor");
    for (double xi : x)
      require(finite(xi), errc::invalid_input,
              "ClockConfig: non-finite clock reading");
  }
};

// ---------------------------------------------------------------------------
// The three desynchronization statistics of a configuration (or their
// expectations over the process law):
//   R = mean squared sensor offset from the server,
//   D = mean squared offset over ordered sensor pairs,
//   d = mean sensor offset from the server.
// ---------------------------------------------------------------------------
struct MomentVector {
  double R = 0.0;
  double D = 0.0;
  double d = 0.0;
};

// ---------------------------------------------------------------------------
// Scalars and matrices derived from ModelParams that drive every moment
// formula. With b = v - r and the per-target rates alpha_N = alpha/N,
// beta_N = beta/(N-1), the merged message flow has total rate
// delta_N = alpha + N*beta, and the expected effect of one message event
// on ((R, D), d) is linear: (R, D) -> K (R, D), d -> k_N d.
// ---------------------------------------------------------------------------
struct DerivedScalars {
  double b = 0.0;        // sensor frequency skew v - r
  double u = 0.0;        // 2b (coefficient of the d-coupled growth term)
  double alpha_N = 0.0;  // alpha / N
  double beta_N = 0.0;   // beta / (N - 1), 0 when beta == 0 and N == 1
  double delta_N = 0.0;  // alpha + N*beta, total message rate
  double k_N = 0.0;      // 1 - alpha_N/delta_N (NaN when undefined)
  bool k_defined = false;
  Vec2 q0{};             // u * (1, 0)^T
  Vec2 q1{};             // sigma^2 * (1, 2)^T
  Vec2 q2{};             // b^2 * (1, 0)^T
  Mat2 L{};              // generator of the averaged (R, D) flow
  Mat2 K{};              // Id + L/delta_N (NaN entries when undefined)
};

inline DerivedScalars derived_scalars(const ModelParams& p) {
  p.validate();
  DerivedScalars s;
  s.b = p.v - p.r;
  s.u = 2.0 * s.b;
  const double n = static_cast<double>(p.N);
  s.alpha_N = p.alpha / n;
  s.beta_N = (p.N >= 2) ? p.beta / (n - 1.0) : 0.0;
  s.delta_N = p.alpha + n * p.beta;
  s.q0 = {s.u, 0.0};
  s.q1 = {p.sigma * p.sigma, 2.0 * p.sigma * p.sigma};
  s.q2 = {s.b * s.b, 0.0};
  if (s.delta_N > 0.0) {
    s.L = {-s.alpha_N, 0.0, 2.0 * s.alpha_N, -2.0 * (s.alpha_N + s.beta_N)};
    s.k_N = 1.0 - s.alpha_N / s.delta_N;
    s.k_defined = true;
    s.K = Mat2::identity() + (1.0 / s.delta_N) * s.L;
  } else {
    // No messages at all: the averaged flow has zero generator and the
    // per-event map is undefined (there are no events).
    s.L = Mat2::zero();
    s.k_N = std::nan("");
    s.k_defined = false;
    s.K = {std::nan(""), std::nan(""), std::nan(""), std::nan("")};
  }
  return s;
}

// ---------------------------------------------------------------------------
// Moment statistics of a configuration. Offsets are formed relative to the
// server reading first, then accumulated with compensated sums so that
// million-node configurations lose no precision.
//   R = (1/N) sum_j y_j^2,            y_j = x_j - x_1
//   d = (1/N) sum_j y_j
//   D = (1/(N(N-1))) sum over ordered sensor pairs of squared differences
//     = (2/(N-1)) sum_j (y_j - ybar)^2   (0 when N == 1)
// ---------------------------------------------------------------------------
inline MomentVector moments_of_config(const ClockConfig& config) {
  config.validate();
  const std::int64_t N = config.sensor_count();
  const double server = config.x[0];
  const double n = static_cast<double>(N);

  neumaier_sum sum_y, sum_y2;
  for (std::int64_t j = 1; j <= N; ++j) {
    const double y = config.x[static_cast<std::size_t>(j)] - server;
    sum_y.add(y);
    sum_y2.add(y * y);
  }
  MomentVector m;
  m.R = sum_y2.value() / n;
  m.d = sum_y.value() / n;
  if (N >= 2) {
    const double ybar = m.d;
    neumaier_sum sum_dev2;
    for (std::int64_t j = 1; j <= N; ++j) {
      const double dev = (config.x[static_cast<std::size_t>(j)] - server) - ybar;
      sum_dev2.add(dev * dev);
    }
    m.D = 2.0 * sum_dev2.value() / (n - 1.0);
  } else {
    m.D = 0.0;
  }
  return m;
}

// ---------------------------------------------------------------------------
// A message event: `sender` transmits its reading, `receiver` adopts it.
// The server (node 1) never adjusts its own clock, so it can never be the
// receiver. Ids are 1-based.
// ---------------------------------------------------------------------------
struct NodePair {
  std::int64_t sender = 0;
  std::int64_t receiver = 0;

  void validate(std::int64_t N) const {
    require(receiver != 1, errc::forbidden_receiver,
            "NodePair: the reference node never adjusts its clock");
    require(sender >= 1 && sender <= N + 1, errc::invalid_input,
            "NodePair: sender id out of range");
    require(receiver >= 2 && receiver <= N + 1, errc::invalid_input,
            "NodePair: receiver id out of range");
    require(sender != receiver, errc::invalid_input,
            "NodePair: sender and receiver must differ");
  }
};

// Receiver adopts the sender's clock value; everything else is unchanged.
inline ClockConfig jump_map(const ClockConfig& config, const NodePair& pair) {
  config.validate();
  pair.validate(config.sensor_count());
  ClockConfig out = config;
  out.node(pair.receiver) = out.node(pair.sender);
  return out;
}

// ---------------------------------------------------------------------------
// Distribution of the (sender, receiver) pair of a single message event of
// the merged flow: the server sends with probability alpha/delta_N to a
// uniform sensor; each sensor sends with probability beta/delta_N to a
// uniform other sensor. Pairs are listed server-first, then sensor pairs in
// lexicographic order.
// ---------------------------------------------------------------------------
inline std::vector<std::pair<NodePair, double>> pair_distribution(
    const ModelParams& p) {
  const DerivedScalars s = derived_scalars(p);
  require(s.delta_N > 0.0, errc::degenerate_rates,
          "pair_distribution: total message rate is zero");
  std::vector<std::pair<NodePair, double>> out;
  const double p_server = s.alpha_N / s.delta_N;
  const double p_sensor = (p.N >= 2) ? s.beta_N / s.delta_N : 0.0;
  out.reserve(static_cast<std::size_t>(p.N + p.N * (p.N - 1)));
  for (std::int64_t j = 2; j <= p.N + 1; ++j)
    if (p_server > 0.0) out.push_back({{1, j}, p_server});
  if (p_sensor > 0.0)
    for (std::int64_t i = 2; i <= p.N + 1; ++i)
      for (std::int64_t j = 2; j <= p.N + 1; ++j)
        if (i != j) out.push_back({{i, j}, p_sensor});
  return out;
}

// ---------------------------------------------------------------------------
// Expected moments right after one message event, computed by exhaustive
// enumeration over the pair distribution. Serves as the independent oracle
// for the one-event averaging identities:
//   E (R, D)(after) = K (R, D)(before),   E d(after) = k_N d(before).
// ---------------------------------------------------------------------------
inline MomentVector expected_post_jump_moments(const ClockConfig& config,
                                               const ModelParams& p) {
  const auto dist = pair_distribution(p);  // throws when delta_N == 0
  neumaier_sum R, D, d;
  for (const auto& [pair, prob] : dist) {
    const MomentVector m = moments_of_config(jump_map(config, pair));
    R.add(prob * m.R);
    D.add(prob * m.D);
    d.add(prob * m.d);
  }
  return {R.value(), D.value(), d.value()};
}

}  // namespace clocksync
