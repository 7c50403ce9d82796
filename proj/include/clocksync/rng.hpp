#pragma once

// Reproducible random streams for the Monte Carlo engines.
//
// Stream derivation (documented contract): replica k of a run with master
// seed m draws from an mt19937_64 engine seeded with
//     finalize(finalize(m XOR (0x9E3779B97F4A7C15 * (k + 1))))
// where `finalize` is the splitmix64 output permutation. The multiplier is
// odd, so distinct replicas map to distinct engine seeds for every master
// seed. All variates are generated by the hand-rolled samplers below (never
// std::*_distribution, whose outputs are implementation-defined), so a
// (master_seed, replica_index) pair yields the same numbers on every
// platform and thread schedule.
//
// Draw-order contract inside one replica: the engine produces one logical
// stream consumed in simulation order; each sampler documents how many raw
// draws it consumes. Rejection samplers (normal, gamma) consume a variable
// but deterministic number of draws.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include "clocksync/common.hpp"

namespace clocksync::rng {

// splitmix64 output permutation (finalizer).
inline std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                        std::uint64_t replica_index) {
  std::uint64_t z = master_seed ^ (0x9E3779B97F4A7C15ULL * (replica_index + 1));
  return splitmix64_finalize(splitmix64_finalize(z));
}

class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t replica_index)
      : engine_(derive_stream_seed(master_seed, replica_index)) {}

  // Uniform on [0, 1): top 53 bits of one raw draw.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1): resamples the (probability 2^-53) exact zero.
  double uniform01_pos() {
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return u;
  }

  // Exponential with the given rate; one uniform draw (plus resampling of
  // exact zeros). Uses -log1p(-u) so small rates lose no precision.
  double exponential(double rate) {
    return -std::log1p(-uniform01_pos()) / rate;
  }

  // Standard normal via the Marsaglia polar method; generates pairs and
  // caches the second value. Consumes 2 uniforms per accepted pair
  // (acceptance probability pi/4).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double v1, v2, s;
    do {
      v1 = 2.0 * uniform01() - 1.0;
      v2 = 2.0 * uniform01() - 1.0;
      s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v2 * m;
    have_cached_ = true;
    return v1 * m;
  }

  // Gamma(shape, scale) via the Marsaglia–Tsang squeeze method; shapes
  // below 1 use the boost Gamma(shape+1) * U^(1/shape).
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, scale);
      return g * std::pow(uniform01_pos(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, vcubed;
      do {
        x = normal();
        vcubed = 1.0 + c * x;
      } while (vcubed <= 0.0);
      vcubed = vcubed * vcubed * vcubed;
      const double u = uniform01_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * vcubed * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - vcubed + std::log(vcubed)))
        return d * vcubed * scale;
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// ---------------------------------------------------------------------------
// Inter-event duration law of the merged message flow. The exponential
// variant always uses the model's total message rate delta_N (the memoryless
// case); the other variants turn the flow into a general renewal process
// with the same per-event pair distribution.
// ---------------------------------------------------------------------------
struct InterEventLaw {
  enum class Kind { exponential, deterministic, uniform, gamma };

  Kind kind = Kind::exponential;
  double a = 0.0;  // deterministic: period; uniform: low;  gamma: shape
  double b = 0.0;  // uniform: high; gamma: scale

  static InterEventLaw exponential() { return {Kind::exponential, 0.0, 0.0}; }
  static InterEventLaw deterministic(double period) {
    return {Kind::deterministic, period, 0.0};
  }
  static InterEventLaw uniform(double low, double high) {
    return {Kind::uniform, low, high};
  }
  static InterEventLaw gamma(double shape, double scale) {
    return {Kind::gamma, shape, scale};
  }

  void validate() const {
    switch (kind) {
      case Kind::exponential:
        return;  // rate supplied externally (the model's delta_N)
      case Kind::deterministic:
        require(finite(a) && a > 0.0, errc::invalid_input,
                "InterEventLaw: deterministic period must be > 0");
        return;
      case Kind::uniform:
        require(finite(a) && finite(b) && a >= 0.0 && b > a,
                errc::invalid_input,
                "InterEventLaw: uniform law needs 0 <= low < high");
        return;
      case Kind::gamma:
        require(finite(a) && a > 0.0 && finite(b) && b > 0.0,
                errc::invalid_input,
                "InterEventLaw: gamma law needs shape > 0 and scale > 0");
        return;
    }
  }

  // One inter-event duration. `merged_rate` is the model's delta_N; only the
  // exponential law uses it (and requires it positive).
  double sample(Stream& stream, double merged_rate) const {
    switch (kind) {
      case Kind::exponential:
        require(merged_rate > 0.0, errc::degenerate_rates,
                "InterEventLaw: exponential flow needs delta_N > 0");
        return stream.exponential(merged_rate);
      case Kind::deterministic:
        return a;
      case Kind::uniform:
        return a + (b - a) * stream.uniform01();
      case Kind::gamma:
        return stream.gamma(a, b);
    }
    return 0.0;  // unreachable
  }

  double mean(double merged_rate) const {
    switch (kind) {
      case Kind::exponential:
        return merged_rate > 0.0
                   ? 1.0 / merged_rate
                   : std::numeric_limits<double>::infinity();
      case Kind::deterministic:
        return a;
      case Kind::uniform:
        return 0.5 * (a + b);
      case Kind::gamma:
        return a * b;
    }
    return 0.0;  // unreachable
  }
};

}  // namespace clocksync::rng
