#pragma once

// Multi-scale behavior of the synchronization statistics along the time
// scales t = s * N^gamma, N -> infinity.
//
// Both mean-square statistics obey power laws R, D ~ C * N^psi whose
// exponent and coefficient switch at critical values of gamma. Two regimes:
//
//  * matched drift (v == r): noise-dominated growth, exponent
//    psi = min(gamma, 1) for both statistics, with crossover coefficients
//    l_R(s) = g2(-alpha s),
//    l_D(s) = (alpha g2(-alpha s) + 2 beta g2(-2(alpha+beta)s))/(alpha+2beta)
//    at gamma == 1 and saturation at sigma^2/alpha (resp. 2 sigma^2/(alpha+beta));
//
//  * skewed drift (v != r): the offset mean grows like (v-r)t until the
//    server couples back at scale t ~ N. R picks up exponent min(2 gamma, 2);
//    D is noise-dominated below gamma = 1/2, then the skew term takes over
//    with exponent 3 gamma - 1, crossing over at gamma == 1 via h_R, h_D
//    (see analytics.hpp) and saturating for gamma > 1.
//
// Boundary gammas are classified by exact equality. The saturated phases
// need a positive server rate; alpha == 0 with gamma >= 1 is reported as an
// error (no synchronized phase exists).

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clocksync/analytics.hpp"
#include "clocksync/common.hpp"
#include "clocksync/model.hpp"
#include "clocksync/numerics.hpp"

namespace clocksync {

// A point on the gamma-indexed family of time scales t = s * N^gamma.
struct PhaseQuery {
  double gamma = 1.0;
  double s = 1.0;

  void validate() const {
    require(finite(gamma) && gamma > 0.0, errc::invalid_input,
            "PhaseQuery: gamma must be finite and > 0");
    require(finite(s) && s > 0.0, errc::invalid_input,
            "PhaseQuery: s must be finite and > 0");
  }
};

// One statistic's phase: label, growth exponent psi, and leading
// coefficient C in  statistic(s N^gamma) ~ C N^psi.
struct PhaseBranch {
  std::string label;
  double exponent = 0.0;
  double coefficient = 0.0;
};

struct PhaseResult {
  bool skew_dominated = false;  // v != r
  PhaseBranch R;
  PhaseBranch D;
};

// Predicted pair-spread exponent in the skewed regime as a function of
// gamma: gamma below 1/2, then 3*gamma - 1, saturating at 2 from gamma = 1.
inline double phi_of_gamma(double gamma) {
  require(finite(gamma) && gamma > 0.0, errc::invalid_input,
          "phi_of_gamma: gamma must be finite and > 0");
  if (gamma <= 0.5) return gamma;
  if (gamma < 1.0) return 3.0 * gamma - 1.0;
  return 2.0;
}

// Classifies the (gamma, s) scale for the given rates. N in `base` is
// irrelevant (the result describes the N -> infinity family).
inline PhaseResult classify(const ModelParams& base, const PhaseQuery& q) {
  base.validate();
  q.validate();
  const double alpha = base.alpha;
  const double beta = base.beta;
  const double sig2 = base.sigma * base.sigma;
  const double b = base.v - base.r;
  const double s = q.s;
  const double g = q.gamma;
  require(sig2 > 0.0 || b != 0.0, errc::domain,
          "classify: no noise and no skew, statistics stay at zero");
  require(alpha > 0.0 || g < 1.0, errc::no_synchronization_phase,
          "classify: alpha == 0 gives no synchronized phase at gamma >= 1");

  PhaseResult out;
  out.skew_dominated = (b != 0.0);

  if (!out.skew_dominated) {
    // Matched drift: pure noise growth, both exponents min(gamma, 1).
    if (g < 1.0) {
      out.R = {"P1", g, sig2 * s};
      out.D = {"P1", g, 2.0 * sig2 * s};
    } else if (g == 1.0) {
      const double l_R = num::g2(-alpha * s);
      const double l_D = (alpha * num::g2(-alpha * s) +
                          2.0 * beta * num::g2(-2.0 * (alpha + beta) * s)) /
                         (alpha + 2.0 * beta);
      out.R = {"P2", 1.0, sig2 * s * l_R};
      out.D = {"P2", 1.0, 2.0 * sig2 * s * l_D};
    } else {
      out.R = {"P3", 1.0, sig2 / alpha};
      out.D = {"P3", 1.0, 2.0 * sig2 / (alpha + beta)};
    }
    return out;
  }

  // Skewed drift. Mean-square-vs-server statistic R:
  if (g < 1.0) {
    out.R = {"P1", 2.0 * g, b * b * s * s};
  } else if (g == 1.0) {
    const double h_R = h_functions(s, alpha, beta).first;
    out.R = {"P2", 2.0, 2.0 * b * b * s * s * h_R};
  } else {
    out.R = {"P3", 2.0, 2.0 * b * b / (alpha * alpha)};
  }

  // Pair-spread statistic D: noise wins below gamma = 1/2, the skew term
  // (spread through the server at rate alpha/N) wins above.
  if (g < 0.5) {
    out.D = {"P1a", g, 2.0 * sig2 * s};
  } else if (g == 0.5) {
    out.D = {"P1b", 0.5, 2.0 * sig2 * s + (2.0 / 3.0) * alpha * b * b * s * s * s};
  } else if (g < 1.0) {
    out.D = {"P1c", 3.0 * g - 1.0, (2.0 / 3.0) * alpha * b * b * s * s * s};
  } else if (g == 1.0) {
    const double h_D = h_functions(s, alpha, beta).second;
    out.D = {"P2", 2.0, 2.0 * b * b * s * s * h_D};
  } else {
    out.D = {"P3", 2.0, 2.0 * b * b / (alpha * (alpha + beta))};
  }
  return out;
}

// Closed-form statistics along the scale family: for each N, evaluate the
// exact formulas at t = s * N^gamma from a synchronized start.
struct ScalePoint {
  std::int64_t N = 0;
  double t = 0.0;
  MomentVector closed{};
};

inline std::vector<ScalePoint> scale_curve(const ModelParams& base,
                                           const PhaseQuery& q,
                                           std::span<const std::int64_t> Ns) {
  base.validate();
  q.validate();
  require(!Ns.empty(), errc::invalid_input, "scale_curve: empty N list");
  std::vector<ScalePoint> out;
  out.reserve(Ns.size());
  for (std::int64_t n : Ns) {
    require(n >= 1, errc::invalid_input, "scale_curve: N must be >= 1");
    require(n >= 2 || base.beta == 0.0, errc::invalid_input,
            "scale_curve: N == 1 requires beta == 0");
    ModelParams p = base;
    p.N = n;
    ScalePoint pt;
    pt.N = n;
    pt.t = q.s * std::pow(static_cast<double>(n), q.gamma);
    pt.closed = moments_closed_form(p, MomentVector{0.0, 0.0, 0.0}, pt.t);
    out.push_back(pt);
  }
  return out;
}

// Log-log slope of a positive curve against N: fits
// log(value) = psi * log(N) + c by least squares. Uniform weights by
// default; when standard errors are supplied the weights are the inverse
// variances of log(value), i.e. (value/se)^2. Requires at least 4 points
// spanning at least 1.5 decades in N.
inline num::line_fit_result exponent_fit(std::span<const std::int64_t> Ns,
                                         std::span<const double> values,
                                         std::span<const double> ses = {}) {
  require(Ns.size() == values.size(), errc::invalid_input,
          "exponent_fit: size mismatch");
  require(ses.empty() || ses.size() == values.size(), errc::invalid_input,
          "exponent_fit: standard-error size mismatch");
  require(Ns.size() >= 4, errc::invalid_input,
          "exponent_fit: need at least 4 points");
  std::vector<double> xs, ys, ws;
  xs.reserve(Ns.size());
  ys.reserve(Ns.size());
  double n_min = 0.0, n_max = 0.0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    require(Ns[i] >= 1, errc::invalid_input, "exponent_fit: N must be >= 1");
    const auto nd = static_cast<double>(Ns[i]);
    require(finite(values[i]) && values[i] > 0.0, errc::domain,
            "exponent_fit: values must be positive");
    xs.push_back(std::log(nd));
    ys.push_back(std::log(values[i]));
    if (i == 0) {
      n_min = n_max = nd;
    } else {
      n_min = std::min(n_min, nd);
      n_max = std::max(n_max, nd);
    }
    if (!ses.empty()) {
      require(finite(ses[i]) && ses[i] > 0.0, errc::domain,
              "exponent_fit: standard errors must be positive");
      const double rel = values[i] / ses[i];
      ws.push_back(rel * rel);
    }
  }
  require(std::log10(n_max / n_min) >= 1.5, errc::invalid_input,
          "exponent_fit: N range must span at least 1.5 decades");
  return num::fit_line(xs, ys, ws.empty() ? std::span<const double>{}
                                          : std::span<const double>(ws));
}

}  // namespace clocksync
