#pragma once

// Stable scalar kernels used by the closed-form moment expressions:
// exponential-difference ("phi") functions, divided differences of exp,
// and a small weighted least-squares line fit.
//
// Naming convention for divided differences of f(x) = e^x over a node
// multiset {x0, x1, ...}:   exp_dd(y, z)      = exp[y, z]
//                           exp_dd2(y, z)     = exp[0, y, z]
//                           exp_dd2_yyz(y, z) = exp[y, y, z]
//                           exp_dd3(y, z)     = exp[0, y, y, z]
// Divided differences are symmetric in their nodes; repeated nodes denote
// derivative limits. Every routine below is accurate for arguments from
// 1e-300 up to |y| ~ 1e4 of either sign, switching between direct formulas
// and truncated series so that no catastrophic cancellation occurs.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "clocksync/common.hpp"

namespace clocksync::num {

// g1(y) = e^y.
inline double g1(double y) { return std::exp(y); }

// g2(y) = (e^y - 1)/y, continued by g2(0) = 1.
inline double g2(double y) {
  if (y == 0.0) return 1.0;
  return std::expm1(y) / y;
}

// phi2(y) = (e^y - 1 - y)/y^2, continued by phi2(0) = 1/2.
inline double phi2(double y) {
  if (std::abs(y) < 0.5) {
    // sum_{k>=0} y^k / (k+2)!
    double term = 0.5;  // k = 0
    double acc = term;
    for (int k = 1; k <= 24; ++k) {
      term *= y / static_cast<double>(k + 2);
      acc += term;
    }
    return acc;
  }
  return (std::expm1(y) - y) / (y * y);
}

// g2'(y) = d/dy g2(y) = (1 - (1 - y) e^y)/y^2, continued by g2'(0) = 1/2.
// Equivalently exp[0, y, y].
inline double g2_prime(double y) {
  if (std::abs(y) < 0.5) {
    // sum_{k>=1} k y^{k-1} / (k+1)!  =  1/2 + y/3 + y^2/8 + ...
    double acc = 0.5;
    double pow = 1.0;
    double fact = 2.0;  // (k+1)! for k = 1
    for (int k = 2; k <= 26; ++k) {
      pow *= y;
      fact *= static_cast<double>(k + 1);
      acc += static_cast<double>(k) * pow / fact;
    }
    return acc;
  }
  return (1.0 - (1.0 - y) * std::exp(y)) / (y * y);
}

// exp[y, z] = (e^z - e^y)/(z - y); equals e^y when z == y.
// Evaluated against the larger node as e^max * (1 - e^{-gap})/gap; the
// second factor lies in (0, 1], so the result never cancels and overflows
// only when the true value does.
inline double exp_dd(double y, double z) {
  if (y == z) return std::exp(y);
  if (y > z) std::swap(y, z);
  return std::exp(z) * (-std::expm1(y - z)) / (z - y);
}

// exp[y, y, z] = e^y * phi2(z - y); equals e^y / 2 when z == y.
inline double exp_dd2_yyz(double y, double z) {
  return std::exp(y) * phi2(z - y);
}

// exp[0, y, z]: second divided difference with one node pinned at zero.
// For small nodes uses the two-variable series
//   sum_{k>=0} h_k(y, z)/(k+2)!,  h_k = sum_{i+j=k} y^i z^j;
// otherwise picks, among the three algebraically equal quotient forms, the
// one whose denominator is the largest node gap.
inline double exp_dd2(double y, double z) {
  double ay = std::abs(y), az = std::abs(z);
  if (ay < 0.5 && az < 0.5) {
    double h = 1.0;  // h_0
    double acc = h / 2.0;
    double fact = 2.0;  // (k+2)! running
    double zpow = 1.0;
    for (int k = 1; k <= 26; ++k) {
      zpow *= z;
      h = y * h + zpow;  // h_k = y*h_{k-1} + z^k
      fact *= static_cast<double>(k + 2);
      acc += h / fact;
    }
    return acc;
  }
  double agap = std::abs(z - y);
  if (az >= ay && az >= agap) return (exp_dd(y, z) - g2(y)) / z;
  if (ay >= agap) return (exp_dd(y, z) - g2(z)) / y;
  return (g2(z) - g2(y)) / (z - y);
}

// exp[0, y, y, z]: third divided difference with a doubled node.
// Small-node series: sum_{k>=0} h_k(y, y, z)/(k+3)! with
// h_k(y, y, z) = z*h_{k-1}(y, y, z) + (k+1) y^k.
inline double exp_dd3(double y, double z) {
  double ay = std::abs(y), az = std::abs(z);
  if (ay < 0.5 && az < 0.5) {
    double h = 1.0;  // h_0
    double acc = h / 6.0;
    double fact = 6.0;  // (k+3)! running
    double ypow = 1.0;
    for (int k = 1; k <= 28; ++k) {
      ypow *= y;
      h = z * h + static_cast<double>(k + 1) * ypow;
      fact *= static_cast<double>(k + 3);
      acc += h / fact;
    }
    return acc;
  }
  double agap = std::abs(z - y);
  if (az >= ay && az >= agap) return (exp_dd2_yyz(y, z) - g2_prime(y)) / z;
  if (agap >= ay) return (exp_dd2(y, z) - g2_prime(y)) / (z - y);
  return (exp_dd2_yyz(y, z) - exp_dd2(y, z)) / y;
}

// ---------------------------------------------------------------------------
// Weighted least-squares straight line through (x_i, y_i).
// Empty `weights` means uniform weighting. Returns slope/intercept of the
// minimizer of sum_i w_i (y_i - slope*x_i - intercept)^2 and the RMS of the
// weighted residuals.
// ---------------------------------------------------------------------------
struct line_fit_result {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

inline line_fit_result fit_line(std::span<const double> xs,
                                std::span<const double> ys,
                                std::span<const double> weights = {}) {
  require(xs.size() == ys.size() && xs.size() >= 2, errc::invalid_input,
          "fit_line: need at least two points with matching x/y lengths");
  require(weights.empty() || weights.size() == xs.size(), errc::invalid_input,
          "fit_line: weight length mismatch");
  neumaier_sum sw, swx, swy;
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    double w = weights.empty() ? 1.0 : weights[i];
    require(finite(w) && w > 0.0, errc::invalid_input,
            "fit_line: weights must be positive finite");
    require(finite(xs[i]) && finite(ys[i]), errc::invalid_input,
            "fit_line: non-finite data point");
    sw.add(w);
    swx.add(w * xs[i]);
    swy.add(w * ys[i]);
  }
  const double wsum = sw.value();
  const double xbar = swx.value() / wsum;
  const double ybar = swy.value() / wsum;
  neumaier_sum sxx, sxy;
  for (std::size_t i = 0; i < n; ++i) {
    double w = weights.empty() ? 1.0 : weights[i];
    double dx = xs[i] - xbar;
    sxx.add(w * dx * dx);
    sxy.add(w * dx * (ys[i] - ybar));
  }
  require(sxx.value() > 0.0, errc::invalid_input,
          "fit_line: abscissae are all identical");
  line_fit_result out;
  out.slope = sxy.value() / sxx.value();
  out.intercept = ybar - out.slope * xbar;
  neumaier_sum rss;
  for (std::size_t i = 0; i < n; ++i) {
    double w = weights.empty() ? 1.0 : weights[i];
    double r = ys[i] - out.slope * xs[i] - out.intercept;
    rss.add(w * r * r);
  }
  out.rms_residual = std::sqrt(rss.value() / wsum);
  return out;
}

}  // namespace clocksync::num
