// Phase-diagram demo: sweep the time-scale exponent gamma, classify each
// scale t = s * N^gamma, and fit the actual log-log growth of the pair
// spread D on a grid of network sizes.

#include <cstdio>
#include <vector>

#include "clocksync/model.hpp"
#include "clocksync/phase.hpp"

using namespace clocksync;

int main() {
  // Drifting sensors: skew 0.1, noise 0.5, server rate 2, peer rate 1.
  const ModelParams base{2, 0.0, 0.1, 0.5, 2.0, 1.0};
  const double s = 1.0;

  std::vector<std::int64_t> ns;
  for (int p = 10; p <= 16; ++p) ns.push_back(std::int64_t{1} << p);
  std::printf("scales t = s * N^gamma with s = %.1f, N = 2^10 .. 2^16\n\n",
              s);
  std::printf("%6s  %6s  %10s  %12s  %12s\n", "gamma", "phase", "predicted",
              "fitted", "coefficient");

  for (double gamma : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5}) {
    const PhaseResult cls = classify(base, {gamma, s});
    const auto curve = scale_curve(base, {gamma, s}, ns);
    std::vector<double> values;
    for (const auto& pt : curve) values.push_back(pt.closed.D);
    const auto fit = exponent_fit(ns, values);
    std::printf("%6.2f  %6s  %10.4f  %12.4f  %12.5g\n", gamma,
                cls.D.label.c_str(), cls.D.exponent, fit.slope,
                cls.D.coefficient);
  }

  std::printf("\nfitted slopes approach the predicted exponents as the\n"
              "grid moves to larger N; at these sizes the gamma = 0.75\n"
              "scale is still crossing over from noise- to drift-driven\n"
              "spread.\n");
  return 0;
}
