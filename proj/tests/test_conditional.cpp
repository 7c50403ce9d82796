// Event-conditioned engine: epoch sequences, the free/jump moment steps,
// conditioning on realized event times, the count-conditioned closed form
// (validated by quadrature, literal series, Poisson averaging, and Monte
// Carlo), and the variance-reduced ensemble estimator.

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

#include "clocksync/analytics.hpp"
#include "clocksync/common.hpp"
#include "clocksync/conditional.hpp"
#include "clocksync/model.hpp"
#include "clocksync/rng.hpp"
#include "clocksync/simulator.hpp"

using namespace clocksync;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ModelParams kParamsA{3, 0.1, 0.3, 0.8, 1.3, 0.7};
const ModelParams kParamsB{4, 0.0, 0.25, 0.6, 1.2, 0.8};
const MomentVector kInitA{1.0, 2.0, 0.5};
const MomentVector kInitB{0.7, 1.1, -0.4};

bool close_scaled(double got, double want, double tol) {
  return std::abs(got - want) <= tol * (1.0 + std::abs(want));
}

// Mean and standard error of one statistic across samples.
struct MeanSe {
  double mean, se;
};

MeanSe mean_se(const std::vector<double>& xs) {
  neumaier_sum s;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  neumaier_sum v;
  for (double x : xs) v.add((x - mean) * (x - mean));
  return {mean, std::sqrt(v.value() / (n * (n - 1.0)))};
}

// Composite-Simpson average of f over [0, t].
template <typename F>
double simpson_mean(F&& f, double t, int panels) {
  const double h = t / (2.0 * panels);
  neumaier_sum acc;
  for (int i = 0; i <= 2 * panels; ++i) {
    const double w = (i == 0 || i == 2 * panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc.add(w * f(h * static_cast<double>(i)));
  }
  return acc.value() * h / (3.0 * t);
}

}  // namespace

TEST_CASE("epoch sequences") {
  SECTION("sampling is reproducible and well-formed") {
    rng::Stream s1(11, 0), s2(11, 0);
    const EpochSequence a = sample_epoch_sequence(3.0, 10.0, s1);
    const EpochSequence b = sample_epoch_sequence(3.0, 10.0, s2);
    REQUIRE(a.taus == b.taus);
    CHECK_NOTHROW(a.validate());
    double prev = 0.0;
    for (double tau : a.taus) {
      CHECK(tau > prev);
      CHECK(tau < 10.0);
      prev = tau;
    }
  }
  SECTION("event counts have the Poissonian mean") {
    rng::Stream s(12, 0);
    std::vector<double> counts;
    for (int i = 0; i < 3000; ++i)
      counts.push_back(static_cast<double>(
          sample_epoch_sequence(3.0, 10.0, s).taus.size()));
    const MeanSe ms = mean_se(counts);
    CHECK_THAT(ms.mean, WithinAbs(30.0, 4.0 * ms.se));
  }
  SECTION("validation rejects malformed sequences") {
    CHECK_THROWS_AS((EpochSequence{5.0, {0.0}}.validate()), error);
    CHECK_THROWS_AS((EpochSequence{5.0, {1.0, 1.0}}.validate()), error);
    CHECK_THROWS_AS((EpochSequence{5.0, {6.0}}.validate()), error);
    rng::Stream s(13, 0);
    CHECK_THROWS_AS(sample_epoch_sequence(0.0, 1.0, s), error);
  }
}

TEST_CASE("moment steps") {
  SECTION("free window") {
    const double b = kParamsA.v - kParamsA.r;
    const double sig2 = kParamsA.sigma * kParamsA.sigma;
    const double dt = 0.7;
    const MomentVector m = free_moment_step(kParamsA, kInitA, dt);
    CHECK_THAT(m.R, WithinRel(kInitA.R + sig2 * dt + 2.0 * b * kInitA.d * dt +
                                  b * b * dt * dt,
                              1e-15));
    CHECK_THAT(m.D, WithinRel(kInitA.D + 2.0 * sig2 * dt, 1e-15));
    CHECK_THAT(m.d, WithinRel(kInitA.d + b * dt, 1e-15));
    CHECK_THROWS_AS(free_moment_step(kParamsA, kInitA, -0.1), error);
  }
  SECTION("averaged jump") {
    const DerivedScalars s = derived_scalars(kParamsA);
    const MomentVector m = jump_moment_step(kParamsA, kInitA);
    const Vec2 want = s.K * Vec2{kInitA.R, kInitA.D};
    CHECK_THAT(m.R, WithinRel(want.x, 1e-15));
    CHECK_THAT(m.D, WithinRel(want.y, 1e-15));
    CHECK_THAT(m.d, WithinRel(s.k_N * kInitA.d, 1e-15));
    CHECK_THROWS_AS(
        jump_moment_step(ModelParams{3, 0.0, 0.0, 1.0, 0.0, 0.0}, kInitA),
        error);
  }
  SECTION("a single sensor keeps zero dispersion through both steps") {
    const ModelParams p{1, 0.3, 0.5, 0.8, 2.0, 0.0};
    const MomentVector init{0.7, 0.0, 0.2};
    CHECK(free_moment_step(p, init, 1.3).D == 0.0);
    CHECK(jump_moment_step(p, init).D == 0.0);
  }
}

TEST_CASE("conditioning on event times") {
  SECTION("no events reduces to a single free window") {
    const EpochSequence seq{4.0, {}};
    const MomentVector a = conditional_moments(kParamsA, kInitA, seq);
    const MomentVector b = free_moment_step(kParamsA, kInitA, 4.0);
    CHECK(a.R == b.R);
    CHECK(a.D == b.D);
    CHECK(a.d == b.d);
  }
  SECTION("averaging over the message flow recovers the full moments") {
    // Law of total expectation: E_seq[ E[stats | seq] ] = E[stats].
    const double t = 3.0;
    const DerivedScalars s = derived_scalars(kParamsB);
    rng::Stream st(14, 0);
    std::vector<double> R, D, d;
    for (int i = 0; i < 20000; ++i) {
      const EpochSequence seq = sample_epoch_sequence(s.delta_N, t, st);
      const MomentVector m = conditional_moments(kParamsB, kInitB, seq);
      R.push_back(m.R);
      D.push_back(m.D);
      d.push_back(m.d);
    }
    const MomentVector want = moments_closed_form(kParamsB, kInitB, t);
    const MeanSe mR = mean_se(R), mD = mean_se(D), md = mean_se(d);
    CHECK_THAT(mR.mean, WithinAbs(want.R, 4.0 * mR.se));
    CHECK_THAT(mD.mean, WithinAbs(want.D, 4.0 * mD.se));
    CHECK_THAT(md.mean, WithinAbs(want.d, 4.0 * md.se));
  }
  SECTION("events listed with a zero merged rate are rejected") {
    const ModelParams p{3, 0.0, 0.0, 1.0, 0.0, 0.0};
    CHECK_THROWS_AS(conditional_moments(p, kInitA, EpochSequence{2.0, {1.0}}),
                    error);
    CHECK(conditional_moments(p, kInitA, EpochSequence{2.0, {}}).D ==
          free_moment_step(p, kInitA, 2.0).D);
  }
}

TEST_CASE("geometric-type sums match their literal oracles") {
  using namespace clocksync::detail;
  SECTION("plain geometric sum") {
    for (double a : {0.0, 0.3, 0.5, 0.51, 0.97, 0.999999, 1.0}) {
      for (std::int64_t n : {0L, 1L, 2L, 5L, 57L, 1000L, 100000L}) {
        CAPTURE(a, n);
        CHECK(close_scaled(geometric_sum(a, n), s_literal(a, n), 1e-12));
      }
    }
  }
  SECTION("two-argument cross sum") {
    const std::vector<std::pair<double, double>> args = {
        {0.9, 0.2},  {0.2, 0.9},   {0.7, 0.7},      {0.7, 0.7 + 1e-12},
        {0.5, 0.0},  {0.0, 0.5},   {0.999, 0.998},  {0.97, 0.96},
        {1.0, 0.95}, {0.95, 1.0},  {1.0, 1.0}};
    for (auto [x, y] : args) {
      for (std::int64_t n : {0L, 1L, 3L, 20L, 500L, 20000L}) {
        CAPTURE(x, y, n);
        CHECK(close_scaled(cross_geometric_sum(x, y, n), g_literal(x, y, n),
                           1e-11));
      }
    }
  }
  SECTION("ramp sum") {
    for (double a : {0.0, 0.4, 0.97, 0.9995, 0.9999999, 1.0}) {
      for (std::int64_t n : {0L, 1L, 4L, 100L, 20000L}) {
        CAPTURE(a, n);
        CHECK(close_scaled(ramp_geometric_sum(a, n), m_literal(a, n), 1e-11));
      }
    }
  }
  SECTION("nested sum") {
    const std::vector<std::pair<double, double>> args = {
        {0.8, 0.3},   {0.3, 0.8},  {0.9, 1.0},      {0.0, 0.7},
        {0.7, 0.997}, {0.6, 0.6},  {0.95, 0.9995},  {1.0, 0.4}};
    for (auto [x, y] : args) {
      for (std::int64_t n : {0L, 1L, 4L, 50L, 2000L}) {
        CAPTURE(x, y, n);
        CHECK(close_scaled(nested_geometric_sum(x, y, n), w_literal(x, y, n),
                           1e-11));
      }
    }
  }
}

TEST_CASE("count-conditioned moments") {
  SECTION("zero events reproduces the free window") {
    for (double t : {0.0, 0.9, 6.0}) {
      const MomentVector got = conditional_given_count(kParamsA, kInitA, 0, t);
      const MomentVector want = free_moment_step(kParamsA, kInitA, t);
      CHECK(close_scaled(got.R, want.R, 1e-14));
      CHECK(close_scaled(got.D, want.D, 1e-14));
      CHECK(close_scaled(got.d, want.d, 1e-14));
    }
  }
  SECTION("one event: exact quadrature over the uniform event time") {
    const double t = 2.0;
    auto walk = [&](double tau) {
      return conditional_moments(kParamsA, kInitA, EpochSequence{t, {tau}});
    };
    // The conditional statistics are quadratic in tau, so composite
    // Simpson is numerically exact.
    const double R =
        simpson_mean([&](double tau) {
          return tau <= 0.0 || tau >= t ? walk(std::clamp(tau, 1e-12, t - 1e-12)).R
                                        : walk(tau).R;
        }, t, 256);
    const double D =
        simpson_mean([&](double tau) {
          return tau <= 0.0 || tau >= t ? walk(std::clamp(tau, 1e-12, t - 1e-12)).D
                                        : walk(tau).D;
        }, t, 256);
    const MomentVector got = conditional_given_count(kParamsA, kInitA, 1, t);
    CHECK(close_scaled(got.R, R, 1e-9));
    CHECK(close_scaled(got.D, D, 1e-9));
  }
  SECTION("fixed counts: Monte Carlo over sorted uniform event times") {
    rng::Stream st(15, 0);
    const double t = 2.0;
    for (std::int64_t n : {2L, 5L}) {
      std::vector<double> R, D, d;
      std::vector<double> taus(static_cast<std::size_t>(n));
      for (int rep = 0; rep < 40000; ++rep) {
        bool ok = false;
        while (!ok) {
          for (auto& tau : taus) tau = t * st.uniform01_pos();
          std::sort(taus.begin(), taus.end());
          ok = true;
          for (std::size_t i = 1; i < taus.size(); ++i)
            if (taus[i] == taus[i - 1]) ok = false;
        }
        const MomentVector m =
            conditional_moments(kParamsA, kInitA, EpochSequence{t, taus});
        R.push_back(m.R);
        D.push_back(m.D);
        d.push_back(m.d);
      }
      const MomentVector want = conditional_given_count(kParamsA, kInitA, n, t);
      const MeanSe mR = mean_se(R), mD = mean_se(D), md = mean_se(d);
      CAPTURE(n);
      CHECK_THAT(mR.mean, WithinAbs(want.R, 4.0 * mR.se));
      CHECK_THAT(mD.mean, WithinAbs(want.D, 4.0 * mD.se));
      CHECK_THAT(md.mean, WithinAbs(want.d, 4.0 * md.se));
    }
  }
  SECTION("Poisson-averaging the counts recovers the closed form") {
    auto poisson_average = [](const ModelParams& p, const MomentVector& init,
                              double t) {
      const DerivedScalars s = derived_scalars(p);
      const double mu = s.delta_N * t;
      const auto lo = static_cast<std::int64_t>(
          std::max(0.0, std::floor(mu - 10.0 * std::sqrt(mu) - 10.0)));
      const auto hi = static_cast<std::int64_t>(
          std::ceil(mu + 10.0 * std::sqrt(mu) + 10.0));
      MomentVector acc{0.0, 0.0, 0.0};
      for (std::int64_t n = lo; n <= hi; ++n) {
        const double lpmf = -mu + static_cast<double>(n) * std::log(mu) -
                            std::lgamma(static_cast<double>(n) + 1.0);
        const double pmf = std::exp(lpmf);
        const MomentVector c = conditional_given_count(p, init, n, t);
        acc.R += pmf * c.R;
        acc.D += pmf * c.D;
        acc.d += pmf * c.d;
      }
      return acc;
    };
    const std::vector<std::tuple<ModelParams, MomentVector, double>> cases = {
        {kParamsB, kInitB, 1.0},
        {kParamsB, kInitB, 5.0},
        {ModelParams{2, 0.0, 1.0, 1.0, 1.0, 2.0}, {0.5, 0.3, 0.1}, 2.0},
        {ModelParams{1, 0.3, 0.5, 0.8, 2.0, 0.0}, {0.7, 0.0, 0.2}, 3.0}};
    for (const auto& [p, init, t] : cases) {
      CAPTURE(p.N, t);
      const MomentVector got = poisson_average(p, init, t);
      const MomentVector want = moments_closed_form(p, init, t);
      CHECK(close_scaled(got.R, want.R, 1e-8));
      CHECK(close_scaled(got.D, want.D, 1e-8));
      CHECK(close_scaled(got.d, want.d, 1e-8));
    }
  }
  SECTION("input validation") {
    CHECK_THROWS_AS(conditional_given_count(kParamsA, kInitA, -1, 1.0), error);
    CHECK_THROWS_AS(conditional_given_count(kParamsA, kInitA, 1000001, 1.0),
                    error);
    CHECK_THROWS_AS(conditional_given_count(kParamsA, kInitA, 2, -1.0), error);
    CHECK_THROWS_AS(
        conditional_given_count(ModelParams{3, 0.0, 0.0, 1.0, 0.0, 0.0},
                                kInitA, 2, 1.0),
        error);
  }
}

TEST_CASE("variance-reduced ensemble estimator") {
  const std::vector<double> obs{0.8, 2.5};
  SECTION("unbiased for the closed-form moments") {
    const EnsembleStats st =
        rao_blackwell_ensemble(kParamsB, kInitB, obs, 30000, 77);
    REQUIRE(st.size() == obs.size());
    CHECK(st.replicas == 30000);
    for (std::size_t j = 0; j < obs.size(); ++j) {
      const MomentVector want = moments_closed_form(kParamsB, kInitB, obs[j]);
      CAPTURE(obs[j]);
      CHECK_THAT(st.R_mean[j], WithinAbs(want.R, 4.0 * st.R_se[j]));
      CHECK_THAT(st.D_mean[j], WithinAbs(want.D, 4.0 * st.D_se[j]));
      CHECK_THAT(st.d_mean[j], WithinAbs(want.d, 4.0 * st.d_se[j]));
    }
  }
  SECTION("statistics do not depend on the thread count") {
    const EnsembleStats one =
        rao_blackwell_ensemble(kParamsB, kInitB, obs, 500, 77, 1);
    const EnsembleStats three =
        rao_blackwell_ensemble(kParamsB, kInitB, obs, 500, 77, 3);
    CHECK(one.R_mean == three.R_mean);
    CHECK(one.R_se == three.R_se);
    CHECK(one.D_mean == three.D_mean);
    CHECK(one.d_mean == three.d_mean);
  }
  SECTION("variance is strictly below the direct simulator's") {
    const ModelParams p{10, 0.0, 0.15, 0.8, 1.5, 0.5};
    const std::vector<double> when{4.0};
    SimConfig cfg;
    cfg.params = p;
    cfg.obs_times = when;
    cfg.replicas = 4000;
    cfg.master_seed = 99;
    cfg.threads = 1;
    const EnsembleStats direct = run_ensemble(cfg);
    const EnsembleStats rb =
        rao_blackwell_ensemble(p, {0.0, 0.0, 0.0}, when, 4000, 99, 1);
    // Consistency of the two unbiased estimators...
    const double combined =
        std::sqrt(direct.R_se[0] * direct.R_se[0] + rb.R_se[0] * rb.R_se[0]);
    CHECK_THAT(rb.R_mean[0], WithinAbs(direct.R_mean[0], 4.0 * combined));
    // ...and the variance reduction itself.
    CHECK(rb.R_se[0] < direct.R_se[0]);
    CHECK(rb.D_se[0] < direct.D_se[0]);
  }
  SECTION("input validation") {
    CHECK_THROWS_AS(
        rao_blackwell_ensemble(kParamsB, {-1.0, 0.0, 0.0}, obs, 10, 0), error);
    CHECK_THROWS_AS(rao_blackwell_ensemble(kParamsB, kInitB, obs, 0, 0), error);
    CHECK_THROWS_AS(rao_blackwell_ensemble(kParamsB, kInitB,
                                           std::vector<double>{}, 10, 0),
                    error);
    try {
      rao_blackwell_ensemble(ModelParams{3, 0.0, 0.0, 1.0, 0.0, 0.0},
                             {0.0, 0.0, 0.0}, obs, 10, 0);
      FAIL("expected an error");
    } catch (const error& e) {
      CHECK(e.code() == errc::degenerate_rates);
    }
  }
}
