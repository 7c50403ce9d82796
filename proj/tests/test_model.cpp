// Core model: parameter validation, configuration statistics, message
// jumps, the per-event pair distribution, and the one-event averaging
// identity checked by exhaustive enumeration.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <utility>
#include <vector>

#include "clocksync/common.hpp"
#include "clocksync/model.hpp"
#include "clocksync/rng.hpp"

using namespace clocksync;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("parameter validation") {
  ModelParams ok{3, 0.0, 0.1, 0.5, 1.0, 2.0};
  CHECK_NOTHROW(ok.validate());

  ModelParams p = ok;
  p.N = 0;
  CHECK_THROWS_AS(p.validate(), error);
  p = ok;
  p.sigma = -0.1;
  CHECK_THROWS_AS(p.validate(), error);
  p = ok;
  p.alpha = -1.0;
  CHECK_THROWS_AS(p.validate(), error);
  p = ok;
  p.v = std::nan("");
  CHECK_THROWS_AS(p.validate(), error);
  // Sensor-to-sensor messages need at least two sensors.
  p = ok;
  p.N = 1;
  CHECK_THROWS_AS(p.validate(), error);
  p.beta = 0.0;
  CHECK_NOTHROW(p.validate());
  // All rates zero is a valid (message-free) model.
  ModelParams free_model{5, 0.0, 0.0, 1.0, 0.0, 0.0};
  CHECK_NOTHROW(free_model.validate());
}

TEST_CASE("derived scalars") {
  SECTION("reference values at N=2, alpha=1, beta=2") {
    const DerivedScalars s =
        derived_scalars(ModelParams{2, 0.0, 1.0, 1.0, 1.0, 2.0});
    CHECK(s.b == 1.0);
    CHECK(s.u == 2.0);
    CHECK_THAT(s.alpha_N, WithinRel(0.5, 1e-15));
    CHECK_THAT(s.beta_N, WithinRel(2.0, 1e-15));
    CHECK_THAT(s.delta_N, WithinRel(5.0, 1e-15));
    CHECK(s.k_defined);
    CHECK_THAT(s.k_N, WithinRel(0.9, 1e-15));
    CHECK_THAT(s.L.m11, WithinRel(-0.5, 1e-15));
    CHECK(s.L.m12 == 0.0);
    CHECK_THAT(s.L.m21, WithinRel(1.0, 1e-15));
    CHECK_THAT(s.L.m22, WithinRel(-5.0, 1e-15));
    CHECK_THAT(s.K.m11, WithinRel(0.9, 1e-15));
    CHECK_THAT(s.K.m21, WithinRel(0.2, 1e-15));
    // At N == 2 the second eigenvalue of the jump map is exactly zero.
    CHECK(s.K.m22 == 0.0);
    CHECK(s.q1.x == 1.0);
    CHECK(s.q1.y == 2.0);
  }
  SECTION("message-free degeneracy") {
    const DerivedScalars s =
        derived_scalars(ModelParams{4, 0.0, 0.0, 1.0, 0.0, 0.0});
    CHECK(s.delta_N == 0.0);
    CHECK_FALSE(s.k_defined);
    CHECK(std::isnan(s.k_N));
    CHECK(s.L.m11 == 0.0);
    CHECK(s.L.m21 == 0.0);
  }
  SECTION("single sensor") {
    const DerivedScalars s =
        derived_scalars(ModelParams{1, 0.0, 0.0, 1.0, 2.0, 0.0});
    CHECK_THAT(s.alpha_N, WithinRel(2.0, 1e-15));
    CHECK(s.beta_N == 0.0);
    // One event always synchronizes the only sensor: k_N = 0.
    CHECK(s.k_N == 0.0);
  }
}

TEST_CASE("configuration statistics") {
  SECTION("hand-computed example") {
    ClockConfig c;
    c.x = {1.0, 2.0, 0.0, 4.0};  // offsets y = {1, -1, 3}
    const MomentVector m = moments_of_config(c);
    CHECK_THAT(m.R, WithinRel(11.0 / 3.0, 1e-15));
    CHECK_THAT(m.d, WithinRel(1.0, 1e-15));
    CHECK_THAT(m.D, WithinRel(8.0, 1e-15));
  }
  SECTION("pair spread averages over ordered pairs") {
    // Two sensors y = {0, c}: ordered pairs (c)^2 and (-c)^2, mean c^2.
    ClockConfig c;
    c.x = {0.0, 0.0, 3.0};
    CHECK_THAT(moments_of_config(c).D, WithinRel(9.0, 1e-15));
  }
  SECTION("single sensor has no pair spread") {
    ClockConfig c;
    c.x = {0.5, 2.5};
    const MomentVector m = moments_of_config(c);
    CHECK_THAT(m.R, WithinRel(4.0, 1e-15));
    CHECK_THAT(m.d, WithinRel(2.0, 1e-15));
    CHECK(m.D == 0.0);
  }
  SECTION("global time shifts are invisible") {
    ClockConfig c;
    c.x = {0.3, 1.7, -2.2, 0.9, 4.1};
    const MomentVector base = moments_of_config(c);
    ClockConfig shifted = c;
    for (auto& xi : shifted.x) xi += 1234.5;
    const MomentVector m = moments_of_config(shifted);
    CHECK_THAT(m.R, WithinRel(base.R, 1e-12));
    CHECK_THAT(m.D, WithinRel(base.D, 1e-12));
    CHECK_THAT(m.d, WithinRel(base.d, 1e-12));
  }
  SECTION("synchronized configuration is at zero") {
    const MomentVector m = moments_of_config(ClockConfig::zeros(7));
    CHECK(m.R == 0.0);
    CHECK(m.D == 0.0);
    CHECK(m.d == 0.0);
  }
}

TEST_CASE("message jumps") {
  ClockConfig c;
  c.x = {10.0, 11.0, 12.0, 13.0};

  SECTION("server to sensor synchronizes the receiver exactly") {
    const ClockConfig after = jump_map(c, NodePair{1, 3});
    CHECK(after.node(3) == 10.0);
    CHECK(after.node(2) == 11.0);
    CHECK(after.node(4) == 13.0);
    CHECK(c.node(3) == 12.0);  // input untouched
  }
  SECTION("sensor to sensor copies the sender reading") {
    const ClockConfig after = jump_map(c, NodePair{4, 2});
    CHECK(after.node(2) == 13.0);
    CHECK(after.node(4) == 13.0);
  }
  SECTION("the server never adjusts its clock") {
    CHECK_THROWS_AS(jump_map(c, NodePair{2, 1}), error);
    try {
      jump_map(c, NodePair{2, 1});
    } catch (const error& e) {
      CHECK(e.code() == errc::forbidden_receiver);
    }
  }
  SECTION("malformed pairs") {
    CHECK_THROWS_AS(jump_map(c, NodePair{2, 2}), error);
    CHECK_THROWS_AS(jump_map(c, NodePair{0, 2}), error);
    CHECK_THROWS_AS(jump_map(c, NodePair{2, 5}), error);
  }
}

TEST_CASE("pair distribution of one message event") {
  SECTION("probabilities and ordering at N=2, alpha=1, beta=2") {
    const auto dist = pair_distribution(ModelParams{2, 0.0, 0.0, 1.0, 1.0, 2.0});
    REQUIRE(dist.size() == 4);
    CHECK(dist[0].first.sender == 1);
    CHECK(dist[0].first.receiver == 2);
    CHECK_THAT(dist[0].second, WithinRel(0.1, 1e-15));
    CHECK(dist[1].first.sender == 1);
    CHECK(dist[1].first.receiver == 3);
    CHECK_THAT(dist[1].second, WithinRel(0.1, 1e-15));
    CHECK(dist[2].first.sender == 2);
    CHECK(dist[2].first.receiver == 3);
    CHECK_THAT(dist[2].second, WithinRel(0.4, 1e-15));
    CHECK(dist[3].first.sender == 3);
    CHECK(dist[3].first.receiver == 2);
    CHECK_THAT(dist[3].second, WithinRel(0.4, 1e-15));
  }
  SECTION("probabilities always sum to one") {
    for (auto [N, al, be] :
         {std::tuple{std::int64_t{2}, 1.0, 2.0},
          std::tuple{std::int64_t{5}, 0.7, 0.0},
          std::tuple{std::int64_t{4}, 0.0, 1.3},
          std::tuple{std::int64_t{7}, 2.5, 0.8}}) {
      CAPTURE(N, al, be);
      const auto dist =
          pair_distribution(ModelParams{N, 0.0, 0.0, 1.0, al, be});
      neumaier_sum total;
      for (const auto& [pair, prob] : dist) {
        CHECK(prob > 0.0);
        CHECK_NOTHROW(pair.validate(N));
        total.add(prob);
      }
      CHECK_THAT(total.value(), WithinRel(1.0, 1e-13));
    }
  }
  SECTION("no messages means no distribution") {
    CHECK_THROWS_AS(pair_distribution(ModelParams{3, 0.0, 0.0, 1.0, 0.0, 0.0}),
                    error);
  }
}

TEST_CASE("one-event averaging identity by enumeration") {
  // E (R, D) after one event = K (R, D) before; E d after = k_N d before.
  // The left side is computed by exhaustive enumeration over every
  // possible (sender, receiver) pair; random configurations.
  rng::Stream gen(777, 0);
  for (std::int64_t N : {2, 3, 5, 10}) {
    for (auto [al, be] : {std::pair{1.0, 2.0}, std::pair{2.5, 0.4},
                          std::pair{0.0, 1.5}, std::pair{3.0, 0.0},
                          std::pair{0.3, 4.7}}) {
      const ModelParams p{N, 0.0, 0.0, 1.0, al, be};
      const DerivedScalars s = derived_scalars(p);
      for (int rep = 0; rep < 5; ++rep) {
        ClockConfig cfg = ClockConfig::zeros(N);
        for (auto& x : cfg.x) x = 10.0 * gen.uniform01() - 5.0;
        const MomentVector before = moments_of_config(cfg);
        const MomentVector after = expected_post_jump_moments(cfg, p);
        const Vec2 mapped = s.K * Vec2{before.R, before.D};
        CAPTURE(N, al, be, rep);
        CHECK_THAT(after.R, WithinAbs(mapped.x, 1e-12));
        CHECK_THAT(after.D, WithinAbs(mapped.y, 1e-12));
        CHECK_THAT(after.d, WithinAbs(s.k_N * before.d, 1e-12));
      }
    }
  }
}
