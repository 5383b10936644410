#include <cmath>
#include <random>

#include <doctest.h>

#include "csma/bianchi.hpp"

using namespace csma;

namespace {

// Damped fixed-point iteration of the backoff system, independent of the bisection.
double tau_by_iteration(int n, const FrameTimings& t) {
  double tau = 0.1;
  for (int i = 0; i < 100000; ++i) {
    const double p = 1.0 - std::pow(1.0 - tau, n - 1);
    const double w = t.cw_min + 1.0;
    const int m = t.backoff_stages();
    const double g = 2.0 * (1.0 - 2.0 * p) /
                     ((1.0 - 2.0 * p) * (w + 1.0) + p * w * (1.0 - std::pow(2.0 * p, m)));
    const double next = 0.5 * tau + 0.5 * g;
    if (std::abs(next - tau) < 1e-15) return next;
    tau = next;
  }
  return tau;
}

}  // namespace

TEST_CASE("single station transmission probability") {
  FrameTimings t;
  CHECK(solve_tau(1, t) == doctest::Approx(2.0 / 17.0).epsilon(1e-10));
  CHECK(tau_of_collision_probability(0.0, t) == doctest::Approx(2.0 / 17.0));
}

TEST_CASE("tau solves the fixed point") {
  FrameTimings t;
  for (int n : {2, 3, 5, 10, 20, 50}) {
    const double tau = solve_tau(n, t);
    CHECK(tau > 0.0);
    CHECK(tau < 1.0);
    CHECK(std::abs(tau_residual(tau, n, t)) < 1e-9);
    CHECK(tau == doctest::Approx(tau_by_iteration(n, t)).epsilon(1e-8));
  }
}

TEST_CASE("tau decreases with the number of contenders") {
  FrameTimings t;
  double prev = solve_tau(1, t);
  for (int n = 2; n <= 100; ++n) {
    const double tau = solve_tau(n, t);
    CHECK(tau < prev);
    prev = tau;
  }
}

TEST_CASE("single station efficiency by hand") {
  FrameTimings t;
  const auto in = uniform_timings(1, 78e6, t);
  CHECK(in.avg_frame_s == doctest::Approx(1.980e-4).epsilon(1e-3));
  CHECK(in.avg_success_s == doctest::Approx(2.927e-4).epsilon(1e-3));
  // With n = 1 the denominator collapses to T_s + sigma (1 - tau) / tau.
  const double tau = 2.0 / 17.0;
  const double expected = (12000 / 78e6) / (in.avg_success_s + t.sigma_s * (1.0 - tau) / tau);
  const auto s = mac_efficiency(in);
  CHECK(s.value == doctest::Approx(expected).epsilon(1e-9));
  CHECK(s.value > 0.3);
  CHECK(s.value < 0.8);
  CHECK_FALSE(s.clamped);
}

TEST_CASE("vanishing slot limit") {
  for (int n : {1, 2, 5}) {
    FrameTimings t;
    t.sigma_s = 1e-13;
    const auto in = uniform_timings(n, 26e6, t);
    const double tau = solve_tau(n, t);
    const double one = n * tau * std::pow(1.0 - tau, n - 1);
    const double limit_denom = in.avg_success_s - in.avg_collision_s +
                               in.avg_collision_s * (1.0 - std::pow(1.0 - tau, n)) / one;
    CHECK(mac_efficiency(in).value == doctest::Approx(in.avg_payload_s / limit_denom).epsilon(1e-6));
    if (n == 1) CHECK(limit_denom == doctest::Approx(in.avg_success_s));
  }
}

TEST_CASE("efficiency decreases with contenders") {
  FrameTimings t;
  for (const auto& step : RateTable::default_80211ac().steps) {
    const double rate = step.phy_rate_bps;
    double prev = mac_efficiency(uniform_timings(2, rate, t)).value;
    for (int n : {4, 8, 16}) {
      const double s = mac_efficiency(uniform_timings(n, rate, t)).value;
      CHECK(s < prev);
      prev = s;
    }
    // A lone station idles through its whole backoff; with short frames a
    // second contender fills more slots than its collisions cost.
    const double s1 = mac_efficiency(uniform_timings(1, rate, t)).value;
    const double s2 = mac_efficiency(uniform_timings(2, rate, t)).value;
    CAPTURE(rate);
    if (rate <= 26e6) CHECK(s1 > s2);
    else CHECK(s1 < s2);
  }
}

TEST_CASE("efficiency stays in (0, 1] over a random sweep") {
  FrameTimings t;
  const auto table = RateTable::default_80211ac();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> n_dist(1, 50);
  std::uniform_int_distribution<std::size_t> r_dist(0, table.steps.size() - 1);
  for (int i = 0; i < 500; ++i) {
    BianchiInputs in;
    in.n = n_dist(rng);
    in.timings = t;
    double sum_f = 0.0, sum_p = 0.0, max_f = 0.0;
    for (int k = 0; k < in.n; ++k) {
      const double r = table.steps[r_dist(rng)].phy_rate_bps;
      sum_f += frame_duration(r, t);
      sum_p += payload_duration(r, t);
      max_f = std::max(max_f, frame_duration(r, t));
    }
    in.avg_frame_s = sum_f / in.n;
    in.avg_payload_s = sum_p / in.n;
    in.avg_success_s = in.avg_frame_s + t.sifs_s + t.ack_duration_s() + t.difs_s;
    in.avg_collision_s = max_f + t.difs_s;
    const auto s = mac_efficiency(in);
    CHECK(s.value > 0.0);
    CHECK(s.value <= 1.0);
  }
}

TEST_CASE("efficiency is scale invariant") {
  FrameTimings t;
  for (int n : {1, 3, 12}) {
    const auto in = uniform_timings(n, 39e6, t);
    auto scaled = in;
    const double k = 7.5;
    scaled.avg_frame_s *= k;
    scaled.avg_payload_s *= k;
    scaled.avg_success_s *= k;
    scaled.avg_collision_s *= k;
    scaled.timings.sigma_s *= k;
    CHECK(mac_efficiency(scaled).value == doctest::Approx(mac_efficiency(in).value).epsilon(1e-12));
  }
}

TEST_CASE("invalid inputs are rejected") {
  FrameTimings t;
  auto in = uniform_timings(2, 39e6, t);
  in.avg_success_s = -1.0;
  CHECK_THROWS_AS(mac_efficiency(in), InvalidArgument);
  CHECK_THROWS_AS(solve_tau(0, t), InvalidArgument);
  in = uniform_timings(2, 39e6, t);
  in.avg_success_s = 0.5 * in.avg_frame_s;
  CHECK_THROWS_AS(mac_efficiency(in), InvalidArgument);
}

TEST_CASE("neighbourhood timings") {
  FrameTimings t;
  RadioConfig cfg;
  auto dep = make_deployment({{0, 0}, {5, 0}, {500, 500}}, {}, 1000.0);
  build_pathloss(dep, cfg);
  build_sensing_graph(dep, cfg);
  REQUIRE(dep.senses(0, 1));

  std::vector<double> rates{6.5e6, 78e6, 78e6};
  const auto mixed = neighborhood_timings(0, dep, rates, t);
  REQUIRE(mixed);
  CHECK(mixed->n == 2);
  CHECK(mixed->avg_frame_s == doctest::Approx(1.066e-3).epsilon(2e-3));
  CHECK(mixed->avg_collision_s == doctest::Approx(frame_duration(6.5e6, t) + t.difs_s));

  rates = {78e6, 78e6, 78e6};
  const auto equal = neighborhood_timings(0, dep, rates, t);
  CHECK(equal->avg_collision_s == doctest::Approx(frame_duration(78e6, t) + t.difs_s));
  const auto alone = neighborhood_timings(2, dep, rates, t);
  CHECK(alone->n == 1);
  CHECK(alone->avg_success_s == doctest::Approx(2.927e-4).epsilon(1e-3));

  rates = {0.0, 0.0, 78e6};
  CHECK_FALSE(neighborhood_timings(0, dep, rates, t));
}
