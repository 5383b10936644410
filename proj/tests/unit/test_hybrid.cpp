#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "csma/bianchi.hpp"
#include "csma/hybrid.hpp"

using namespace csma;

namespace {

Deployment built(std::vector<Point> aps, std::vector<Point> users, double side,
                 const RadioConfig& cfg = {}) {
  auto dep = make_deployment(std::move(aps), std::move(users), side);
  build_pathloss(dep, cfg);
  build_sensing_graph(dep, cfg);
  return dep;
}

// n APs on a small circle, each with its user just outside it.
Deployment clique(int n) {
  std::vector<Point> aps, users;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    aps.push_back({50.0 + 3.0 * std::cos(a), 50.0 + 3.0 * std::sin(a)});
    users.push_back({50.0 + 3.5 * std::cos(a), 50.0 + 3.5 * std::sin(a)});
  }
  return built(aps, users, 100.0);
}

}  // namespace

TEST_CASE("isolated link") {
  RadioConfig cfg;
  const auto dep = built({{0, 0}}, {{10, 0}}, 100.0);
  CHECK(link_sinr(0, dep, cfg) == doctest::Approx(23.0 - 86.7 + 85.99).epsilon(1e-4));
  FrameTimings t;
  const auto table = RateTable::default_80211ac();
  const auto links = evaluate_hybrid(dep, cfg, table, t);
  REQUIRE(links.size() == 1);
  CHECK(links[0].phy_rate_bps == 58.5e6);
  CHECK(links[0].airtime == 1.0);
  const double s1 = mac_efficiency(uniform_timings(1, 58.5e6, t)).value;
  CHECK(links[0].throughput_bps == doctest::Approx(s1 * 58.5e6));
}

TEST_CASE("interferers are weighted by their contention share") {
  RadioConfig cfg;
  // AP 1 sits out of AP 0's range with three close neighbours (APs 2-4).
  const auto dep = built({{0, 0}, {200, 0}, {203, 0}, {200, 3}, {197, 0}}, {{10, 0}}, 400.0, cfg);
  REQUIRE_FALSE(dep.senses(0, 1));
  REQUIRE(dep.num_neighbors(1) == 3);
  const double p = cfg.tx_power_mw();
  const Point user{10, 0};
  double interference = 0.0;
  for (std::size_t z = 1; z < dep.num_aps(); ++z) {
    const double rx = p / pathloss_linear(distance(user, dep.ap_positions[z]), cfg);
    interference += rx / (1.0 + dep.num_neighbors(z));
  }
  const double ap1_share = p / pathloss_linear(190.0, cfg) / 4.0;
  CHECK(ap1_share < interference);
  const double signal = p / pathloss_linear(10.0, cfg);
  CHECK(link_sinr(0, dep, cfg) == doctest::Approx(linear_to_db(signal / (interference + noise_power_mw(cfg)))));
}

TEST_CASE("removing an interferer never lowers SINR") {
  RadioConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto dep = build_deployment(5e-3, 120.0, seed, cfg);
    std::mt19937_64 rng(seed);
    for (std::size_t u = 0; u < dep.num_users(); ++u) {
      const double before = link_sinr(u, dep, cfg);
      auto cut = dep;
      const auto z = std::uniform_int_distribution<std::size_t>(0, dep.num_aps() - 1)(rng);
      if (static_cast<int>(z) == dep.association[u]) continue;
      cut.channel_gain(dep.user_node(u), z) = 0.0;
      cut.channel_gain(z, dep.user_node(u)) = 0.0;
      CHECK(link_sinr(u, cut, cfg) >= before);
    }
  }
}

TEST_CASE("air time shares") {
  FrameTimings t;
  SUBCASE("isolated AP") {
    const auto dep = built({{0, 0}}, {{5, 0}}, 100.0);
    const std::vector<double> rates{26e6};
    CHECK(airtime(0, dep, rates, t) == 1.0);
  }
  SUBCASE("two-clique with frame durations 2:1") {
    const auto dep = built({{0, 0}, {5, 0}}, {{-1, 0}, {6, 0}}, 100.0);
    const double tf2 = frame_duration(78e6, t);
    const double r1 = (t.mac_header_bits + t.msdu_bits) / (2.0 * tf2 - t.phy_header_s);
    REQUIRE(frame_duration(r1, t) == doctest::Approx(2.0 * tf2));
    const std::vector<double> rates{r1, 78e6};
    CHECK(airtime(0, dep, rates, t) == doctest::Approx(2.0 / 3.0));
    CHECK(airtime(1, dep, rates, t) == doctest::Approx(1.0 / 3.0));
    const std::vector<double> equal{78e6, 78e6};
    CHECK(airtime(0, dep, equal, t) == doctest::Approx(0.5));
  }
  SUBCASE("no link") {
    const auto dep = built({{0, 0}, {5, 0}}, {{-1, 0}, {6, 0}}, 100.0);
    const std::vector<double> rates{0.0, 78e6};
    CHECK(airtime(0, dep, rates, t) == 0.0);
    CHECK(airtime(1, dep, rates, t) == 1.0);
  }
}

TEST_CASE("clique conservation") {
  RadioConfig cfg;
  FrameTimings t;
  const auto table = RateTable::default_80211ac();
  for (int n : {2, 3, 5, 10}) {
    const auto dep = clique(n);
    const auto links = evaluate_hybrid(dep, cfg, table, t);
    REQUIRE(links.size() == static_cast<std::size_t>(n));
    double total = 0.0;
    const double s = mac_efficiency(uniform_timings(n, 78e6, t)).value;
    for (const auto& l : links) {
      REQUIRE(l.phy_rate_bps == 78e6);
      total += l.airtime;
      CHECK(l.throughput_bps == doctest::Approx(s * 78e6 / n).epsilon(1e-12));
      CHECK(l.sinr_db == doctest::Approx(links[0].sinr_db));
      CHECK(l.mac_eff == links[0].mac_eff);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("throughput identity and ranges on random deployments") {
  RadioConfig cfg;
  FrameTimings t;
  const auto table = RateTable::default_80211ac();
  for (double cst : {-82.0, -62.0}) {
    cfg.cst_dbm = cst;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto dep = build_deployment(5e-3, 223.6, seed, cfg);
      for (const auto& l : evaluate_hybrid(dep, cfg, table, t)) {
        CHECK(l.throughput_bps == l.mac_eff * l.airtime * l.phy_rate_bps);
        CHECK(l.airtime >= 0.0);
        CHECK(l.airtime <= 1.0);
        CHECK(l.mac_eff > 0.0);
        CHECK(l.mac_eff <= 1.0);
        CHECK(dep.served_user[l.ap_id] == l.user_id);
        CHECK(l.inner_flag == dep.inner_mask[l.ap_id]);
        if (l.phy_rate_bps == 0.0) CHECK(l.throughput_bps == 0.0);
      }
    }
  }
}

TEST_CASE("APs without users contend but emit no metrics") {
  RadioConfig cfg;
  FrameTimings t;
  const auto table = RateTable::default_80211ac();
  const auto dep = built({{0, 0}, {5, 0}}, {{-1, 0}}, 100.0);
  REQUIRE(dep.served_user[1] == -1);
  const auto links = evaluate_hybrid(dep, cfg, table, t);
  REQUIRE(links.size() == 1);
  CHECK(links[0].airtime < 1.0);
}
