#include "csma/bianchi.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

namespace csma {

void BianchiInputs::validate() const {
  require(n >= 1, "contender count must be at least 1");
  require(avg_frame_s > 0.0 && avg_payload_s > 0.0 && avg_success_s > 0.0 && avg_collision_s > 0.0,
          "Bianchi durations must be positive");
  require(avg_success_s >= avg_frame_s, "success duration shorter than the frame");
}

double tau_of_collision_probability(double p, const FrameTimings& t) {
  const double w = t.cw_min + 1.0;
  const int m = t.backoff_stages();
  // (1 - (2p)^m) / (1 - 2p) written as a finite sum so p = 1/2 is regular.
  double series = 0.0;
  double term = 1.0;
  for (int k = 0; k < m; ++k) {
    series += term;
    term *= 2.0 * p;
  }
  return 2.0 / (1.0 + w + p * w * series);
}

double tau_residual(double tau, int n, const FrameTimings& t) {
  const double p = 1.0 - std::pow(1.0 - tau, n - 1);
  return tau - tau_of_collision_probability(p, t);
}

double solve_tau(int n, const FrameTimings& t, double tolerance) {
  require(n >= 1, "contender count must be at least 1");
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (tau_residual(mid, n, t) < 0.0) lo = mid;
    else hi = mid;
    if (hi - lo < tolerance) return 0.5 * (lo + hi);
  }
  throw NumericalFailure("tau bisection did not converge");
}

MacEfficiency mac_efficiency(const BianchiInputs& in) {
  in.validate();
  const double sigma = in.timings.sigma_s;
  const int n = in.n;
  const double tau = solve_tau(n, in.timings);
  const double tc_slots = in.avg_collision_s / sigma;
  const double idle_all = std::pow(1.0 - tau, n);
  const double one_success = n * tau * std::pow(1.0 - tau, n - 1);
  const double denom = in.avg_success_s - in.avg_collision_s +
                       sigma * (tc_slots - idle_all * (tc_slots - 1.0)) / one_success;
  if (!(denom > 0.0)) throw InvalidArgument("MAC efficiency denominator is not positive");

  MacEfficiency out;
  out.tau = tau;
  out.raw = in.avg_payload_s / denom;
  out.value = out.raw;
  if (out.raw > 1.0) {
    spdlog::warn("MAC efficiency {} exceeds 1 for n={}; clamped", out.raw, n);
    out.value = 1.0;
    out.clamped = true;
  }
  return out;
}

BianchiInputs uniform_timings(int n, double rate_bps, const FrameTimings& t) {
  BianchiInputs in;
  in.n = n;
  in.timings = t;
  in.avg_frame_s = frame_duration(rate_bps, t);
  in.avg_payload_s = payload_duration(rate_bps, t);
  in.avg_success_s = in.avg_frame_s + t.sifs_s + t.ack_duration_s() + t.difs_s;
  in.avg_collision_s = in.avg_frame_s + t.difs_s;
  return in;
}

std::optional<BianchiInputs> neighborhood_timings(std::size_t x, const Deployment& dep,
                                                  std::span<const double> rates,
                                                  const FrameTimings& t) {
  require(rates.size() == dep.num_aps(), "one rate per AP expected");
  double frame_sum = 0.0;
  double payload_sum = 0.0;
  double frame_max = 0.0;
  int counted = 0;
  auto add = [&](std::size_t ap) {
    if (!(rates[ap] > 0.0)) return;
    const double tf = frame_duration(rates[ap], t);
    frame_sum += tf;
    payload_sum += payload_duration(rates[ap], t);
    frame_max = std::max(frame_max, tf);
    ++counted;
  };
  add(x);
  for (int z : dep.sensing_neighbors[x]) add(static_cast<std::size_t>(z));
  if (counted == 0) return std::nullopt;

  BianchiInputs in;
  in.n = 1 + static_cast<int>(dep.num_neighbors(x));
  in.timings = t;
  in.avg_frame_s = frame_sum / counted;
  in.avg_payload_s = payload_sum / counted;
  in.avg_success_s = in.avg_frame_s + t.sifs_s + t.ack_duration_s() + t.difs_s;
  in.avg_collision_s = frame_max + t.difs_s;
  return in;
}

}  // namespace csma
