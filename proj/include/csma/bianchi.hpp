#pragma once

#include <optional>
#include <span>

#include "csma/geometry.hpp"
#include "csma/ratemap.hpp"

namespace csma {

/// Neighbourhood-averaged durations feeding the MAC efficiency.
struct BianchiInputs {
  int n = 1;                    // contenders, 1 + |A_x|
  double avg_frame_s = 0.0;     // mean full frame duration
  double avg_payload_s = 0.0;   // mean MSDU-only duration
  double avg_success_s = 0.0;   // channel time of a successful exchange
  double avg_collision_s = 0.0; // channel time of a collision
  FrameTimings timings;

  void validate() const;
};

/// Saturated binary-exponential-backoff transmission probability for `n`
/// contenders. Solved by bisection; the fixed-point map is monotone so the
/// root is unique.
double solve_tau(int n, const FrameTimings& t, double tolerance = 1e-12);

/// tau - G(p(tau)) for the backoff fixed-point system; zero at the solution.
double tau_residual(double tau, int n, const FrameTimings& t);

/// Per-slot transmission probability as a function of the conditional
/// collision probability.
double tau_of_collision_probability(double p, const FrameTimings& t);

struct MacEfficiency {
  double value = 1.0;  // clamped to (0, 1]
  double raw = 1.0;    // before clamping
  double tau = 0.0;
  bool clamped = false;
};

/// Saturation MAC efficiency with heterogeneous frame durations.
/// Throws InvalidArgument when the denominator is not positive.
MacEfficiency mac_efficiency(const BianchiInputs& in);

/// Builds the durations over {x} U A_x from per-AP PHY rates. APs with rate 0
/// are left out of the averages; returns nullopt when none remain.
std::optional<BianchiInputs> neighborhood_timings(std::size_t x, const Deployment& dep,
                                                  std::span<const double> rates,
                                                  const FrameTimings& t);

/// Durations for `n` contenders all using `rate_bps`.
BianchiInputs uniform_timings(int n, double rate_bps, const FrameTimings& t);

}  // namespace csma
