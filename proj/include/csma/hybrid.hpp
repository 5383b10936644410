#pragma once

#include <span>
#include <vector>

#include "csma/geometry.hpp"
#include "csma/ratemap.hpp"

namespace csma {

/// Time-average metrics of one AP -> user downlink.
struct LinkMetrics {
  int ap_id = -1;
  int user_id = -1;
  double sinr_db = 0.0;
  double phy_rate_bps = 0.0;
  double airtime = 0.0;
  double mac_eff = 1.0;
  double throughput_bps = 0.0;  // mac_eff * airtime * phy_rate_bps
  bool inner_flag = false;
};

/// Time-average SINR at `user`: interferers are the APs outside the serving
/// AP's sensing range, each weighted by 1 / (1 + |A_z|).
double link_sinr(std::size_t user, const Deployment& dep, const RadioConfig& cfg);

/// Share of channel time AP x obtains among its sensing neighbours, given
/// per-AP PHY rates (0 = no link, excluded from the neighbour sum).
double airtime(std::size_t x, const Deployment& dep, std::span<const double> rates,
               const FrameTimings& t);

/// Per-link SINR, rate, air time, MAC efficiency and throughput for every
/// AP that serves a user. Rates are resolved once from SINR; air time and
/// efficiency then use those rates without further iteration. APs without a
/// user emit no metrics but contend with top-rate frames.
std::vector<LinkMetrics> evaluate_hybrid(const Deployment& dep, const RadioConfig& cfg,
                                         const RateTable& table, const FrameTimings& t);

/// Per-link CSV: ap_id,user_id,sinr_db,rate_bps,airtime,mac_eff,throughput_bps,inner_flag
void write_link_csv(const std::filesystem::path& path, std::span<const LinkMetrics> links);

}  // namespace csma
