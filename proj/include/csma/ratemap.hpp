#pragma once

#include <exception>
#include <filesystem>
#include <vector>

namespace csma {

struct RateStep {
  double sinr_threshold_db;
  double phy_rate_bps;
};

/// SINR -> PHY-rate step function of the 802.11ac auto-rate abstraction.
struct RateTable {
  std::vector<RateStep> steps;

  /// 20 MHz, one spatial stream, 800 ns guard interval; 4 dB entry, 27 dB top.
  static RateTable default_80211ac();
  /// Reads `threshold_db,rate_bps` rows (header row required).
  static RateTable load_csv(const std::filesystem::path& path);

  void validate() const;
  double min_threshold_db() const { return steps.front().sinr_threshold_db; }
  double max_rate_bps() const { return steps.back().phy_rate_bps; }
  double min_rate_bps() const { return steps.front().phy_rate_bps; }
};

/// MAC/PHY timing constants of 802.11ac without RTS/CTS.
struct FrameTimings {
  double sigma_s = 9e-6;
  double sifs_s = 16e-6;
  double difs_s = 34e-6;
  double phy_header_s = 40e-6;
  int mac_header_bits = 320;
  int msdu_bits = 12000;
  int ack_bits = 112;
  double ack_rate_bps = 24e6;
  int cw_min = 15;
  int cw_max = 1023;

  void validate() const;
  /// Number of window doublings between cw_min and cw_max.
  int backoff_stages() const;
  /// Channel time of an ACK frame (PHY header plus ACK bits at the basic rate).
  double ack_duration_s() const { return phy_header_s + ack_bits / ack_rate_bps; }
};

/// 0 below the first threshold, otherwise the rate of the largest threshold <= sinr_db.
double rate_of_sinr(double sinr_db, const RateTable& table);

/// Smallest threshold whose rate >= target; -inf for target <= 0, +inf above the top rate.
double inv_rate(double target_rate_bps, const RateTable& table);

/// Full frame duration at `phy_rate_bps`; throws NoLink for a zero rate.
double frame_duration(double phy_rate_bps, const FrameTimings& t);

/// Time spent on MSDU bits alone at `phy_rate_bps`.
double payload_duration(double phy_rate_bps, const FrameTimings& t);

class NoLink : public std::exception {
 public:
  const char* what() const noexcept override { return "link has no usable PHY rate"; }
};

}  // namespace csma
