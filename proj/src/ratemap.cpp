#include "csma/ratemap.hpp"

#include <bit>
#include <string>

#include "csma/csv.hpp"
#include "csma/units.hpp"

namespace csma {

RateTable RateTable::default_80211ac() {
  return RateTable{{{4.0, 6.5e6},
                    {7.0, 13.0e6},
                    {10.0, 19.5e6},
                    {13.0, 26.0e6},
                    {16.0, 39.0e6},
                    {19.0, 52.0e6},
                    {22.0, 58.5e6},
                    {25.0, 65.0e6},
                    {27.0, 78.0e6}}};
}

RateTable RateTable::load_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  const std::size_t thr = csv.column("threshold_db");
  const std::size_t rate = csv.column("rate_bps");
  RateTable table;
  for (const auto& row : csv.rows) {
    table.steps.push_back({std::stod(row.at(thr)), std::stod(row.at(rate))});
  }
  table.validate();
  return table;
}

void RateTable::validate() const {
  require(!steps.empty(), "rate table is empty");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    require(steps[i].phy_rate_bps > 0.0, "rate table rates must be positive");
    if (i == 0) continue;
    require(steps[i].sinr_threshold_db > steps[i - 1].sinr_threshold_db,
            "rate table thresholds must be strictly increasing");
    require(steps[i].phy_rate_bps > steps[i - 1].phy_rate_bps,
            "rate table rates must be strictly increasing");
  }
  require(steps.front().sinr_threshold_db == 4.0, "rate table must start at 4 dB");
  require(steps.back().sinr_threshold_db == 27.0, "rate table must end at 27 dB");
}

void FrameTimings::validate() const {
  require(sigma_s > 0.0 && sifs_s > 0.0 && phy_header_s >= 0.0, "timings must be positive");
  require(std::abs(difs_s - (sifs_s + 2.0 * sigma_s)) < 1e-12, "DIFS must equal SIFS + 2 sigma");
  require(cw_min >= 1 && cw_max >= cw_min, "invalid contention window bounds");
  const unsigned ratio = static_cast<unsigned>((cw_max + 1) / (cw_min + 1));
  require((cw_max + 1) % (cw_min + 1) == 0 && std::has_single_bit(ratio),
          "cw_max+1 must be a power-of-two multiple of cw_min+1");
  require(msdu_bits > 0 && ack_rate_bps > 0.0, "invalid frame sizes");
}

int FrameTimings::backoff_stages() const {
  return std::countr_zero(static_cast<unsigned>((cw_max + 1) / (cw_min + 1)));
}

double rate_of_sinr(double sinr_db, const RateTable& table) {
  double rate = 0.0;
  for (const auto& step : table.steps) {
    if (sinr_db >= step.sinr_threshold_db) rate = step.phy_rate_bps;
    else break;
  }
  return rate;
}

double inv_rate(double target_rate_bps, const RateTable& table) {
  if (target_rate_bps <= 0.0) return -kInf;
  for (const auto& step : table.steps) {
    if (step.phy_rate_bps >= target_rate_bps) return step.sinr_threshold_db;
  }
  return kInf;
}

double frame_duration(double phy_rate_bps, const FrameTimings& t) {
  if (!(phy_rate_bps > 0.0)) throw NoLink();
  return t.phy_header_s + (t.mac_header_bits + t.msdu_bits) / phy_rate_bps;
}

double payload_duration(double phy_rate_bps, const FrameTimings& t) {
  if (!(phy_rate_bps > 0.0)) throw NoLink();
  return t.msdu_bits / phy_rate_bps;
}

}  // namespace csma
