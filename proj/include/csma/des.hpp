#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "csma/ccdf.hpp"
#include "csma/geometry.hpp"
#include "csma/ratemap.hpp"

namespace csma {

enum class RateMode {
  // Rate re-selected periodically from the user's long-run mean SINR.
  Adaptive,
  // Every AP transmits at DesConfig::fixed_rate_bps.
  Fixed,
};

struct DesConfig {
  double sim_duration_s = 10.0;
  FrameTimings timings;
  RateTable table = RateTable::default_80211ac();
  std::uint64_t rng_seed = 1;
  double rate_update_s = 0.1;
  RateMode rate_mode = RateMode::Adaptive;
  double fixed_rate_bps = 0.0;
  bool record_trace = false;

  void validate() const;
};

struct DesLinkStats {
  int ap_id = -1;
  int user_id = -1;
  // Linear mean over successfully received data frames; -inf if none.
  double mean_rx_sinr_db = 0.0;
  std::int64_t delivered_bits = 0;
  double throughput_bps = 0.0;
  std::int64_t tx_attempts = 0;
  // Failed attempts: in-range overlap or SINR below the rate's threshold.
  std::int64_t collisions = 0;
  bool inner_flag = false;
};

enum class TraceKind { TxStart, TxEnd, Collision, Ack };

struct TraceEvent {
  double time_s;
  int ap_id;
  TraceKind kind;
};

struct DesResult {
  std::vector<DesLinkStats> links;       // one per AP serving a user
  std::vector<double> busy_time_s;       // per AP: completed data+SIFS+ACK exchanges
  std::vector<TraceEvent> trace;         // filled when record_trace is set
};

/// Raised when the event loop stalls or its queue grows without bound.
class DesFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Saturated-downlink CSMA/CA simulation over the deployment's sensing graph.
/// Deterministic given DesConfig::rng_seed.
DesResult run_des(const Deployment& dep, const RadioConfig& cfg, const DesConfig& des);

struct DesCurves {
  CcdfCurve sinr;
  CcdfCurve throughput;
};

/// Empirical CCDFs over the given (already inner-filtered) links. Links that
/// never delivered a frame count as SINR -inf and throughput 0.
DesCurves des_ccdfs(std::span<const DesLinkStats> stats, std::vector<double> sinr_thresholds_db,
                    std::vector<double> throughput_thresholds_bps);

const char* to_string(TraceKind kind);

/// time_s,ap_id,event
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceEvent> trace);

}  // namespace csma
