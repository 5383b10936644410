#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csma/ccdf.hpp"
#include "csma/des.hpp"
#include "csma/hybrid.hpp"
#include "csma/sgm.hpp"

namespace csma {

enum class Model { Sgm, SgmEnhanced, Hybrid, Des };

Model parse_model(std::string_view name);
const char* to_string(Model m);

struct ExperimentConfig {
  Model model = Model::Hybrid;
  std::vector<double> densities_per_km2{500.0, 1000.0, 5000.0, 10000.0};
  std::vector<double> csts_dbm{-82.0};
  int realizations = 50;
  double area_km2 = 0.05;
  std::uint64_t seed = 1;

  OuterGrid r0_grid;
  FieldGrid field_grid;
  std::size_t sinr_points = 60;
  double sinr_lo_db = -10.0;
  double sinr_hi_db = 40.0;
  std::size_t throughput_points = 60;
  double throughput_lo_bps = 0.1e6;
  double throughput_hi_bps = 80e6;

  double des_duration_s = 10.0;
  unsigned workers = 0;  // 0 = hardware concurrency
  bool curve_seconds = false;
  std::filesystem::path output_dir;

  RadioConfig radio;  // cst_dbm is overridden per scenario
  FrameTimings timings;
  RateTable table = RateTable::default_80211ac();

  void validate() const;
  unsigned worker_count() const;
  double area_side_m() const;
  std::vector<double> sinr_grid() const;
  std::vector<double> throughput_grid() const;
  RadioConfig radio_for(double cst_dbm) const;
  SgmConfig sgm_config(double density_per_km2, double cst_dbm) const;
};

struct TimingReport {
  Model model = Model::Hybrid;
  double density_per_km2 = 0.0;
  double cst_dbm = 0.0;
  // Sum of per-unit thread CPU times: the single-core cost regardless of
  // worker count or machine load.
  double total_seconds = 0.0;
  std::vector<double> per_unit_seconds;  // per threshold (SGM) or per realization
  double wall_seconds = 0.0;
  unsigned workers = 1;
  std::string core_count_note;
};

struct ScenarioResult {
  Model model = Model::Hybrid;
  double density_per_km2 = 0.0;
  double cst_dbm = 0.0;
  CcdfCurve sinr;
  CcdfCurve throughput;
  TimingReport timing;
  std::size_t inner_links = 0;         // Monte Carlo models
  std::size_t discarded_realizations = 0;
  std::optional<EnhancedOverhead> overhead;  // SgmEnhanced
  double map_typical = 0.0;            // SGM models
  double map_tagged = 0.0;
};

/// Runs `count` work items on `workers` threads. Item results must be stored
/// by index so that the outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

/// Seed of a realization's deployment; attempt > 0 resamples an empty window.
std::uint64_t realization_seed(std::uint64_t base, std::size_t index, int attempt);

/// Computes one (model, density, CST) scenario without touching the filesystem.
ScenarioResult run_scenario(const ExperimentConfig& cfg, Model model, double density_per_km2,
                            double cst_dbm);

/// Inner-region links pooled over all realizations.
struct PooledLinks {
  std::vector<LinkMetrics> hybrid;
  std::vector<DesLinkStats> des;
  std::vector<double> per_realization_seconds;
  std::size_t discarded = 0;
};
PooledLinks pool_links(const ExperimentConfig& cfg, Model model, double density_per_km2,
                       double cst_dbm);

std::string scenario_stem(Model model, double density_per_km2, double cst_dbm);
std::string fingerprint(const ExperimentConfig& cfg, Model model, double density_per_km2,
                        double cst_dbm);

/// Writes the SINR curve, throughput curve and timing report of a scenario.
void write_scenario(const ExperimentConfig& cfg, const ScenarioResult& result);
void write_timing_csv(const std::filesystem::path& path, const TimingReport& report);

/// Validates the config and the output directory, then runs and writes every
/// (density, CST) scenario of cfg.model.
std::vector<ScenarioResult> run_experiment(const ExperimentConfig& cfg);

}  // namespace csma
