#include "csma/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "csma/csv.hpp"

namespace csma {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// CPU time of the calling thread; unlike wall time it does not grow when the
// thread is preempted, so per-unit costs stay comparable on a loaded machine.
double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

// Decorrelates the event-loop RNG from the deployment RNG.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr int kMaxResamples = 100;

}  // namespace

Model parse_model(std::string_view name) {
  if (name == "sgm") return Model::Sgm;
  if (name == "sgm_enhanced") return Model::SgmEnhanced;
  if (name == "hybrid") return Model::Hybrid;
  if (name == "des") return Model::Des;
  throw InvalidArgument("unknown model '" + std::string(name) +
                        "' (expected sgm, sgm_enhanced, hybrid or des)");
}

const char* to_string(Model m) {
  switch (m) {
    case Model::Sgm: return "sgm";
    case Model::SgmEnhanced: return "sgm_enhanced";
    case Model::Hybrid: return "hybrid";
    case Model::Des: return "des";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  require(realizations >= 1, "realizations must be at least 1");
  require(!densities_per_km2.empty() && !csts_dbm.empty(), "densities and CSTs must be non-empty");
  for (double d : densities_per_km2) require(d > 0.0, "densities must be positive");
  for (double c : csts_dbm) radio_for(c).validate();
  require(area_km2 > 0.0, "area must be positive");
  require(sinr_points >= 2 && sinr_hi_db > sinr_lo_db, "invalid SINR grid");
  require(throughput_points >= 2 && throughput_hi_bps > throughput_lo_bps && throughput_lo_bps > 0.0,
          "invalid throughput grid");
  require(des_duration_s > 0.0, "DES duration must be positive");
  timings.validate();
  table.validate();
}

unsigned ExperimentConfig::worker_count() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

double ExperimentConfig::area_side_m() const { return std::sqrt(area_km2 * 1e6); }

std::vector<double> ExperimentConfig::sinr_grid() const {
  return linear_grid(sinr_lo_db, sinr_hi_db, sinr_points);
}

std::vector<double> ExperimentConfig::throughput_grid() const {
  return log_grid(throughput_lo_bps, throughput_hi_bps, throughput_points);
}

RadioConfig ExperimentConfig::radio_for(double cst_dbm) const {
  RadioConfig r = radio;
  r.cst_dbm = cst_dbm;
  return r;
}

SgmConfig ExperimentConfig::sgm_config(double density_per_km2, double cst_dbm) const {
  SgmConfig s;
  s.density = density_per_km2 * 1e-6;
  s.radio = radio_for(cst_dbm);
  s.r0_grid = r0_grid;
  s.field_grid = field_grid;
  return s;
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t realization_seed(std::uint64_t base, std::size_t index, int attempt) {
  return base + index + static_cast<std::uint64_t>(attempt) * 1'000'003ULL;
}

PooledLinks pool_links(const ExperimentConfig& cfg, Model model, double density_per_km2,
                       double cst_dbm) {
  require(model == Model::Hybrid || model == Model::Des, "pool_links needs a Monte Carlo model");
  const RadioConfig radio = cfg.radio_for(cst_dbm);
  const auto n = static_cast<std::size_t>(cfg.realizations);

  struct Item {
    std::vector<LinkMetrics> hybrid;
    std::vector<DesLinkStats> des;
    double seconds = 0.0;
    bool discarded = false;
  };
  std::vector<Item> items(n);

  parallel_for(n, cfg.worker_count(), [&](std::size_t i) {
    Item& item = items[i];
    Deployment dep;
    std::uint64_t seed = 0;
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxResamples) throw EmptyRealization("PPP window stayed empty after resampling");
      seed = realization_seed(cfg.seed, i, attempt);
      try {
        dep = build_deployment(density_per_km2 * 1e-6, cfg.area_side_m(), seed, radio);
        break;
      } catch (const EmptyRealization&) {
        spdlog::info("realization {} attempt {} sampled no APs; resampling", i, attempt);
      }
    }
    if (dep.num_inner_aps() == 0) {
      spdlog::info("realization {} has an empty inner region; discarded", i);
      item.discarded = true;
      return;
    }

    const double start = thread_cpu_seconds();
    if (model == Model::Hybrid) {
      auto links = evaluate_hybrid(dep, radio, cfg.table, cfg.timings);
      item.seconds = thread_cpu_seconds() - start;
      for (auto& l : links) {
        if (l.inner_flag) item.hybrid.push_back(l);
      }
    } else {
      DesConfig des;
      des.sim_duration_s = cfg.des_duration_s;
      des.timings = cfg.timings;
      des.table = cfg.table;
      des.rng_seed = mix(seed);
      auto result = run_des(dep, radio, des);
      item.seconds = thread_cpu_seconds() - start;
      for (auto& l : result.links) {
        if (l.inner_flag) item.des.push_back(l);
      }
    }
  });

  PooledLinks out;
  for (auto& item : items) {
    if (item.discarded) {
      ++out.discarded;
      continue;
    }
    out.per_realization_seconds.push_back(item.seconds);
    out.hybrid.insert(out.hybrid.end(), item.hybrid.begin(), item.hybrid.end());
    out.des.insert(out.des.end(), item.des.begin(), item.des.end());
  }
  return out;
}

namespace {

ScenarioResult run_sgm(const ExperimentConfig& cfg, Model model, double density, double cst) {
  ScenarioResult res;
  const SgmModel sgm(cfg.sgm_config(density, cst));
  res.map_typical = sgm.map_typical();
  res.map_tagged = sgm.map_tagged();

  const std::vector<double> thresholds = cfg.sinr_grid();
  std::vector<double> coverage(thresholds.size());
  std::vector<double> seconds(thresholds.size());
  const auto wall = Clock::now();
  parallel_for(thresholds.size(), cfg.worker_count(), [&](std::size_t i) {
    const double start = thread_cpu_seconds();
    coverage[i] = sgm.sinr_coverage(thresholds[i]);
    seconds[i] = thread_cpu_seconds() - start;
  });
  res.timing.wall_seconds = seconds_since(wall);
  res.sinr = CcdfCurve{thresholds, coverage};

  std::optional<double> s_bar;
  if (model == Model::SgmEnhanced) {
    res.overhead = enhanced_overhead(sgm, cfg.table, res.sinr, cfg.timings);
    s_bar = res.overhead->s_bar;
  }

  // Auto-rate thresholds collapse onto the table steps; evaluate each once.
  const std::vector<double> rhos = cfg.throughput_grid();
  std::map<double, double> cache;
  std::vector<double> tput(rhos.size());
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    const double t = sgm.rate_threshold_db(rhos[i], cfg.table, s_bar, RateMapping::AutoRate);
    auto it = cache.find(t);
    if (it == cache.end()) it = cache.emplace(t, sgm.sinr_coverage(t)).first;
    tput[i] = it->second;
  }
  res.throughput = CcdfCurve{rhos, tput};
  res.timing.per_unit_seconds = std::move(seconds);
  res.timing.core_count_note = "per_threshold_single_core";
  return res;
}

ScenarioResult run_monte_carlo(const ExperimentConfig& cfg, Model model, double density,
                               double cst) {
  ScenarioResult res;
  const auto wall = Clock::now();
  PooledLinks pooled = pool_links(cfg, model, density, cst);
  res.timing.wall_seconds = seconds_since(wall);
  res.discarded_realizations = pooled.discarded;

  std::vector<double> sinr;
  std::vector<double> tput;
  if (model == Model::Hybrid) {
    for (const auto& l : pooled.hybrid) {
      sinr.push_back(l.sinr_db);
      tput.push_back(l.throughput_bps);
    }
    res.inner_links = pooled.hybrid.size();
  } else {
    res.inner_links = pooled.des.size();
  }
  if (res.inner_links == 0) throw EmptyRealization("no inner-region links in any realization");

  if (model == Model::Hybrid) {
    res.sinr = empirical_ccdf(sinr, cfg.sinr_grid());
    res.throughput = empirical_ccdf(tput, cfg.throughput_grid());
  } else {
    DesCurves curves = des_ccdfs(pooled.des, cfg.sinr_grid(), cfg.throughput_grid());
    res.sinr = std::move(curves.sinr);
    res.throughput = std::move(curves.throughput);
  }
  res.timing.per_unit_seconds = std::move(pooled.per_realization_seconds);
  res.timing.core_count_note = "per_realization_single_core";
  return res;
}

std::string compact(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

ScenarioResult run_scenario(const ExperimentConfig& cfg, Model model, double density_per_km2,
                            double cst_dbm) {
  cfg.validate();
  ScenarioResult res = (model == Model::Sgm || model == Model::SgmEnhanced)
                           ? run_sgm(cfg, model, density_per_km2, cst_dbm)
                           : run_monte_carlo(cfg, model, density_per_km2, cst_dbm);
  res.model = model;
  res.density_per_km2 = density_per_km2;
  res.cst_dbm = cst_dbm;
  res.timing.model = model;
  res.timing.density_per_km2 = density_per_km2;
  res.timing.cst_dbm = cst_dbm;
  res.timing.workers = cfg.worker_count();
  res.timing.total_seconds = 0.0;
  for (double s : res.timing.per_unit_seconds) res.timing.total_seconds += s;
  res.sinr.validate();
  res.throughput.validate();
  return res;
}

std::string scenario_stem(Model model, double density_per_km2, double cst_dbm) {
  return std::string(to_string(model)) + "_d" + compact(density_per_km2) + "_cst" + compact(cst_dbm);
}

std::string fingerprint(const ExperimentConfig& cfg, Model model, double density_per_km2,
                        double cst_dbm) {
  const RadioConfig r = cfg.radio_for(cst_dbm);
  std::ostringstream s;
  s << "model=" << to_string(model) << " density_per_km2=" << compact(density_per_km2)
    << " cst_dbm=" << compact(cst_dbm) << " tx_power_dbm=" << compact(r.tx_power_dbm)
    << " noise_psd_dbmhz=" << compact(r.noise_psd_dbmhz) << " noise_figure_db=" << compact(r.noise_figure_db)
    << " bandwidth_hz=" << compact(r.bandwidth_hz) << " pathloss_exponent=" << compact(r.pathloss_exponent)
    << " pathloss_ref_db=" << compact(r.pathloss_ref_db) << " area_km2=" << compact(cfg.area_km2);
  if (model == Model::Sgm || model == Model::SgmEnhanced) {
    s << " r0_points=" << cfg.r0_grid.points << " r0_max_m=" << compact(cfg.r0_grid.max_radius_m)
      << " field_radial=" << cfg.field_grid.radial << " field_angular=" << cfg.field_grid.angular
      << " field_max_m=" << compact(cfg.field_grid.max_radius_m);
  } else {
    s << " realizations=" << cfg.realizations << " seed=" << cfg.seed;
    if (model == Model::Des) s << " des_duration_s=" << compact(cfg.des_duration_s);
  }
  return s.str();
}

void write_timing_csv(const std::filesystem::path& path, const TimingReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# total_seconds=" << format_real(report.total_seconds)
      << " wall_seconds=" << format_real(report.wall_seconds) << " workers=" << report.workers
      << " note=" << report.core_count_note << '\n';
  out << "model,density,cst,unit_index,seconds\n";
  for (std::size_t i = 0; i < report.per_unit_seconds.size(); ++i) {
    out << to_string(report.model) << ',' << compact(report.density_per_km2) << ','
        << compact(report.cst_dbm) << ',' << i << ',' << format_real(report.per_unit_seconds[i]) << '\n';
  }
}

void write_scenario(const ExperimentConfig& cfg, const ScenarioResult& res) {
  const std::string stem = scenario_stem(res.model, res.density_per_km2, res.cst_dbm);
  const std::string fp = fingerprint(cfg, res.model, res.density_per_km2, res.cst_dbm);
  const bool sgm = res.model == Model::Sgm || res.model == Model::SgmEnhanced;
  std::span<const double> seconds;
  if (cfg.curve_seconds && sgm) seconds = res.timing.per_unit_seconds;
  write_curve_csv(cfg.output_dir / (stem + "_sinr.csv"), res.sinr, fp, seconds);
  write_curve_csv(cfg.output_dir / (stem + "_throughput.csv"), res.throughput, fp);
  write_timing_csv(cfg.output_dir / (stem + "_timing.csv"), res.timing);
}

std::vector<ScenarioResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  require(!cfg.output_dir.empty(), "output directory must be set");
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  const auto probe = cfg.output_dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (ec || !out) throw std::runtime_error("output directory is not writable: " + cfg.output_dir.string());
  }
  std::filesystem::remove(probe);

  std::vector<ScenarioResult> results;
  for (double density : cfg.densities_per_km2) {
    for (double cst : cfg.csts_dbm) {
      spdlog::info("running {} at {} APs/km2, CST {} dBm", to_string(cfg.model), density, cst);
      results.push_back(run_scenario(cfg, cfg.model, density, cst));
      write_scenario(cfg, results.back());
    }
  }
  return results;
}

}  // namespace csma
