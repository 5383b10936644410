// Command-line front end: run experiments, compare curves, export deployments.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "csma/ccdf.hpp"
#include "csma/geometry.hpp"
#include "csma/harness.hpp"

namespace {

struct RunOptions {
  std::string model = "hybrid";
  std::string out;
  std::string rate_table;
};

struct CompareOptions {
  std::string a;
  std::string b;
  std::optional<double> lo;
  std::optional<double> hi;
};

struct ExportOptions {
  double density = 1000.0;
  double cst = -82.0;
  double area_km2 = 0.05;
  std::uint64_t seed = 1;
  std::string out;
};

int do_run(csma::ExperimentConfig cfg, const RunOptions& opt) {
  cfg.model = csma::parse_model(opt.model);
  cfg.output_dir = opt.out;
  if (!opt.rate_table.empty()) cfg.table = csma::RateTable::load_csv(opt.rate_table);
  const auto results = csma::run_experiment(cfg);
  for (const auto& r : results) {
    std::printf("%s density=%g cst=%g total_seconds=%.3f", csma::to_string(r.model), r.density_per_km2,
                r.cst_dbm, r.timing.total_seconds);
    if (r.model == csma::Model::Hybrid || r.model == csma::Model::Des)
      std::printf(" inner_links=%zu discarded=%zu", r.inner_links, r.discarded_realizations);
    else
      std::printf(" map_typical=%.4f map_tagged=%.4f", r.map_typical, r.map_tagged);
    std::printf("\n");
  }
  return 0;
}

int do_compare(const CompareOptions& opt) {
  const auto a = csma::read_curve_csv(opt.a);
  const auto b = csma::read_curve_csv(opt.b);
  std::optional<csma::Range> window;
  if (opt.lo || opt.hi) {
    window = csma::Range{opt.lo.value_or(-csma::kInf), opt.hi.value_or(csma::kInf)};
  }
  std::printf("max_abs_diff_pp=%.4f\n", csma::compare_curves(a, b, window));
  return 0;
}

int do_export(const ExportOptions& opt) {
  csma::RadioConfig radio;
  radio.cst_dbm = opt.cst;
  const double side = std::sqrt(opt.area_km2 * 1e6);
  const auto dep = csma::build_deployment(opt.density * 1e-6, side, opt.seed, radio);
  csma::export_deployment(dep, opt.out);
  std::printf("aps=%zu users=%zu inner_aps=%zu\n", dep.num_aps(), dep.num_users(), dep.num_inner_aps());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense WLAN CSMA/CA performance models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file; a [run] section holds key=value pairs named after the run options");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  csma::ExperimentConfig cfg;
  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run one model over a set of densities and CSTs");
  run->fallthrough();
  run->add_option("--model", run_opt.model, "sgm, sgm_enhanced, hybrid or des")->capture_default_str();
  run->add_option("--density", cfg.densities_per_km2, "AP densities per km^2")->capture_default_str();
  run->add_option("--cst", cfg.csts_dbm, "Carrier-sense thresholds in dBm")->capture_default_str();
  run->add_option("--realizations", cfg.realizations, "Monte Carlo realizations")->capture_default_str();
  run->add_option("--seed", cfg.seed, "Base RNG seed")->capture_default_str();
  run->add_option("--area", cfg.area_km2, "Simulation window area in km^2")->capture_default_str();
  run->add_option("--out", run_opt.out, "Output directory")->required();
  run->add_option("--sinr-points", cfg.sinr_points)->capture_default_str();
  run->add_option("--sinr-min", cfg.sinr_lo_db)->capture_default_str();
  run->add_option("--sinr-max", cfg.sinr_hi_db)->capture_default_str();
  run->add_option("--throughput-points", cfg.throughput_points)->capture_default_str();
  run->add_option("--throughput-min", cfg.throughput_lo_bps, "bps")->capture_default_str();
  run->add_option("--throughput-max", cfg.throughput_hi_bps, "bps")->capture_default_str();
  run->add_option("--r0-points", cfg.r0_grid.points, "SGM outer quadrature nodes")->capture_default_str();
  run->add_option("--field-radial", cfg.field_grid.radial)->capture_default_str();
  run->add_option("--field-angular", cfg.field_grid.angular)->capture_default_str();
  run->add_option("--field-radius", cfg.field_grid.max_radius_m, "metres, 0 = automatic")
      ->capture_default_str();
  run->add_option("--des-duration", cfg.des_duration_s, "Simulated seconds per DES realization")
      ->capture_default_str();
  run->add_option("--workers", cfg.workers, "Worker threads, 0 = all cores")->capture_default_str();
  run->add_flag("--curve-seconds", cfg.curve_seconds, "Add per-threshold seconds to SGM SINR curves");
  run->add_option("--rate-table", run_opt.rate_table, "CSV with threshold_db,rate_bps");

  CompareOptions cmp_opt;
  auto* cmp = app.add_subcommand("compare", "Max vertical gap between two CCDF files (pp)");
  cmp->add_option("--a", cmp_opt.a)->required()->check(CLI::ExistingFile);
  cmp->add_option("--b", cmp_opt.b)->required()->check(CLI::ExistingFile);
  cmp->add_option("--min", cmp_opt.lo, "Lower end of the comparison window");
  cmp->add_option("--max", cmp_opt.hi, "Upper end of the comparison window");

  ExportOptions exp_opt;
  auto* exp = app.add_subcommand("export-deployment", "Write nodes.csv and pathloss.csv");
  exp->add_option("--density", exp_opt.density, "APs per km^2")->capture_default_str();
  exp->add_option("--cst", exp_opt.cst, "dBm")->capture_default_str();
  exp->add_option("--area", exp_opt.area_km2, "km^2")->capture_default_str();
  exp->add_option("--seed", exp_opt.seed)->capture_default_str();
  exp->add_option("--out", exp_opt.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    if (run->parsed()) return do_run(cfg, run_opt);
    if (cmp->parsed()) return do_compare(cmp_opt);
    if (exp->parsed()) return do_export(exp_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
