#include <atomic>
#include <fstream>
#include <iterator>
#include <sstream>

#include <doctest.h>

#include "csma/csv.hpp"
#include "csma/harness.hpp"
#include "test_util.hpp"

using namespace csma;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_files(const std::filesystem::path& dir) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

}  // namespace

TEST_CASE("model names") {
  for (Model m : {Model::Sgm, Model::SgmEnhanced, Model::Hybrid, Model::Des}) {
    CHECK(parse_model(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_model("ns3"), InvalidArgument);
}

TEST_CASE("parallel_for covers every item and propagates errors") {
  for (unsigned workers : {1u, 3u}) {
    std::vector<int> seen(100, 0);
    parallel_for(seen.size(), workers, [&](std::size_t i) { seen[i] += 1; });
    CHECK(std::count(seen.begin(), seen.end(), 1) == 100);
    CHECK_THROWS_AS(parallel_for(10, workers,
                                 [](std::size_t i) {
                                   if (i == 7) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
  }
}

TEST_CASE("hybrid defaults write three files per density") {
  ExperimentConfig cfg;
  cfg.model = Model::Hybrid;
  cfg.output_dir = test_util::scratch_dir("hybrid_defaults");
  const auto results = run_experiment(cfg);
  CHECK(results.size() == 4);
  CHECK(count_files(cfg.output_dir) == 12);
  for (const auto& r : results) {
    const auto stem = scenario_stem(r.model, r.density_per_km2, r.cst_dbm);
    for (const char* kind : {"_sinr.csv", "_throughput.csv"}) {
      const auto curve = read_curve_csv(cfg.output_dir / (stem + kind));
      CHECK(curve.is_proper());
    }
    CHECK(r.timing.per_unit_seconds.size() + r.discarded_realizations == 50);
    CHECK(r.inner_links > 0);
  }
  const auto timing = read_csv(cfg.output_dir / "hybrid_d500_cst-82_timing.csv");
  CHECK(timing.header == std::vector<std::string>{"model", "density", "cst", "unit_index", "seconds"});
}

TEST_CASE("SGM reports one timing per threshold") {
  ExperimentConfig cfg;
  cfg.model = Model::Sgm;
  cfg.densities_per_km2 = {1000.0};
  cfg.curve_seconds = true;
  cfg.output_dir = test_util::scratch_dir("sgm_timing");
  const auto results = run_experiment(cfg);
  REQUIRE(results.size() == 1);
  CHECK(results[0].timing.per_unit_seconds.size() == 60);
  const auto sinr = read_csv(cfg.output_dir / "sgm_d1000_cst-82_sinr.csv");
  CHECK(sinr.header == std::vector<std::string>{"threshold", "ccdf", "seconds"});
  CHECK(sinr.rows.size() == 60);
  CHECK(count_files(cfg.output_dir) == 3);
}

TEST_CASE("reruns are byte-identical regardless of worker count") {
  for (Model m : {Model::Hybrid, Model::Des, Model::SgmEnhanced}) {
    ExperimentConfig cfg;
    cfg.model = m;
    cfg.densities_per_km2 = {2000.0};
    cfg.csts_dbm = {-82.0, -72.0};
    cfg.realizations = 4;
    cfg.des_duration_s = 0.5;
    cfg.workers = 1;
    cfg.output_dir = test_util::scratch_dir(std::string("rerun_a_") + to_string(m));
    run_experiment(cfg);
    const auto first = cfg.output_dir;
    cfg.workers = 3;
    cfg.output_dir = test_util::scratch_dir(std::string("rerun_b_") + to_string(m));
    run_experiment(cfg);
    for (const auto& e : std::filesystem::directory_iterator(first)) {
      const auto name = e.path().filename().string();
      if (name.find("_timing") != std::string::npos) continue;
      CAPTURE(name);
      CHECK(slurp(e.path()) == slurp(cfg.output_dir / name));
    }
  }
}

TEST_CASE("sparse windows are resampled or discarded") {
  ExperimentConfig cfg;
  cfg.realizations = 30;
  const auto r = run_scenario(cfg, Model::Hybrid, 30.0, -82.0);
  CHECK(r.discarded_realizations > 0);
  CHECK(r.discarded_realizations < 30);
  CHECK(r.sinr.is_proper());
}

TEST_CASE("invalid configurations fail before any computation") {
  ExperimentConfig cfg;
  const auto dir = test_util::scratch_dir("bad_out");
  {
    std::ofstream blocker(dir / "file");
  }
  cfg.output_dir = dir / "file" / "sub";
  CHECK_THROWS(run_experiment(cfg));

  cfg.output_dir = dir;
  cfg.realizations = 0;
  CHECK_THROWS_AS(run_experiment(cfg), InvalidArgument);
  cfg.realizations = 1;
  cfg.densities_per_km2 = {-5.0};
  CHECK_THROWS_AS(run_experiment(cfg), InvalidArgument);
  cfg.densities_per_km2 = {500.0};
  cfg.csts_dbm = {30.0};
  CHECK_THROWS_AS(run_experiment(cfg), InvalidArgument);
  CHECK(count_files(dir) == 1);
}

TEST_CASE("fingerprint names the scenario") {
  ExperimentConfig cfg;
  const auto fp = fingerprint(cfg, Model::Des, 5000.0, -62.0);
  CHECK(fp.find("model=des") != std::string::npos);
  CHECK(fp.find("cst_dbm=-62") != std::string::npos);
  CHECK(fp.find("des_duration_s=10") != std::string::npos);
  CHECK(scenario_stem(Model::Sgm, 500.0, -82.0) == "sgm_d500_cst-82");
}
