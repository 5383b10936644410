#include "csma/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "csma/csv.hpp"

namespace csma {

void RadioConfig::validate() const {
  require(tx_power_dbm > cst_dbm, "tx_power_dbm must exceed cst_dbm");
  require(bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  require(pathloss_exponent > 2.0, "pathloss_exponent must exceed 2");
}

double pathloss_db(double distance_m, const RadioConfig& cfg) {
  const double d = std::max(distance_m, kMinSeparationM);
  return cfg.pathloss_ref_db + 10.0 * cfg.pathloss_exponent * std::log10(d);
}

double pathloss_linear(double distance_m, const RadioConfig& cfg) {
  const double d = std::max(distance_m, kMinSeparationM);
  return db_to_linear(cfg.pathloss_ref_db) * std::pow(d, cfg.pathloss_exponent);
}

double noise_power_dbm(const RadioConfig& cfg) {
  require(cfg.bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  return cfg.noise_psd_dbmhz + 10.0 * std::log10(cfg.bandwidth_hz) + cfg.noise_figure_db;
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::size_t Deployment::num_inner_aps() const {
  return static_cast<std::size_t>(std::count(inner_mask.begin(), inner_mask.end(), true));
}

namespace {

void associate(Deployment& dep) {
  const std::size_t n_aps = dep.num_aps();
  dep.association.assign(dep.num_users(), -1);
  dep.served_user.assign(n_aps, -1);
  for (std::size_t u = 0; u < dep.num_users(); ++u) {
    double best = kInf;
    int best_ap = -1;
    for (std::size_t a = 0; a < n_aps; ++a) {
      // Strict comparison keeps the lowest index on ties.
      const double d = distance(dep.user_positions[u], dep.ap_positions[a]);
      if (d < best) {
        best = d;
        best_ap = static_cast<int>(a);
      }
    }
    dep.association[u] = best_ap;
    if (best_ap >= 0 && dep.served_user[best_ap] < 0) dep.served_user[best_ap] = static_cast<int>(u);
  }
}

void mark_inner(Deployment& dep) {
  const double lo = dep.area_side_m / 3.0;
  const double hi = 2.0 * dep.area_side_m / 3.0;
  dep.inner_mask.resize(dep.num_aps());
  for (std::size_t a = 0; a < dep.num_aps(); ++a) {
    const Point& p = dep.ap_positions[a];
    dep.inner_mask[a] = p.x >= lo && p.x <= hi && p.y >= lo && p.y <= hi;
  }
}

}  // namespace

Deployment make_deployment(std::vector<Point> aps, std::vector<Point> users, double area_side_m) {
  require(area_side_m > 0.0, "area_side_m must be positive");
  Deployment dep;
  dep.ap_positions = std::move(aps);
  dep.user_positions = std::move(users);
  dep.area_side_m = area_side_m;
  associate(dep);
  mark_inner(dep);
  return dep;
}

Deployment sample_ppp(double density_per_m2, double area_side_m, std::uint64_t rng_seed) {
  require(density_per_m2 > 0.0, "density must be positive");
  require(area_side_m > 0.0, "area_side_m must be positive");
  std::mt19937_64 rng(rng_seed);
  std::poisson_distribution<long> count_dist(density_per_m2 * area_side_m * area_side_m);
  std::uniform_real_distribution<double> coord(0.0, area_side_m);

  const long n = count_dist(rng);
  if (n == 0) throw EmptyRealization("PPP sample contains no APs");

  std::vector<Point> aps(static_cast<std::size_t>(n));
  for (auto& p : aps) p = {coord(rng), coord(rng)};
  std::vector<Point> users(static_cast<std::size_t>(n));
  for (auto& p : users) p = {coord(rng), coord(rng)};
  return make_deployment(std::move(aps), std::move(users), area_side_m);
}

namespace {

void fill_gains(Deployment& dep) {
  const std::size_t n = dep.pathloss_db.size();
  dep.channel_gain = SquareMatrix<double>(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) dep.channel_gain(i, j) = 1.0 / db_to_linear(dep.pathloss_db(i, j));
    }
  }
}

}  // namespace

void build_pathloss(Deployment& dep, const RadioConfig& cfg) {
  const std::size_t n_aps = dep.num_aps();
  const std::size_t n = n_aps + dep.num_users();
  auto position = [&](std::size_t i) -> const Point& {
    return i < n_aps ? dep.ap_positions[i] : dep.user_positions[i - n_aps];
  };
  dep.pathloss_db = SquareMatrix<double>(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double loss = pathloss_db(distance(position(i), position(j)), cfg);
      dep.pathloss_db(i, j) = loss;
      dep.pathloss_db(j, i) = loss;
    }
  }
  fill_gains(dep);
}

void build_sensing_graph(Deployment& dep, const RadioConfig& cfg) {
  require(dep.pathloss_db.size() == dep.num_aps() + dep.num_users(),
          "path-loss matrix must be populated before the sensing graph");
  const std::size_t n_aps = dep.num_aps();
  dep.sensing_adj = SquareMatrix<std::uint8_t>(n_aps, 0);
  dep.sensing_neighbors.assign(n_aps, {});
  for (std::size_t i = 0; i < n_aps; ++i) {
    for (std::size_t j = i + 1; j < n_aps; ++j) {
      const bool sensed = cfg.tx_power_dbm - dep.pathloss_db(i, j) >= cfg.cst_dbm;
      if (!sensed) continue;
      dep.sensing_adj(i, j) = 1;
      dep.sensing_adj(j, i) = 1;
    }
  }
  for (std::size_t i = 0; i < n_aps; ++i) {
    for (std::size_t j = 0; j < n_aps; ++j) {
      if (dep.sensing_adj(i, j)) dep.sensing_neighbors[i].push_back(static_cast<int>(j));
    }
  }
}

Deployment build_deployment(double density_per_m2, double area_side_m, std::uint64_t rng_seed,
                            const RadioConfig& cfg) {
  cfg.validate();
  Deployment dep = sample_ppp(density_per_m2, area_side_m, rng_seed);
  build_pathloss(dep, cfg);
  build_sensing_graph(dep, cfg);
  return dep;
}

void export_deployment(const Deployment& dep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "nodes.csv");
    if (!out) throw std::runtime_error("cannot write " + (dir / "nodes.csv").string());
    out << "# area_side_m=" << format_real(dep.area_side_m) << "\n";
    out << "id,kind,x_m,y_m,assoc_id,inner_flag\n";
    for (std::size_t a = 0; a < dep.num_aps(); ++a) {
      out << a << ",ap," << format_real(dep.ap_positions[a].x) << ','
          << format_real(dep.ap_positions[a].y) << ",-1," << (dep.inner_mask[a] ? 1 : 0) << '\n';
    }
    for (std::size_t u = 0; u < dep.num_users(); ++u) {
      const int ap = dep.association[u];
      out << dep.user_node(u) << ",user," << format_real(dep.user_positions[u].x) << ','
          << format_real(dep.user_positions[u].y) << ',' << ap << ','
          << (ap >= 0 && dep.inner_mask[static_cast<std::size_t>(ap)] ? 1 : 0) << '\n';
    }
  }
  std::ofstream out(dir / "pathloss.csv");
  if (!out) throw std::runtime_error("cannot write " + (dir / "pathloss.csv").string());
  out << "i,j,loss_db\n";
  const std::size_t n = dep.pathloss_db.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out << i << ',' << j << ',' << format_real(dep.pathloss_db(i, j)) << '\n';
    }
  }
}

Deployment import_deployment(const std::filesystem::path& dir, const RadioConfig& cfg) {
  cfg.validate();
  const CsvTable nodes = read_csv(dir / "nodes.csv");
  Deployment dep;
  dep.area_side_m = std::stod(nodes.comment_value("area_side_m"));

  std::vector<int> assoc;
  std::vector<bool> inner;
  for (const auto& row : nodes.rows) {
    if (row.size() != 6) throw std::runtime_error("nodes.csv: expected 6 columns");
    const Point p{std::stod(row[2]), std::stod(row[3])};
    if (row[1] == "ap") {
      if (!dep.user_positions.empty()) throw std::runtime_error("nodes.csv: APs must precede users");
      dep.ap_positions.push_back(p);
      inner.push_back(row[5] == "1");
    } else if (row[1] == "user") {
      dep.user_positions.push_back(p);
      assoc.push_back(std::stoi(row[4]));
    } else {
      throw std::runtime_error("nodes.csv: unknown node kind '" + row[1] + "'");
    }
  }
  dep.association = std::move(assoc);
  dep.inner_mask = std::move(inner);
  dep.served_user.assign(dep.num_aps(), -1);
  for (std::size_t u = 0; u < dep.num_users(); ++u) {
    const int ap = dep.association[u];
    if (ap < 0 || static_cast<std::size_t>(ap) >= dep.num_aps())
      throw std::runtime_error("nodes.csv: association out of range");
    if (dep.served_user[ap] < 0) dep.served_user[ap] = static_cast<int>(u);
  }

  const std::size_t n = dep.num_aps() + dep.num_users();
  dep.pathloss_db = SquareMatrix<double>(n, 0.0);
  const CsvTable losses = read_csv(dir / "pathloss.csv");
  for (const auto& row : losses.rows) {
    if (row.size() != 3) throw std::runtime_error("pathloss.csv: expected 3 columns");
    const auto i = std::stoul(row[0]);
    const auto j = std::stoul(row[1]);
    if (i >= n || j >= n) throw std::runtime_error("pathloss.csv: node index out of range");
    const double loss = std::stod(row[2]);
    dep.pathloss_db(i, j) = loss;
    dep.pathloss_db(j, i) = loss;
  }
  fill_gains(dep);
  build_sensing_graph(dep, cfg);
  return dep;
}

}  // namespace csma
