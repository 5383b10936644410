#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "csma/units.hpp"

namespace csma {

/// Every physical constant of the radio link in one place.
struct RadioConfig {
  double tx_power_dbm = 23.0;
  double cst_dbm = -82.0;
  double noise_psd_dbmhz = -174.0;
  double noise_figure_db = 15.0;
  double bandwidth_hz = 2.0e7;
  double pathloss_exponent = 4.0;
  // Free-space loss at 1 m for 5.2 GHz.
  double pathloss_ref_db = 46.7;

  void validate() const;

  double tx_power_mw() const { return dbm_to_mw(tx_power_dbm); }
  double cst_mw() const { return dbm_to_mw(cst_dbm); }
};

/// Coincident nodes are treated as this far apart.
inline constexpr double kMinSeparationM = 0.1;

/// Log-distance path loss in dB; distances below kMinSeparationM are clamped.
double pathloss_db(double distance_m, const RadioConfig& cfg);

/// Linear path loss (power ratio >= 1 for realistic intercepts).
double pathloss_linear(double distance_m, const RadioConfig& cfg);

/// Thermal noise over the channel bandwidth plus receiver noise figure.
double noise_power_dbm(const RadioConfig& cfg);
inline double noise_power_mw(const RadioConfig& cfg) { return dbm_to_mw(noise_power_dbm(cfg)); }

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Dense row-major square matrix.
template <typename T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  const T* row(std::size_t i) const { return data_.data() + i * n_; }

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

/// One sampled network: AP and user positions plus everything derived from them.
///
/// Node indexing in `pathloss_db`: APs occupy 0..num_aps()-1, users follow at
/// num_aps()..num_aps()+num_users()-1.
struct Deployment {
  std::vector<Point> ap_positions;
  std::vector<Point> user_positions;
  std::vector<int> association;   // user -> nearest AP
  std::vector<int> served_user;   // AP -> lowest-index associated user, or -1
  SquareMatrix<double> pathloss_db;
  SquareMatrix<double> channel_gain;  // 1 / linear path loss, same indexing
  SquareMatrix<std::uint8_t> sensing_adj;        // AP x AP
  std::vector<std::vector<int>> sensing_neighbors;  // adjacency lists of sensing_adj
  std::vector<bool> inner_mask;
  double area_side_m = 0.0;

  std::size_t num_aps() const { return ap_positions.size(); }
  std::size_t num_users() const { return user_positions.size(); }
  std::size_t user_node(std::size_t user) const { return num_aps() + user; }

  double ap_ap_loss_db(std::size_t a, std::size_t b) const { return pathloss_db(a, b); }
  double user_ap_loss_db(std::size_t user, std::size_t ap) const {
    return pathloss_db(user_node(user), ap);
  }
  double user_ap_gain(std::size_t user, std::size_t ap) const {
    return channel_gain(user_node(user), ap);
  }
  bool senses(std::size_t a, std::size_t b) const { return sensing_adj(a, b) != 0; }
  std::size_t num_neighbors(std::size_t ap) const { return sensing_neighbors[ap].size(); }
  std::size_t num_inner_aps() const;
};

/// Thrown when a sampled window holds no usable APs; the harness resamples.
class EmptyRealization : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples a PPP of APs on a square window plus an independent uniform set of
/// users of equal size, each associated to its nearest AP. Only positions,
/// association and the inner mask are filled.
Deployment sample_ppp(double density_per_m2, double area_side_m, std::uint64_t rng_seed);

/// Builds a deployment from explicit positions (association and inner mask included).
Deployment make_deployment(std::vector<Point> aps, std::vector<Point> users, double area_side_m);

void build_pathloss(Deployment& dep, const RadioConfig& cfg);
void build_sensing_graph(Deployment& dep, const RadioConfig& cfg);

/// sample_ppp + path losses + sensing graph.
Deployment build_deployment(double density_per_m2, double area_side_m, std::uint64_t rng_seed,
                            const RadioConfig& cfg);

/// Writes nodes.csv and pathloss.csv into `dir`.
void export_deployment(const Deployment& dep, const std::filesystem::path& dir);

/// Reads nodes.csv and pathloss.csv as written by export_deployment; the
/// sensing graph is rebuilt from the imported losses with `cfg`.
Deployment import_deployment(const std::filesystem::path& dir, const RadioConfig& cfg);

}  // namespace csma
