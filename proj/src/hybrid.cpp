#include "csma/hybrid.hpp"

#include <fstream>

#include "csma/bianchi.hpp"
#include "csma/csv.hpp"

namespace csma {

namespace {

double rx_power_mw(const Deployment& dep, std::size_t user, std::size_t ap, double tx_mw) {
  return tx_mw * dep.user_ap_gain(user, ap);
}

}  // namespace

double link_sinr(std::size_t user, const Deployment& dep, const RadioConfig& cfg) {
  require(user < dep.num_users(), "user index out of range");
  const int serving = dep.association[user];
  require(serving >= 0, "user is not associated");
  const auto x = static_cast<std::size_t>(serving);
  const double tx_mw = cfg.tx_power_mw();

  double interference = 0.0;
  for (std::size_t z = 0; z < dep.num_aps(); ++z) {
    if (z == x || dep.senses(x, z)) continue;
    interference += rx_power_mw(dep, user, z, tx_mw) / (1.0 + dep.num_neighbors(z));
  }
  const double signal = rx_power_mw(dep, user, x, tx_mw);
  return linear_to_db(signal / (interference + noise_power_mw(cfg)));
}

double airtime(std::size_t x, const Deployment& dep, std::span<const double> rates,
               const FrameTimings& t) {
  require(rates.size() == dep.num_aps(), "one rate per AP expected");
  if (!(rates[x] > 0.0)) return 0.0;
  auto weighted = [&](std::size_t ap) {
    return frame_duration(rates[ap], t) / (1.0 + dep.num_neighbors(ap));
  };
  const double own = weighted(x);
  double total = own;
  for (int z : dep.sensing_neighbors[x]) {
    if (rates[z] > 0.0) total += weighted(static_cast<std::size_t>(z));
  }
  return own / total;
}

std::vector<LinkMetrics> evaluate_hybrid(const Deployment& dep, const RadioConfig& cfg,
                                         const RateTable& table, const FrameTimings& t) {
  const std::size_t n_aps = dep.num_aps();
  std::vector<double> rates(n_aps, 0.0);
  std::vector<LinkMetrics> links;
  for (std::size_t ap = 0; ap < n_aps; ++ap) {
    const int user = dep.served_user[ap];
    if (user < 0) continue;
    LinkMetrics m;
    m.ap_id = static_cast<int>(ap);
    m.user_id = user;
    m.inner_flag = dep.inner_mask[ap];
    m.sinr_db = link_sinr(static_cast<std::size_t>(user), dep, cfg);
    m.phy_rate_bps = rate_of_sinr(m.sinr_db, table);
    rates[ap] = m.phy_rate_bps;
    links.push_back(m);
  }
  // An AP without a user still contends; it is charged top-rate frames.
  for (std::size_t ap = 0; ap < n_aps; ++ap) {
    if (dep.served_user[ap] < 0) rates[ap] = table.max_rate_bps();
  }

  for (auto& m : links) {
    const auto ap = static_cast<std::size_t>(m.ap_id);
    m.airtime = airtime(ap, dep, rates, t);
    if (const auto in = neighborhood_timings(ap, dep, rates, t)) {
      m.mac_eff = mac_efficiency(*in).value;
    }
    m.throughput_bps = m.mac_eff * m.airtime * m.phy_rate_bps;
  }
  return links;
}

void write_link_csv(const std::filesystem::path& path, std::span<const LinkMetrics> links) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "ap_id,user_id,sinr_db,rate_bps,airtime,mac_eff,throughput_bps,inner_flag\n";
  for (const auto& m : links) {
    out << m.ap_id << ',' << m.user_id << ',' << format_real(m.sinr_db) << ','
        << format_real(m.phy_rate_bps) << ',' << format_real(m.airtime) << ','
        << format_real(m.mac_eff) << ',' << format_real(m.throughput_bps) << ','
        << (m.inner_flag ? 1 : 0) << '\n';
  }
}

}  // namespace csma
