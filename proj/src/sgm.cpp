#include "csma/sgm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <spdlog/spdlog.h>

#include "csma/bianchi.hpp"

namespace csma {

namespace {

constexpr double kPi = std::numbers::pi;
// Mass of the nearest-AP distance density left beyond the outer cutoff.
constexpr double kOuterTailMass = 1e-8;
constexpr double kRefinementTolerance = 1e-3;

double trapezoid_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

// Integral of a positive integrand known at increasing nodes `x`, with its
// logarithm interpolated linearly between nodes. Exact for e^{-kx}, which is
// the shape of every outer integrand here (PPP interference grows linearly
// in s = lambda pi r0^2).
double log_linear_integral(const std::vector<double>& x, const std::vector<double>& f) {
  constexpr double kFloor = 1e-300;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double a = std::max(f[i], kFloor);
    const double b = std::max(f[i + 1], kFloor);
    const double d = b / a - 1.0;
    // Logarithmic mean of a and b.
    const double mean = std::abs(d) < 1e-8 ? a * (1.0 + 0.5 * d) : a * d / std::log1p(d);
    total += mean * (x[i + 1] - x[i]);
  }
  return total;
}

// Outer nodes in s, cubically clustered at s = 0 where high thresholds put
// all the mass (the noise term grows like s^2).
std::vector<double> outer_nodes(double s_max, int n) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    s[i] = s_max * u * u * u;
  }
  return s;
}

// Matern type-II retention probability for a mean of `n` contenders.
double retention(double n) {
  if (n < 1e-12) return 1.0;
  return -std::expm1(-n) / n;
}

}  // namespace

void SgmConfig::validate() const {
  radio.validate();
  require(density > 0.0, "density must be positive");
  require(mu > 0.0, "fading parameter must be positive");
  require(r0_grid.points >= 2 && field_grid.radial >= 2 && field_grid.angular >= 2,
          "quadrature grids need at least two nodes per axis");
  require(r0_grid.max_radius_m >= 0.0 && field_grid.max_radius_m >= 0.0,
          "grid radii must be non-negative");
  const double mean_nn = 0.5 / std::sqrt(density);
  require(field_radius_m() >= 20.0 * mean_nn,
          "field radius must be at least 20x the mean nearest-neighbour distance");
}

double SgmConfig::outer_radius_m() const {
  if (r0_grid.max_radius_m > 0.0) return r0_grid.max_radius_m;
  return std::sqrt(-std::log(kOuterTailMass) / (density * kPi));
}

double SgmConfig::sensing_radius_m() const {
  const double k = db_to_linear(radio.pathloss_ref_db);
  return std::pow(radio.tx_power_mw() / (radio.cst_mw() * k), 1.0 / radio.pathloss_exponent);
}

double SgmConfig::field_radius_m() const {
  if (field_grid.max_radius_m > 0.0) return field_grid.max_radius_m;
  const double mean_nn = 0.5 / std::sqrt(density);
  return std::max(20.0 * mean_nn, 10.0 * sensing_radius_m());
}

SgmConfig SgmConfig::refined() const {
  SgmConfig out = *this;
  out.r0_grid.points = 2 * r0_grid.points - 1;
  out.field_grid.radial = 2 * field_grid.radial - 1;
  out.field_grid.angular = 2 * field_grid.angular - 1;
  return out;
}

double sensing_probability(double distance_m, const SgmConfig& cfg) {
  const double loss = pathloss_linear(distance_m, cfg.radio);
  return std::exp(-cfg.mu * cfg.radio.cst_mw() * loss / cfg.radio.tx_power_mw());
}

double mean_contenders(const SgmConfig& cfg) {
  cfg.validate();
  // The sensing probability is below e^{-1296} past six deterministic ranges.
  const double upper = std::min(cfg.field_radius_m(), 6.0 * cfg.sensing_radius_m());
  constexpr int kNodes = 4001;
  double sum = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double d = upper * i / (kNodes - 1);
    sum += trapezoid_weight(i, kNodes) * sensing_probability(d, cfg) * d;
  }
  return 2.0 * kPi * cfg.density * sum * upper / (kNodes - 1);
}

double map_typical(const SgmConfig& cfg) { return retention(mean_contenders(cfg)); }

double map_tagged(const SgmConfig& cfg) {
  const double n_typical = mean_contenders(cfg);
  const double d_cut = 6.0 * cfg.sensing_radius_m();
  const double s_max = cfg.density * kPi * std::pow(cfg.outer_radius_m(), 2);
  constexpr int kOuter = 401;
  constexpr int kInner = 801;
  const std::vector<double> nodes = outer_nodes(s_max, kOuter);
  std::vector<double> integrand(kOuter);
  for (int i = 0; i < kOuter; ++i) {
    const double s = nodes[i];
    const double r0 = std::sqrt(s / (cfg.density * kPi));
    // Contenders that would sit inside the user's empty ball of radius r0:
    // for a circle of radius d around the tagged AP the arc inside the ball
    // spans 2*acos(d / 2r0).
    const double upper = std::min(2.0 * r0, d_cut);
    double removed = 0.0;
    if (upper > 0.0) {
      for (int j = 0; j < kInner; ++j) {
        const double d = upper * j / (kInner - 1);
        const double arc = 2.0 * std::acos(std::min(1.0, d / (2.0 * r0)));
        removed += trapezoid_weight(j, kInner) * sensing_probability(d, cfg) * arc * d;
      }
      removed *= cfg.density * upper / (kInner - 1);
    }
    integrand[i] = std::exp(-s) * retention(n_typical - removed);
  }
  return log_linear_integral(nodes, integrand);
}

SgmModel::SgmModel(SgmConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  p_typical_ = csma::map_typical(cfg_);
  p_tagged_ = csma::map_tagged(cfg_);
  noise_over_power_ = noise_power_mw(cfg_.radio) / cfg_.radio.tx_power_mw();
  loss_ref_lin_ = db_to_linear(cfg_.radio.pathloss_ref_db);
  cst_over_power_ = cfg_.radio.cst_mw() / cfg_.radio.tx_power_mw();
  field_radius_ = cfg_.field_radius_m();
  outer_s_max_ = cfg_.density * kPi * std::pow(cfg_.outer_radius_m(), 2);
}

// Exponent of the interference Laplace term for a user whose tagged AP sits
// at (r0, 0). Interferers outside B(0, r0) transmit with probability
// p_typical times the chance that the tagged AP does not sense them.
double SgmModel::interference_exponent(double r0, double threshold_lin) const {
  const double alpha = cfg_.radio.pathloss_exponent;
  const double half_alpha = 0.5 * alpha;
  const double r0e = std::max(r0, kMinSeparationM);
  const double r0_pow = std::pow(r0e, alpha);
  const double t_l0 = threshold_lin * loss_ref_lin_ * r0_pow;
  const double sense_coeff = cfg_.mu * cst_over_power_ * loss_ref_lin_;
  const double min_sep_pow = std::pow(kMinSeparationM, alpha);

  double field = 0.0;
  if (field_radius_ > r0e) {
    const int nr = cfg_.field_grid.radial;
    const int na = cfg_.field_grid.angular;
    const double u_max = std::log(field_radius_ / r0e);
    const double du = u_max / (nr - 1);
    const double dphi = kPi / (na - 1);
    std::vector<double> cos_phi(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k) cos_phi[k] = std::cos(k * dphi);

    for (int j = 0; j < nr; ++j) {
      const double r = r0e * std::exp(j * du);
      const double loss_r = loss_ref_lin_ * std::pow(r, alpha);
      const double base = t_l0 / (loss_r + t_l0);
      double ring = 0.0;
      for (int k = 0; k < na; ++k) {
        const double d2 = r * r + r0e * r0e - 2.0 * r * r0e * cos_phi[k];
        const double d_pow = std::max(std::pow(std::max(d2, 0.0), half_alpha), min_sep_pow);
        const double unsensed = -std::expm1(-sense_coeff * d_pow);
        ring += trapezoid_weight(k, na) * unsensed;
      }
      // r dr = r^2 du for log-spaced radii.
      field += trapezoid_weight(j, nr) * base * ring * r * r;
    }
    // Factor 2 folds the mirrored half-plane back in.
    field *= 2.0 * p_typical_ * du * dphi;
  }
  // Beyond the field radius every AP is out of sensing range and
  // l(r) >> T l(r0), so the ring integral has a closed form.
  const double r_tail = std::max(field_radius_, r0e);
  const double tail = p_typical_ * 2.0 * kPi * threshold_lin * r0_pow *
                      std::pow(r_tail, 2.0 - alpha) / (alpha - 2.0);
  return cfg_.density * (field + tail);
}

double SgmModel::sinr_coverage(double threshold_db) const {
  if (std::isnan(threshold_db)) throw InvalidArgument("threshold must not be NaN");
  if (threshold_db == -kInf) return 1.0;
  if (threshold_db == kInf) return 0.0;
  const double t = db_to_linear(threshold_db);
  const double alpha = cfg_.radio.pathloss_exponent;
  const int n = cfg_.r0_grid.points;
  const std::vector<double> nodes = outer_nodes(outer_s_max_, n);
  std::vector<double> integrand(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = nodes[i];
    const double r0 = std::sqrt(s / (cfg_.density * kPi));
    const double loss0 = loss_ref_lin_ * std::pow(std::max(r0, kMinSeparationM), alpha);
    const double noise_term = cfg_.mu * t * loss0 * noise_over_power_;
    integrand[i] = std::exp(-s - noise_term - interference_exponent(r0, t));
  }
  return std::clamp(log_linear_integral(nodes, integrand), 0.0, 1.0);
}

CoverageCheck SgmModel::sinr_coverage_checked(double threshold_db) const {
  CoverageCheck out;
  out.value = sinr_coverage(threshold_db);
  out.refined = SgmModel(cfg_.refined()).sinr_coverage(threshold_db);
  out.converged = std::abs(out.value - out.refined) <= kRefinementTolerance;
  if (!out.converged) {
    spdlog::warn("SINR coverage at {} dB not converged: grid {} vs refined {}", threshold_db,
                 out.value, out.refined);
  }
  return out;
}

double SgmModel::rate_threshold_db(double rho_bps, const RateTable& table,
                                   std::optional<double> s_bar, RateMapping mapping) const {
  require(rho_bps >= 0.0, "throughput threshold must be non-negative");
  if (s_bar) require(*s_bar > 0.0 && *s_bar <= 1.0, "overhead factor must lie in (0, 1]");
  if (rho_bps == 0.0) return -kInf;
  const double share = s_bar ? p_tagged_ * *s_bar : p_tagged_;
  if (mapping == RateMapping::Shannon) {
    const double t = std::exp2(rho_bps / (cfg_.radio.bandwidth_hz * share)) - 1.0;
    return linear_to_db(t);
  }
  return inv_rate(rho_bps / share, table);
}

double SgmModel::rate_coverage(double rho_bps, const RateTable& table, std::optional<double> s_bar,
                               RateMapping mapping) const {
  return sinr_coverage(rate_threshold_db(rho_bps, table, s_bar, mapping));
}

double sinr_coverage(double threshold_db, const SgmConfig& cfg) {
  return SgmModel(cfg).sinr_coverage(threshold_db);
}

double rate_coverage(double rho_bps, const SgmConfig& cfg, const RateTable& table,
                     std::optional<double> s_bar, RateMapping mapping) {
  return SgmModel(cfg).rate_coverage(rho_bps, table, s_bar, mapping);
}

EnhancedOverhead enhanced_overhead(const SgmModel& model, const RateTable& table,
                                   const CcdfCurve& sinr_curve, const FrameTimings& t) {
  sinr_curve.validate();
  EnhancedOverhead out;
  if (const auto median = crossing(sinr_curve, 0.5)) {
    out.median_sinr_db = *median;
  } else {
    out.median_bracketed = false;
    out.median_sinr_db =
        sinr_curve.ccdf.front() < 0.5 ? sinr_curve.thresholds.front() : sinr_curve.thresholds.back();
    spdlog::warn("SINR curve never crosses 0.5; using grid endpoint {} dB as the median",
                 out.median_sinr_db);
  }
  out.rate_bps = rate_of_sinr(out.median_sinr_db, table);
  out.contenders = std::max(1, static_cast<int>(std::lround(1.0 / model.map_typical())));
  if (out.rate_bps == 0.0) {
    spdlog::warn("median SINR {} dB maps to no link; enhanced model falls back to raw SGM",
                 out.median_sinr_db);
    return out;
  }
  out.s_bar = mac_efficiency(uniform_timings(out.contenders, out.rate_bps, t)).value;
  return out;
}

}  // namespace csma
