#pragma once

#include <optional>
#include <span>
#include <vector>

#include "csma/ccdf.hpp"
#include "csma/geometry.hpp"
#include "csma/ratemap.hpp"

namespace csma {

/// Quadrature over the user-to-tagged-AP distance r0 in s = lambda*pi*r0^2,
/// where the nearest-AP density becomes e^{-s}. Nodes cluster cubically
/// towards s = 0.
struct OuterGrid {
  int points = 96;
  // 0 selects the radius beyond which the distance density holds < 1e-8 mass.
  double max_radius_m = 0.0;
};

/// Polar quadrature of the interference field around the user: radial nodes
/// are log-spaced from r0 outwards, angular nodes cover [0, pi] (the field is
/// symmetric about the user-AP axis).
struct FieldGrid {
  int radial = 96;
  int angular = 96;
  // 0 selects max(20 x mean nearest-neighbour distance, 10 x sensing radius).
  double max_radius_m = 0.0;
};

struct SgmConfig {
  double density = 5e-4;  // APs per m^2
  RadioConfig radio;
  double mu = 1.0;  // Rayleigh fading parameter
  OuterGrid r0_grid;
  FieldGrid field_grid;

  void validate() const;
  double outer_radius_m() const;
  double field_radius_m() const;
  /// Deterministic (fading-free) carrier-sense range.
  double sensing_radius_m() const;
  /// Same config with every grid density doubled.
  SgmConfig refined() const;
};

/// Probability that an AP at distance d senses another under Rayleigh fading.
double sensing_probability(double distance_m, const SgmConfig& cfg);

/// Mean number of contention neighbours of a typical AP.
double mean_contenders(const SgmConfig& cfg);

/// Medium access probability of a typical AP (Matern type-II retention).
double map_typical(const SgmConfig& cfg);

/// Medium access probability of the AP nearest to a random user.
double map_tagged(const SgmConfig& cfg);

enum class RateMapping { AutoRate, Shannon };

struct CoverageCheck {
  double value = 0.0;
  double refined = 0.0;
  bool converged = true;  // |value - refined| <= 1e-3
};

/// Stochastic-geometry evaluator with the medium access probabilities cached.
/// All methods are const and safe to call concurrently.
class SgmModel {
 public:
  explicit SgmModel(SgmConfig cfg);

  const SgmConfig& config() const { return cfg_; }
  double map_typical() const { return p_typical_; }
  double map_tagged() const { return p_tagged_; }

  /// P(SINR > T) for the typical user.
  double sinr_coverage(double threshold_db) const;
  /// Evaluates on this grid and on the refined grid; warns on disagreement.
  CoverageCheck sinr_coverage_checked(double threshold_db) const;

  /// Throughput coverage. `s_bar` enables the sensing-overhead correction.
  double rate_coverage(double rho_bps, const RateTable& table,
                       std::optional<double> s_bar = std::nullopt,
                       RateMapping mapping = RateMapping::AutoRate) const;

  /// SINR threshold that rate_coverage evaluates for `rho_bps`.
  double rate_threshold_db(double rho_bps, const RateTable& table, std::optional<double> s_bar,
                           RateMapping mapping) const;

 private:
  double interference_exponent(double r0, double threshold_lin) const;

  SgmConfig cfg_;
  double p_typical_;
  double p_tagged_;
  double noise_over_power_;
  double loss_ref_lin_;
  double cst_over_power_;
  double field_radius_;
  double outer_s_max_;
};

double sinr_coverage(double threshold_db, const SgmConfig& cfg);

double rate_coverage(double rho_bps, const SgmConfig& cfg, const RateTable& table,
                     std::optional<double> s_bar = std::nullopt,
                     RateMapping mapping = RateMapping::AutoRate);

/// Average sensing-overhead factor for the enhanced model.
struct EnhancedOverhead {
  std::optional<double> s_bar;  // nullopt: median SINR maps to no link
  double median_sinr_db = 0.0;
  bool median_bracketed = true;  // false: closest grid endpoint used instead
  double rate_bps = 0.0;
  int contenders = 1;
};

EnhancedOverhead enhanced_overhead(const SgmModel& model, const RateTable& table,
                                   const CcdfCurve& sinr_curve, const FrameTimings& t);

}  // namespace csma
