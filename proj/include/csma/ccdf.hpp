#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csma {

/// Complementary CDF sampled on an increasing threshold grid. The common
/// output type of every estimator (SINR curves in dB, throughput in bps).
struct CcdfCurve {
  std::vector<double> thresholds;
  std::vector<double> ccdf;

  std::size_t size() const { return thresholds.size(); }
  /// Throws InvalidArgument unless the curve is proper: matching sizes,
  /// strictly increasing thresholds, values in [0,1], non-increasing ccdf.
  void validate() const;
  bool is_proper() const;
  /// Linear interpolation; thresholds outside the grid clamp to the end values.
  double interpolate(double threshold) const;
};

std::vector<double> linear_grid(double lo, double hi, std::size_t n);
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Fraction of samples strictly above each threshold.
CcdfCurve empirical_ccdf(std::span<const double> samples, std::vector<double> thresholds);

struct Range {
  double lo;
  double hi;
};

/// Max vertical distance in percentage points over a's grid (restricted to the
/// overlap with b and to `window` when given); b is interpolated onto a's grid.
/// Throws InvalidArgument when the ranges do not overlap.
double compare_curves(const CcdfCurve& a, const CcdfCurve& b,
                      std::optional<Range> window = std::nullopt);

/// Threshold at which the curve crosses `level` (linear interpolation), or
/// nullopt when it never does on the grid.
std::optional<double> crossing(const CcdfCurve& curve, double level);

/// `# <fingerprint>` line, then `threshold,ccdf[,seconds]` rows.
void write_curve_csv(const std::filesystem::path& path, const CcdfCurve& curve,
                     const std::string& fingerprint,
                     std::span<const double> seconds = {});
CcdfCurve read_curve_csv(const std::filesystem::path& path);

}  // namespace csma
