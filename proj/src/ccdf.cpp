#include "csma/ccdf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "csma/csv.hpp"
#include "csma/units.hpp"

namespace csma {

namespace {
constexpr double kMonotoneSlack = 1e-12;
}

bool CcdfCurve::is_proper() const {
  if (thresholds.size() != ccdf.size() || thresholds.empty()) return false;
  for (std::size_t i = 0; i < ccdf.size(); ++i) {
    if (!(ccdf[i] >= 0.0 && ccdf[i] <= 1.0)) return false;
    if (i == 0) continue;
    if (!(thresholds[i] > thresholds[i - 1])) return false;
    if (ccdf[i] > ccdf[i - 1] + kMonotoneSlack) return false;
  }
  return true;
}

void CcdfCurve::validate() const {
  if (!is_proper()) throw InvalidArgument("CCDF curve is not proper");
}

double CcdfCurve::interpolate(double x) const {
  require(!thresholds.empty(), "empty curve");
  if (x <= thresholds.front()) return ccdf.front();
  if (x >= thresholds.back()) return ccdf.back();
  const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - thresholds.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - thresholds[lo]) / (thresholds[hi] - thresholds[lo]);
  return ccdf[lo] + w * (ccdf[hi] - ccdf[lo]);
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  require(n >= 2 && hi > lo, "invalid linear grid");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return g;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  require(n >= 2 && hi > lo && lo > 0.0, "invalid log grid");
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / (n - 1));
  return g;
}

CcdfCurve empirical_ccdf(std::span<const double> samples, std::vector<double> thresholds) {
  require(!samples.empty(), "empirical CCDF needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  CcdfCurve curve;
  curve.ccdf.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    curve.ccdf.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
  }
  curve.thresholds = std::move(thresholds);
  return curve;
}

double compare_curves(const CcdfCurve& a, const CcdfCurve& b, std::optional<Range> window) {
  a.validate();
  b.validate();
  double lo = std::max(a.thresholds.front(), b.thresholds.front());
  double hi = std::min(a.thresholds.back(), b.thresholds.back());
  if (window) {
    lo = std::max(lo, window->lo);
    hi = std::min(hi, window->hi);
  }
  double worst = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.thresholds[i];
    if (x < lo || x > hi) continue;
    any = true;
    worst = std::max(worst, std::abs(a.ccdf[i] - b.interpolate(x)));
  }
  if (!any) throw InvalidArgument("curves have disjoint threshold ranges");
  return 100.0 * worst;
}

std::optional<double> crossing(const CcdfCurve& curve, double level) {
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double y0 = curve.ccdf[i - 1];
    const double y1 = curve.ccdf[i];
    if (y0 >= level && y1 <= level) {
      if (y0 == y1) return curve.thresholds[i - 1];
      const double w = (y0 - level) / (y0 - y1);
      return curve.thresholds[i - 1] + w * (curve.thresholds[i] - curve.thresholds[i - 1]);
    }
  }
  return std::nullopt;
}

void write_curve_csv(const std::filesystem::path& path, const CcdfCurve& curve,
                     const std::string& fingerprint, std::span<const double> seconds) {
  curve.validate();
  require(seconds.empty() || seconds.size() == curve.size(), "one timing entry per threshold");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# " << fingerprint << '\n';
  out << (seconds.empty() ? "threshold,ccdf\n" : "threshold,ccdf,seconds\n");
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << format_real(curve.thresholds[i]) << ',' << format_real(curve.ccdf[i]);
    if (!seconds.empty()) out << ',' << format_real(seconds[i]);
    out << '\n';
  }
}

CcdfCurve read_curve_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  const std::size_t t = csv.column("threshold");
  const std::size_t c = csv.column("ccdf");
  CcdfCurve curve;
  for (const auto& row : csv.rows) {
    curve.thresholds.push_back(std::stod(row.at(t)));
    curve.ccdf.push_back(std::stod(row.at(c)));
  }
  curve.validate();
  return curve;
}

}  // namespace csma
