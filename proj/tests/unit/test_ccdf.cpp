#include <cmath>
#include <vector>

#include <doctest.h>

#include "csma/ccdf.hpp"
#include "csma/units.hpp"
#include "test_util.hpp"

using namespace csma;

TEST_CASE("empirical CCDF counts strictly larger samples") {
  const std::vector<double> samples{1.0, 2.0, 2.0, 3.0};
  const auto c = empirical_ccdf(samples, {0.0, 1.0, 2.0, 2.5, 3.0});
  CHECK(c.ccdf == std::vector<double>{1.0, 0.75, 0.25, 0.25, 0.0});
  CHECK(c.is_proper());

  const std::vector<double> same(10, 5.0);
  const auto step = empirical_ccdf(same, {4.0, 4.999, 5.0, 6.0});
  CHECK(step.ccdf == std::vector<double>{1.0, 1.0, 0.0, 0.0});

  const std::vector<double> with_inf{-kInf, 1.0};
  CHECK(empirical_ccdf(with_inf, {-1e300}).ccdf[0] == 0.5);
  CHECK(empirical_ccdf(with_inf, {-kInf}).ccdf[0] == 0.5);
}

TEST_CASE("curve validation") {
  CcdfCurve bad{{0.0, 1.0}, {0.5, 0.6}};
  CHECK_FALSE(bad.is_proper());
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CcdfCurve unsorted{{1.0, 0.0}, {0.5, 0.4}};
  CHECK_THROWS_AS(unsorted.validate(), InvalidArgument);
  CcdfCurve out_of_range{{0.0, 1.0}, {1.5, 0.4}};
  CHECK_THROWS_AS(out_of_range.validate(), InvalidArgument);
}

TEST_CASE("grids") {
  const auto lin = linear_grid(-10.0, 40.0, 60);
  CHECK(lin.size() == 60);
  CHECK(lin.front() == -10.0);
  CHECK(lin.back() == 40.0);
  const auto lg = log_grid(0.1e6, 80e6, 60);
  CHECK(lg.front() == doctest::Approx(0.1e6));
  CHECK(lg.back() == doctest::Approx(80e6));
  CHECK(lg[1] / lg[0] == doctest::Approx(lg[59] / lg[58]));
}

TEST_CASE("curve comparison") {
  const auto grid = linear_grid(0.0, 10.0, 11);
  CcdfCurve a{grid, std::vector<double>(11, 0.7)};
  CcdfCurve b{grid, std::vector<double>(11, 0.45)};
  CHECK(compare_curves(a, a) == 0.0);
  CHECK(compare_curves(a, b) == doctest::Approx(25.0));

  CcdfCurve c{grid, {}};
  CcdfCurve d{grid, {}};
  for (double t : grid) {
    c.ccdf.push_back(std::exp(-t / 3.0));
    d.ccdf.push_back(std::exp(-t / 5.0));
  }
  CHECK(compare_curves(c, d) == doctest::Approx(compare_curves(d, c)));

  // b is interpolated onto a's grid, only over the overlap.
  CcdfCurve shifted{linear_grid(5.0, 20.0, 4), {0.45, 0.45, 0.45, 0.45}};
  CHECK(compare_curves(a, shifted) == doctest::Approx(25.0));
  CcdfCurve far{linear_grid(50.0, 60.0, 3), {0.1, 0.1, 0.1}};
  CHECK_THROWS_AS(compare_curves(a, far), InvalidArgument);

  CcdfCurve e{grid, {1, 1, 1, 1, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}};
  CcdfCurve f{grid, std::vector<double>(11, 0.5)};
  CHECK(compare_curves(e, f) == doctest::Approx(50.0));
  CHECK(compare_curves(e, f, Range{4.0, 10.0}) == 0.0);
}

TEST_CASE("crossing and interpolation") {
  CcdfCurve c{{0.0, 10.0}, {1.0, 0.0}};
  CHECK(*crossing(c, 0.5) == doctest::Approx(5.0));
  CHECK(c.interpolate(2.5) == doctest::Approx(0.75));
  CHECK(c.interpolate(-5.0) == 1.0);
  CHECK(c.interpolate(50.0) == 0.0);
  CcdfCurve high{{0.0, 10.0}, {0.9, 0.6}};
  CHECK_FALSE(crossing(high, 0.5));
}

TEST_CASE("curve files round-trip exactly") {
  const auto dir = test_util::scratch_dir("ccdf");
  CcdfCurve c{linear_grid(-10.0, 40.0, 60), {}};
  for (double t : c.thresholds) c.ccdf.push_back(1.0 / (1.0 + std::exp((t - 10.0) / 3.0)));
  write_curve_csv(dir / "c.csv", c, "k=v");
  const auto back = read_curve_csv(dir / "c.csv");
  CHECK(back.thresholds == c.thresholds);
  CHECK(back.ccdf == c.ccdf);
}
