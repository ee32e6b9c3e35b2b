#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "cmem/errors.hpp"
#include "cmem/homogeneous2d.hpp"

using namespace cmem;
using oracle::pi;

namespace {

MaskPtr square_mask(int n) {
  const DomainSpec sq = DomainSpec::rectangle({-1.0, 1.0, -1.0, 1.0});
  return rasterize_domain(sq, grid_around(sq.bounds(), n));
}

const std::vector<double> kRadii{0.1, 0.2, 0.3, 0.4, 0.5};

}  // namespace

TEST_CASE("closed-form families") {
  const HomogeneousSolution2D hp = halfplane(2.0);
  CHECK(hp(Point{1.0, 5.0}) == doctest::Approx(1.0));
  for (double y : {-3.0, 0.0, 0.7}) CHECK(hp(Point{0.0, y}) == 0.0);
  CHECK_THROWS_AS(halfplane(0.0), InvalidInput);
  CHECK_THROWS_AS(halfplane(1.0, -0.5), InvalidInput);

  const double f0 = 1.6;
  const HomogeneousSolution2D radial = nonnegative(f0, 0.0);
  for (double t : {0.0, 0.9, 2.5, 4.0}) {
    CHECK(radial(Point{std::cos(t), std::sin(t)}) == doctest::Approx(f0 / 4.0));
  }
  const HomogeneousSolution2D top = nonnegative(f0, f0 / 4.0);
  const HomogeneousSolution2D side = nonnegative(f0, -f0 / 4.0);
  const HomogeneousSolution2D ref = halfplane(f0);
  for (Point p : {Point{0.3, -0.8}, Point{-1.2, 0.4}}) {
    CHECK(top(p) == doctest::Approx(ref(p)));
    CHECK(side(p) == doctest::Approx(0.5 * f0 * p.y * p.y));
  }
  CHECK_THROWS_AS(nonnegative(f0, 0.5), InvalidInput);
  CHECK_THROWS_AS(nonnegative(f0, -0.41), InvalidInput);

  const std::vector<Point> pts{{0.2, 0.1}, {-0.3, 0.6}, {0.0, -0.4}};
  const std::vector<double> vals = evaluate(nonnegative(f0, 0.2, -3.0), pts);
  REQUIRE(vals.size() == 3);
  CHECK(vals[0] == doctest::Approx((0.2 + 0.4) * 0.04 + (0.4 - 0.2) * 0.01));
}

TEST_CASE("exact stencils on quadratics") {
  const Grid2D g = build_grid({-1.1, 1.1, -1.1, 1.1}, 128, 128);
  for (const HomogeneousSolution2D& s : {halfplane(2.0), nonnegative(2.0, 0.2), nonnegative(2.0, -0.5)}) {
    const PdeResidual r = pde_residual(s, g);
    CHECK(r.max_residual <= 1e-9);
    CHECK(r.checked > 1000);
  }
}

TEST_CASE("Blank two-phase profile") {
  const HomogeneousSolution2D s = blank_profile(1.0, -20.0);
  const BlankChecks& c = s.checks;
  CHECK(s.kind == HomogeneousKind::blank);
  CHECK(s.gamma == doctest::Approx(0.25));
  CHECK(s.mu == doctest::Approx(5.0));
  CHECK(c.identity <= 1e-10 * (s.c_plus * s.c_plus + s.c_minus * s.c_minus));
  // Relations read directly off the matching system.
  CHECK(std::abs(s.c_plus * s.c_plus - s.c_minus * s.c_minus - (s.gamma * s.gamma - s.mu * s.mu)) <=
        1e-10 * (s.c_plus * s.c_plus + s.c_minus * s.c_minus));
  CHECK(std::abs(s.c_plus * std::sin(s.d_plus) + s.gamma) <= 1e-10);
  CHECK(std::abs(s.theta0 - pi / 2.0 - std::asin(s.gamma / s.c_plus)) <= 1e-10);
  CHECK(std::abs(s.c_minus - s.mu / std::sin(pi / 3.0 + s.d_minus)) <= 1e-10);
  for (double m : c.matching) CHECK(std::abs(m) <= 1e-10);
  CHECK(c.junction_inner <= 1e-8);
  CHECK(c.junction_period <= 1e-8);
  CHECK(c.min_positive > 0.0);
  CHECK(c.max_negative < 0.0);

  SUBCASE("angular profile alternates with six zeros") {
    CHECK(c.zeros == 6);
    int changes = 0;
    const int m = 6000;
    double prev = s.angular(2.0 * pi * (m - 0.5) / m);
    for (int k = 0; k < m; ++k) {
      const double w = s.angular(2.0 * pi * (k + 0.5) / m);
      if ((w > 0.0) != (prev > 0.0)) ++changes;
      prev = w;
    }
    CHECK(changes == 6);
    for (double t : {0.3, 1.7, 4.2}) {
      CHECK(s.angular(t + 2.0 * pi / 3.0) == doctest::Approx(s.angular(t)).epsilon(1e-12));
    }
  }
  SUBCASE("homogeneity and Euler relation") {
    for (Point p : {Point{0.3, 0.2}, Point{-0.5, 0.1}, Point{0.05, -0.7}}) {
      CHECK(s(2.5 * p) == doctest::Approx(6.25 * s(p)).epsilon(1e-13));
    }
    const auto mask = square_mask(512);
    const ScalarField v = evaluate_field(s, mask);
    const auto [gx, gy] = gradient(v);
    double scale = 0.0, worst = 0.0;
    const double r = 0.5;
    for (int k = 0; k < 360; ++k) {
      const double t = 2.0 * pi * (k + 0.25) / 360.0;
      const Point nu{std::cos(t), std::sin(t)};
      const Point p = r * nu;
      const double dv = interpolate(gx, p) * nu.x + interpolate(gy, p) * nu.y;
      const double euler = 2.0 * s(p) / r;
      worst = std::max(worst, std::abs(dv - euler));
      scale = std::max(scale, std::abs(euler));
    }
    MESSAGE("Euler defect " << worst << " of " << scale);
    CHECK(worst <= 1e-2 * scale);
  }
  SUBCASE("singular vertices sit at the origin") {
    const auto mask = square_mask(256);
    const ScalarField v = evaluate_field(s, mask);
    const Contour contour = extract_contour(v, 0.0);
    const auto [gx, gy] = gradient(v);
    const Classification cl = classify_points(contour, gx, gy, 1e-3);
    const double h = mask->grid().h();
    CHECK_FALSE(cl.regular.empty());
    for (const Point& p : cl.singular) CHECK(norm(p) <= 2.0 * std::sqrt(2.0) * h);
  }
  SUBCASE("grid equation residual is first order off the kink band") {
    // Each arc is a quadratic polynomial, so off the band only rounding remains.
    for (int n : {128, 256, 512}) {
      const Grid2D g = build_grid({-1.05, 1.05, -1.05, 1.05}, n, n);
      const PdeResidual r = pde_residual(s, g);
      CAPTURE(n);
      MESSAGE("Blank PDE residual " << r.max_residual << " excluded " << r.excluded);
      CHECK(r.max_residual <= g.h());
      CHECK(r.excluded > 0);
    }
  }
  SUBCASE("serialization") {
    const std::string text = serialize(s);
    for (const char* key : {"kind = blank", "f0 = ", "g0 = ", "C+ = ", "D+ = ", "C- = ", "D- = ",
                            "gamma = ", "mu = ", "theta0 = ", "a = "}) {
      CHECK(text.find(key) != std::string::npos);
    }
  }
}

TEST_CASE("Blank profile input handling") {
  CHECK_THROWS_AS(blank_profile(1.0, -1.0), InvalidInput);
  CHECK_THROWS_AS(blank_profile(-1.0, -3.0), InvalidInput);
  CHECK_THROWS_AS(blank_profile(1.0, 0.5), InvalidInput);
  CHECK_THROWS_AS(blank_profile(1.0, -2.0), ConvergenceFailure);
}

TEST_CASE("Weiss energy is constant on exact solutions") {
  SUBCASE("half-plane") {
    const double f0 = 2.0;
    const WeissConstancy w = weiss_constancy(halfplane(f0, -3.0), kRadii);
    MESSAGE("half-plane spread " << w.spread << " mean " << w.mean);
    CHECK(w.spread <= 1e-3);
    CHECK(w.mean == doctest::Approx(pi * f0 * f0 / 8.0).epsilon(1e-3));
  }
  SUBCASE("nonnegative family") {
    for (double a : {-0.3, 0.0, 0.2}) {
      const WeissConstancy w = weiss_constancy(nonnegative(1.6, a, -2.0), kRadii);
      CAPTURE(a);
      CHECK(w.spread <= 1e-3);
    }
  }
  SUBCASE("Blank profile") {
    const WeissConstancy w = weiss_constancy(blank_profile(1.0, -20.0), kRadii);
    MESSAGE("blank spread " << w.spread);
    CHECK(w.spread <= 1e-2);
  }
}
