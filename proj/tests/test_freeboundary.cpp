#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "cmem/errors.hpp"
#include "cmem/freeboundary.hpp"

using namespace cmem;
using oracle::pi;

namespace {

MaskPtr square_mask(int n, double half = 1.0) {
  const DomainSpec sq = DomainSpec::rectangle({-half, half, -half, half});
  return rasterize_domain(sq, grid_around(sq.bounds(), n));
}

// C^1 profile across the line x = s0: Lap v = f0 on {v >= 0}, -g0 on {v < 0}.
double kink_profile(Point p, double f0, double g0) {
  const double s = p.x - 0.05;
  return s >= 0.0 ? s + 0.5 * f0 * s * s : s - 0.5 * g0 * s * s;
}

Point kink_gradient(Point p, double f0, double g0) {
  const double s = p.x - 0.05;
  return {s >= 0.0 ? 1.0 + f0 * s : 1.0 - g0 * s, 0.0};
}

OptimalPair subcritical_disk(int n) {
  // alpha = 4 stays below Lambda ~ 6.11 on the unit disk with A = pi/2.
  return optimize(oracle::disk_mask(n), 4.0, pi / 2.0, {});
}

Point free_boundary_point(const OptimalPair& p) {
  const Contour c = extract_contour(p.u, p.level);
  Point best{0.0, 0.0};
  double score = -1e300;
  for (const auto& line : c.lines) {
    for (const Point& q : line.points) {
      const double s = q.x - 10.0 * std::abs(q.y);
      if (s > score) {
        score = s;
        best = q;
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("two-phase form of a solved pair") {
  const OptimalPair pair = subcritical_disk(128);
  REQUIRE(pair.converged);
  REQUIRE(pair.subcritical);
  const TwoPhaseField tp = to_two_phase(pair);
  CHECK(tp.provenance == Provenance::pair);
  CHECK(tp.level == pair.level);
  CHECK(tp.band_cells > 0.0);
  const Grid2D& g = tp.v.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!tp.v.mask().inside(k)) continue;
    REQUIRE(tp.v[k] == doctest::Approx(pair.level - pair.u[k]).epsilon(1e-14));
    REQUIRE(tp.f[k] == doctest::Approx((pair.lambda - pair.alpha) * pair.u[k]).epsilon(1e-14));
    REQUIRE(tp.g[k] == doctest::Approx(-pair.lambda * pair.u[k]).epsilon(1e-14));
  }
  // On F itself: v = 0, f = (Lambda - alpha) c, g = -Lambda c.
  const double c = pair.level;
  CHECK((pair.lambda - pair.alpha) * c > 0.0);
  CHECK(-pair.lambda * c < 0.0);
  CHECK(-pair.alpha * c < 0.0);

  SUBCASE("supercritical pairs are rejected") {
    const OptimalPair sup = optimize(oracle::disk_mask(64), 10.0, pi / 2.0, {});
    CHECK_FALSE(sup.subcritical);
    CHECK_THROWS_AS(to_two_phase(sup), InvalidInput);
  }
  SUBCASE("synthetic override") {
    const auto mask = square_mask(32);
    const ScalarField v = ScalarField::sample(mask, [](Point p) { return p.x; });
    const TwoPhaseField s = synthetic_two_phase(v, 1.0, -1.0);
    CHECK(s.provenance == Provenance::synthetic);
    CHECK(s.f[mask->grid().index(16, 16)] == 1.0);
    CHECK(s.g[mask->grid().index(16, 16)] == -1.0);
  }
}

TEST_CASE("off-band equation residual is O(h)") {
  for (int n : {64, 128, 256}) {
    const OptimalPair pair = subcritical_disk(n);
    const TwoPhaseField tp = to_two_phase(pair);
    const double h = tp.v.grid().h();
    CAPTURE(n);
    MESSAGE("off-band residual " << tp.residual_off_band << " at h " << h);
    CHECK(tp.residual_off_band <= h);
    CHECK(equation_residual(tp, tp.band_cells) == tp.residual_off_band);
  }
}

TEST_CASE("marching squares") {
  SUBCASE("circle of radius one half") {
    const auto mask = square_mask(128);
    const ScalarField u = ScalarField::sample(mask, [](Point p) { return p.x * p.x + p.y * p.y; });
    const Contour c = extract_contour(u, 0.25);
    REQUIRE(c.lines.size() == 1);
    CHECK(c.lines[0].closed);
    const double h = mask->grid().h();
    double worst = 0.0;
    for (const Point& p : c.lines[0].points) worst = std::max(worst, std::abs(norm(p) - 0.5));
    CHECK(worst <= h * h);
    CHECK(c.vertex_count() > 100);
  }
  SUBCASE("vertical line") {
    const auto mask = square_mask(64);
    const ScalarField u = ScalarField::sample(mask, [](Point p) { return p.x - 0.013; });
    const Contour c = extract_contour(u, 0.0);
    REQUIRE(c.lines.size() == 1);
    CHECK_FALSE(c.lines[0].closed);
    for (const Point& p : c.lines[0].points) CHECK(p.x == doctest::Approx(0.013).epsilon(1e-12));
  }
  SUBCASE("saddle splits into two polylines") {
    const auto mask = square_mask(64);
    const ScalarField u = ScalarField::sample(mask, [](Point p) { return p.x * p.y; });
    const Contour c = extract_contour(u, 0.0);
    CHECK(c.lines.size() == 2);
    for (const auto& line : c.lines) CHECK_FALSE(line.closed);
  }
  SUBCASE("level outside the range") {
    const auto mask = square_mask(32);
    const ScalarField u = ScalarField::sample(mask, [](Point p) { return p.x; });
    CHECK_THROWS_AS(extract_contour(u, 5.0), InvalidInput);
  }
}

TEST_CASE("regular and singular free-boundary points") {
  SUBCASE("radial disk solution has no singular points") {
    const OptimalPair p = subcritical_disk(128);
    const Contour c = extract_contour(p.u, p.level);
    const auto [gx, gy] = gradient(p.u);
    const Classification cl = classify_points(c, gx, gy, 1e-3);
    CHECK(cl.singular.empty());
    CHECK(cl.regular.size() == c.vertex_count());
  }
  SUBCASE("half-plane solution is singular all along F") {
    const auto mask = square_mask(64);
    const ScalarField v = ScalarField::sample(mask, [](Point p) { return p.x * p.x; });
    Contour c;
    Polyline line;
    for (int k = -10; k <= 10; ++k) line.points.push_back({0.0, 0.05 * k});
    c.lines.push_back(line);
    const auto [gx, gy] = gradient(v);
    const Classification cl = classify_points(c, gx, gy, 1e-3);
    CHECK(cl.singular.size() == 21);
    CHECK(cl.regular.empty());
  }
  SUBCASE("linear field is regular everywhere") {
    const auto mask = square_mask(64);
    const ScalarField v = ScalarField::sample(mask, [](Point p) { return p.x + 0.011; });
    const Contour c = extract_contour(v, 0.0);
    const auto [gx, gy] = gradient(v);
    const Classification cl = classify_points(c, gx, gy, 1e-3);
    CHECK(cl.singular.empty());
    CHECK_THROWS_AS(classify_points(c, gx, gy, 0.0), InvalidInput);
  }
}

TEST_CASE("Weiss energy closed forms") {
  const auto mask = square_mask(256);
  SUBCASE("half-plane solution gives pi f0^2 / 8") {
    for (double f0 : {1.0, 2.0}) {
      const ScalarField v = ScalarField::sample(mask, [f0](Point p) { return 0.5 * f0 * p.x * p.x; });
      const TwoPhaseField tp = synthetic_two_phase(v, f0, -2.0 * f0);
      for (double r : {0.1, 0.3, 0.5}) {
        CAPTURE(r);
        CHECK(weiss_energy(tp, {0, 0}, r, WeissMode::frozen) ==
              doctest::Approx(pi * f0 * f0 / 8.0).epsilon(1e-3));
      }
    }
  }
  SUBCASE("zero field") {
    const TwoPhaseField tp = synthetic_two_phase(ScalarField(mask), 1.0, -2.0);
    CHECK(weiss_energy(tp, {0.1, 0.2}, 0.3) == 0.0);
    CHECK(sphere_average(tp, {0.1, 0.2}, 0.3) == 0.0);
  }
  SUBCASE("ball leaving the domain is rejected") {
    const TwoPhaseField tp = synthetic_two_phase(ScalarField(mask), 1.0, -2.0);
    CHECK_THROWS_AS(weiss_energy(tp, {0.8, 0.0}, 0.5), InvalidInput);
  }
}

TEST_CASE("Weiss quadrature converges on a smooth field") {
  auto w_at = [](int n) {
    const auto mask = square_mask(n);
    const ScalarField v = ScalarField::sample(mask, [](Point p) {
      return std::sin(1.3 * p.x + 0.4) * std::cos(0.7 * p.y) + 0.2 * p.x * p.y;
    });
    const TwoPhaseField tp = synthetic_two_phase(v, 1.5, -3.0);
    return weiss_energy(tp, {0.05, -0.1}, 0.45);
  };
  const double w1 = w_at(64), w2 = w_at(128), w3 = w_at(256);
  MESSAGE("W refinement " << w1 << " " << w2 << " " << w3);
  CHECK(std::abs(w1 - w2) / std::abs(w2 - w3) >= 1.5);
}

TEST_CASE("Weiss energy is scale invariant") {
  const double lam = 2.0;
  auto v_fn = [](Point p) { return 0.3 * p.x * p.x - 0.1 * p.y * p.y + 0.2 * p.x * p.y + 0.05 * p.x * p.x * p.x - 0.02; };
  auto f_fn = [](Point p) { return 1.0 + 0.3 * p.x; };
  auto g_fn = [](Point p) { return -2.0 + 0.1 * p.y; };
  const auto m1 = square_mask(200, 1.0);
  const auto m2 = square_mask(200, lam);
  const TwoPhaseField a = synthetic_two_phase(ScalarField::sample(m1, v_fn), ScalarField::sample(m1, f_fn),
                                              ScalarField::sample(m1, g_fn));
  const TwoPhaseField b = synthetic_two_phase(
      ScalarField::sample(m2, [&](Point p) { return lam * lam * v_fn((1.0 / lam) * p); }),
      ScalarField::sample(m2, [&](Point p) { return f_fn((1.0 / lam) * p); }),
      ScalarField::sample(m2, [&](Point p) { return g_fn((1.0 / lam) * p); }));
  const Point x0{0.1, -0.05};
  for (double r : {0.2, 0.4}) {
    CHECK(weiss_energy(b, lam * x0, lam * r) == doctest::Approx(weiss_energy(a, x0, r)).epsilon(1e-9));
    CHECK(error_term(b, lam * x0, lam * r) * lam ==
          doctest::Approx(error_term(a, x0, r)).epsilon(1e-9));
  }
}

TEST_CASE("adopted v- convention satisfies the Weiss derivative identity") {
  // W'(r) = 2 r^-4 int_dB (v_r - 2 v / r)^2 for constant coefficients; the
  // profile is C^1, two-phase and not homogeneous about x0.
  const double f0 = 1.0, g0 = -3.0;
  const auto mask = square_mask(400);
  const ScalarField v = ScalarField::sample(mask, [&](Point p) { return kink_profile(p, f0, g0); });
  const TwoPhaseField tp = synthetic_two_phase(v, f0, g0);
  const Point x0{0.0, 0.0};
  const double r = 0.4, dr = 0.02;
  double rhs = 0.0;
  const int m = 20000;
  for (int k = 0; k < m; ++k) {
    const double t = 2.0 * pi * (k + 0.5) / m;
    const Point nu{std::cos(t), std::sin(t)};
    const Point p = x0 + r * nu;
    const double d = dot(kink_gradient(p, f0, g0), nu) - 2.0 * kink_profile(p, f0, g0) / r;
    rhs += d * d * r * (2.0 * pi / m);
  }
  rhs *= 2.0 / std::pow(r, 4);
  auto derivative = [&](SignConvention conv) {
    return (weiss_energy(tp, x0, r + dr, WeissMode::varying, conv) -
            weiss_energy(tp, x0, r - dr, WeissMode::varying, conv)) / (2.0 * dr);
  };
  const double std_d = derivative(SignConvention::standard);
  const double flip_d = derivative(SignConvention::flipped);
  MESSAGE("W' standard " << std_d << " flipped " << flip_d << " identity " << rhs);
  CHECK(std_d == doctest::Approx(rhs).epsilon(2e-2));
  CHECK(std::abs(flip_d - rhs) > 10.0 * std::abs(std_d - rhs));
  CHECK(describe(SignConvention::standard).find("f v+ + g v-") != std::string::npos);
}

TEST_CASE("error term") {
  const auto mask = square_mask(256);
  const ScalarField v = ScalarField::sample(mask, [](Point p) { return 0.5 * p.x * p.x; });
  SUBCASE("constant coefficients give zero") {
    const TwoPhaseField tp = synthetic_two_phase(v, 2.0, -3.0);
    CHECK(error_term(tp, {0.1, 0.0}, 0.3) == 0.0);
  }
  SUBCASE("closed form for f = 1 + x1") {
    // Shifting to y = x - x0: int_B y1 (0.1 + y1)^2 / 2 = 0.1 int_B y1^2 = 0.1 pi r^4 / 4.
    const ScalarField f = ScalarField::sample(mask, [](Point p) { return 1.0 + p.x; });
    const ScalarField g = ScalarField::sample(mask, [](Point) { return -1.0; });
    const TwoPhaseField tp = synthetic_two_phase(v, f, g);
    for (double r : {0.2, 0.4}) {
      CHECK(error_term(tp, {0.1, 0.0}, r) == doctest::Approx(0.05 * pi / r).epsilon(1e-3));
    }
    const ScalarField f2 = ScalarField::sample(mask, [](Point p) { return 1.0 + 2.0 * p.x; });
    const TwoPhaseField tp2 = synthetic_two_phase(v, f2, g);
    CHECK(error_term(tp2, {0.1, 0.0}, 0.3) ==
          doctest::Approx(2.0 * error_term(tp, {0.1, 0.0}, 0.3)).epsilon(1e-12));
  }
}

TEST_CASE("Weiss profiles") {
  const auto mask = square_mask(256);
  SUBCASE("homogeneous solution is constant and passes") {
    const ScalarField v = ScalarField::sample(mask, [](Point p) { return p.x * p.x; });
    const TwoPhaseField tp = synthetic_two_phase(v, 2.0, -3.0);
    const WeissProfile p = weiss_profile(tp, {0, 0}, {0.1, 0.2, 0.3, 0.4}, {WeissMode::frozen});
    CHECK(p.monotone);
    CHECK(p.D == 0.0);
    for (const auto& s : p.samples) {
      CHECK(s.W1 == s.W);
      CHECK(s.W == doctest::Approx(pi / 2.0).epsilon(1e-3));
      CHECK(s.S_over_r2 == doctest::Approx(2.0 * std::sqrt(3.0 / 32.0)).epsilon(1e-3));
    }
    CHECK(p.worst_drop <= 1e-3);
  }
  SUBCASE("calibrated D dominates the error term") {
    const ScalarField v = ScalarField::sample(mask, [](Point p) { return 0.5 * p.x * p.x; });
    const ScalarField f = ScalarField::sample(mask, [](Point p) { return 1.0 + p.x; });
    const ScalarField g = ScalarField::sample(mask, [](Point) { return -2.0; });
    const TwoPhaseField tp = synthetic_two_phase(v, f, g);
    const std::vector<double> radii{0.1, 0.2, 0.3};
    const WeissProfile p = weiss_profile(tp, {0.1, 0.0}, radii);
    double sup = 0.0;
    for (const auto& s : p.samples) sup = std::max(sup, std::abs(s.e) * std::sqrt(s.r));
    CHECK(p.D == doctest::Approx(sup / 0.5).epsilon(1e-12));
    WeissOptions fixed;
    fixed.D = 3.0;
    CHECK(weiss_profile(tp, {0.1, 0.0}, radii, fixed).D == 3.0);
  }
  SUBCASE("bad input") {
    const TwoPhaseField tp = synthetic_two_phase(ScalarField(mask), 1.0, -2.0);
    CHECK_THROWS_AS(weiss_profile(tp, {0, 0}, {0.2, 0.1}), InvalidInput);
    WeissOptions bad;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(weiss_profile(tp, {0, 0}, {0.1, 0.2}, bad), InvalidInput);
    CHECK_THROWS_AS(weiss_profile(tp, {0.9, 0}, {0.1, 0.2}), InvalidInput);
  }
}

TEST_CASE("solved pair: monotonicity, nondegeneracy and subharmonicity") {
  const OptimalPair pair = subcritical_disk(256);
  const TwoPhaseField tp = to_two_phase(pair);
  const double h = tp.v.grid().h();
  const Point x0 = free_boundary_point(pair);
  std::vector<double> radii;
  for (int k = 4; k <= 20; k += 2) radii.push_back(k * h);
  const WeissProfile p = weiss_profile(tp, x0, radii);
  MESSAGE("worst W1 drop " << p.worst_drop << " min S/r^2 " << p.min_S_over_r2);
  CHECK(p.monotone);
  CHECK(p.min_S_over_r2 > 0.0);
  const double sub = subharmonicity_min(tp);
  MESSAGE("min Lap v+ off F " << sub);
  CHECK(sub >= -std::sqrt(h));
  CHECK(c11_proxy(tp, x0, 10 * h) > 0.0);
}

TEST_CASE("sphere averages") {
  const auto mask = square_mask(256);
  for (double f0 : {1.0, 3.0}) {
    const ScalarField v = ScalarField::sample(mask, [f0](Point p) { return 0.5 * f0 * p.x * p.x; });
    const TwoPhaseField tp = synthetic_two_phase(v, f0, -2.0 * f0);
    for (double r : {0.1, 0.25, 0.5}) {
      CHECK(sphere_average(tp, {0, 0}, r) / (r * r) == doctest::Approx(f0 * std::sqrt(3.0 / 32.0)).epsilon(1e-4));
    }
  }
}

TEST_CASE("blow-ups") {
  const auto mask = square_mask(256);
  const std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
  SUBCASE("homogeneous solution blows up to itself") {
    const ScalarField v = ScalarField::sample(mask, [](Point p) { return p.x * p.x; });
    const BlowupSequence seq = blowup(synthetic_two_phase(v, 2.0, -3.0), {0, 0}, radii);
    REQUIRE(seq.fields.size() == 4);
    CHECK(seq.singular_center);
    CHECK(seq.regime == "bounded");
    double worst = 0.0;
    for (std::size_t j = 1; j < seq.fields.size(); ++j) {
      for (std::size_t k = 0; k < seq.fields[j].values().size(); ++k) {
        worst = std::max(worst, std::abs(seq.fields[j][k] - seq.fields[0][k]));
      }
    }
    MESSAGE("max blow-up difference " << worst);
    CHECK(worst <= 1e-2);
    for (const auto& lv : seq.levels) {
      CHECK(lv.T == doctest::Approx(2.0 * std::sqrt(3.0 / 32.0)).epsilon(1e-3));
      CHECK(lv.a11 == doctest::Approx(1.0).epsilon(1e-2));
    }
  }
  SUBCASE("harmonic quartic decays") {
    const ScalarField v = ScalarField::sample(mask, [](Point p) {
      const double x2 = p.x * p.x, y2 = p.y * p.y;
      return x2 * x2 - 6.0 * x2 * y2 + y2 * y2;
    });
    const BlowupSequence seq = blowup(synthetic_two_phase(v, 1.0, -2.0), {0, 0}, radii);
    CHECK(seq.regime == "vanishing");
    CHECK(seq.log_slope == doctest::Approx(2.0).epsilon(0.05));
    for (std::size_t j = 1; j < seq.levels.size(); ++j) CHECK(seq.levels[j].T < seq.levels[j - 1].T);
  }
  SUBCASE("regular center warns") {
    const ScalarField v = ScalarField::sample(mask, [](Point p) { return p.x; });
    const BlowupSequence seq = blowup(synthetic_two_phase(v, 1.0, -2.0), {0, 0}, radii);
    CHECK_FALSE(seq.singular_center);
    CHECK_FALSE(seq.warning.empty());
  }
  SUBCASE("bad radii") {
    const TwoPhaseField tp = synthetic_two_phase(ScalarField(mask), 1.0, -2.0);
    CHECK_THROWS_AS(blowup(tp, {0, 0}, {0.1, 0.2}), InvalidInput);
    CHECK_THROWS_AS(blowup(tp, {0, 0}, {0.1, 0.01}), InvalidInput);
  }
}

TEST_CASE("degree-2 fits") {
  const MaskPtr ball = unit_ball_mask();
  SUBCASE("harmonic quadratic") {
    const Degree2Fit f = fit_degree2(ScalarField::sample(ball, [](Point p) { return p.x * p.x - p.y * p.y; }));
    CHECK(f.a11 == doctest::Approx(1.0));
    CHECK(std::abs(f.a12) <= 1e-12);
    CHECK(f.a22 == doctest::Approx(-1.0));
    CHECK(f.residual <= 1e-12);
    CHECK(f.harmonic_defect <= 1e-12);
  }
  SUBCASE("half-plane solution is not harmonic") {
    const Degree2Fit f = fit_degree2(ScalarField::sample(ball, [](Point p) { return 1.5 * p.x * p.x; }));
    CHECK(f.a11 == doctest::Approx(1.5));
    CHECK(f.residual <= 1e-12);
    CHECK(f.harmonic_defect > 0.5);
  }
  SUBCASE("one percent noise") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-0.01, 0.01);
    ScalarField field = ScalarField::sample(ball, [](Point p) { return 0.8 * p.x * p.x + 0.3 * p.x * p.y - 0.5 * p.y * p.y; });
    for (std::size_t k = 0; k < field.values().size(); ++k) {
      if (ball->inside(k)) field[k] += U(rng);
    }
    const Degree2Fit f = fit_degree2(field);
    CHECK(f.a11 == doctest::Approx(0.8).epsilon(0.03));
    CHECK(f.a12 == doctest::Approx(0.3).epsilon(0.03));
    CHECK(f.a22 == doctest::Approx(-0.5).epsilon(0.03));
  }
  SUBCASE("zero field") {
    CHECK_THROWS_AS(fit_degree2(ScalarField(ball)), InvalidInput);
  }
}
