#pragma once

// Independent oracles shared by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "cmem/geometry.hpp"

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// First eigenvalue of the 5-point Dirichlet Laplacian on the unit square
/// with h = 1/(n+1).
inline double discrete_square(int n) {
  const double h = 1.0 / (n + 1);
  const double s = std::sin(pi * h / 2.0);
  return 8.0 / (h * h) * s * s;
}

inline double j01_squared() {
  const double j = boost::math::cyl_bessel_j_zero(0.0, 1);
  return j * j;
}

/// Node-aligned grid of the unit square with n interior nodes per side.
inline cmem::MaskPtr unit_square(int n) {
  const auto spec = cmem::DomainSpec::rectangle({0.0, 1.0, 0.0, 1.0});
  return cmem::rasterize_domain(spec, cmem::build_grid({0.0, 1.0, 0.0, 1.0}, n + 2, n + 2));
}

inline cmem::MaskPtr disk_mask(int n, double radius = 1.0) {
  const auto spec = cmem::DomainSpec::disk({0.0, 0.0}, radius);
  return cmem::rasterize_domain(spec, cmem::grid_around(spec.bounds(), n));
}

/// Radial optimum on the unit disk: D is the annulus rho < r < 1 of area A,
/// u = J0(k r) inside and a Bessel combination vanishing at r = 1 outside,
/// matched C1 at rho. Returns (Lambda, c) with u normalized in L2.
struct Radial {
  double lambda = 0.0;
  double level = 0.0;
};

inline Radial radial_disk(double alpha, double area) {
  using namespace boost::math;
  const double rho = std::sqrt(1.0 - area / pi);
  // Outer solution and its derivative for eigenvalue L, vanishing at r = 1.
  auto outer = [alpha](double L, double r) -> std::pair<double, double> {
    const double q = alpha - L;
    if (q > 0.0) {
      const double k = std::sqrt(q);
      const double i1 = cyl_bessel_i(0, k), k1 = cyl_bessel_k(0, k);
      return {cyl_bessel_i(0, k * r) * k1 - cyl_bessel_k(0, k * r) * i1,
              k * (cyl_bessel_i(1, k * r) * k1 + cyl_bessel_k(1, k * r) * i1)};
    }
    const double k = std::sqrt(std::max(-q, 1e-300));
    const double j1 = cyl_bessel_j(0, k), y1 = cyl_neumann(0, k);
    return {cyl_bessel_j(0, k * r) * y1 - cyl_neumann(0, k * r) * j1,
            -k * (cyl_bessel_j(1, k * r) * y1 - cyl_neumann(1, k * r) * j1)};
  };
  auto mismatch = [&](double L) {
    const double k = std::sqrt(L);
    const auto [uo, duo] = outer(L, rho);
    return cyl_bessel_j(0, k * rho) * duo + k * cyl_bessel_j(1, k * rho) * uo;
  };
  const double lo0 = j01_squared() * (1.0 - 1e-12), hi0 = j01_squared() + alpha;
  double a = lo0, fa = mismatch(a);
  double b = a;
  const int steps = 4000;
  for (int s = 1; s <= steps; ++s) {
    b = lo0 + (hi0 - lo0) * s / steps;
    const double fb = mismatch(b);
    if ((fa < 0.0) != (fb < 0.0)) break;
    a = b;
    fa = fb;
  }
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = mismatch(m);
    if ((fa < 0.0) == (fm < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  const double L = 0.5 * (a + b);
  const double k = std::sqrt(L);
  const double scale = cyl_bessel_j(0, k * rho) / outer(L, rho).first;
  auto u = [&](double r) { return r < rho ? cyl_bessel_j(0, k * r) : scale * outer(L, r).first; };
  using quadrature::gauss_kronrod;
  const double inner = gauss_kronrod<double, 31>::integrate(
      [&](double r) { return u(r) * u(r) * r; }, 0.0, rho, 10, 1e-14);
  const double outer_part = gauss_kronrod<double, 31>::integrate(
      [&](double r) { return u(r) * u(r) * r; }, rho, 1.0, 10, 1e-14);
  const double norm = std::sqrt(2.0 * pi * (inner + outer_part));
  return {L, cyl_bessel_j(0, k * rho) / norm};
}

}  // namespace oracle
