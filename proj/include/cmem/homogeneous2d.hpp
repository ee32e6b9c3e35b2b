#pragma once

// Exact degree-2 homogeneous solutions of Lap v = f0 chi_{v>=0} - g0 chi_{v<0}
// in the plane, used as oracles for the free-boundary quantities.

#include <array>
#include <string>
#include <vector>

#include "cmem/freeboundary.hpp"
#include "cmem/geometry.hpp"

namespace cmem {

enum class HomogeneousKind { halfplane, nonnegative, blank };

std::string to_string(HomogeneousKind kind);

/// Verification record of a two-phase angular profile on [0, 2pi/3].
struct BlankChecks {
  std::array<double, 5> matching{};  // f1(0), f1(t0), f2(t0), f1'(t0) - f2'(t0), f2(2pi/3)
  double identity = 0.0;       // |C+^2 - C-^2 - (gamma^2 - mu^2)|
  double d_plus = 0.0;         // |C+ sin D+ + gamma|
  double theta0 = 0.0;         // |t0 - pi/2 - asin(gamma/C+)|
  double d_minus = 0.0;        // |D- - asin(mu/C-) + 2 asin(gamma/C+)|
  double c_minus = 0.0;        // |C- - mu/sin(pi/3 + D-)|
  double junction_inner = 0.0;  // C1 defect at t0
  double junction_period = 0.0;  // C1 defect at 2pi/3 against the next period
  double min_positive = 0.0;    // min f1 on the interior of (0, t0)
  double max_negative = 0.0;    // max f2 on the interior of (t0, 2pi/3)
  int zeros = 0;                // sign changes of w on [0, 2pi)
  int start = -1;               // multistart index that produced the root
};

/// v(x) = r^2 w(theta).
struct HomogeneousSolution2D {
  HomogeneousKind kind = HomogeneousKind::halfplane;
  double f0 = 0.0;
  double g0 = 0.0;
  double a = 0.0;  // nonnegative kind
  double c_plus = 0.0, d_plus = 0.0, c_minus = 0.0, d_minus = 0.0;
  double gamma = 0.0, mu = 0.0, theta0 = 0.0;  // blank kind
  BlankChecks checks;

  double angular(double theta) const;
  double operator()(Point p) const;
};

/// v = (f0/2) x1^2. g0 only enters the frozen-coefficient energy and must
/// satisfy g0 < 0, f0 + g0 < 0.
HomogeneousSolution2D halfplane(double f0, double g0);
HomogeneousSolution2D halfplane(double f0);

/// v = (a + f0/4) x1^2 + (f0/4 - a) x2^2 with -f0/4 <= a <= f0/4.
HomogeneousSolution2D nonnegative(double f0, double a, double g0);
HomogeneousSolution2D nonnegative(double f0, double a);

/// Two-phase profile: w = C+ sin(2t + D+) + f0/4 on the positive arc
/// [0, t0], w = C- sin(2t + D-) - g0/4 on the negative arc [t0, 2pi/3],
/// extended 2pi/3-periodically. Throws ConvergenceFailure when no verified
/// root of the matching system exists.
HomogeneousSolution2D blank_profile(double f0, double g0);

std::vector<double> evaluate(const HomogeneousSolution2D& sol, const std::vector<Point>& points);

/// Values at every node of the grid (not only the unknowns).
ScalarField evaluate_field(const HomogeneousSolution2D& sol, const MaskPtr& mask);

struct PdeResidual {
  double max_residual = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;  // nodes in the two-cell band around {v = 0}
};

/// 5-point residual of Lap v - (f0 chi_{v>=0} - g0 chi_{v<0}) at grid nodes
/// in the closed unit disk, skipping nodes within two cells of a sign change.
PdeResidual pde_residual(const HomogeneousSolution2D& sol, const Grid2D& grid);

struct WeissConstancy {
  std::vector<double> radii;
  std::vector<double> W;
  double mean = 0.0;
  double spread = 0.0;  // (max - min) / |mean|
};

/// Frozen-coefficient W(r) about the origin on a `nodes`^2 grid of [-1, 1]^2.
WeissConstancy weiss_constancy(const HomogeneousSolution2D& sol, const std::vector<double>& radii,
                               int nodes = 512);

/// Flat "key = value" block: kind, f0, g0, a, C+, D+, C-, D-, gamma, mu, theta0.
std::string serialize(const HomogeneousSolution2D& sol);

}  // namespace cmem
