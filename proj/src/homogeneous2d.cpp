#include "cmem/homogeneous2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "cmem/errors.hpp"

namespace cmem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kArc = 2.0 * kPi / 3.0;

void check_coefficients(double f0, double g0) {
  if (!(f0 > 0.0) || !std::isfinite(f0)) throw InvalidInput("f0 must be positive");
  if (!(g0 < 0.0) || !std::isfinite(g0)) throw InvalidInput("g0 must be negative");
  if (!(f0 + g0 < 0.0)) throw InvalidInput("coefficients need f0 + g0 < 0");
}

double f1(const HomogeneousSolution2D& s, double t) {
  return s.c_plus * std::sin(2.0 * t + s.d_plus) + s.gamma;
}
double f2(const HomogeneousSolution2D& s, double t) {
  return s.c_minus * std::sin(2.0 * t + s.d_minus) + s.mu;
}
double df1(const HomogeneousSolution2D& s, double t) {
  return 2.0 * s.c_plus * std::cos(2.0 * t + s.d_plus);
}
double df2(const HomogeneousSolution2D& s, double t) {
  return 2.0 * s.c_minus * std::cos(2.0 * t + s.d_minus);
}

// Fills C+, t0, C-, D- from D+ through the appendix relations and returns
// f2(2pi/3); NaN where the relations are undefined.
double reduced_residual(HomogeneousSolution2D& s, double dp) {
  const double sn = std::sin(dp);
  if (!(sn < 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double cp = -s.gamma / sn;
  const double q = s.gamma / cp;
  if (!(q < 1.0)) return std::numeric_limits<double>::quiet_NaN();
  const double a = std::asin(q);
  const double cm = std::sqrt(cp * cp - s.gamma * s.gamma + s.mu * s.mu);
  s.d_plus = dp;
  s.c_plus = cp;
  s.theta0 = kPi / 2.0 + a;
  s.c_minus = cm;
  s.d_minus = std::asin(s.mu / cm) - 2.0 * a;
  return f2(s, kArc);
}

BlankChecks verify(const HomogeneousSolution2D& s) {
  BlankChecks c;
  c.matching = {f1(s, 0.0), f1(s, s.theta0), f2(s, s.theta0), df1(s, s.theta0) - df2(s, s.theta0),
                f2(s, kArc)};
  c.identity = std::abs(s.c_plus * s.c_plus - s.c_minus * s.c_minus -
                        (s.gamma * s.gamma - s.mu * s.mu));
  c.d_plus = std::abs(s.c_plus * std::sin(s.d_plus) + s.gamma);
  c.theta0 = std::abs(s.theta0 - kPi / 2.0 - std::asin(s.gamma / s.c_plus));
  c.d_minus = std::abs(s.d_minus - std::asin(s.mu / s.c_minus) + 2.0 * std::asin(s.gamma / s.c_plus));
  c.c_minus = std::abs(s.c_minus - s.mu / std::sin(kPi / 3.0 + s.d_minus));
  c.junction_inner = std::abs(df1(s, s.theta0) - df2(s, s.theta0));
  c.junction_period = std::abs(df2(s, kArc) - df1(s, 0.0));
  const int n = 4000;
  c.min_positive = std::numeric_limits<double>::infinity();
  c.max_negative = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) / n;
    c.min_positive = std::min(c.min_positive, f1(s, t * s.theta0));
    c.max_negative = std::max(c.max_negative, f2(s, s.theta0 + t * (kArc - s.theta0)));
  }
  const int m = 6 * n;
  double prev = s.angular(2.0 * kPi * (m - 0.5) / m);
  for (int k = 0; k < m; ++k) {
    const double w = s.angular(2.0 * kPi * (k + 0.5) / m);
    if ((w >= 0.0) != (prev >= 0.0)) ++c.zeros;
    prev = w;
  }
  return c;
}

bool accepted(const HomogeneousSolution2D& s) {
  const BlankChecks& c = s.checks;
  const double scale = s.c_plus * s.c_plus + s.c_minus * s.c_minus;
  for (double e : c.matching) {
    if (!(std::abs(e) <= 1e-10)) return false;
  }
  return c.identity <= 1e-10 * scale && c.d_plus <= 1e-10 && c.theta0 <= 1e-10 &&
         c.d_minus <= 1e-10 && c.c_minus <= 1e-10 * s.c_minus && c.junction_inner <= 1e-8 &&
         c.junction_period <= 1e-8 && c.min_positive > 0.0 && c.max_negative < 0.0 &&
         c.zeros == 6 && s.theta0 > 0.0 && s.theta0 < kArc;
}

}  // namespace

std::string to_string(HomogeneousKind kind) {
  switch (kind) {
    case HomogeneousKind::halfplane: return "halfplane";
    case HomogeneousKind::nonnegative: return "nonnegative";
    case HomogeneousKind::blank: return "blank";
  }
  return "unknown";
}

double HomogeneousSolution2D::angular(double theta) const {
  const double c = std::cos(theta), s = std::sin(theta);
  switch (kind) {
    case HomogeneousKind::halfplane: return 0.5 * f0 * c * c;
    case HomogeneousKind::nonnegative: return (a + f0 / 4.0) * c * c + (f0 / 4.0 - a) * s * s;
    case HomogeneousKind::blank: {
      double t = std::fmod(theta, kArc);
      if (t < 0.0) t += kArc;
      return t <= theta0 ? f1(*this, t) : f2(*this, t);
    }
  }
  return 0.0;
}

double HomogeneousSolution2D::operator()(Point p) const {
  switch (kind) {
    case HomogeneousKind::halfplane: return 0.5 * f0 * p.x * p.x;
    case HomogeneousKind::nonnegative:
      return (a + f0 / 4.0) * p.x * p.x + (f0 / 4.0 - a) * p.y * p.y;
    case HomogeneousKind::blank: {
      const double r2 = p.x * p.x + p.y * p.y;
      return r2 > 0.0 ? r2 * angular(std::atan2(p.y, p.x)) : 0.0;
    }
  }
  return 0.0;
}

HomogeneousSolution2D halfplane(double f0, double g0) {
  check_coefficients(f0, g0);
  HomogeneousSolution2D s;
  s.kind = HomogeneousKind::halfplane;
  s.f0 = f0;
  s.g0 = g0;
  return s;
}

HomogeneousSolution2D halfplane(double f0) { return halfplane(f0, -2.0 * f0); }

HomogeneousSolution2D nonnegative(double f0, double a, double g0) {
  check_coefficients(f0, g0);
  if (!(a >= -f0 / 4.0 && a <= f0 / 4.0)) {
    throw InvalidInput("nonnegative family needs -f0/4 <= a <= f0/4");
  }
  HomogeneousSolution2D s;
  s.kind = HomogeneousKind::nonnegative;
  s.f0 = f0;
  s.g0 = g0;
  s.a = a;
  return s;
}

HomogeneousSolution2D nonnegative(double f0, double a) {
  if (!(f0 > 0.0)) throw InvalidInput("f0 must be positive");
  return nonnegative(f0, a, -2.0 * f0);
}

HomogeneousSolution2D blank_profile(double f0, double g0) {
  check_coefficients(f0, g0);
  HomogeneousSolution2D s;
  s.kind = HomogeneousKind::blank;
  s.f0 = f0;
  s.g0 = g0;
  s.gamma = f0 / 4.0;
  s.mu = -g0 / 4.0;

  const int starts = 16, scan = 64;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < starts; ++k) {
    const double lo = -kPi + 2.0 * kPi * k / starts;
    const double step = 2.0 * kPi / starts / scan;
    for (int q = 0; q < scan; ++q) {
      double a = lo + q * step, b = a + step;
      HomogeneousSolution2D t = s;
      double ra = reduced_residual(t, a), rb = reduced_residual(t, b);
      if (std::isnan(ra) || std::isnan(rb)) continue;
      best = std::min({best, std::abs(ra), std::abs(rb)});
      if ((ra > 0.0) == (rb > 0.0)) continue;
      for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
        const double m = 0.5 * (a + b);
        const double rm = reduced_residual(t, m);
        if (std::isnan(rm)) break;
        if ((rm > 0.0) == (ra > 0.0)) {
          a = m;
          ra = rm;
        } else {
          b = m;
        }
      }
      reduced_residual(t, std::abs(ra) < std::abs(reduced_residual(t, b)) ? a : b);
      t.checks = verify(t);
      t.checks.start = k;
      if (accepted(t)) return t;
    }
  }
  char msg[160];
  std::snprintf(msg, sizeof msg, "no Blank profile found for (f0, g0) = (%g, %g)", f0, g0);
  throw ConvergenceFailure(msg, best);
}

std::vector<double> evaluate(const HomogeneousSolution2D& sol, const std::vector<Point>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(sol(p));
  return out;
}

ScalarField evaluate_field(const HomogeneousSolution2D& sol, const MaskPtr& mask) {
  const Grid2D& g = mask->grid();
  std::vector<double> v(g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) v[g.index(i, j)] = sol(g.node(i, j));
  }
  return ScalarField(mask, std::move(v));
}

PdeResidual pde_residual(const HomogeneousSolution2D& sol, const Grid2D& grid) {
  const int nx = grid.nx(), ny = grid.ny();
  std::vector<double> v(grid.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) v[grid.index(i, j)] = sol(grid.node(i, j));
  }
  std::vector<std::uint8_t> kink(grid.size(), 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = grid.index(i, j);
      const bool pos = v[k] >= 0.0;
      if (i + 1 < nx && (v[k + 1] >= 0.0) != pos) kink[k] = kink[k + 1] = 1;
      if (j + 1 < ny && (v[k + nx] >= 0.0) != pos) kink[k] = kink[k + nx] = 1;
    }
  }
  PdeResidual out;
  const double ihx2 = 1.0 / (grid.hx() * grid.hx()), ihy2 = 1.0 / (grid.hy() * grid.hy());
  for (int j = 1; j + 1 < ny; ++j) {
    for (int i = 1; i + 1 < nx; ++i) {
      const Point p = grid.node(i, j);
      if (p.x * p.x + p.y * p.y > 1.0) continue;
      bool near = false;
      for (int b = std::max(0, j - 2); b <= std::min(ny - 1, j + 2) && !near; ++b) {
        for (int a = std::max(0, i - 2); a <= std::min(nx - 1, i + 2); ++a) {
          if (kink[grid.index(a, b)]) {
            near = true;
            break;
          }
        }
      }
      if (near) {
        ++out.excluded;
        continue;
      }
      const std::size_t k = grid.index(i, j);
      const double lap = (v[k + 1] + v[k - 1] - 2.0 * v[k]) * ihx2 +
                         (v[k + nx] + v[k - nx] - 2.0 * v[k]) * ihy2;
      const double rhs = v[k] >= 0.0 ? sol.f0 : -sol.g0;
      out.max_residual = std::max(out.max_residual, std::abs(lap - rhs));
      ++out.checked;
    }
  }
  return out;
}

WeissConstancy weiss_constancy(const HomogeneousSolution2D& sol, const std::vector<double>& radii,
                               int nodes) {
  if (radii.empty()) throw InvalidInput("no radii given");
  const DomainSpec square = DomainSpec::rectangle({-1.0, 1.0, -1.0, 1.0});
  const MaskPtr mask = rasterize_domain(square, grid_around(square.bounds(), nodes));
  const TwoPhaseField tp = synthetic_two_phase(evaluate_field(sol, mask), sol.f0, sol.g0);
  WeissConstancy out;
  out.radii = radii;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (double r : radii) {
    const double w = weiss_energy(tp, {0.0, 0.0}, r, WeissMode::frozen);
    out.W.push_back(w);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
    sum += w;
  }
  out.mean = sum / static_cast<double>(radii.size());
  out.spread = out.mean != 0.0 ? (hi - lo) / std::abs(out.mean) : hi - lo;
  return out;
}

std::string serialize(const HomogeneousSolution2D& sol) {
  std::string out;
  char line[96];
  auto put = [&](const char* key, double value) {
    std::snprintf(line, sizeof line, "%s = %.17g\n", key, value);
    out += line;
  };
  out += "kind = " + to_string(sol.kind) + "\n";
  put("f0", sol.f0);
  put("g0", sol.g0);
  put("a", sol.a);
  put("C+", sol.c_plus);
  put("D+", sol.d_plus);
  put("C-", sol.c_minus);
  put("D-", sol.d_minus);
  put("gamma", sol.gamma);
  put("mu", sol.mu);
  put("theta0", sol.theta0);
  return out;
}

}  // namespace cmem
