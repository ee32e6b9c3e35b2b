#include "cmem/freeboundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include <Eigen/Dense>

#include "cmem/errors.hpp"

namespace cmem {

namespace {

constexpr double kPi = std::numbers::pi;

double positive_part(double x) { return x > 0.0 ? x : 0.0; }
double negative_part(double x) { return x < 0.0 ? -x : 0.0; }

ScalarField constant_field(const MaskPtr& mask, double value) {
  return ScalarField(mask, std::vector<double>(mask->grid().size(), value));
}

void check_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!(a.grid() == b.grid())) throw InvalidInput(std::string(what) + " lives on another grid");
}

bool stencil_inside(const DomainMask& m, std::size_t k) {
  const std::size_t nx = static_cast<std::size_t>(m.grid().nx());
  return m.inside(k) && m.inside(k + 1) && m.inside(k - 1) && m.inside(k + nx) &&
         m.inside(k - nx);
}

double laplacian5(const Grid2D& g, std::span<const double> v, std::size_t k) {
  const std::size_t nx = static_cast<std::size_t>(g.nx());
  return (v[k + 1] + v[k - 1] - 2.0 * v[k]) / (g.hx() * g.hx()) +
         (v[k + nx] + v[k - nx] - 2.0 * v[k]) / (g.hy() * g.hy());
}

double max_abs_gradient(const ScalarField& gx, const ScalarField& gy) {
  const DomainMask& m = gx.mask();
  double best = 0.0;
  for (std::size_t k = 0; k < m.grid().size(); ++k) {
    if (m.inside(k)) best = std::max(best, std::hypot(gx[k], gy[k]));
  }
  return best;
}

}  // namespace

std::vector<std::uint8_t> interface_band(const ScalarField& v, int cells) {
  const Grid2D& g = v.grid();
  const int nx = g.nx(), ny = g.ny();
  std::vector<std::uint8_t> on_f(g.size(), 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, j);
      const bool pos = v[k] >= 0.0;
      if (i + 1 < nx && (v[k + 1] >= 0.0) != pos) on_f[k] = on_f[k + 1] = 1;
      if (j + 1 < ny && (v[k + nx] >= 0.0) != pos) on_f[k] = on_f[k + nx] = 1;
    }
  }
  std::vector<std::uint8_t> band(g.size(), 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!on_f[g.index(i, j)]) continue;
      for (int b = std::max(0, j - cells); b <= std::min(ny - 1, j + cells); ++b) {
        for (int a = std::max(0, i - cells); a <= std::min(nx - 1, i + cells); ++a) {
          band[g.index(a, b)] = 1;
        }
      }
    }
  }
  return band;
}

std::pair<ScalarField, ScalarField> phase_gradient(const ScalarField& v) {
  auto [gx, gy] = gradient(v);
  const DomainMask& m = v.mask();
  const Grid2D& g = m.grid();
  const int nx = g.nx(), ny = g.ny();
  // Differences never straddle a sign change of v, where v is only C^1.
  auto axis = [&](int i, int j, int di, int dj, double h, double& out) {
    auto same = [&](int s) {
      const int a = i + s * di, b = j + s * dj;
      if (a < 0 || a >= nx || b < 0 || b >= ny) return false;
      const std::size_t q = g.index(a, b);
      return m.inside(q) && (v[q] >= 0.0) == (v.at(i, j) >= 0.0);
    };
    auto val = [&](int s) { return v.at(i + s * di, j + s * dj); };
    if (same(1) && same(-1)) return;
    if (same(-1) && same(-2)) {
      out = (3.0 * val(0) - 4.0 * val(-1) + val(-2)) / (2.0 * h);
    } else if (same(1) && same(2)) {
      out = (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
    }
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!m.inside(k)) continue;
      axis(i, j, 1, 0, g.hx(), gx[k]);
      axis(i, j, 0, 1, g.hy(), gy[k]);
    }
  }
  return {std::move(gx), std::move(gy)};
}

TwoPhaseField synthetic_two_phase(ScalarField v, ScalarField f, ScalarField g) {
  check_same_grid(v, f, "f");
  check_same_grid(v, g, "g");
  return TwoPhaseField{std::move(v), std::move(f), std::move(g), Provenance::synthetic};
}

TwoPhaseField synthetic_two_phase(ScalarField v, double f0, double g0) {
  const MaskPtr& m = v.mask_ptr();
  ScalarField f = constant_field(m, f0);
  ScalarField g = constant_field(m, g0);
  return synthetic_two_phase(std::move(v), std::move(f), std::move(g));
}

double equation_residual(const TwoPhaseField& tp, double band_cells) {
  const DomainMask& m = tp.v.mask();
  const Grid2D& g = m.grid();
  const auto band = interface_band(tp.v, static_cast<int>(std::ceil(band_cells)));
  const auto v = tp.v.values();
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (band[k] || !stencil_inside(m, k)) continue;
    const double rhs = v[k] >= 0.0 ? tp.f[k] : -tp.g[k];
    worst = std::max(worst, std::abs(laplacian5(g, v, k) - rhs));
  }
  return worst;
}

TwoPhaseField to_two_phase(const OptimalPair& pair, double band_cells) {
  if (!pair.subcritical || !(pair.lambda > pair.alpha)) {
    throw InvalidInput("two-phase form needs a subcritical pair (alpha < Lambda)");
  }
  if (!(pair.level > 0.0)) throw InvalidInput("two-phase form needs a positive cut level");
  if (!(band_cells >= 1.0)) throw InvalidInput("band width must be at least one cell");
  const MaskPtr& mp = pair.u.mask_ptr();
  const DomainMask& m = *mp;
  const std::size_t n = m.grid().size();
  std::vector<double> v(n), f(n), g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = pair.u[k];
    v[k] = pair.level - u;
    f[k] = (pair.lambda - pair.alpha) * u;
    g[k] = -pair.lambda * u;
  }
  TwoPhaseField tp{ScalarField(mp, std::move(v)), ScalarField(mp, std::move(f)),
                   ScalarField(mp, std::move(g)), Provenance::pair, pair.level};

  double width = band_cells;
  for (int attempt = 0; attempt < 2; ++attempt, width *= 0.5) {
    const auto band = interface_band(tp.v, static_cast<int>(std::ceil(width)));
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) {
      if (!band[k]) continue;
      ok = m.inside(k) && tp.f[k] > 0.0 && tp.g[k] < 0.0 && tp.f[k] + tp.g[k] < 0.0;
    }
    if (ok) {
      tp.band_cells = width;
      tp.residual_off_band = equation_residual(tp, width);
      return tp;
    }
  }
  throw InvalidInput("sign conditions f > 0, g < 0, f + g < 0 fail next to the free boundary");
}

std::size_t Contour::vertex_count() const {
  std::size_t n = 0;
  for (const auto& l : lines) n += l.points.size();
  return n;
}

Contour extract_contour(const ScalarField& u, double c) {
  const DomainMask& m = u.mask();
  const Grid2D& g = m.grid();
  const int nx = g.nx(), ny = g.ny();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!m.inside(k)) continue;
    lo = std::min(lo, u[k]);
    hi = std::max(hi, u[k]);
  }
  if (!(c > lo && c < hi)) {
    throw InvalidInput("contour level must lie strictly between min and max of the field");
  }

  auto above = [&](std::size_t k) { return u[k] >= c; };
  // Edge 2k joins node k to k + 1, edge 2k + 1 joins k to k + nx.
  auto edge_point = [&](std::size_t e) {
    const std::size_t a = e / 2;
    const std::size_t b = e % 2 == 0 ? a + 1 : a + static_cast<std::size_t>(nx);
    const int ia = static_cast<int>(a % nx), ja = static_cast<int>(a / nx);
    const int ib = static_cast<int>(b % nx), jb = static_cast<int>(b / nx);
    const Point pa = g.node(ia, ja), pb = g.node(ib, jb);
    const double t = (c - u[a]) / (u[b] - u[a]);
    return pa + t * (pb - pa);
  };

  std::vector<std::array<std::size_t, 2>> segs;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const std::size_t k0 = g.index(i, j), k1 = k0 + 1, k3 = k0 + nx, k2 = k3 + 1;
      if (!(m.inside(k0) && m.inside(k1) && m.inside(k2) && m.inside(k3))) continue;
      const bool b0 = above(k0), b1 = above(k1), b2 = above(k2), b3 = above(k3);
      const std::size_t e0 = 2 * k0, e1 = 2 * k1 + 1, e2 = 2 * k3, e3 = 2 * k0 + 1;
      std::array<std::size_t, 4> cut{};
      int n = 0;
      if (b0 != b1) cut[n++] = e0;
      if (b1 != b2) cut[n++] = e1;
      if (b3 != b2) cut[n++] = e2;
      if (b0 != b3) cut[n++] = e3;
      if (n == 2) {
        segs.push_back({cut[0], cut[1]});
      } else if (n == 4) {
        const bool centre = 0.25 * (u[k0] + u[k1] + u[k2] + u[k3]) >= c;
        if (centre == b0) {
          segs.push_back({e0, e1});
          segs.push_back({e2, e3});
        } else {
          segs.push_back({e0, e3});
          segs.push_back({e1, e2});
        }
      }
    }
  }

  std::unordered_map<std::size_t, std::array<int, 2>> by_edge;
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    for (std::size_t e : segs[s]) {
      auto [it, fresh] = by_edge.try_emplace(e, std::array<int, 2>{-1, -1});
      (it->second[0] < 0 ? it->second[0] : it->second[1]) = s;
    }
  }
  auto other_segment = [&](std::size_t e, int s) {
    const auto& a = by_edge.at(e);
    return a[0] == s ? a[1] : a[0];
  };

  const auto [gx, gy] = gradient(u);
  Contour contour;
  contour.domain_max_grad = max_abs_gradient(gx, gy);
  std::vector<std::uint8_t> used(segs.size(), 0);
  auto trace = [&](int start, std::size_t entry) {
    Polyline line;
    line.points.push_back(edge_point(entry));
    int s = start;
    std::size_t e = entry;
    while (s >= 0 && !used[s]) {
      used[s] = 1;
      e = segs[s][0] == e ? segs[s][1] : segs[s][0];
      if (e == entry) {
        line.closed = true;
        break;
      }
      line.points.push_back(edge_point(e));
      s = other_segment(e, s);
    }
    for (const Point& p : line.points) {
      line.grad_norm.push_back(std::hypot(interpolate(gx, p, Interpolation::bilinear),
                                          interpolate(gy, p, Interpolation::bilinear)));
    }
    contour.lines.push_back(std::move(line));
  };
  // Open chains first, from their free ends, then the remaining loops.
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (used[s]) continue;
    for (std::size_t e : segs[s]) {
      if (other_segment(e, s) < 0) {
        trace(s, e);
        break;
      }
    }
  }
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (!used[s]) trace(s, segs[s][0]);
  }
  if (contour.lines.empty()) throw InvalidInput("empty contour");
  return contour;
}

Classification classify_points(const Contour& contour, const ScalarField& gx,
                               const ScalarField& gy, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
  check_same_grid(gx, gy, "gradient component");
  Classification out;
  out.threshold = tau * max_abs_gradient(gx, gy);
  for (const auto& line : contour.lines) {
    for (const Point& p : line.points) {
      const double gn = std::hypot(interpolate(gx, p, Interpolation::bilinear),
                                   interpolate(gy, p, Interpolation::bilinear));
      (gn < out.threshold ? out.singular : out.regular).push_back(p);
    }
  }
  return out;
}

std::string to_string(WeissMode mode) {
  return mode == WeissMode::frozen ? "frozen" : "varying";
}

std::string describe(SignConvention convention) {
  return convention == SignConvention::standard
             ? "v- = max(-v,0); integrand |grad v|^2 + 2(f v+ + g v-)"
             : "v- = max(-v,0); integrand |grad v|^2 + 2(f v+ - g v-)";
}

namespace {

void check_radius(const TwoPhaseField& tp, Point x0, double r) {
  if (!(r > 0.0)) throw InvalidInput("radius must be positive");
  // Gradients at the rim use neighbours one step further out.
  require_ball_inside(tp.v.mask(), x0, r + 2.0 * tp.v.grid().h());
}

}  // namespace

double weiss_energy(const TwoPhaseField& tp, Point x0, double r, WeissMode mode,
                    SignConvention convention) {
  check_radius(tp, x0, r);
  const MaskPtr& mp = tp.v.mask_ptr();
  const std::size_t n = mp->grid().size();
  const auto [gx, gy] = phase_gradient(tp.v);
  double f0 = 0.0, g0 = 0.0;
  if (mode == WeissMode::frozen) {
    f0 = interpolate(tp.f, x0);
    g0 = interpolate(tp.g, x0);
  }
  const double sg = convention == SignConvention::standard ? 1.0 : -1.0;
  std::vector<double> dens(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double vk = tp.v[k];
    const double fk = mode == WeissMode::frozen ? f0 : tp.f[k];
    const double gk = mode == WeissMode::frozen ? g0 : tp.g[k];
    dens[k] = gx[k] * gx[k] + gy[k] * gy[k] +
              2.0 * (fk * positive_part(vk) + sg * gk * negative_part(vk));
  }
  // v+ and v- kink on F: cells there are subsampled from interpolated v.
  const auto rough = interface_band(tp.v, 1);
  auto point = [&](Point p) {
    const double vp = interpolate(tp.v, p);
    const double a = interpolate(gx, p), b = interpolate(gy, p);
    const double fp = mode == WeissMode::frozen ? f0 : interpolate(tp.f, p);
    const double gp = mode == WeissMode::frozen ? g0 : interpolate(tp.g, p);
    return a * a + b * b + 2.0 * (fp * positive_part(vp) + sg * gp * negative_part(vp));
  };
  const double bulk = disk_integral(ScalarField(mp, std::move(dens)), x0, r, rough, point);
  const double rim = circle_integral(tp.v, x0, r, 256, [](double x) { return x * x; });
  const double r2 = r * r;
  return bulk / (r2 * r2) - 2.0 * rim / (r2 * r2 * r);
}

double error_term(const TwoPhaseField& tp, Point x0, double r) {
  check_radius(tp, x0, r);
  const MaskPtr& mp = tp.v.mask_ptr();
  const Grid2D& g = mp->grid();
  const auto [fx, fy] = gradient(tp.f);
  const auto [gx, gy] = gradient(tp.g);
  std::vector<double> dens(g.size(), 0.0);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const Point d = g.node(i, j) - x0;
      dens[k] = (d.x * fx[k] + d.y * fy[k]) * positive_part(tp.v[k]) +
                (d.x * gx[k] + d.y * gy[k]) * negative_part(tp.v[k]);
    }
  }
  const auto rough = interface_band(tp.v, 1);
  auto point = [&](Point p) {
    const Point d = p - x0;
    const double vp = interpolate(tp.v, p);
    return (d.x * interpolate(fx, p) + d.y * interpolate(fy, p)) * positive_part(vp) +
           (d.x * interpolate(gx, p) + d.y * interpolate(gy, p)) * negative_part(vp);
  };
  const double r2 = r * r;
  return 2.0 * disk_integral(ScalarField(mp, std::move(dens)), x0, r, rough, point) /
         (r2 * r2 * r);
}

double sphere_average(const TwoPhaseField& tp, Point x0, double r) {
  if (!(r > 0.0)) throw InvalidInput("radius must be positive");
  const double s = circle_integral(tp.v, x0, r, 256, [](double x) { return x * x; });
  return std::sqrt(s / (2.0 * kPi * r));
}

WeissProfile weiss_profile(const TwoPhaseField& tp, Point x0, const std::vector<double>& radii,
                           const WeissOptions& options) {
  if (radii.empty()) throw InvalidInput("no radii given");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw InvalidInput("radii must be increasing");
  }
  if (!(options.gamma >= 0.0 && options.gamma < 1.0)) {
    throw InvalidInput("gamma must lie in [0, 1)");
  }
  for (double r : radii) check_radius(tp, x0, r);

  WeissProfile p;
  p.center = x0;
  p.mode = options.mode;
  p.gamma = options.gamma;
  p.tol = options.tol;
  double sup_e = 0.0;
  for (double r : radii) {
    WeissSample s;
    s.r = r;
    s.W = weiss_energy(tp, x0, r, options.mode);
    s.e = options.mode == WeissMode::frozen ? 0.0 : error_term(tp, x0, r);
    s.S = sphere_average(tp, x0, r);
    s.S_over_r2 = s.S / (r * r);
    sup_e = std::max(sup_e, std::abs(s.e) * std::pow(r, 1.0 - options.gamma));
    p.samples.push_back(s);
  }
  if (options.D >= 0.0) {
    p.D = options.D;
  } else {
    p.D = options.gamma > 0.0 ? sup_e / options.gamma : 0.0;
  }
  p.monotone = true;
  p.min_S_over_r2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    WeissSample& s = p.samples[i];
    s.W1 = s.W + p.D * std::pow(s.r, options.gamma);
    p.min_S_over_r2 = std::min(p.min_S_over_r2, s.S_over_r2);
    if (i == 0) continue;
    const double a = p.samples[i - 1].W1, b = s.W1;
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    const double drop = (a - b) / scale;
    p.worst_drop = std::max(p.worst_drop, drop);
    if (drop > options.tol) p.monotone = false;
  }
  return p;
}

MaskPtr unit_ball_mask(int nodes) {
  const DomainSpec ball = DomainSpec::disk({0.0, 0.0}, 1.0);
  return rasterize_domain(ball, grid_around(ball.bounds(), nodes, 2));
}

Degree2Fit fit_degree2(const ScalarField& field) {
  const DomainMask& m = field.mask();
  const Grid2D& g = m.grid();
  std::vector<std::size_t> rows;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (m.inside(k)) rows.push_back(k);
  }
  Eigen::MatrixXd A(rows.size(), 3);
  Eigen::VectorXd b(rows.size());
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rows.size()); ++r) {
    const std::size_t k = rows[r];
    const Point p = g.node(static_cast<int>(k % g.nx()), static_cast<int>(k / g.nx()));
    A(r, 0) = p.x * p.x;
    A(r, 1) = p.x * p.y;
    A(r, 2) = p.y * p.y;
    b(r) = field[k];
  }
  const double bn = b.norm();
  if (!(bn > 0.0)) throw InvalidInput("cannot fit the zero field");
  const Eigen::Vector3d a = A.colPivHouseholderQr().solve(b);
  Degree2Fit fit;
  fit.a11 = a(0);
  fit.a12 = a(1);
  fit.a22 = a(2);
  fit.residual = (A * a - b).norm() / bn;
  const double size = std::abs(a(0)) + std::abs(a(1)) + std::abs(a(2));
  fit.harmonic_defect = size > 0.0 ? std::abs(a(0) + a(2)) / size : 0.0;
  return fit;
}

BlowupSequence blowup(const TwoPhaseField& tp, Point x0, const std::vector<double>& radii,
                      double tau) {
  if (radii.empty()) throw InvalidInput("no blow-up radii given");
  const double h = tp.v.grid().h();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i > 0 && !(radii[i] < radii[i - 1])) {
      throw InvalidInput("blow-up radii must be decreasing");
    }
    if (radii[i] < 4.0 * h * (1.0 - 1e-12)) {
      throw InvalidInput("blow-up radius below 4h is not resolved by the grid");
    }
  }
  for (double r : radii) require_ball_inside(tp.v.mask(), x0, r);

  BlowupSequence seq;
  seq.center = x0;
  const auto [gx, gy] = gradient(tp.v);
  const double gmax = max_abs_gradient(gx, gy);
  const double g0 = std::hypot(interpolate(gx, x0, Interpolation::bilinear),
                               interpolate(gy, x0, Interpolation::bilinear));
  seq.singular_center = !(g0 >= tau * gmax) || gmax == 0.0;
  if (!seq.singular_center) {
    seq.warning = "center is a regular point; blow-ups there are degree 1";
  }

  const MaskPtr ball = unit_ball_mask();
  const Grid2D& bg = ball->grid();
  for (double r : radii) {
    std::vector<double> w(bg.size(), 0.0);
    for (int j = 0; j < bg.ny(); ++j) {
      for (int i = 0; i < bg.nx(); ++i) {
        const std::size_t k = bg.index(i, j);
        if (!ball->inside(k)) continue;
        const Point p = x0 + r * bg.node(i, j);
        w[k] = interpolate(tp.v, p, Interpolation::bilinear) / (r * r);
      }
    }
    ScalarField field(ball, std::move(w));
    BlowupLevel lv;
    lv.r = r;
    lv.T = sphere_average(tp, x0, r) / (r * r);
    bool nonzero = false;
    for (double x : field.values()) nonzero = nonzero || x != 0.0;
    if (nonzero) {
      const Degree2Fit fit = fit_degree2(field);
      lv.a11 = fit.a11;
      lv.a12 = fit.a12;
      lv.a22 = fit.a22;
      lv.residual = fit.residual;
      lv.harmonic_defect = fit.harmonic_defect;
    }
    seq.levels.push_back(lv);
    seq.fields.push_back(std::move(field));
  }

  bool any_zero = false;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& lv : seq.levels) {
    if (!(lv.T > 0.0)) {
      any_zero = true;
      continue;
    }
    const double x = std::log(lv.r), y = std::log(lv.T);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(seq.levels.size());
  if (any_zero) {
    seq.regime = "vanishing";
  } else if (seq.levels.size() < 2) {
    seq.regime = "bounded";
  } else {
    seq.log_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    seq.regime = seq.log_slope > 0.5 ? "vanishing" : seq.log_slope < -0.5 ? "divergent" : "bounded";
  }
  return seq;
}

double subharmonicity_min(const TwoPhaseField& tp, double band_cells) {
  const DomainMask& m = tp.v.mask();
  const Grid2D& g = m.grid();
  const auto band = interface_band(tp.v, static_cast<int>(std::ceil(band_cells)));
  std::vector<double> vp(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) vp[k] = positive_part(tp.v[k]);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (band[k] || !stencil_inside(m, k)) continue;
    worst = std::min(worst, laplacian5(g, vp, k));
  }
  return worst;
}

double c11_proxy(const TwoPhaseField& tp, Point x0, double r) {
  if (!(r > 0.0)) throw InvalidInput("radius must be positive");
  const Grid2D& g = tp.v.grid();
  double best = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (norm(g.node(i, j) - x0) <= r) best = std::max(best, std::abs(tp.v.at(i, j)));
    }
  }
  return best / (r * r);
}

}  // namespace cmem
