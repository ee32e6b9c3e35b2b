#include "cmem/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "cmem/errors.hpp"

namespace cmem {

namespace {

// Slope at 0 of the least-squares cubic a s + b s^2 + c s^3 through the samples.
double cubic_slope(const std::array<double, 7>& s, const std::array<double, 7>& y) {
  double m[3][4] = {};
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double b[3] = {s[k], s[k] * s[k], s[k] * s[k] * s[k]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += b[r] * b[c];
      m[r][3] += b[r] * y[k];
    }
  }
  for (int p = 0; p < 3; ++p) {
    int piv = p;
    for (int r = p + 1; r < 3; ++r) {
      if (std::abs(m[r][p]) > std::abs(m[piv][p])) piv = r;
    }
    for (int c = 0; c < 4; ++c) std::swap(m[p][c], m[piv][c]);
    for (int r = 0; r < 3; ++r) {
      if (r == p) continue;
      const double f = m[r][p] / m[p][p];
      for (int c = p; c < 4; ++c) m[r][c] -= f * m[p][c];
    }
  }
  return m[0][3] / m[0][0];
}

}  // namespace

PohozaevReport pohozaev_residual(const OptimalPair& pair, Point x0) {
  const DomainMask& m = pair.mask();
  const DomainSpec& spec = m.spec();
  const double h = m.grid().h();
  PohozaevReport rep;
  rep.center = x0;

  double flux = 0.0;
  for (const BoundarySample& b : spec.boundary(h)) {
    if (b.corner_distance < 8.0 * h) {
      ++rep.skipped;
      continue;
    }
    std::array<double, 7> s{}, y{};
    bool ok = true;
    for (int k = 0; k < 7 && ok; ++k) {
      s[k] = (3.0 + 0.5 * k) * h;
      const Point q = b.p - s[k] * b.normal;
      ok = spec.signed_distance(q) < 0.0;
      if (ok) y[k] = interpolate(pair.u, q);
    }
    if (!ok) {
      ++rep.skipped;
      continue;
    }
    const double un = -cubic_slope(s, y);
    flux += b.weight * dot(b.p - x0, b.normal) * un * un;
    ++rep.samples;
  }
  if (rep.samples == 0) throw InvalidInput("no usable boundary samples for the flux integral");
  rep.lhs = 0.5 * flux;

  double inside_d = 0.0;
  for (std::size_t k = 0; k < m.grid().size(); ++k) {
    inside_d += m.weight(k) * pair.region.fraction[k] * pair.u[k] * pair.u[k];
  }
  const double outside_measure = m.measure() - pair.region.measure;
  rep.rhs = pair.lambda - pair.alpha * pair.level * pair.level * outside_measure -
            pair.alpha * inside_d;
  rep.residual = std::abs(rep.lhs - rep.rhs) / std::abs(rep.rhs);
  return rep;
}

UniquenessReport weak_uniqueness_experiment(const MaskPtr& mask, double alpha, double target,
                                            const std::vector<std::uint64_t>& seeds,
                                            const UniquenessOptions& options) {
  if (seeds.empty()) throw InvalidInput("weak uniqueness needs at least one seed");
  if (!(target > 0.0 && target < mask->measure())) {
    throw InvalidInput("target measure must lie strictly inside (0, |Omega|)");
  }
  std::vector<std::uint64_t> order = seeds;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  UniquenessReport rep;
  rep.tolerance = options.tolerance;
  rep.window = 10.0 * options.optimizer.tol;
  rep.best_lambda = std::numeric_limits<double>::infinity();
  std::vector<OptimalPair> pairs;
  for (std::uint64_t seed : order) {
    UniquenessRun run;
    run.seed = seed;
    try {
      OptimalPair p = optimize(mask, alpha, target, {InitKind::random, seed}, options.optimizer);
      run.lambda = p.lambda;
      run.level = p.level;
      run.converged = p.converged;
      run.iterations = static_cast<int>(p.history.size());
      if (p.converged) rep.best_lambda = std::min(rep.best_lambda, p.lambda);
      pairs.push_back(std::move(p));
    } catch (const ConvergenceFailure& e) {
      run.error = e.what();
    }
    rep.runs.push_back(run);
  }
  if (!std::isfinite(rep.best_lambda)) {
    throw ConvergenceFailure("no weak-uniqueness run converged", 0.0);
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  const OptimalPair* best = nullptr;
  for (const UniquenessRun& run : rep.runs) {
    if (!run.converged || run.lambda > rep.best_lambda + rep.window) continue;
    rep.optimal_seeds.push_back(run.seed);
    lo = std::min(lo, run.level);
    hi = std::max(hi, run.level);
    sum += run.level;
  }
  for (const OptimalPair& p : pairs) {
    if (p.converged && p.lambda == rep.best_lambda) best = &p;
  }
  rep.mean_level = sum / static_cast<double>(rep.optimal_seeds.size());
  rep.spread = (hi - lo) / rep.mean_level;
  rep.pass = rep.spread <= options.tolerance;

  if (!rep.pass && best) {
    const double step = options.probe_step * mask->measure();
    const double a_lo = std::max(0.5 * target, target - step);
    const double a_hi = std::min(0.5 * (target + mask->measure()), target + step);
    const OptimalPair lo_pair =
        optimize_from(mask, alpha, a_lo, best->region, &best->u, options.optimizer);
    const OptimalPair hi_pair =
        optimize_from(mask, alpha, a_hi, best->region, &best->u, options.optimizer);
    rep.probe_slope = (hi_pair.lambda - lo_pair.lambda) / (a_hi - a_lo);
    rep.probe_predicted = alpha * best->level * best->level;
  }
  return rep;
}

namespace {

// Area of {(x, y) in [-hx/2, hx/2] x [-hy/2, hy/2] : a x + b y < t}.
double area_below(double a, double b, double t, double hx, double hy) {
  std::array<Point, 8> in{}, out{};
  in[0] = {-0.5 * hx, -0.5 * hy};
  in[1] = {0.5 * hx, -0.5 * hy};
  in[2] = {0.5 * hx, 0.5 * hy};
  in[3] = {-0.5 * hx, 0.5 * hy};
  int n = 4, m = 0;
  for (int i = 0; i < n; ++i) {
    const Point p = in[i], q = in[(i + 1) % n];
    const double fp = a * p.x + b * p.y - t, fq = a * q.x + b * q.y - t;
    if (fp < 0.0) out[m++] = p;
    if ((fp < 0.0) != (fq < 0.0)) out[m++] = p + (fp / (fp - fq)) * (q - p);
  }
  double area = 0.0;
  for (int i = 0; i < m; ++i) {
    const Point p = out[i], q = out[(i + 1) % m];
    area += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(area);
}

}  // namespace

ThicknessReport levelset_thickness(const ScalarField& u, double s, const std::vector<double>& eps) {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw InvalidInput("eps values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw InvalidInput("eps values must be decreasing");
  }
  const DomainMask& m = u.mask();
  const Grid2D& g = m.grid();
  const int nx = g.nx(), ny = g.ny();
  const double hx = g.hx(), hy = g.hy();
  auto diff = [&](int i, int n, double step, auto at) {
    if (i > 0 && i + 1 < n) return (at(i + 1) - at(i - 1)) / (2.0 * step);
    return i == 0 ? (at(1) - at(0)) / step : (at(i) - at(i - 1)) / step;
  };
  ThicknessReport rep;
  rep.eps = eps;
  rep.measure.assign(eps.size(), 0.0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!(m.weight(k) > 0.0)) continue;
      const double a = diff(i, nx, hx, [&](int q) { return u.at(q, j); });
      const double b = diff(j, ny, hy, [&](int q) { return u.at(i, q); });
      const double scale = m.weight(k) / (hx * hy);
      const double d = s - u[k];
      for (std::size_t e = 0; e < eps.size(); ++e) {
        const double band = area_below(a, b, d + eps[e], hx, hy) -
                            area_below(a, b, d - eps[e], hx, hy);
        rep.measure[e] += scale * band;
      }
    }
  }
  const double n = static_cast<double>(eps.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    sx += eps[e];
    sy += rep.measure[e];
    sxx += eps[e] * eps[e];
    sxy += eps[e] * rep.measure[e];
  }
  if (eps.size() >= 2) {
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.intercept = (sy - rep.slope * sx) / n;
  } else if (eps.size() == 1) {
    rep.slope = rep.measure[0] / eps[0];
  }
  return rep;
}

BoundaryGradient gradient_on_boundary(const OptimalPair& pair, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
  const Contour f = extract_contour(pair.u, pair.level);
  BoundaryGradient out;
  out.domain_max_grad = f.domain_max_grad;
  out.threshold = tau * f.domain_max_grad;
  out.components = f.lines.size();
  out.min_grad = std::numeric_limits<double>::infinity();
  std::size_t singular = 0;
  double sum = 0.0;
  for (const Polyline& line : f.lines) {
    for (double gn : line.grad_norm) {
      out.max_grad = std::max(out.max_grad, gn);
      out.min_grad = std::min(out.min_grad, gn);
      sum += gn;
      if (gn < out.threshold) ++singular;
      ++out.vertices;
    }
  }
  out.mean_grad = sum / static_cast<double>(out.vertices);
  out.singular_fraction = static_cast<double>(singular) / static_cast<double>(out.vertices);
  return out;
}

SymmetryVerdict symmetry_singularity_check(const OptimalPair& pair, const DomainSpec& spec,
                                           double tau) {
  if (spec.symmetry_axes() != 2) {
    throw InvalidInput("symmetry check needs a domain with two symmetry axes");
  }
  if (!(pair.mask().spec() == spec)) {
    throw InvalidInput("pair was solved on a different domain (" + pair.mask().spec().describe() +
                       ") than " + spec.describe());
  }
  const BoundaryGradient bg = gradient_on_boundary(pair, tau);
  const Contour f = extract_contour(pair.u, pair.level);
  SymmetryVerdict v;
  v.min_grad = bg.min_grad;
  v.threshold = bg.threshold;
  v.components = f.lines.size();
  v.closed = v.components == 1 && f.lines.front().closed;
  if (!v.closed) v.note = "free boundary is not a single closed curve";
  else if (!(v.min_grad >= v.threshold)) v.note = "gradient nearly vanishes on the free boundary";
  v.pass = v.closed && v.min_grad >= v.threshold;
  return v;
}

}  // namespace cmem
