#include "cmem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cmem/errors.hpp"

namespace cmem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kThetaMin = 1e-3;

bool finite_box(const BBox& b) {
  return std::isfinite(b.xmin) && std::isfinite(b.xmax) && std::isfinite(b.ymin) &&
         std::isfinite(b.ymax);
}

double segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

double signed_area(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Point& a = v[k];
    const Point& b = v[(k + 1) % v.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

// Keys cubic convolution weights (a = -1/2) for offsets -1, 0, 1, 2.
std::array<double, 4> keys_weights(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
          0.5 * (-3.0 * t3 + 4.0 * t2 + t), 0.5 * (t3 - t2)};
}

}  // namespace

double norm(Point a) { return std::hypot(a.x, a.y); }

// ---------------------------------------------------------------------------
// Grid2D

Grid2D::Grid2D(BBox box, int nx, int ny) : box_(box), nx_(nx), ny_(ny) {
  if (nx < 3 || ny < 3) {
    throw InvalidInput("grid needs at least 3 nodes per direction, got " + std::to_string(nx) +
                       "x" + std::to_string(ny));
  }
  if (!finite_box(box) || !(box.xmax > box.xmin) || !(box.ymax > box.ymin)) {
    throw InvalidInput("degenerate grid bounding box");
  }
  hx_ = (box.xmax - box.xmin) / (nx - 1);
  hy_ = (box.ymax - box.ymin) / (ny - 1);
}

Grid2D build_grid(BBox box, int nx, int ny) { return Grid2D(box, nx, ny); }

Grid2D grid_around(const BBox& shape, int n_long, int margin_cells) {
  if (margin_cells < 0) throw InvalidInput("negative grid margin");
  const int intervals = n_long - 1 - 2 * margin_cells;
  if (intervals < 2) throw InvalidInput("grid too coarse for the requested margin");
  if (!(shape.width() > 0.0) || !(shape.height() > 0.0)) {
    throw InvalidInput("degenerate shape bounding box");
  }
  const bool wide = shape.width() >= shape.height();
  const double long_len = wide ? shape.width() : shape.height();
  const double short_len = wide ? shape.height() : shape.width();
  const double h = long_len / intervals;
  const int n_short = static_cast<int>(std::ceil(short_len / h - 1e-9)) + 1 + 2 * margin_cells;
  const double half_short = 0.5 * (n_short - 1) * h;
  BBox box;
  if (wide) {
    box.xmin = shape.xmin - margin_cells * h;
    box.xmax = shape.xmax + margin_cells * h;
    const double cy = 0.5 * (shape.ymin + shape.ymax);
    box.ymin = cy - half_short;
    box.ymax = cy + half_short;
    return Grid2D(box, n_long, n_short);
  }
  box.ymin = shape.ymin - margin_cells * h;
  box.ymax = shape.ymax + margin_cells * h;
  const double cx = 0.5 * (shape.xmin + shape.xmax);
  box.xmin = cx - half_short;
  box.xmax = cx + half_short;
  return Grid2D(box, n_short, n_long);
}

// ---------------------------------------------------------------------------
// DomainSpec

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::disk: return "disk";
    case ShapeKind::rectangle: return "rectangle";
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::stadium: return "stadium";
    case ShapeKind::polygon: return "polygon";
  }
  return "unknown";
}

DomainSpec::DomainSpec(ShapeKind kind, std::vector<double> params, std::vector<Point> vertices,
                       int axes)
    : kind_(kind), params_(std::move(params)), vertices_(std::move(vertices)), axes_(axes) {
  for (double p : params_) {
    if (!std::isfinite(p)) throw InvalidInput("non-finite domain parameter");
  }
  if (axes_ < 0 || axes_ > 2) throw InvalidInput("symmetry axes must be 0, 1 or 2");
  validate_axes();
}

DomainSpec DomainSpec::disk(Point center, double radius, int axes) {
  if (!(radius > 0.0)) throw InvalidInput("disk radius must be positive");
  return DomainSpec(ShapeKind::disk, {center.x, center.y, radius}, {}, axes);
}

DomainSpec DomainSpec::rectangle(BBox box, int axes) {
  if (!finite_box(box) || !(box.xmax > box.xmin) || !(box.ymax > box.ymin)) {
    throw InvalidInput("rectangle must have positive width and height");
  }
  return DomainSpec(ShapeKind::rectangle, {box.xmin, box.xmax, box.ymin, box.ymax}, {}, axes);
}

DomainSpec DomainSpec::ellipse(Point center, double a, double b, int axes) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("ellipse semi-axes must be positive");
  return DomainSpec(ShapeKind::ellipse, {center.x, center.y, a, b}, {}, axes);
}

DomainSpec DomainSpec::stadium(Point center, double half_length, double radius, int axes) {
  if (!(half_length >= 0.0) || !(radius > 0.0)) {
    throw InvalidInput("stadium needs half_length >= 0 and radius > 0");
  }
  return DomainSpec(ShapeKind::stadium, {center.x, center.y, half_length, radius}, {}, axes);
}

DomainSpec DomainSpec::polygon(std::vector<Point> vertices, int axes) {
  if (vertices.size() < 3) throw InvalidInput("polygon needs at least 3 vertices");
  for (const Point& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw InvalidInput("non-finite vertex");
  }
  if (std::abs(signed_area(vertices)) <= 0.0) throw InvalidInput("polygon has zero area");
  return DomainSpec(ShapeKind::polygon, {}, std::move(vertices), axes);
}

Point DomainSpec::center() const {
  switch (kind_) {
    case ShapeKind::disk:
    case ShapeKind::ellipse:
    case ShapeKind::stadium: return {params_[0], params_[1]};
    default: {
      const BBox b = bounds();
      return {0.5 * (b.xmin + b.xmax), 0.5 * (b.ymin + b.ymax)};
    }
  }
}

BBox DomainSpec::bounds() const {
  switch (kind_) {
    case ShapeKind::disk: {
      const double r = params_[2];
      return {params_[0] - r, params_[0] + r, params_[1] - r, params_[1] + r};
    }
    case ShapeKind::rectangle: return {params_[0], params_[1], params_[2], params_[3]};
    case ShapeKind::ellipse:
      return {params_[0] - params_[2], params_[0] + params_[2], params_[1] - params_[3],
              params_[1] + params_[3]};
    case ShapeKind::stadium: {
      const double l = params_[2], r = params_[3];
      return {params_[0] - l - r, params_[0] + l + r, params_[1] - r, params_[1] + r};
    }
    case ShapeKind::polygon: {
      BBox b{vertices_[0].x, vertices_[0].x, vertices_[0].y, vertices_[0].y};
      for (const Point& v : vertices_) {
        b.xmin = std::min(b.xmin, v.x);
        b.xmax = std::max(b.xmax, v.x);
        b.ymin = std::min(b.ymin, v.y);
        b.ymax = std::max(b.ymax, v.y);
      }
      return b;
    }
  }
  return {};
}

double DomainSpec::signed_distance(Point p) const {
  switch (kind_) {
    case ShapeKind::disk: return norm(p - Point{params_[0], params_[1]}) - params_[2];
    case ShapeKind::rectangle: {
      const double cx = 0.5 * (params_[0] + params_[1]);
      const double cy = 0.5 * (params_[2] + params_[3]);
      const double qx = std::abs(p.x - cx) - 0.5 * (params_[1] - params_[0]);
      const double qy = std::abs(p.y - cy) - 0.5 * (params_[3] - params_[2]);
      const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
      return outside + std::min(std::max(qx, qy), 0.0);
    }
    case ShapeKind::ellipse: {
      const double dx = (p.x - params_[0]) / params_[2];
      const double dy = (p.y - params_[1]) / params_[3];
      return (std::hypot(dx, dy) - 1.0) * std::min(params_[2], params_[3]);
    }
    case ShapeKind::stadium: {
      const Point a{params_[0] - params_[2], params_[1]};
      const Point b{params_[0] + params_[2], params_[1]};
      return segment_distance(p, a, b) - params_[3];
    }
    case ShapeKind::polygon: {
      double d = std::numeric_limits<double>::infinity();
      bool in = false;
      const std::size_t n = vertices_.size();
      for (std::size_t k = 0, l = n - 1; k < n; l = k++) {
        const Point& a = vertices_[k];
        const Point& b = vertices_[l];
        d = std::min(d, segment_distance(p, a, b));
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
          in = !in;
        }
      }
      return in ? -d : d;
    }
  }
  return 0.0;
}

double DomainSpec::area() const {
  switch (kind_) {
    case ShapeKind::disk: return kPi * params_[2] * params_[2];
    case ShapeKind::rectangle: return (params_[1] - params_[0]) * (params_[3] - params_[2]);
    case ShapeKind::ellipse: return kPi * params_[2] * params_[3];
    case ShapeKind::stadium: return 4.0 * params_[2] * params_[3] + kPi * params_[3] * params_[3];
    case ShapeKind::polygon: return std::abs(signed_area(vertices_));
  }
  return 0.0;
}

void DomainSpec::validate_axes() const {
  if (axes_ == 0) return;
  const BBox b = bounds();
  const Point c = center();
  const double scale = std::max(b.width(), b.height());
  const double tol = 1e-9 * scale;
  constexpr int kLattice = 41;
  for (int j = 0; j < kLattice; ++j) {
    for (int i = 0; i < kLattice; ++i) {
      const Point p{b.xmin - 0.05 * scale + (b.width() + 0.1 * scale) * i / (kLattice - 1),
                    b.ymin - 0.05 * scale + (b.height() + 0.1 * scale) * j / (kLattice - 1)};
      const double s = signed_distance(p);
      if (std::abs(s) <= tol) continue;
      const Point mirrors[2] = {{p.x, 2.0 * c.y - p.y}, {2.0 * c.x - p.x, p.y}};
      for (int a = 0; a < axes_; ++a) {
        const double sm = signed_distance(mirrors[a]);
        if (std::abs(sm) > tol && (sm < 0.0) != (s < 0.0)) {
          throw InvalidInput("declared symmetry axis is not a symmetry of the " +
                             to_string(kind_));
        }
      }
    }
  }
}

std::vector<BoundarySample> DomainSpec::boundary(double spacing) const {
  if (!(spacing > 0.0)) throw InvalidInput("boundary spacing must be positive");
  std::vector<BoundarySample> out;
  auto add_segment = [&](Point a, Point b, Point outward, bool corners) {
    const double len = norm(b - a);
    const int m = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int k = 0; k < m; ++k) {
      const double t = (k + 0.5) / m;
      const Point p = a + t * (b - a);
      BoundarySample s{p, outward, len / m};
      if (corners) s.corner_distance = std::min(t, 1.0 - t) * len;
      out.push_back(s);
    }
  };
  auto add_arc = [&](Point c, double r, double t0, double t1) {
    const int m = std::max(8, static_cast<int>(std::ceil(r * (t1 - t0) / spacing)));
    for (int k = 0; k < m; ++k) {
      const double t = t0 + (t1 - t0) * (k + 0.5) / m;
      const Point n{std::cos(t), std::sin(t)};
      out.push_back({c + r * n, n, r * (t1 - t0) / m});
    }
  };
  switch (kind_) {
    case ShapeKind::disk: {
      const Point c{params_[0], params_[1]};
      const double r = params_[2];
      const int n = std::max(64, static_cast<int>(std::ceil(2.0 * kPi * r / spacing)));
      for (int k = 0; k < n; ++k) {
        const double t = 2.0 * kPi * k / n;
        const Point nrm{std::cos(t), std::sin(t)};
        out.push_back({c + r * nrm, nrm, 2.0 * kPi * r / n});
      }
      break;
    }
    case ShapeKind::ellipse: {
      const Point c{params_[0], params_[1]};
      const double a = params_[2], b = params_[3];
      const double perimeter = kPi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
      const int n = std::max(64, static_cast<int>(std::ceil(perimeter / spacing)));
      for (int k = 0; k < n; ++k) {
        const double t = 2.0 * kPi * k / n;
        const Point p{c.x + a * std::cos(t), c.y + b * std::sin(t)};
        const double speed = std::hypot(a * std::sin(t), b * std::cos(t));
        const Point nrm{b * std::cos(t) / speed, a * std::sin(t) / speed};
        out.push_back({p, nrm, speed * 2.0 * kPi / n});
      }
      break;
    }
    case ShapeKind::rectangle: {
      const double x0 = params_[0], x1 = params_[1], y0 = params_[2], y1 = params_[3];
      add_segment({x0, y0}, {x1, y0}, {0.0, -1.0}, true);
      add_segment({x1, y0}, {x1, y1}, {1.0, 0.0}, true);
      add_segment({x1, y1}, {x0, y1}, {0.0, 1.0}, true);
      add_segment({x0, y1}, {x0, y0}, {-1.0, 0.0}, true);
      break;
    }
    case ShapeKind::stadium: {
      const double cx = params_[0], cy = params_[1], l = params_[2], r = params_[3];
      if (l > 0.0) {
        add_segment({cx - l, cy - r}, {cx + l, cy - r}, {0.0, -1.0}, false);
        add_segment({cx + l, cy + r}, {cx - l, cy + r}, {0.0, 1.0}, false);
      }
      add_arc({cx + l, cy}, r, -0.5 * kPi, 0.5 * kPi);
      add_arc({cx - l, cy}, r, 0.5 * kPi, 1.5 * kPi);
      break;
    }
    case ShapeKind::polygon: {
      const double orientation = signed_area(vertices_) > 0.0 ? 1.0 : -1.0;
      const std::size_t n = vertices_.size();
      for (std::size_t k = 0; k < n; ++k) {
        const Point a = vertices_[k];
        const Point b = vertices_[(k + 1) % n];
        const Point d = b - a;
        const double len = norm(d);
        if (len == 0.0) continue;
        const Point outward{orientation * d.y / len, -orientation * d.x / len};
        add_segment(a, b, outward, true);
      }
      break;
    }
  }
  return out;
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind_) << "(";
  if (kind_ == ShapeKind::polygon) {
    for (std::size_t k = 0; k < vertices_.size(); ++k) {
      os << (k ? ";" : "") << vertices_[k].x << "," << vertices_[k].y;
    }
  } else {
    for (std::size_t k = 0; k < params_.size(); ++k) os << (k ? "," : "") << params_[k];
  }
  os << ") axes=" << axes_;
  return os.str();
}

// ---------------------------------------------------------------------------
// DomainMask

DomainMask::DomainMask(DomainSpec spec, Grid2D grid, std::vector<std::uint8_t> inside,
                       std::vector<double> weight, std::vector<std::array<double, 4>> theta)
    : spec_(std::move(spec)),
      grid_(grid),
      inside_(std::move(inside)),
      weight_(std::move(weight)),
      theta_(std::move(theta)) {
  measure_ = std::accumulate(weight_.begin(), weight_.end(), 0.0);
  unknowns_ = static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), 1));
}

bool DomainMask::cubic_stencil_inside(Point p) const {
  const int i0 = static_cast<int>(std::floor((p.x - grid_.bbox().xmin) / grid_.hx()));
  const int j0 = static_cast<int>(std::floor((p.y - grid_.bbox().ymin) / grid_.hy()));
  if (i0 < 1 || j0 < 1 || i0 + 2 >= grid_.nx() || j0 + 2 >= grid_.ny()) return false;
  for (int j = j0 - 1; j <= j0 + 2; ++j) {
    for (int i = i0 - 1; i <= i0 + 2; ++i) {
      if (!inside_[grid_.index(i, j)]) return false;
    }
  }
  return true;
}

bool DomainMask::operator==(const DomainMask& other) const {
  return spec_ == other.spec_ && grid_ == other.grid_ && inside_ == other.inside_ &&
         weight_ == other.weight_;
}

MaskPtr rasterize_domain(const DomainSpec& spec, const Grid2D& grid, int subsamples) {
  if (subsamples < 1) throw InvalidInput("subsamples must be >= 1");
  const BBox sb = spec.bounds();
  const BBox& gb = grid.bbox();
  const double slack = 1e-12 * std::max(gb.width(), gb.height());
  if (sb.xmin < gb.xmin - slack || sb.xmax > gb.xmax + slack || sb.ymin < gb.ymin - slack ||
      sb.ymax > gb.ymax + slack) {
    throw InvalidInput("domain " + spec.describe() + " exceeds the grid bounding box");
  }
  const int nx = grid.nx(), ny = grid.ny();
  const double hx = grid.hx(), hy = grid.hy();
  const double eps = 1e-9 * std::min(hx, hy);
  const double half_diag = 0.5 * std::hypot(hx, hy) * 1.0001;

  std::vector<double> sdf(grid.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) sdf[grid.index(i, j)] = spec.signed_distance(grid.node(i, j));
  }

  std::vector<std::uint8_t> inside(grid.size(), 0);
  std::vector<double> weight(grid.size(), 0.0);
  std::vector<std::array<double, 4>> theta(grid.size(), {1.0, 1.0, 1.0, 1.0});
  const double sub_area = hx * hy / (subsamples * subsamples);

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = grid.index(i, j);
      const double s = sdf[k];
      inside[k] = s < -eps ? 1 : 0;
      if (s <= -half_diag) {
        weight[k] = hx * hy;
      } else if (s < half_diag) {
        int count = 0;
        const Point c = grid.node(i, j);
        for (int b = 0; b < subsamples; ++b) {
          for (int a = 0; a < subsamples; ++a) {
            const Point p{c.x + hx * ((a + 0.5) / subsamples - 0.5),
                          c.y + hy * ((b + 0.5) / subsamples - 0.5)};
            if (spec.signed_distance(p) < 0.0) ++count;
          }
        }
        weight[k] = count * sub_area;
      }
    }
  }

  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (!inside[k]) continue;
      const Point p0 = grid.node(i, j);
      for (int d = 0; d < 4; ++d) {
        const int ni = i + di[d], nj = j + dj[d];
        const bool in_grid = ni >= 0 && nj >= 0 && ni < nx && nj < ny;
        if (in_grid && inside[grid.index(ni, nj)]) continue;
        const Point p1 = in_grid ? grid.node(ni, nj)
                                 : Point{p0.x + di[d] * hx, p0.y + dj[d] * hy};
        const double s1 = in_grid ? sdf[grid.index(ni, nj)] : spec.signed_distance(p1);
        double t = 1.0;
        if (std::abs(s1) > eps) {
          double lo = 0.0, hi = 1.0;
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (spec.signed_distance(p0 + mid * (p1 - p0)) < 0.0) {
              lo = mid;
            } else {
              hi = mid;
            }
          }
          t = 0.5 * (lo + hi);
        }
        theta[k][d] = std::max(t, kThetaMin);
      }
    }
  }

  auto mask = std::make_shared<DomainMask>(spec, grid, std::move(inside), std::move(weight),
                                           std::move(theta));
  if (mask->unknowns() == 0 || !(mask->measure() > 0.0)) {
    throw InvalidInput("domain " + spec.describe() + " does not intersect the grid interior");
  }
  return mask;
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(MaskPtr mask) : mask_(std::move(mask)) {
  if (!mask_) throw InvalidInput("field needs a mask");
  values_.assign(mask_->grid().size(), 0.0);
}

ScalarField::ScalarField(MaskPtr mask, std::vector<double> values)
    : mask_(std::move(mask)), values_(std::move(values)) {
  if (!mask_) throw InvalidInput("field needs a mask");
  if (values_.size() != mask_->grid().size()) {
    throw InvalidInput("field size does not match its grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidInput("field holds a non-finite value");
  }
}

ScalarField ScalarField::sample(MaskPtr mask, const std::function<double(Point)>& fn) {
  ScalarField f(mask);
  const Grid2D& g = mask->grid();
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (mask->inside(k)) f.values_[k] = fn(g.node(i, j));
    }
  }
  return f;
}

double interpolate(const ScalarField& field, Point p, Interpolation kind) {
  const Grid2D& g = field.grid();
  const BBox& b = g.bbox();
  const double slack = 1e-12 * std::max(b.width(), b.height());
  if (!(p.x >= b.xmin - slack && p.x <= b.xmax + slack && p.y >= b.ymin - slack &&
        p.y <= b.ymax + slack)) {
    throw InvalidInput("interpolation point outside the grid");
  }
  const double fx = (p.x - b.xmin) / g.hx();
  const double fy = (p.y - b.ymin) / g.hy();
  const int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx() - 2);
  const int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny() - 2);
  const double tx = fx - i0;
  const double ty = fy - j0;
  const auto v = field.values();
  if (kind == Interpolation::cubic && field.mask().cubic_stencil_inside(p)) {
    const auto wx = keys_weights(tx);
    const auto wy = keys_weights(ty);
    double s = 0.0;
    for (int b2 = 0; b2 < 4; ++b2) {
      double row = 0.0;
      const std::size_t base = g.index(i0 - 1, j0 - 1 + b2);
      for (int a = 0; a < 4; ++a) row += wx[a] * v[base + a];
      s += wy[b2] * row;
    }
    return s;
  }
  const std::size_t k00 = g.index(i0, j0);
  const std::size_t k01 = g.index(i0, j0 + 1);
  return (1.0 - ty) * ((1.0 - tx) * v[k00] + tx * v[k00 + 1]) +
         ty * ((1.0 - tx) * v[k01] + tx * v[k01 + 1]);
}

std::pair<ScalarField, ScalarField> gradient(const ScalarField& field) {
  const DomainMask& m = field.mask();
  const Grid2D& g = m.grid();
  ScalarField gx(field.mask_ptr());
  ScalarField gy(field.mask_ptr());
  const auto v = field.values();
  auto in = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < g.nx() && j < g.ny() && m.inside(g.index(i, j));
  };
  // One direction at a time: (di, dj) is the unit step, h the spacing.
  auto derivative = [&](int i, int j, int di, int dj, double h) {
    const double f0 = v[g.index(i, j)];
    const bool p1 = in(i + di, j + dj), m1 = in(i - di, j - dj);
    if (p1 && m1) return (v[g.index(i + di, j + dj)] - v[g.index(i - di, j - dj)]) / (2.0 * h);
    if (p1 && in(i + 2 * di, j + 2 * dj)) {
      return (-3.0 * f0 + 4.0 * v[g.index(i + di, j + dj)] -
              v[g.index(i + 2 * di, j + 2 * dj)]) /
             (2.0 * h);
    }
    if (m1 && in(i - 2 * di, j - 2 * dj)) {
      return (3.0 * f0 - 4.0 * v[g.index(i - di, j - dj)] +
              v[g.index(i - 2 * di, j - 2 * dj)]) /
             (2.0 * h);
    }
    if (p1) return (v[g.index(i + di, j + dj)] - f0) / h;
    if (m1) return (f0 - v[g.index(i - di, j - dj)]) / h;
    return 0.0;
  };
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (!m.inside(k)) continue;
      gx[k] = derivative(i, j, 1, 0, g.hx());
      gy[k] = derivative(i, j, 0, 1, g.hy());
    }
  }
  return {std::move(gx), std::move(gy)};
}

// ---------------------------------------------------------------------------
// Cell sets and the measure-constrained quantile

CellSet CellSet::empty(const DomainMask& mask) {
  return CellSet{std::vector<double>(mask.grid().size(), 0.0), 0.0};
}

CellSet CellSet::full(const DomainMask& mask) {
  std::vector<double> f(mask.grid().size(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = mask.weight(k) > 0.0 ? 1.0 : 0.0;
  return make_cell_set(mask, std::move(f));
}

CellSet make_cell_set(const DomainMask& mask, std::vector<double> fraction) {
  if (fraction.size() != mask.grid().size()) throw InvalidInput("cell set size mismatch");
  double measure = 0.0;
  for (std::size_t k = 0; k < fraction.size(); ++k) {
    const double f = fraction[k];
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidInput("cell fraction outside [0, 1]");
    if (f > 0.0 && mask.weight(k) <= 0.0) {
      throw InvalidInput("cell set is not contained in the domain");
    }
    measure += f * mask.weight(k);
  }
  return CellSet{std::move(fraction), measure};
}

double symmetric_difference(const CellSet& a, const CellSet& b, const DomainMask& mask) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.fraction.size(); ++k) {
    s += std::abs(a.fraction[k] - b.fraction[k]) * mask.weight(k);
  }
  return s;
}

QuantileResult weighted_quantile(const ScalarField& u, double target) {
  const DomainMask& m = u.mask();
  const double total = m.measure();
  const double tol = 1e-12 * total;
  if (!(target >= -tol && target <= total + tol)) {
    throw InvalidInput("target measure " + std::to_string(target) + " outside [0, " +
                       std::to_string(total) + "]");
  }
  const auto v = u.values();
  std::vector<std::size_t> order;
  order.reserve(m.unknowns() * 2);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (m.weight(k) > 0.0) order.push_back(k);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v[a] < v[b] || (v[a] == v[b] && a < b);
  });

  QuantileResult out;
  out.region.fraction.assign(v.size(), 0.0);
  out.level = order.empty() ? 0.0 : v[order.front()];
  double acc = 0.0;
  for (std::size_t k : order) {
    if (acc >= target - tol) break;
    out.region.fraction[k] = 1.0;
    acc += m.weight(k);
    out.level = v[k];
  }
  double measure = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) measure += out.region.fraction[k] * m.weight(k);
  out.region.measure = measure;
  return out;
}

// ---------------------------------------------------------------------------
// Ball and circle quadrature

void require_ball_inside(const DomainMask& mask, Point x0, double r) {
  if (!(r > 0.0) || !std::isfinite(x0.x) || !std::isfinite(x0.y)) {
    throw InvalidInput("ball radius must be positive");
  }
  const Grid2D& g = mask.grid();
  const double reach = r + g.h();
  const BBox& b = g.bbox();
  if (x0.x - reach < b.xmin || x0.x + reach > b.xmax || x0.y - reach < b.ymin ||
      x0.y + reach > b.ymax) {
    throw InvalidInput("ball leaves the grid");
  }
  const int i0 = static_cast<int>(std::floor((x0.x - reach - b.xmin) / g.hx()));
  const int i1 = static_cast<int>(std::ceil((x0.x + reach - b.xmin) / g.hx()));
  const int j0 = static_cast<int>(std::floor((x0.y - reach - b.ymin) / g.hy()));
  const int j1 = static_cast<int>(std::ceil((x0.y + reach - b.ymin) / g.hy()));
  for (int j = std::max(j0, 0); j <= std::min(j1, g.ny() - 1); ++j) {
    for (int i = std::max(i0, 0); i <= std::min(i1, g.nx() - 1); ++i) {
      if (norm(g.node(i, j) - x0) <= reach && !mask.inside(g.index(i, j))) {
        throw InvalidInput("ball is not contained in the domain interior");
      }
    }
  }
}

double disk_integral(const ScalarField& field, Point x0, double r,
                     std::span<const std::uint8_t> rough,
                     const std::function<double(Point)>& point_value, int subsamples) {
  const DomainMask& m = field.mask();
  require_ball_inside(m, x0, r);
  const Grid2D& g = m.grid();
  const double hx = g.hx(), hy = g.hy();
  const BBox& b = g.bbox();
  const auto v = field.values();
  const int i0 = std::max(1, static_cast<int>(std::floor((x0.x - r - b.xmin) / hx)) - 1);
  const int i1 = std::min(g.nx() - 2, static_cast<int>(std::ceil((x0.x + r - b.xmin) / hx)) + 1);
  const int j0 = std::max(1, static_cast<int>(std::floor((x0.y - r - b.ymin) / hy)) - 1);
  const int j1 = std::min(g.ny() - 2, static_cast<int>(std::ceil((x0.y + r - b.ymin) / hy)) + 1);
  const double sub_area = hx * hy / (subsamples * subsamples);
  double total = 0.0;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Point c = g.node(i, j);
      const double lx = c.x - 0.5 * hx - x0.x, ux = c.x + 0.5 * hx - x0.x;
      const double ly = c.y - 0.5 * hy - x0.y, uy = c.y + 0.5 * hy - x0.y;
      const double far = std::hypot(std::max(std::abs(lx), std::abs(ux)),
                                    std::max(std::abs(ly), std::abs(uy)));
      const double nx = lx > 0.0 ? lx : (ux < 0.0 ? ux : 0.0);
      const double ny = ly > 0.0 ? ly : (uy < 0.0 ? uy : 0.0);
      const double near = std::hypot(nx, ny);
      if (near >= r) continue;
      const std::size_t k = g.index(i, j);
      if (far <= r && (rough.empty() || !rough[k])) {
        // Midpoint rule plus the h^2/24 Laplacian correction: exact on quadratics.
        const double fc = v[k];
        total += hx * hy *
                 (fc + (v[k + 1] + v[k - 1] - 2.0 * fc) / 24.0 +
                  (v[k + g.nx()] + v[k - g.nx()] - 2.0 * fc) / 24.0);
        continue;
      }
      for (int sb = 0; sb < subsamples; ++sb) {
        for (int sa = 0; sa < subsamples; ++sa) {
          const Point p{c.x + hx * ((sa + 0.5) / subsamples - 0.5),
                        c.y + hy * ((sb + 0.5) / subsamples - 0.5)};
          if (norm(p - x0) < r) total += sub_area * point_value(p);
        }
      }
    }
  }
  return total;
}

double disk_integral(const ScalarField& field, Point x0, double r, int subsamples) {
  return disk_integral(
      field, x0, r, {}, [&](Point p) { return interpolate(field, p); }, subsamples);
}

double circle_integral(const ScalarField& field, Point x0, double r, int n_theta,
                       const std::function<double(double)>& fn) {
  require_ball_inside(field.mask(), x0, r);
  if (n_theta < 3) throw InvalidInput("circle quadrature needs at least 3 samples");
  double s = 0.0;
  for (int k = 0; k < n_theta; ++k) {
    const double t = 2.0 * kPi * k / n_theta;
    s += fn(interpolate(field, {x0.x + r * std::cos(t), x0.y + r * std::sin(t)}));
  }
  return s * 2.0 * kPi * r / n_theta;
}

double circle_integral(const ScalarField& field, Point x0, double r, int n_theta) {
  return circle_integral(field, x0, r, n_theta, [](double x) { return x; });
}

}  // namespace cmem
