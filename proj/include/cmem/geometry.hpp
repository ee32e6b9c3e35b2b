#pragma once

// Structured 2D grids, rasterized domains, node fields and the quadrature
// primitives shared by every other module.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cmem {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double norm(Point a);

struct BBox {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool operator==(const BBox&) const = default;
};

/// Uniform tensor grid of nodes. Node (i, j) sits at (x(i), y(j)); storage is
/// row-major with index j * nx + i.
class Grid2D {
 public:
  Grid2D(BBox box, int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double h() const { return hx_ > hy_ ? hx_ : hy_; }
  double cell_area() const { return hx_ * hy_; }
  const BBox& bbox() const { return box_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  double x(int i) const { return i == nx_ - 1 ? box_.xmax : box_.xmin + i * hx_; }
  double y(int j) const { return j == ny_ - 1 ? box_.ymax : box_.ymin + j * hy_; }
  Point node(int i, int j) const { return {x(i), y(j)}; }

  bool operator==(const Grid2D&) const = default;

 private:
  BBox box_;
  int nx_;
  int ny_;
  double hx_;
  double hy_;
};

Grid2D build_grid(BBox box, int nx, int ny);

/// Square-cell grid enclosing `shape` with `margin_cells` empty cells on every
/// side; the longer side of the shape gets `n_long` nodes.
Grid2D grid_around(const BBox& shape, int n_long, int margin_cells = 2);

enum class ShapeKind { disk, rectangle, ellipse, stadium, polygon };

std::string to_string(ShapeKind kind);

struct BoundarySample {
  Point p;
  Point normal;  // outward unit normal
  double weight;  // arc length carried by the sample
  double corner_distance = std::numeric_limits<double>::infinity();
};

/// A bounded open set described by an implicit function that is negative
/// inside. Declared symmetry axes are the lines through center() parallel to
/// the coordinate axes: 1 axis means y -> 2cy - y, 2 axes adds x -> 2cx - x.
class DomainSpec {
 public:
  static DomainSpec disk(Point center, double radius, int axes = 2);
  static DomainSpec rectangle(BBox box, int axes = 2);
  static DomainSpec ellipse(Point center, double a, double b, int axes = 2);
  /// Horizontal capsule: segment of half length `half_length` swept by `radius`.
  static DomainSpec stadium(Point center, double half_length, double radius, int axes = 2);
  static DomainSpec polygon(std::vector<Point> vertices, int axes = 0);

  ShapeKind kind() const { return kind_; }
  int symmetry_axes() const { return axes_; }
  Point center() const;
  BBox bounds() const;
  const std::vector<double>& params() const { return params_; }
  const std::vector<Point>& vertices() const { return vertices_; }

  /// Negative inside, zero on the boundary. Exact Euclidean distance for every
  /// shape except the ellipse, whose level function only shares the zero set.
  double signed_distance(Point p) const;
  bool contains(Point p) const { return signed_distance(p) < 0.0; }

  /// Boundary quadrature nodes with spacing about `spacing`.
  std::vector<BoundarySample> boundary(double spacing) const;

  /// Exact area of the continuum shape.
  double area() const;

  std::string describe() const;
  bool operator==(const DomainSpec&) const = default;

 private:
  DomainSpec(ShapeKind kind, std::vector<double> params, std::vector<Point> vertices, int axes);
  void validate_axes() const;

  ShapeKind kind_;
  std::vector<double> params_;
  std::vector<Point> vertices_;
  int axes_;
};

/// Rasterized domain. Each node owns the dual cell centred on it; `weight` is
/// the area of that cell inside the domain. Nodes strictly inside are the
/// unknowns; every other node carries the Dirichlet value 0. For unknown
/// nodes `theta` holds, per direction (E, W, N, S), the fraction of the grid
/// spacing to the boundary crossing (1 when the neighbour is also inside).
class DomainMask {
 public:
  enum Direction { east = 0, west = 1, north = 2, south = 3 };

  DomainMask(DomainSpec spec, Grid2D grid, std::vector<std::uint8_t> inside,
             std::vector<double> weight, std::vector<std::array<double, 4>> theta);

  const DomainSpec& spec() const { return spec_; }
  const Grid2D& grid() const { return grid_; }
  bool inside(std::size_t k) const { return inside_[k] != 0; }
  std::span<const std::uint8_t> inside_flags() const { return inside_; }
  std::span<const double> weights() const { return weight_; }
  double weight(std::size_t k) const { return weight_[k]; }
  const std::array<double, 4>& theta(std::size_t k) const { return theta_[k]; }
  double measure() const { return measure_; }
  std::size_t unknowns() const { return unknowns_; }

  /// True when the 4x4 Keys stencil around the cell containing `p` is inside.
  bool cubic_stencil_inside(Point p) const;

  bool operator==(const DomainMask& other) const;

 private:
  DomainSpec spec_;
  Grid2D grid_;
  std::vector<std::uint8_t> inside_;
  std::vector<double> weight_;
  std::vector<std::array<double, 4>> theta_;
  double measure_ = 0.0;
  std::size_t unknowns_ = 0;
};

using MaskPtr = std::shared_ptr<const DomainMask>;

/// Rasterizes `spec` on `grid` with `subsamples` x `subsamples` points per
/// cell for the clipped cell areas.
MaskPtr rasterize_domain(const DomainSpec& spec, const Grid2D& grid, int subsamples = 4);

/// Real values at every grid node. Fields built by sample() vanish outside the
/// mask (the Dirichlet value); derived fields such as v = c - u may not.
class ScalarField {
 public:
  explicit ScalarField(MaskPtr mask);
  ScalarField(MaskPtr mask, std::vector<double> values);

  static ScalarField sample(MaskPtr mask, const std::function<double(Point)>& fn);

  const MaskPtr& mask_ptr() const { return mask_; }
  const DomainMask& mask() const { return *mask_; }
  const Grid2D& grid() const { return mask_->grid(); }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double at(int i, int j) const { return values_[grid().index(i, j)]; }

 private:
  MaskPtr mask_;
  std::vector<double> values_;
};

enum class Interpolation { bilinear, cubic };

/// Interpolates at `p`. Cubic uses the Keys (a = -1/2) kernel, exact on
/// quadratics, and falls back to bilinear when its stencil leaves the mask.
double interpolate(const ScalarField& field, Point p, Interpolation kind = Interpolation::cubic);

/// Central differences at nodes whose neighbours are inside, one-sided
/// differences at the mask boundary, zero outside.
std::pair<ScalarField, ScalarField> gradient(const ScalarField& field);

/// Subset of the domain cells; `fraction[k]` is the share of node k's domain
/// cell that belongs to the set.
struct CellSet {
  std::vector<double> fraction;
  double measure = 0.0;

  static CellSet empty(const DomainMask& mask);
  static CellSet full(const DomainMask& mask);
  bool contains(std::size_t k) const { return fraction[k] > 0.0; }
};

double symmetric_difference(const CellSet& a, const CellSet& b, const DomainMask& mask);
CellSet make_cell_set(const DomainMask& mask, std::vector<double> fraction);

struct QuantileResult {
  double level = 0.0;
  CellSet region;
};

/// Measure-constrained sublevel set: the cells with the smallest values of
/// `u`, ties broken by node index, until their measure reaches `target`.
QuantileResult weighted_quantile(const ScalarField& u, double target);

/// Integral over B(x0, r). Cells inside the ball use a corrected midpoint
/// rule, cells cut by the circle are subsampled with interpolated values.
double disk_integral(const ScalarField& field, Point x0, double r, int subsamples = 16);

/// Same quadrature for integrands that are not smooth everywhere: cells
/// flagged in `rough` (indexed by node) are subsampled like cut cells, and
/// every subsample takes its value from `point_value` instead of
/// interpolating `field`.
double disk_integral(const ScalarField& field, Point x0, double r,
                     std::span<const std::uint8_t> rough,
                     const std::function<double(Point)>& point_value, int subsamples = 16);

/// Integral over the circle of radius r with `n_theta` equi-angular samples.
double circle_integral(const ScalarField& field, Point x0, double r, int n_theta = 256);

/// Circle integral of fn(interpolated value).
double circle_integral(const ScalarField& field, Point x0, double r, int n_theta,
                       const std::function<double(double)>& fn);

/// Throws InvalidInput unless every node within r + h of x0 is an unknown.
void require_ball_inside(const DomainMask& mask, Point x0, double r);

}  // namespace cmem
