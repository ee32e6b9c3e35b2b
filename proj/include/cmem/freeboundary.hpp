#pragma once

// Two-phase reformulation of a solved pair, free-boundary extraction, Weiss
// energy, spherical averages and blow-ups. Formulas are for n = 2.

#include <string>
#include <vector>

#include "cmem/geometry.hpp"
#include "cmem/optimizer.hpp"

namespace cmem {

enum class Provenance { pair, synthetic };

/// v with Laplacian f on {v >= 0} and -g on {v < 0}.
struct TwoPhaseField {
  ScalarField v;
  ScalarField f;
  ScalarField g;
  Provenance provenance = Provenance::synthetic;
  double level = 0.0;        // c, for pairs
  double band_cells = 0.0;   // width of the verified sign band, in cells
  double residual_off_band = 0.0;  // max |Lap v - (f chi+ - g chi-)| away from the band
};

/// v = c - u, f = (Lambda - alpha) u, g = -Lambda u. The sign conditions
/// f > 0, g < 0, f + g < 0 are checked on the nodes within `band_cells` of
/// F; on failure the band is halved once before giving up.
TwoPhaseField to_two_phase(const OptimalPair& pair, double band_cells = 10.0);

TwoPhaseField synthetic_two_phase(ScalarField v, ScalarField f, ScalarField g);
TwoPhaseField synthetic_two_phase(ScalarField v, double f0, double g0);

/// max |5-point Lap v - (f chi_{v>=0} - g chi_{v<0})| over unknowns whose
/// stencil is inside and that lie more than `band_cells` cells from F.
double equation_residual(const TwoPhaseField& tp, double band_cells);

/// Gradient whose difference stencils stay on one side of {v = 0}: central
/// where possible, second-order one-sided next to a sign change.
std::pair<ScalarField, ScalarField> phase_gradient(const ScalarField& v);

/// Flags nodes within `cells` grid steps (max norm) of a sign change of v.
std::vector<std::uint8_t> interface_band(const ScalarField& v, int cells);

struct Polyline {
  std::vector<Point> points;
  std::vector<double> grad_norm;  // |grad u| at each point, when known
  bool closed = false;
};

struct Contour {
  std::vector<Polyline> lines;
  double domain_max_grad = 0.0;  // max |grad u| over the unknowns

  std::size_t vertex_count() const;
};

/// Marching squares for {u = c} over cells whose four corners are unknowns.
/// Nodes with u >= c count as above; saddle cells are resolved by the mean
/// of the corners.
Contour extract_contour(const ScalarField& u, double c);

struct Classification {
  std::vector<Point> regular;
  std::vector<Point> singular;
  double threshold = 0.0;  // tau * max |grad| over the domain
};

/// A vertex is singular when |grad| there is below tau times the largest
/// |grad| over the unknowns.
Classification classify_points(const Contour& contour, const ScalarField& gx,
                               const ScalarField& gy, double tau);

enum class WeissMode { frozen, varying };
enum class SignConvention {
  standard,  // |grad v|^2 + 2 (f v+ + g v-), v- = max(-v, 0)
  flipped    // |grad v|^2 + 2 (f v+ - g v-)
};

std::string to_string(WeissMode mode);
std::string describe(SignConvention convention);

/// W(r) = r^-4 int_B (|grad v|^2 + 2 (f v+ + g v-)) - 2 r^-5 int_dB v^2.
/// Frozen mode replaces f, g by their values at x0.
double weiss_energy(const TwoPhaseField& tp, Point x0, double r,
                    WeissMode mode = WeissMode::varying,
                    SignConvention convention = SignConvention::standard);

/// e(r) = 2 r^-5 int_B ((x - x0).grad f v+ + (x - x0).grad g v-).
double error_term(const TwoPhaseField& tp, Point x0, double r);

/// S(r), the root mean square of v on the circle.
double sphere_average(const TwoPhaseField& tp, Point x0, double r);

struct WeissSample {
  double r = 0.0;
  double W = 0.0;
  double e = 0.0;
  double W1 = 0.0;
  double S = 0.0;
  double S_over_r2 = 0.0;
};

struct WeissProfile {
  Point center;
  WeissMode mode = WeissMode::varying;
  double gamma = 0.5;
  double D = 0.0;
  double tol = 1e-2;
  std::vector<WeissSample> samples;
  bool monotone = false;
  double worst_drop = 0.0;  // largest relative decrease of W1 between neighbours
  double min_S_over_r2 = 0.0;
};

struct WeissOptions {
  WeissMode mode = WeissMode::varying;
  double gamma = 0.5;
  double tol = 1e-2;
  double D = -1.0;  // negative: calibrate from the measured e(r)
};

WeissProfile weiss_profile(const TwoPhaseField& tp, Point x0, const std::vector<double>& radii,
                           const WeissOptions& options = {});

struct BlowupLevel {
  double r = 0.0;
  double T = 0.0;  // S(r) / r^2
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;
  double residual = 0.0;
  double harmonic_defect = 0.0;
};

struct BlowupSequence {
  Point center;
  std::vector<BlowupLevel> levels;
  std::vector<ScalarField> fields;  // v(r x + x0) / r^2 on the unit-ball grid
  std::string regime;   // bounded | vanishing | divergent
  double log_slope = 0.0;  // d log T / d log r
  bool singular_center = true;
  std::string warning;
};

/// Unit-ball grid shared by every blow-up level: 65 nodes across [-1, 1]^2.
MaskPtr unit_ball_mask(int nodes = 65);

BlowupSequence blowup(const TwoPhaseField& tp, Point x0, const std::vector<double>& radii,
                      double tau = 1e-3);

struct Degree2Fit {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;  // a11 x^2 + a12 x y + a22 y^2
  double residual = 0.0;
  double harmonic_defect = 0.0;
};

Degree2Fit fit_degree2(const ScalarField& field);

/// min over unknowns off F (beyond `band_cells`) of the 5-point Laplacian of v+.
double subharmonicity_min(const TwoPhaseField& tp, double band_cells = 2.0);

/// sup_{|x - x0| <= r} |v| / r^2 over nodes; a finite-radius proxy only.
double c11_proxy(const TwoPhaseField& tp, Point x0, double r);

}  // namespace cmem
