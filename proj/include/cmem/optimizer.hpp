#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmem/geometry.hpp"
#include "cmem/spectral.hpp"

namespace cmem {

enum class InitKind { empty, random, annulus };

std::string to_string(InitKind kind);
InitKind parse_init_kind(const std::string& name);

struct InitSpec {
  InitKind kind = InitKind::empty;
  std::uint64_t seed = 0;
};

struct OptimizerOptions {
  double tol = 1e-8;     // eigenvalue stagnation between sweeps of the fixed point
  int max_iter = 200;
  double damping = 0.0;  // 0: D_{k+1} is the sublevel set of u_k itself
  EigenOptions eigen;
};

struct IterationRecord {
  double lambda = 0.0;
  double level = 0.0;
  double sym_diff = 0.0;  // |D_{k+1} symmetric-difference D_k|
  double measure = 0.0;   // |D_k|, the set the eigenvalue was computed on
  int eigen_iterations = 0;
};

/// Output of the rearrangement fixed point: u is the normalized ground state
/// of -Laplacian + alpha chi_D and D its measure-`target` sublevel set at `level`.
struct OptimalPair {
  ScalarField u;
  CellSet region;
  double level = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  double target = 0.0;
  std::vector<IterationRecord> history;
  bool converged = false;
  bool subcritical = false;  // alpha < lambda
  InitSpec init;
  double eigen_residual = 0.0;

  const DomainMask& mask() const { return u.mask(); }
};

/// Starting set for the fixed point. `annulus` is the boundary layer of
/// measure `target`; `random` is a seeded Bernoulli field, smoothed and
/// projected to measure `target`.
CellSet initial_region(const MaskPtr& mask, double target, const InitSpec& init);

/// Minimizes the first eigenvalue over sets of measure `target` by alternating
/// eigen-solves and sublevel-set truncation. Stops when both the eigenvalue
/// (within tol) and the set (within one cell) stagnate, or after max_iter.
OptimalPair optimize(const MaskPtr& mask, double alpha, double target, const InitSpec& init,
                     const OptimizerOptions& options = {});

/// Same iteration from an explicit starting set, optionally warm-starting the
/// eigensolver from `warm_u`.
OptimalPair optimize_from(const MaskPtr& mask, double alpha, double target, CellSet start,
                          const ScalarField* warm_u, const OptimizerOptions& options = {});

struct CurveSample {
  double target = 0.0;
  double lambda = 0.0;
  double level = 0.0;
  int iterations = 0;
  bool subcritical = false;
  bool converged = false;
  double max_u = 0.0;
  std::string error;  // nonempty when the sample failed
};

struct LambdaCurve {
  double alpha = 0.0;
  std::vector<CurveSample> samples;
  bool strictly_increasing = true;
  double max_lipschitz_ratio = 0.0;  // max |dLambda/dA| / (alpha max u^2)
};

/// One optimize per target, each warm-started from the previous optimum.
LambdaCurve sweep(const MaskPtr& mask, double alpha, const std::vector<double>& targets,
                  const InitSpec& init, const OptimizerOptions& options = {});

struct ShapeDerivativeEntry {
  double target = 0.0;
  double slope = 0.0;      // three-point derivative of Lambda(A)
  double predicted = 0.0;  // alpha c^2
  double residual = 0.0;   // |slope - alpha c^2| / (alpha c^2)
  bool skipped = false;
  std::string note;
};

struct ShapeDerivativeReport {
  std::vector<ShapeDerivativeEntry> entries;
  double median = 0.0;
  double max = 0.0;
  int used = 0;
};

/// Compares dLambda/dA with alpha c^2 at every interior sample of the curve.
ShapeDerivativeReport shape_derivative_residual(const LambdaCurve& curve, double alpha);

}  // namespace cmem
