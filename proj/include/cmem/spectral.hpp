#pragma once

#include <optional>
#include <vector>

#include "cmem/geometry.hpp"
#include "cmem/kernels.hpp"

namespace cmem {

/// Discrete -Laplacian + alpha * chi_D with homogeneous Dirichlet data.
///
/// Interior rows are the 5-point stencil. A row whose neighbour lies outside
/// the domain uses the linear ghost value u_ghost = u_P (theta - 1) / theta,
/// with theta the fraction of the spacing to the boundary crossing; this only
/// changes the diagonal, so the matrix stays symmetric. The potential at a node
/// is alpha times the share of the node's cell that lies in D.
class SchrodingerOperator {
 public:
  SchrodingerOperator(MaskPtr mask, double alpha, std::vector<double> potential);

  const DomainMask& mask() const { return *mask_; }
  const MaskPtr& mask_ptr() const { return mask_; }
  double alpha() const { return alpha_; }
  std::span<const double> potential() const { return potential_; }
  std::span<const double> diagonal() const { return diag_; }
  kernels::StencilView view() const;

  void apply(std::span<const double> x, std::span<double> y,
             kernels::Backend backend = kernels::Backend::parallel) const;

 private:
  MaskPtr mask_;
  double alpha_;
  std::vector<double> potential_;
  std::vector<double> diag_;
};

SchrodingerOperator assemble(const MaskPtr& mask, const CellSet& region, double alpha);

struct EigenOptions {
  double tol = 1e-9;
  int max_outer = 2000;
  int max_cg = 100000;
  kernels::Backend backend = kernels::Backend::parallel;
};

struct EigenPair {
  double lambda = 0.0;
  ScalarField u;      // nonnegative, cell-weighted L2 norm 1
  double residual = 0.0;  // ||L u - lambda u|| / ||u|| in the cell-weighted norm
  int iterations = 0;     // inverse-iteration steps
  int cg_iterations = 0;  // total inner CG steps
};

/// Lowest eigenpair by inverse power iteration (shift 0) with Jacobi-PCG inner
/// solves at tolerance tol/10. Starts from all ones on the unknowns unless a
/// start vector is given.
EigenPair ground_state(const SchrodingerOperator& op, const EigenOptions& options = {},
                       const ScalarField* start = nullptr);

/// u^T L u / u^T u over the unknowns, the discrete Rayleigh quotient.
double rayleigh(const ScalarField& u, const SchrodingerOperator& op);

}  // namespace cmem
