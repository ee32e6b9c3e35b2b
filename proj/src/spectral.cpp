#include "cmem/spectral.hpp"

#include <cmath>
#include <string>

#include "cmem/errors.hpp"

namespace cmem {

SchrodingerOperator::SchrodingerOperator(MaskPtr mask, double alpha, std::vector<double> potential)
    : mask_(std::move(mask)), alpha_(alpha), potential_(std::move(potential)) {
  const Grid2D& g = mask_->grid();
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  diag_.assign(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!mask_->inside(k)) continue;
    const auto& t = mask_->theta(k);
    diag_[k] = ihx2 * (1.0 / t[0] + 1.0 / t[1]) + ihy2 * (1.0 / t[2] + 1.0 / t[3]) +
               potential_[k];
  }
}

kernels::StencilView SchrodingerOperator::view() const {
  const Grid2D& g = mask_->grid();
  return {g.nx(), g.ny(), 1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()), diag_,
          mask_->inside_flags()};
}

void SchrodingerOperator::apply(std::span<const double> x, std::span<double> y,
                                kernels::Backend backend) const {
  if (backend == kernels::Backend::serial) {
    kernels::serial::apply(view(), x, y);
  } else {
    kernels::parallel::apply(view(), x, y);
  }
}

SchrodingerOperator assemble(const MaskPtr& mask, const CellSet& region, double alpha) {
  if (!mask) throw InvalidInput("operator needs a mask");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidInput("alpha must be >= 0");
  if (region.fraction.size() != mask->grid().size()) {
    throw InvalidInput("region does not live on the operator grid");
  }
  std::vector<double> potential(mask->grid().size(), 0.0);
  for (std::size_t k = 0; k < potential.size(); ++k) {
    const double f = region.fraction[k];
    if (f > 0.0 && mask->weight(k) <= 0.0) {
      throw InvalidInput("region is not contained in the domain");
    }
    if (mask->inside(k)) potential[k] = alpha * f;
  }
  return SchrodingerOperator(mask, alpha, std::move(potential));
}

namespace {

template <typename K>
int conjugate_gradient(const SchrodingerOperator& op, std::span<const double> b,
                       std::vector<double>& x, double rel_tol, int max_iter) {
  const auto view = op.view();
  const auto diag = op.diagonal();
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), ap(n);
  K::apply(view, x, r);
  K::xpay(b, -1.0, r);  // r = b - A x
  const double bnorm = std::sqrt(K::dot(b, b));
  const double target = rel_tol * (bnorm > 0.0 ? bnorm : 1.0);
  double rnorm = std::sqrt(K::dot(r, r));
  if (rnorm <= target) return 0;
  K::divide(r, diag, z);
  p = z;
  double rz = K::dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    K::apply(view, p, ap);
    const double step = rz / K::dot(p, ap);
    K::axpy(step, p, x);
    K::axpy(-step, ap, r);
    rnorm = std::sqrt(K::dot(r, r));
    if (rnorm <= target) return it;
    K::divide(r, diag, z);
    const double rz_new = K::dot(r, z);
    K::xpay(z, rz_new / rz, p);
    rz = rz_new;
  }
  throw ConvergenceFailure("conjugate gradients did not converge in " +
                               std::to_string(max_iter) + " iterations",
                           rnorm / (bnorm > 0.0 ? bnorm : 1.0));
}

template <typename K>
EigenPair inverse_iteration(const SchrodingerOperator& op, const EigenOptions& opt,
                            const ScalarField* start) {
  const DomainMask& m = op.mask();
  const std::size_t n = m.grid().size();
  const auto weights = m.weights();
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (m.inside(k)) x[k] = start ? (*start)[k] : 1.0;
  }
  double xn = std::sqrt(K::dot(x, x));
  if (!(xn > 0.0)) throw InvalidInput("start vector vanishes on the unknowns");
  for (double& v : x) v /= xn;

  const auto view = op.view();
  std::vector<double> ax(n), y(n), r(n);
  K::apply(view, x, ax);
  double lambda = K::dot(x, ax);
  double residual = 0.0;
  int cg_total = 0;
  int it = 0;
  for (it = 1; it <= opt.max_outer; ++it) {
    for (std::size_t k = 0; k < n; ++k) y[k] = x[k] / lambda;
    cg_total += conjugate_gradient<K>(op, x, y, opt.tol / 10.0, opt.max_cg);
    const double yn = std::sqrt(K::dot(y, y));
    for (std::size_t k = 0; k < n; ++k) x[k] = y[k] / yn;
    K::apply(view, x, ax);
    lambda = K::dot(x, ax);
    r = ax;
    K::axpy(-lambda, x, r);
    residual = std::sqrt(K::weighted_dot(weights, r, r) / K::weighted_dot(weights, x, x));
    if (residual <= opt.tol * std::max(1.0, lambda)) break;
  }
  if (it > opt.max_outer) {
    throw ConvergenceFailure("inverse iteration did not reach the eigen tolerance", residual);
  }

  double sum = 0.0;
  for (double v : x) sum += v;
  const double sign = sum < 0.0 ? -1.0 : 1.0;
  const double wn = std::sqrt(K::weighted_dot(weights, x, x));
  for (double& v : x) v *= sign / wn;

  EigenPair out{lambda, ScalarField(op.mask_ptr(), std::move(x)), residual, it, cg_total};
  return out;
}

}  // namespace

EigenPair ground_state(const SchrodingerOperator& op, const EigenOptions& options,
                       const ScalarField* start) {
  if (!(options.tol > 0.0)) throw InvalidInput("eigen tolerance must be positive");
  if (op.mask().unknowns() == 0) throw InvalidInput("domain has no interior unknowns");
  if (start && start->values().size() != op.mask().grid().size()) {
    throw InvalidInput("start vector lives on another grid");
  }
  if (options.backend == kernels::Backend::serial) {
    return inverse_iteration<kernels::Serial>(op, options, start);
  }
  return inverse_iteration<kernels::Parallel>(op, options, start);
}

double rayleigh(const ScalarField& u, const SchrodingerOperator& op) {
  const DomainMask& m = op.mask();
  if (u.values().size() != m.grid().size()) throw InvalidInput("field lives on another grid");
  std::vector<double> x(u.values().begin(), u.values().end());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!m.inside(k)) x[k] = 0.0;
  }
  const double den = kernels::parallel::dot(x, x);
  if (!(den > 0.0)) throw InvalidInput("Rayleigh quotient of the zero field");
  std::vector<double> ax(x.size());
  op.apply(x, ax);
  return kernels::parallel::dot(x, ax) / den;
}

}  // namespace cmem
