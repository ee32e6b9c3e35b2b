#include "cmem/kernels.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cmem::kernels {

namespace {

inline double stencil_row(const StencilView& op, std::span<const double> x, std::size_t k) {
  const std::size_t nx = static_cast<std::size_t>(op.nx);
  return op.diag[k] * x[k] - op.inv_hx2 * (x[k + 1] + x[k - 1]) -
         op.inv_hy2 * (x[k + nx] + x[k - nx]);
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference

namespace serial {

void apply(const StencilView& op, std::span<const double> x, std::span<double> y) {
  const int nx = op.nx, ny = op.ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      y[k] = op.inside[k] ? stencil_row(op, x, k) : 0.0;
    }
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * x[k] * y[k];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

void xpay(std::span<const double> x, double a, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + a * y[k];
}

void divide(std::span<const double> x, std::span<const double> d, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = d[k] != 0.0 ? x[k] / d[k] : 0.0;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP

namespace parallel {

void apply(const StencilView& op, std::span<const double> x, std::span<double> y) {
  const int nx = op.nx, ny = op.ny;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      y[k] = op.inside[k] ? stencil_row(op, x, k) : 0.0;
    }
  }
}

namespace {

template <typename Body>
double blocked_sum(std::size_t n, Body body) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = lo + kReductionBlock < n ? lo + kReductionBlock : n;
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += body(k);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
  return blocked_sum(x.size(), [&](std::size_t k) { return x[k] * y[k]; });
}

double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) {
  return blocked_sum(x.size(), [&](std::size_t k) { return w[k] * x[k] * y[k]; });
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < n; ++k) y[k] += a * x[k];
}

void xpay(std::span<const double> x, double a, std::span<double> y) {
  const auto n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < n; ++k) y[k] = x[k] + a * y[k];
}

void divide(std::span<const double> x, std::span<const double> d, std::span<double> y) {
  const auto n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < n; ++k) y[k] = d[k] != 0.0 ? x[k] / d[k] : 0.0;
}

}  // namespace parallel

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace cmem::kernels
