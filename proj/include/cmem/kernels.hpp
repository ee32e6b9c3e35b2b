#pragma once

// Data-parallel inner loops of the eigensolver: the matrix-free 5-point
// stencil and the BLAS-1 reductions of conjugate gradients.
//
// Two implementations share one interface. `serial` is the plain reference
// kept for testing and benchmarking; `parallel` uses OpenMP. Parallel
// reductions sum fixed-size blocks and then combine the block sums in order,
// so results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>

namespace cmem::kernels {

enum class Backend { serial, parallel };

/// Matrix-free view of -Laplacian + diagonal on the full node array. Nodes
/// with inside == 0 are Dirichlet nodes: their output is 0 and their input is
/// assumed to be 0.
struct StencilView {
  int nx = 0;
  int ny = 0;
  double inv_hx2 = 0.0;
  double inv_hy2 = 0.0;
  std::span<const double> diag;
  std::span<const std::uint8_t> inside;
};

inline constexpr std::size_t kReductionBlock = 4096;

namespace serial {
void apply(const StencilView& op, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);   // y += a x
void xpay(std::span<const double> x, double a, std::span<double> y);   // y = x + a y
void divide(std::span<const double> x, std::span<const double> d, std::span<double> y);
}  // namespace serial

namespace parallel {
void apply(const StencilView& op, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double a, std::span<double> y);
void divide(std::span<const double> x, std::span<const double> d, std::span<double> y);
}  // namespace parallel

/// Static dispatch helpers so solvers can be written once per backend.
struct Serial {
  static void apply(const StencilView& op, std::span<const double> x, std::span<double> y) {
    serial::apply(op, x, y);
  }
  static double dot(std::span<const double> x, std::span<const double> y) {
    return serial::dot(x, y);
  }
  static double weighted_dot(std::span<const double> w, std::span<const double> x,
                             std::span<const double> y) {
    return serial::weighted_dot(w, x, y);
  }
  static void axpy(double a, std::span<const double> x, std::span<double> y) {
    serial::axpy(a, x, y);
  }
  static void xpay(std::span<const double> x, double a, std::span<double> y) {
    serial::xpay(x, a, y);
  }
  static void divide(std::span<const double> x, std::span<const double> d, std::span<double> y) {
    serial::divide(x, d, y);
  }
};

struct Parallel {
  static void apply(const StencilView& op, std::span<const double> x, std::span<double> y) {
    parallel::apply(op, x, y);
  }
  static double dot(std::span<const double> x, std::span<const double> y) {
    return parallel::dot(x, y);
  }
  static double weighted_dot(std::span<const double> w, std::span<const double> x,
                             std::span<const double> y) {
    return parallel::weighted_dot(w, x, y);
  }
  static void axpy(double a, std::span<const double> x, std::span<double> y) {
    parallel::axpy(a, x, y);
  }
  static void xpay(std::span<const double> x, double a, std::span<double> y) {
    parallel::xpay(x, a, y);
  }
  static void divide(std::span<const double> x, std::span<const double> d, std::span<double> y) {
    parallel::divide(x, d, y);
  }
};

/// Sets the OpenMP thread count (no-op without OpenMP); 0 keeps the default.
void set_threads(int threads);
int max_threads();

}  // namespace cmem::kernels
