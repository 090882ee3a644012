#pragma once

#include <cstdint>
#include <optional>

#include "ocpls/common.hpp"

namespace ocpls {

/// Random SPD test-problem generator settings. Dimensions are drawn uniformly
/// from {n_min, ..., n_max}; eigenvalues i.i.d. Gamma(shape, scale).
struct GeneratorConfig {
  int n_min = 50;
  int n_max = 100;
  double gamma_shape = 10.0;
  double gamma_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One round's symmetric positive-definite system A x = b. The matrix is
/// symmetrized at construction; the exact solution is computed lazily by a
/// dense Cholesky solve and cached.
class LinearSystem {
 public:
  LinearSystem(Matrix a, Vector b);

  int dim() const { return static_cast<int>(b_.size()); }
  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

  /// Cloud oracle: x* = A^-1 b via Cholesky, cached after the first call.
  /// Throws NumericalError (with the failing pivot index) if A is not
  /// numerically positive definite.
  const Vector& exact_solution() const;

 private:
  Matrix a_;
  Vector b_;
  mutable std::optional<Vector> x_star_;
};

/// Fills a rows x cols matrix with i.i.d. standard normal draws in
/// column-major order. Exposed so tests can replay the exact draws.
Matrix gaussian_matrix(int rows, int cols, Rng& rng);

/// Haar-distributed orthogonal matrix: QR of an i.i.d. Gaussian matrix with
/// the R-diagonal sign correction. Throws ConfigError for n < 1.
Matrix haar_orthogonal(int n, Rng& rng);

/// Draws the round-t system: n ~ U{n_min..n_max}, A = Q diag(Gamma) Q^T
/// (symmetrized), b ~ N(0, I). Deterministic in (cfg.seed, t).
LinearSystem generate_system(const GeneratorConfig& cfg, std::uint64_t t);

}  // namespace ocpls
