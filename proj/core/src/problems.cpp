#include "ocpls/problems.hpp"

#include <cmath>
#include <string>

namespace ocpls {

void GeneratorConfig::validate() const {
  if (n_min < 1 || n_min > n_max) {
    throw ConfigError("generator: require 1 <= n_min <= n_max, got [" +
                      std::to_string(n_min) + ", " + std::to_string(n_max) + "]");
  }
  if (gamma_shape <= 0.0 || gamma_scale <= 0.0) {
    throw ConfigError("generator: gamma shape and scale must be positive");
  }
}

LinearSystem::LinearSystem(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size()) {
    throw ConfigError("linear system: A must be n x n matching b");
  }
  a_ = 0.5 * (a_ + a_.transpose()).eval();
}

const Vector& LinearSystem::exact_solution() const {
  if (!x_star_) {
    Eigen::LLT<Matrix> llt(a_);
    if (llt.info() != Eigen::Success) {
      // Locate the offending pivot with a plain Cholesky scan.
      Matrix l = a_;
      const int n = dim();
      for (int j = 0; j < n; ++j) {
        double d = l(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0) {
          throw NumericalError("exact_solve: non-positive pivot at index " +
                               std::to_string(j));
        }
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
          double s = l(i, j);
          for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
          l(i, j) = s / l(j, j);
        }
      }
      throw NumericalError("exact_solve: Cholesky factorization failed");
    }
    x_star_ = llt.solve(b_);
  }
  return *x_star_;
}

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  }
  return m;
}

Matrix haar_orthogonal(int n, Rng& rng) {
  if (n < 1) throw ConfigError("haar_orthogonal: dimension must be >= 1");
  Matrix g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the gauge: make the factorization match R with positive diagonal.
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

LinearSystem generate_system(const GeneratorConfig& cfg, std::uint64_t t) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, t, 0x67656e));
  std::uniform_int_distribution<int> dim_draw(cfg.n_min, cfg.n_max);
  const int n = dim_draw(rng);

  Matrix q = haar_orthogonal(n, rng);
  std::gamma_distribution<double> eig_draw(cfg.gamma_shape, cfg.gamma_scale);
  Vector lam(n);
  for (int i = 0; i < n; ++i) lam(i) = eig_draw(rng);

  Matrix a = (q.array().rowwise() * lam.transpose().array()).matrix() * q.transpose();

  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector b(n);
  for (int i = 0; i < n; ++i) b(i) = gauss(rng);

  return LinearSystem(std::move(a), std::move(b));
}

}  // namespace ocpls
