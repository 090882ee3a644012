#include "ocpls/pls.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <string>

namespace ocpls {

namespace {

constexpr double kConvergenceTol = 1e-12;

double llt_log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Vector apply_sigma0(const PriorSpec& prior, const Vector& v) {
  switch (prior.kind) {
    case PriorCov::identity: return v;
    case PriorCov::scaled_identity: return prior.scale * v;
    case PriorCov::dense: return prior.sigma0 * v;
  }
  throw ConfigError("prior: unknown covariance kind");
}

}  // namespace

void PriorSpec::validate(int n) const {
  if (mu0.size() != 0 && mu0.size() != n) {
    throw ConfigError("prior: mu0 dimension mismatch");
  }
  if (kind == PriorCov::scaled_identity && scale <= 0.0) {
    throw ConfigError("prior: scale must be positive");
  }
  if (kind == PriorCov::dense &&
      (sigma0.rows() != n || sigma0.cols() != n)) {
    throw ConfigError("prior: sigma0 dimension mismatch");
  }
}

Vector PlsPosterior::apply_prior_inv(const Vector& v) const {
  switch (prior_.kind) {
    case PriorCov::identity: return v / (1.0 + jitter_);
    case PriorCov::scaled_identity: return v / (prior_.scale + jitter_);
    case PriorCov::dense: return prior_llt_.solve(v);
  }
  throw ConfigError("prior: unknown covariance kind");
}

double PlsPosterior::score(const Vector& x) const {
  if (x.size() != n_) throw ConfigError("score: dimension mismatch");
  const Vector d = x - mu_;
  const Vector v = apply_prior_inv(d);
  double q = d.dot(v);
  if (iterations() > 0) {
    const Vector w = u_.transpose() * v;
    q += w.dot(w_llt_.solve(w));
  }
  return std::exp(-q);
}

double PlsPosterior::log_det_cov() const {
  if (iterations() == 0) return log_det_prior_;
  return log_det_w_ - log_det_gram_ + log_det_prior_;
}

PlsPosterior pls_run(const LinearSystem& sys, int budget, const PriorSpec& prior,
                     double jitter) {
  const int n = sys.dim();
  if (budget < 0 || budget > n) {
    throw ConfigError("pls_run: budget must lie in [0, n], got " +
                      std::to_string(budget));
  }
  if (jitter < 0.0) throw ConfigError("pls_run: jitter must be >= 0");
  prior.validate(n);

  PlsPosterior post;
  post.n_ = n;
  post.jitter_ = jitter;
  post.prior_ = prior;

  const Vector mu0 = prior.mu0.size() ? prior.mu0 : Vector::Zero(n);
  switch (prior.kind) {
    case PriorCov::identity:
      post.log_det_prior_ = n * std::log1p(jitter);
      break;
    case PriorCov::scaled_identity:
      post.log_det_prior_ = n * std::log(prior.scale + jitter);
      break;
    case PriorCov::dense: {
      Matrix d = prior.sigma0 + jitter * Matrix::Identity(n, n);
      post.prior_llt_.compute(d);
      if (post.prior_llt_.info() != Eigen::Success) {
        throw NumericalError("pls_run: prior covariance is not positive definite");
      }
      post.log_det_prior_ = llt_log_det(post.prior_llt_);
      break;
    }
  }

  const Vector r0 = sys.b() - sys.a() * mu0;
  const double b_norm = sys.b().norm();

  Matrix s(n, budget);       // directions
  Matrix u(n, budget);       // Sigma0 A s_i
  Matrix ks(n, budget);      // A Sigma0 A s_i
  Vector kss(budget);        // s_i^T A Sigma0 A s_i

  Vector mu = mu0;
  Vector r = r0;
  int count = 0;
  bool converged = r.norm() <= kConvergenceTol * b_norm;

  for (int i = 0; i < budget && !converged; ++i) {
    Vector dir = r;
    // Full re-orthogonalization in the A Sigma0 A inner product.
    for (int j = 0; j < count; ++j) {
      dir -= (ks.col(j).dot(dir) / kss(j)) * s.col(j);
    }
    const double dir_norm = dir.norm();
    if (dir_norm <= kConvergenceTol * b_norm) {
      converged = true;  // residual is in the explored span
      break;
    }
    dir /= dir_norm;

    const Vector a_dir = sys.a() * dir;
    const Vector sig_a_dir = apply_sigma0(prior, a_dir);
    const Vector k_dir = sys.a() * sig_a_dir;
    const double k_norm = dir.dot(k_dir);
    if (!(k_norm > 0.0)) {
      throw NumericalError("pls_run: numerical breakdown, non-positive direction "
                           "energy at iteration " + std::to_string(i + 1));
    }

    const double step = dir.dot(r) / k_norm;
    mu += step * sig_a_dir;
    r -= step * k_dir;

    s.col(count) = dir;
    u.col(count) = sig_a_dir;
    ks.col(count) = k_dir;
    kss(count) = k_norm;
    ++count;

    if (r.norm() <= kConvergenceTol * b_norm) converged = true;
  }

  post.converged_ = converged;
  post.s_ = s.leftCols(count);
  post.u_ = u.leftCols(count);

  if (count > 0) {
    Matrix gram = post.s_.transpose() * ks.leftCols(count);
    gram = 0.5 * (gram + gram.transpose()).eval();
    post.gram_llt_.compute(gram);
    if (post.gram_llt_.info() != Eigen::Success) {
      throw NumericalError("pls_run: Gram matrix is not positive definite");
    }
    post.log_det_gram_ = llt_log_det(post.gram_llt_);

    Matrix dinv_u(n, count);
    for (int j = 0; j < count; ++j) dinv_u.col(j) = post.apply_prior_inv(post.u_.col(j));
    Matrix w = gram - post.u_.transpose() * dinv_u;
    w = 0.5 * (w + w.transpose()).eval();
    post.w_llt_.compute(w);
    if (post.w_llt_.info() != Eigen::Success) {
      throw NumericalError("pls_run: jittered covariance factorization failed");
    }
    post.log_det_w_ = llt_log_det(post.w_llt_);

    // Posterior mean straight from the closed form, not the CG accumulation.
    const Vector proj = post.s_.transpose() * r0;
    post.mu_ = mu0 + post.u_ * post.gram_llt_.solve(proj);
  } else {
    post.mu_ = mu0;
  }
  return post;
}

UncertaintySet make_uncertainty_set(const PlsPosterior& post, double lambda) {
  return UncertaintySet{&post, lambda, set_log_volume(post, lambda)};
}

double set_log_volume(const PlsPosterior& post, double lambda) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (lambda >= 1.0) return -inf;
  if (lambda <= 0.0) return inf;
  const double n = post.dim();
  return 0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n + 1.0) +
         0.5 * post.log_det_cov() + 0.5 * n * std::log(-std::log(lambda));
}

double pls_baseline_threshold(int n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("pls_baseline_threshold: alpha must lie in (0, 1)");
  }
  if (n < 1) throw ConfigError("pls_baseline_threshold: dimension must be >= 1");
  boost::math::chi_squared chi2(static_cast<double>(n));
  const double q = boost::math::quantile(chi2, 1.0 - alpha);
  return std::exp(-q);
}

}  // namespace ocpls
