#pragma once

#include "ocpls/common.hpp"
#include "ocpls/problems.hpp"

namespace ocpls {

enum class PriorCov { identity, scaled_identity, dense };

/// Gaussian prior on the solution. An empty mu0 means the zero vector.
struct PriorSpec {
  Vector mu0;
  PriorCov kind = PriorCov::identity;
  double scale = 1.0;   // scaled_identity only
  Matrix sigma0;        // dense only, must be SPD

  void validate(int n) const;
};

/// Posterior after a budgeted run of the probabilistic linear solver.
///
/// The covariance is kept in low-rank form: Sigma = Sigma0 - U M^-1 U^T with
/// U = Sigma0 A S and M = S^T A Sigma0 A S. Score and log-volume queries use
/// the Woodbury identity and the matrix determinant lemma on the jittered
/// covariance Sigma + eps I, so no dense n x n inverse is ever formed.
class PlsPosterior {
 public:
  int dim() const { return n_; }
  int iterations() const { return static_cast<int>(s_.cols()); }
  bool converged() const { return converged_; }
  double jitter() const { return jitter_; }
  const Vector& mean() const { return mu_; }
  const Matrix& directions() const { return s_; }
  const PriorSpec& prior() const { return prior_; }

  /// exp(-(x-mu)^T (Sigma + eps I)^-1 (x-mu)), in [0, 1]. O(I n) per call.
  double score(const Vector& x) const;

  /// log det(Sigma + eps I), from the determinant lemma.
  double log_det_cov() const;

 private:
  friend PlsPosterior pls_run(const LinearSystem&, int, const PriorSpec&, double);

  Vector apply_prior_inv(const Vector& v) const;  // (Sigma0 + eps I)^-1 v

  int n_ = 0;
  double jitter_ = 0.0;
  bool converged_ = false;
  PriorSpec prior_;
  Vector mu_;
  Matrix s_;  // search directions, unit columns (n x I)
  Matrix u_;  // Sigma0 A S (n x I)
  Eigen::LLT<Matrix> gram_llt_;   // M
  Eigen::LLT<Matrix> w_llt_;      // M - U^T (Sigma0 + eps I)^-1 U
  double log_det_gram_ = 0.0;
  double log_det_w_ = 0.0;
  double log_det_prior_ = 0.0;    // log det(Sigma0 + eps I)
  Eigen::LLT<Matrix> prior_llt_;  // dense prior only
};

/// Runs the solver for up to `budget` conjugate-gradient search directions,
/// re-orthogonalizing each direction against all previous ones. Stops early
/// (flagging converged) once the residual falls below 1e-12 * ||b||.
PlsPosterior pls_run(const LinearSystem& sys, int budget, const PriorSpec& prior,
                     double jitter = 1e-6);

/// Super-level set {x : score(x) >= lambda} of the posterior score.
struct UncertaintySet {
  const PlsPosterior* posterior;
  double lambda;
  double log_volume;

  bool contains(const Vector& x) const { return posterior->score(x) >= lambda; }
};

UncertaintySet make_uncertainty_set(const PlsPosterior& post, double lambda);

/// Log-volume of the super-level set at threshold lambda: the ellipsoid
/// pi^(n/2)/Gamma(n/2+1) * det(Sigma + eps I)^(1/2) * (-log lambda)^(n/2).
/// Returns -inf for lambda >= 1 (empty set) and +inf for lambda <= 0.
double set_log_volume(const PlsPosterior& post, double lambda);

/// Threshold of the (1-alpha) highest-density credible ellipsoid:
/// exp(-q) with q the (1-alpha) quantile of chi-square with n dof.
double pls_baseline_threshold(int n, double alpha);

}  // namespace ocpls
