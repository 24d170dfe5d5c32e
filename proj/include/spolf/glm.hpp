#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "spolf/link.hpp"

namespace spolf {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool empty() const { return lo > hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval intersect(const Interval& a, const Interval& b) {
  return {a.lo > b.lo ? a.lo : b.lo, a.hi < b.hi ? a.hi : b.hi};
}

/// beta = (3 L sigma / xi) * sqrt(log(3 / delta)).
double confidence_radius(double lipschitz, double sigma, double xi, double delta);

/// Minimum design eigenvalue under which the GLM confidence bound is valid:
/// 512 sigma^2 M^2 xi^-4 (d^2 + log(1/delta)).
double eigen_threshold(double sigma, double curvature, double xi, int dim, double delta);

/// sqrt(2 H d log((t + H) / d)), clamped to 0 when the log is negative.
double sum_norm_bound(long long t, long long horizon, int dim);

struct GlmOptions {
  /// Every inversion uses W + ridge * I.
  double ridge = 1e-6;
  double score_tol = 1e-8;
  int max_iterations = 100;
  int max_halvings = 30;
};

/// Maximum-likelihood GLM with the design-matrix bookkeeping behind the
/// confidence intervals. Observations are append-only; fit() is explicit.
///
/// Spectral quantities of W (inverse, eigenvalues) are refreshed eagerly on
/// every update, so all const accessors are safe to call concurrently.
class GlmEstimator {
 public:
  GlmEstimator() = default;
  GlmEstimator(LinkKind link, int dim, double sigma, double delta, GlmOptions options = {});

  /// Appends (feature, y) and adds feature feature^T to W. Does not refit.
  void update(const Eigen::Ref<const Eigen::VectorXd>& feature, double y);

  /// Damped Newton on the score, warm-started from the current estimate.
  /// Returns the number of Newton iterations. On failure the previous
  /// estimate is kept.
  int fit();

  bool fitted() const { return fitted_; }
  int dim() const { return dim_; }
  std::size_t num_observations() const { return ys_.size(); }
  const LinkFunction& link() const { return link_; }
  double sigma() const { return sigma_; }
  double delta() const { return delta_; }
  const GlmOptions& options() const { return options_; }

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::MatrixXd& design() const { return design_; }
  /// (W + ridge I)^-1.
  const Eigen::MatrixXd& design_inverse() const { return design_inverse_; }
  Eigen::Map<const Eigen::MatrixXd> observed_features() const;
  const std::vector<double>& observed_values() const { return ys_; }

  double xi() const { return xi_; }
  double beta() const { return beta_; }

  double predict(const Eigen::Ref<const Eigen::VectorXd>& feature) const;
  /// Norm of sum_tau (y_tau - mu(phi_tau' theta)) phi_tau at `theta`.
  double score_norm(const Eigen::VectorXd& theta) const;
  double score_norm() const { return score_norm(theta_); }

  double weighted_norm(const Eigen::Ref<const Eigen::VectorXd>& feature) const;
  /// Weighted norms of every column of a d x n feature matrix.
  Eigen::VectorXd weighted_norms(const Eigen::Ref<const Eigen::MatrixXd>& features) const;

  double lambda_min() const { return lambda_min_; }
  /// 1 / lambda_min(W + ridge I). SingularDesign if W is not PSD.
  double lambda_max_inv() const;
  double eig_threshold() const;
  bool eig_condition_met() const { return lambda_min_ >= eig_threshold(); }

  /// mu(phi' theta) +/- beta ||phi||_{W^-1}. NotFitted before the first fit.
  Interval interval_inside(const Eigen::Ref<const Eigen::VectorXd>& feature) const;
  /// [0, mu(||theta||) + beta lambda_max(W^-1)]. NotFitted before the first fit.
  Interval interval_outside() const;

  /// Sets the estimate directly (tests and checkpoint restore).
  void set_theta(const Eigen::VectorXd& theta);

  std::string to_json() const;
  static GlmEstimator from_json(const std::string& text);

 private:
  void refresh_spectrum();
  void refresh_radius();

  LinkFunction link_;
  int dim_ = 0;
  double sigma_ = 0.0;
  double delta_ = 0.05;
  GlmOptions options_;

  std::vector<double> features_;  // column-major d x n
  std::vector<double> ys_;
  Eigen::MatrixXd design_;
  Eigen::MatrixXd design_inverse_;
  double lambda_min_ = 0.0;
  Eigen::VectorXd theta_;
  double xi_ = 1.0;
  double beta_ = 0.0;
  bool fitted_ = false;
};

}  // namespace spolf
