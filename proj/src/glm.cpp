#include "spolf/glm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "spolf/errors.hpp"
#include "spolf/linalg.hpp"

namespace spolf {

namespace {

constexpr double kFeatureNormSlack = 1e-9;

}  // namespace

double confidence_radius(double lipschitz, double sigma, double xi, double delta) {
  return 3.0 * lipschitz * sigma / xi * std::sqrt(std::log(3.0 / delta));
}

double eigen_threshold(double sigma, double curvature, double xi, int dim, double delta) {
  const double d = dim;
  return 512.0 * sigma * sigma * curvature * curvature / std::pow(xi, 4) *
         (d * d + std::log(1.0 / delta));
}

double sum_norm_bound(long long t, long long horizon, int dim) {
  const double h = static_cast<double>(horizon);
  const double d = dim;
  const double log_term = std::log((static_cast<double>(t) + h) / d);
  if (!(log_term > 0.0)) return 0.0;
  return std::sqrt(2.0 * h * d * log_term);
}

GlmEstimator::GlmEstimator(LinkKind link, int dim, double sigma, double delta,
                           GlmOptions options)
    : link_(LinkFunction::of(link)),
      dim_(dim),
      sigma_(sigma),
      delta_(delta),
      options_(options),
      design_(Eigen::MatrixXd::Zero(dim, dim)),
      theta_(Eigen::VectorXd::Zero(dim)) {
  if (dim < 1) throw InvalidSpec("GLM dimension must be >= 1");
  if (!(sigma >= 0.0)) throw InvalidSpec("GLM sigma must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidSpec("GLM delta must lie in (0, 1)");
  refresh_spectrum();
  refresh_radius();
}

void GlmEstimator::update(const Eigen::Ref<const Eigen::VectorXd>& feature, double y) {
  if (feature.size() != dim_) throw InvalidSpec("feature dimension mismatch");
  const double norm = feature.norm();
  if (!(norm <= 1.0 + kFeatureNormSlack)) {
    throw FeatureNormExceeded("feature norm " + std::to_string(norm) + " exceeds 1");
  }
  features_.insert(features_.end(), feature.data(), feature.data() + dim_);
  ys_.push_back(y);
  design_.noalias() += feature * feature.transpose();
  refresh_spectrum();
}

Eigen::Map<const Eigen::MatrixXd> GlmEstimator::observed_features() const {
  return {features_.data(), dim_, static_cast<Eigen::Index>(ys_.size())};
}

double GlmEstimator::score_norm(const Eigen::VectorXd& theta) const {
  const auto phi = observed_features();
  const Eigen::VectorXd eta = phi.transpose() * theta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    resid(i) = ys_[static_cast<std::size_t>(i)] - link_.mean(eta(i));
  }
  return (phi * resid).norm();
}

int GlmEstimator::fit() {
  if (static_cast<int>(ys_.size()) < dim_) {
    throw InsufficientData("fit needs at least " + std::to_string(dim_) + " observations, have " +
                           std::to_string(ys_.size()));
  }
  const auto phi = observed_features();
  const auto n = static_cast<Eigen::Index>(ys_.size());
  const Eigen::Map<const Eigen::VectorXd> y(ys_.data(), n);

  Eigen::VectorXd theta = theta_;
  Eigen::VectorXd eta(n), resid(n), weight(n);
  auto evaluate = [&](const Eigen::VectorXd& th, bool with_weights) {
    eta.noalias() = phi.transpose() * th;
    for (Eigen::Index i = 0; i < n; ++i) {
      resid(i) = y(i) - link_.mean(eta(i));
      if (with_weights) weight(i) = link_.derivative(eta(i));
    }
    return Eigen::VectorXd(phi * resid);
  };

  // Canonical-link log-likelihood, up to terms free of theta. Concave, with
  // the score as its gradient, so it serves as the line-search merit.
  auto loglik = [&](const Eigen::VectorXd& th) {
    const Eigen::VectorXd e = phi.transpose() * th;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = e(i);
      const double cumulant = link_.kind == LinkKind::kIdentity
                                  ? 0.5 * x * x
                                  : std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
      total += y(i) * x - cumulant;
    }
    return total;
  };

  Eigen::VectorXd score = evaluate(theta, true);
  double score_norm = score.norm();
  double objective = loglik(theta);
  const Eigen::MatrixXd ridge = options_.ridge * Eigen::MatrixXd::Identity(dim_, dim_);
  for (int iter = 0; iter <= options_.max_iterations; ++iter) {
    if (score_norm <= options_.score_tol) {
      theta_ = theta;
      fitted_ = true;
      refresh_radius();
      return iter;
    }
    if (iter == options_.max_iterations) break;
    Eigen::MatrixXd hessian = phi * weight.asDiagonal() * phi.transpose() + ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    if (llt.info() != Eigen::Success) throw SingularDesign("GLM Hessian is not positive definite");
    const Eigen::VectorXd direction = llt.solve(score);

    // Step halving until the likelihood rises (or, once it is flat to
    // rounding, the score norm falls).
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options_.max_halvings; ++k, step *= 0.5) {
      const Eigen::VectorXd candidate = theta + step * direction;
      const double cand_objective = loglik(candidate);
      if (!std::isfinite(cand_objective)) continue;
      const double cand_norm = evaluate(candidate, false).norm();
      if (cand_objective > objective || cand_norm < score_norm) {
        theta = candidate;
        objective = cand_objective;
        score = evaluate(theta, true);
        score_norm = score.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  throw NewtonDivergence("Newton iterations stalled at score norm " + std::to_string(score_norm));
}

void GlmEstimator::set_theta(const Eigen::VectorXd& theta) {
  if (theta.size() != dim_) throw InvalidSpec("theta dimension mismatch");
  theta_ = theta;
  fitted_ = true;
  refresh_radius();
}

void GlmEstimator::refresh_spectrum() {
  const Eigen::MatrixXd regularized =
      design_ + options_.ridge * Eigen::MatrixXd::Identity(dim_, dim_);
  Eigen::LLT<Eigen::MatrixXd> llt(regularized);
  if (llt.info() != Eigen::Success) throw SingularDesign("regularized design is not invertible");
  design_inverse_ = llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));
  lambda_min_ = jacobi_eigen(design_).values(0);
}

void GlmEstimator::refresh_radius() {
  // The infimum of mu' runs over |phi' theta| <= ||theta|| + 1.
  xi_ = link_.xi(theta_.norm() + 1.0);
  beta_ = confidence_radius(link_.lipschitz(), sigma_, xi_, delta_);
}

double GlmEstimator::predict(const Eigen::Ref<const Eigen::VectorXd>& feature) const {
  return link_.mean(feature.dot(theta_));
}

double GlmEstimator::weighted_norm(const Eigen::Ref<const Eigen::VectorXd>& feature) const {
  return std::sqrt(std::max(0.0, feature.dot(design_inverse_ * feature)));
}

Eigen::VectorXd GlmEstimator::weighted_norms(
    const Eigen::Ref<const Eigen::MatrixXd>& features) const {
  const Eigen::MatrixXd weighted = design_inverse_ * features;
  Eigen::VectorXd out = features.cwiseProduct(weighted).colwise().sum().transpose();
  return out.cwiseMax(0.0).cwiseSqrt();
}

double GlmEstimator::lambda_max_inv() const {
  const double scale = std::max(1.0, design_.cwiseAbs().maxCoeff());
  if (lambda_min_ < -1e-9 * scale) {
    throw SingularDesign("design matrix is not positive semidefinite");
  }
  return 1.0 / (std::max(lambda_min_, 0.0) + options_.ridge);
}

double GlmEstimator::eig_threshold() const {
  return eigen_threshold(sigma_, link_.curvature(), xi_, dim_, delta_);
}

Interval GlmEstimator::interval_inside(const Eigen::Ref<const Eigen::VectorXd>& feature) const {
  if (!fitted_) throw NotFitted("interval_inside on an unfitted estimator");
  const double centre = predict(feature);
  const double half = beta_ * weighted_norm(feature);
  return {centre - half, centre + half};
}

Interval GlmEstimator::interval_outside() const {
  if (!fitted_) throw NotFitted("interval_outside on an unfitted estimator");
  return {0.0, link_.mean(theta_.norm()) + beta_ * lambda_max_inv()};
}

std::string GlmEstimator::to_json() const {
  nlohmann::json j;
  j["link"] = std::string(to_string(link_.kind));
  j["dim"] = dim_;
  j["sigma"] = sigma_;
  j["delta"] = delta_;
  j["ridge"] = options_.ridge;
  j["fitted"] = fitted_;
  j["theta"] = std::vector<double>(theta_.data(), theta_.data() + theta_.size());
  j["features"] = features_;
  j["y"] = ys_;
  return j.dump();
}

GlmEstimator GlmEstimator::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    auto kind = parse_link(j.at("link").get<std::string>());
    if (!kind) throw ParseError("unknown link");
    GlmOptions opts;
    opts.ridge = j.at("ridge").get<double>();
    GlmEstimator est(*kind, j.at("dim").get<int>(), j.at("sigma").get<double>(),
                     j.at("delta").get<double>(), opts);
    const auto feats = j.at("features").get<std::vector<double>>();
    const auto ys = j.at("y").get<std::vector<double>>();
    if (feats.size() != ys.size() * static_cast<std::size_t>(est.dim_)) {
      throw ParseError("feature/observation count mismatch");
    }
    for (std::size_t i = 0; i < ys.size(); ++i) {
      est.update(Eigen::Map<const Eigen::VectorXd>(feats.data() + i * est.dim_, est.dim_), ys[i]);
    }
    const auto theta = j.at("theta").get<std::vector<double>>();
    Eigen::VectorXd th = Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                           static_cast<Eigen::Index>(theta.size()));
    if (j.at("fitted").get<bool>()) {
      est.set_theta(th);
    } else {
      est.theta_ = th;
      est.refresh_radius();
    }
    return est;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed estimator JSON: ") + e.what());
  }
}

}  // namespace spolf
