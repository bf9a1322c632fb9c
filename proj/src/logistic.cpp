#include <Eigen/Dense>

#include "finshap/models.hpp"
#include "model_common.hpp"

namespace finshap {

using detail::sigmoid;
using detail::softplus;

Standardizer Standardizer::fit(const Matrix& X) {
  Standardizer s;
  s.mean = X.colwise().mean();
  Vector var = (X.rowwise() - s.mean.transpose()).array().square().colwise().mean();
  s.sigma = var.array().sqrt().max(1e-9);
  return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
  return (X.rowwise() - mean.transpose()).array().rowwise() / sigma.transpose().array();
}

double logistic_objective(const Matrix& Z, const std::vector<int>& y, const Vector& w, double b,
                          double l2, Vector* grad_w, double* grad_b) {
  const auto n = Z.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  Vector margins = Z * w;
  margins.array() += b;

  double loss = 0.0;
  Vector residual(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sign = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    loss += softplus(-sign * margins[i]);
    residual[i] = sigmoid(margins[i]) - static_cast<double>(y[static_cast<std::size_t>(i)]);
  }
  loss = loss * inv_n + 0.5 * l2 * w.squaredNorm();

  if (grad_w) *grad_w = Z.transpose() * residual * inv_n + l2 * w;
  if (grad_b) *grad_b = residual.mean();
  return loss;
}

std::unique_ptr<LogisticModel> train_logistic(const Matrix& X, const std::vector<int>& y,
                                              const LogisticConfig& config) {
  detail::validate_training_inputs(X, y);
  if (config.l2 < 0.0) throw ConfigError("train_logistic: l2 must be >= 0");

  const Standardizer scaler = Standardizer::fit(X);
  const Matrix Z = scaler.apply(X);
  const auto n = Z.rows();
  const auto F = Z.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  Vector w = Vector::Zero(F);
  double b = 0.0;
  std::vector<double> trace;
  Vector grad_w(F);
  double grad_b = 0.0;
  double loss = logistic_objective(Z, y, w, b, config.l2, &grad_w, &grad_b);
  trace.push_back(loss);

  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    const double grad_norm = std::max(grad_w.lpNorm<Eigen::Infinity>(), std::abs(grad_b));
    if (grad_norm < config.tol) break;

    // Damped Newton step on the (w, b) block system.
    Vector margins = Z * w;
    margins.array() += b;
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = sigmoid(margins[i]);
      d[i] = pi * (1.0 - pi);
    }
    Eigen::MatrixXd hessian(F + 1, F + 1);
    hessian.topLeftCorner(F, F) = Z.transpose() * d.asDiagonal() * Z * inv_n;
    hessian.topLeftCorner(F, F).diagonal().array() += config.l2;
    Vector zd = Z.transpose() * d * inv_n;
    hessian.topRightCorner(F, 1) = zd;
    hessian.bottomLeftCorner(1, F) = zd.transpose();
    hessian(F, F) = d.mean() + 1e-12;

    Vector grad_full(F + 1);
    grad_full.head(F) = grad_w;
    grad_full[F] = grad_b;
    Vector step = hessian.ldlt().solve(grad_full);
    if (!step.allFinite()) throw NumericalError("train_logistic: singular Hessian");

    // Backtracking line search; only accepted steps enter the trace.
    double t = 1.0;
    const double slope = grad_full.dot(step);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector w_try = w - t * step.head(F);
      const double b_try = b - t * step[F];
      const double loss_try = logistic_objective(Z, y, w_try, b_try, config.l2, nullptr, nullptr);
      if (loss_try <= loss - 1e-4 * t * slope) {
        w = w_try;
        b = b_try;
        loss = loss_try;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    trace.push_back(loss);
    logistic_objective(Z, y, w, b, config.l2, &grad_w, &grad_b);
  }

  return std::make_unique<LogisticModel>(std::move(w), b, scaler, config, std::move(trace));
}

LogisticModel::LogisticModel(Vector weights, double bias, Standardizer scaler,
                             LogisticConfig config, std::vector<double> loss_trace)
    : weights_(std::move(weights)),
      bias_(bias),
      scaler_(std::move(scaler)),
      config_(config),
      loss_trace_(std::move(loss_trace)) {}

Vector LogisticModel::predict_proba_impl(const Matrix& X) const {
  Vector margins = scaler_.apply(X) * weights_;
  margins.array() += bias_;
  return margins.unaryExpr([](double z) { return sigmoid(z); });
}

nlohmann::json LogisticModel::to_json() const {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = to_string(ModelKind::Logistic);
  doc["weights"] = detail::vector_to_json(weights_);
  doc["bias"] = bias_;
  doc["mean"] = detail::vector_to_json(scaler_.mean);
  doc["sigma"] = detail::vector_to_json(scaler_.sigma);
  doc["config"] = {{"l2", config_.l2}, {"max_iters", config_.max_iters}, {"tol", config_.tol}};
  doc["loss_trace"] = loss_trace_;
  return doc;
}

std::unique_ptr<LogisticModel> LogisticModel::from_json(const nlohmann::json& doc) {
  Standardizer scaler;
  scaler.mean = detail::vector_from_json(doc.at("mean"));
  scaler.sigma = detail::vector_from_json(doc.at("sigma"));
  LogisticConfig config;
  config.l2 = doc.at("config").at("l2").get<double>();
  config.max_iters = doc.at("config").at("max_iters").get<std::size_t>();
  config.tol = doc.at("config").at("tol").get<double>();
  return std::make_unique<LogisticModel>(detail::vector_from_json(doc.at("weights")),
                                         doc.at("bias").get<double>(), std::move(scaler), config,
                                         doc.at("loss_trace").get<std::vector<double>>());
}

}  // namespace finshap
