#include <algorithm>
#include <cmath>

#include "finshap/models.hpp"
#include "model_common.hpp"

namespace finshap {

using detail::sigmoid;

namespace {

constexpr double kAlphaEps = 1e-12;

// Gram rows for the standardized training set; materialized when it fits.
class KernelProvider {
 public:
  KernelProvider(const Matrix& Z, double gamma) : Z_(Z), gamma_(gamma) {
    sq_norms_ = Z.rowwise().squaredNorm();
    if (Z.rows() <= 2600) {
      gram_ = (-gamma_ *
               (sq_norms_.replicate(1, Z.rows()) + sq_norms_.transpose().replicate(Z.rows(), 1) -
                2.0 * (Z * Z.transpose()))
                   .array())
                  .exp();
    }
  }

  double at(Eigen::Index i, Eigen::Index j) const {
    if (gram_.size() > 0) return gram_(i, j);
    const double d2 = sq_norms_[i] + sq_norms_[j] - 2.0 * Z_.row(i).dot(Z_.row(j));
    return std::exp(-gamma_ * d2);
  }

  Vector column(Eigen::Index j) const {
    if (gram_.size() > 0) return gram_.col(j);
    Vector d2 = sq_norms_.array() + sq_norms_[j] - 2.0 * (Z_ * Z_.row(j).transpose()).array();
    return (-gamma_ * d2.array()).exp();
  }

 private:
  const Matrix& Z_;
  double gamma_;
  Vector sq_norms_;
  Matrix gram_;
};

struct SmoState {
  const KernelProvider& kernel;
  const std::vector<double>& y;  // -1/+1
  double C;
  double tol;
  std::vector<double> alpha;
  Vector errors;  // f(x_i) - y_i
  double b = 0.0;

  bool take_step(Eigen::Index i1, Eigen::Index i2) {
    if (i1 == i2) return false;
    const double a1_old = alpha[static_cast<std::size_t>(i1)];
    const double a2_old = alpha[static_cast<std::size_t>(i2)];
    const double y1 = y[static_cast<std::size_t>(i1)];
    const double y2 = y[static_cast<std::size_t>(i2)];
    const double e1 = errors[i1];
    const double e2 = errors[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(C, C + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - C);
      hi = std::min(C, a1_old + a2_old);
    }
    if (lo >= hi) return false;

    const double k11 = kernel.at(i1, i1);
    const double k12 = kernel.at(i1, i2);
    const double k22 = kernel.at(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2;
    if (eta > 0.0) {
      a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Degenerate curvature: pick the better endpoint of the dual objective.
      const double f1 = y1 * (e1 + b) - a1_old * k11 - s * a2_old * k12;
      const double f2 = y2 * (e2 + b) - s * a1_old * k12 - a2_old * k22;
      const double l1 = a1_old + s * (a2_old - lo);
      const double h1 = a1_old + s * (a2_old - hi);
      const double obj_lo =
          l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double obj_hi =
          h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (obj_lo < obj_hi - kAlphaEps) {
        a2 = lo;
      } else if (obj_lo > obj_hi + kAlphaEps) {
        a2 = hi;
      } else {
        return false;
      }
    }
    if (std::abs(a2 - a2_old) < kAlphaEps * (a2 + a2_old + kAlphaEps)) return false;
    const double a1 = a1_old + s * (a2_old - a2);

    const double d1 = y1 * (a1 - a1_old);
    const double d2 = y2 * (a2 - a2_old);
    const double b1 = b - e1 - d1 * k11 - d2 * k12;
    const double b2 = b - e2 - d1 * k12 - d2 * k22;
    double b_new;
    if (a1 > 0.0 && a1 < C) {
      b_new = b1;
    } else if (a2 > 0.0 && a2 < C) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }

    errors += d1 * kernel.column(i1) + d2 * kernel.column(i2);
    errors.array() += b_new - b;
    alpha[static_cast<std::size_t>(i1)] = a1;
    alpha[static_cast<std::size_t>(i2)] = a2;
    b = b_new;
    return true;
  }

  bool examine(Eigen::Index i2) {
    const std::size_t n = alpha.size();
    const double y2 = y[static_cast<std::size_t>(i2)];
    const double a2 = alpha[static_cast<std::size_t>(i2)];
    const double r2 = errors[i2] * y2;
    if (!((r2 < -tol && a2 < C) || (r2 > tol && a2 > 0.0))) return false;

    // Second-choice heuristic: largest |E1 - E2| among non-bound points.
    Eigen::Index best = -1;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] <= 0.0 || alpha[i] >= C) continue;
      const double gap = std::abs(errors[static_cast<Eigen::Index>(i)] - errors[i2]);
      if (gap > best_gap) {
        best_gap = gap;
        best = static_cast<Eigen::Index>(i);
      }
    }
    if (best >= 0 && take_step(best, i2)) return true;

    // Deterministic fallbacks sweep from a fixed offset.
    for (std::size_t k = 0; k < n; ++k) {
      const auto i1 = static_cast<Eigen::Index>((static_cast<std::size_t>(i2) + 1 + k) % n);
      if (alpha[static_cast<std::size_t>(i1)] <= 0.0 || alpha[static_cast<std::size_t>(i1)] >= C) {
        continue;
      }
      if (take_step(i1, i2)) return true;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto i1 = static_cast<Eigen::Index>((static_cast<std::size_t>(i2) + 1 + k) % n);
      if (take_step(i1, i2)) return true;
    }
    return false;
  }
};

// Two-parameter logistic link on decision values, Platt-style smoothed
// targets; Newton with backtracking.
std::pair<double, double> fit_platt(const Vector& scores, const std::vector<int>& y) {
  const auto n = scores.size();
  double n_pos = 0.0;
  for (int v : y) n_pos += v;
  const double n_neg = static_cast<double>(n) - n_pos;
  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);

  double A = 1.0;
  double B = std::log((n_neg + 1.0) / (n_pos + 1.0));
  auto objective = [&](double a, double bb) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = y[static_cast<std::size_t>(i)] == 1 ? t_pos : t_neg;
      const double z = a * scores[i] + bb;
      obj += detail::softplus(z) - t * z;  // -t log p - (1-t) log(1-p)
    }
    return obj;
  };

  double obj = objective(A, B);
  for (int iter = 0; iter < 100; ++iter) {
    double g_a = 0.0, g_b = 0.0, h_aa = 1e-12, h_ab = 0.0, h_bb = 1e-12;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = y[static_cast<std::size_t>(i)] == 1 ? t_pos : t_neg;
      const double p = sigmoid(A * scores[i] + B);
      const double d = p - t;
      const double w = p * (1.0 - p);
      g_a += d * scores[i];
      g_b += d;
      h_aa += w * scores[i] * scores[i];
      h_ab += w * scores[i];
      h_bb += w;
    }
    if (std::max(std::abs(g_a), std::abs(g_b)) < 1e-10) break;
    const double det = h_aa * h_bb - h_ab * h_ab;
    double step_a = (h_bb * g_a - h_ab * g_b) / det;
    double step_b = (h_aa * g_b - h_ab * g_a) / det;
    double t_ls = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 40; ++ls) {
      const double cand = objective(A - t_ls * step_a, B - t_ls * step_b);
      if (cand <= obj) {
        A -= t_ls * step_a;
        B -= t_ls * step_b;
        obj = cand;
        ok = true;
        break;
      }
      t_ls *= 0.5;
    }
    if (!ok) break;
  }
  return {A, B};
}

}  // namespace

SvmTrainDetail train_svm_rbf_detailed(const Matrix& X, const std::vector<int>& y,
                                      const SvmConfig& config) {
  detail::validate_training_inputs(X, y);
  if (config.C <= 0.0) throw ConfigError("train_svm_rbf: C must be > 0");
  if (config.gamma < 0.0) throw ConfigError("train_svm_rbf: gamma must be > 0 (or 0 for 1/F)");

  const Standardizer scaler = Standardizer::fit(X);
  const Matrix Z = scaler.apply(X);
  const auto n = Z.rows();
  const double gamma =
      config.gamma > 0.0 ? config.gamma : 1.0 / static_cast<double>(Z.cols());

  std::vector<double> ypm(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < ypm.size(); ++i) ypm[i] = y[i] == 1 ? 1.0 : -1.0;

  KernelProvider kernel(Z, gamma);
  SmoState smo{kernel, ypm, config.C, config.tol, std::vector<double>(static_cast<std::size_t>(n), 0.0),
               Vector(n), 0.0};
  for (Eigen::Index i = 0; i < n; ++i) smo.errors[i] = -ypm[static_cast<std::size_t>(i)];

  std::size_t sweeps = 0;
  bool examine_all = true;
  std::size_t changed = 0;
  while ((changed > 0 || examine_all) && sweeps < config.max_passes) {
    ++sweeps;
    changed = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!examine_all) {
        const double a = smo.alpha[static_cast<std::size_t>(i)];
        if (a <= 0.0 || a >= config.C) continue;
      }
      changed += smo.examine(i) ? 1 : 0;
    }
    if (examine_all) {
      examine_all = false;
    } else if (changed == 0) {
      examine_all = true;
    }
  }

  // Final margins from the alphas themselves, not the running error cache.
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (smo.alpha[static_cast<std::size_t>(i)] > 0.0) sv.push_back(i);
  }
  Matrix support(static_cast<Eigen::Index>(sv.size()), Z.cols());
  Vector coef(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    support.row(static_cast<Eigen::Index>(k)) = Z.row(sv[k]);
    coef[static_cast<Eigen::Index>(k)] =
        smo.alpha[static_cast<std::size_t>(sv[k])] * ypm[static_cast<std::size_t>(sv[k])];
  }

  Vector decision(n);
  {
    Vector sv_sq = support.rowwise().squaredNorm();
    Vector z_sq = Z.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) {
      double f = smo.b;
      for (Eigen::Index k = 0; k < support.rows(); ++k) {
        const double d2 = sv_sq[k] + z_sq[i] - 2.0 * support.row(k).dot(Z.row(i));
        f += coef[k] * std::exp(-gamma * d2);
      }
      decision[i] = f;
    }
  }

  const auto [platt_a, platt_b] = fit_platt(decision, y);
  SvmTrainDetail detail;
  detail.model = std::make_unique<SvmRbfModel>(std::move(support), std::move(coef), smo.b, gamma,
                                               platt_a, platt_b, scaler, config);
  detail.alphas = std::move(smo.alpha);
  detail.decision_values = std::move(decision);
  detail.effective_gamma = gamma;
  return detail;
}

std::unique_ptr<SvmRbfModel> train_svm_rbf(const Matrix& X, const std::vector<int>& y,
                                           const SvmConfig& config) {
  return train_svm_rbf_detailed(X, y, config).model;
}

SvmRbfModel::SvmRbfModel(Matrix support_vectors, Vector coefficients, double bias, double gamma,
                         double platt_a, double platt_b, Standardizer scaler, SvmConfig config)
    : support_vectors_(std::move(support_vectors)),
      coefficients_(std::move(coefficients)),
      bias_(bias),
      gamma_(gamma),
      platt_a_(platt_a),
      platt_b_(platt_b),
      scaler_(std::move(scaler)),
      config_(config) {}

Vector SvmRbfModel::decision_function(const Matrix& X) const {
  if (static_cast<std::size_t>(X.cols()) != feature_count()) {
    throw ShapeError("svm decision_function: feature width mismatch");
  }
  const Matrix Z = scaler_.apply(X);
  Vector out = Vector::Constant(Z.rows(), bias_);
  if (support_vectors_.rows() == 0) return out;
  const Vector sv_sq = support_vectors_.rowwise().squaredNorm();
  const Vector z_sq = Z.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    double f = 0.0;
    for (Eigen::Index k = 0; k < support_vectors_.rows(); ++k) {
      const double d2 = sv_sq[k] + z_sq[i] - 2.0 * support_vectors_.row(k).dot(Z.row(i));
      f += coefficients_[k] * std::exp(-gamma_ * d2);
    }
    out[i] += f;
  }
  return out;
}

Vector SvmRbfModel::predict_proba_impl(const Matrix& X) const {
  Vector f = decision_function(X);
  return f.unaryExpr([&](double v) { return sigmoid(platt_a_ * v + platt_b_); });
}

nlohmann::json SvmRbfModel::to_json() const {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = to_string(ModelKind::SvmRbf);
  doc["support_vectors"] = detail::matrix_to_json(support_vectors_);
  doc["coefficients"] = detail::vector_to_json(coefficients_);
  doc["bias"] = bias_;
  doc["gamma"] = gamma_;
  doc["platt_a"] = platt_a_;
  doc["platt_b"] = platt_b_;
  doc["mean"] = detail::vector_to_json(scaler_.mean);
  doc["sigma"] = detail::vector_to_json(scaler_.sigma);
  doc["config"] = {{"C", config_.C}, {"gamma", config_.gamma}, {"tol", config_.tol},
                   {"max_passes", config_.max_passes}};
  return doc;
}

std::unique_ptr<SvmRbfModel> SvmRbfModel::from_json(const nlohmann::json& doc) {
  Standardizer scaler;
  scaler.mean = detail::vector_from_json(doc.at("mean"));
  scaler.sigma = detail::vector_from_json(doc.at("sigma"));
  SvmConfig config;
  const auto& c = doc.at("config");
  config.C = c.at("C").get<double>();
  config.gamma = c.at("gamma").get<double>();
  config.tol = c.at("tol").get<double>();
  config.max_passes = c.at("max_passes").get<std::size_t>();
  return std::make_unique<SvmRbfModel>(
      detail::matrix_from_json(doc.at("support_vectors")),
      detail::vector_from_json(doc.at("coefficients")), doc.at("bias").get<double>(),
      doc.at("gamma").get<double>(), doc.at("platt_a").get<double>(),
      doc.at("platt_b").get<double>(), std::move(scaler), config);
}

}  // namespace finshap
