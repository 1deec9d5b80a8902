#include "gptree/gp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gptree {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594;
}

void Dataset::validate() const {
  const Eigen::Index n = X.rows();
  if (n < 1) throw std::domain_error("dataset must hold at least one point");
  if (y.size() != n || y_var.size() != n)
    throw std::domain_error("dataset length mismatch");
  if (!X.allFinite() || !y.allFinite() || !y_var.allFinite())
    throw std::domain_error("dataset contains non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i)
    if (y_var[i] < 0.0) throw std::domain_error("observation variances must be >= 0");
}

void Dataset::append(const Eigen::VectorXd& x, double y_obs, double y_obs_var) {
  if (X.rows() == 0) {
    X.resize(0, x.size());
  } else if (x.size() != X.cols()) {
    throw std::domain_error("append: dimension mismatch");
  }
  X.conservativeResize(X.rows() + 1, Eigen::NoChange);
  X.row(X.rows() - 1) = x.transpose();
  y.conservativeResize(y.size() + 1);
  y[y.size() - 1] = y_obs;
  y_var.conservativeResize(y_var.size() + 1);
  y_var[y_var.size() - 1] = y_obs_var;
}

void Dataset::remove_rows(const std::vector<Eigen::Index>& indices) {
  if (indices.empty()) return;
  std::set<Eigen::Index> drop(indices.begin(), indices.end());
  for (Eigen::Index i : drop)
    if (i < 0 || i >= X.rows()) throw std::out_of_range("remove_rows: bad index");
  const Eigen::Index kept = X.rows() - static_cast<Eigen::Index>(drop.size());
  Eigen::MatrixXd Xk(kept, X.cols());
  Eigen::VectorXd yk(kept), vk(kept);
  Eigen::Index w = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (drop.count(i)) continue;
    Xk.row(w) = X.row(i);
    yk[w] = y[i];
    vk[w] = y_var[i];
    ++w;
  }
  X = std::move(Xk);
  y = std::move(yk);
  y_var = std::move(vk);
}

Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& K) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) return llt;
  const double mean_diag = K.diagonal().mean();
  std::ostringstream tried;
  for (double level = 1e-10; level <= 1e-4 * 1.5; level *= 10.0) {
    const double jitter = level * mean_diag;
    tried << " " << jitter;
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    llt.compute(Kj);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw std::runtime_error(
      "covariance factorization failed; attempted jitter levels:" + tried.str());
}

HyperParams default_init(const Dataset& dataset) {
  const Eigen::Index d = dataset.dim();
  HyperParams h;
  h.kernel.lengthscales.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double spread =
        std::max(dataset.X.col(j).maxCoeff() - dataset.X.col(j).minCoeff(), 1e-3);
    h.kernel.lengthscales[j] = 0.3 * spread;
  }
  const double mean = dataset.y.mean();
  const double var =
      dataset.size() > 1
          ? (dataset.y.array() - mean).square().sum() / double(dataset.size() - 1)
          : 0.0;
  h.kernel.signal_variance = std::max(var, 1e-8);
  h.mean_const = mean;
  return h;
}

LmlResult log_marginal_likelihood(const Dataset& dataset, KernelKind kind,
                                  const KernelParams& params, double mean_const) {
  dataset.validate();
  params.validate(dataset.dim());
  const Eigen::Index n = dataset.size();
  const Eigen::Index d = dataset.dim();

  Eigen::MatrixXd K = kernel_matrix(kind, dataset.X, params, dataset.y_var);
  Eigen::LLT<Eigen::MatrixXd> llt = robust_cholesky(K);
  Eigen::VectorXd r = dataset.y.array() - mean_const;
  Eigen::VectorXd alpha = llt.solve(r);

  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    logdet_half += std::log(llt.matrixLLT()(i, i));

  LmlResult out;
  out.value = -0.5 * r.dot(alpha) - logdet_half - 0.5 * double(n) * kLog2Pi;

  // grad_t = 1/2 tr((alpha alpha^T - K^-1) dK/dt)
  Eigen::MatrixXd A = alpha * alpha.transpose();
  A.noalias() -= llt.solve(Eigen::MatrixXd::Identity(n, n));

  out.gradient = Eigen::VectorXd::Zero(d + 2);
  // d K / d log sigma^2 is K minus the noise diagonal.
  double g_sig = (A.array() * K.array()).sum();
  for (Eigen::Index i = 0; i < n; ++i) g_sig -= A(i, i) * dataset.y_var[i];
  out.gradient[0] = 0.5 * g_sig;

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index i2 = i + 1; i2 < n; ++i2) {
      const double kij = K(i, i2);
      if (kij == 0.0) continue;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double fj = kernel_eval_1d(kind, dataset.X(i, j), dataset.X(i2, j),
                                         params.lengthscales[j]);
        if (fj <= 0.0) continue;
        double dfj;
        {
          const double r_j = std::abs(dataset.X(i, j) - dataset.X(i2, j));
          const double l = params.lengthscales[j];
          switch (kind) {
            case KernelKind::Gaussian: {
              const double u = r_j / l;
              dfj = u * u * std::exp(-0.5 * u * u);
              break;
            }
            case KernelKind::Matern32: {
              const double a = 1.7320508075688772935 * r_j / l;
              dfj = a * a * std::exp(-a);
              break;
            }
            case KernelKind::Matern52: {
              const double a = 2.2360679774997896964 * r_j / l;
              dfj = a * a * (1.0 + a) / 3.0 * std::exp(-a);
              break;
            }
            default:
              throw std::logic_error("unreachable");
          }
        }
        // Off-diagonal pair appears twice in the trace.
        out.gradient[1 + j] += A(i, i2) * kij / fj * dfj;
      }
    }
  }
  out.gradient[d + 1] = alpha.sum();  // d/d mean_const
  return out;
}

namespace {

struct OptBounds {
  Eigen::VectorXd lo, hi;  // over log-lengthscale block only
};

OptBounds lengthscale_bounds(const Dataset& dataset) {
  const Eigen::Index d = dataset.dim();
  OptBounds b;
  b.lo.resize(d);
  b.hi.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double spread =
        std::max(dataset.X.col(j).maxCoeff() - dataset.X.col(j).minCoeff(), 1e-3);
    b.lo[j] = std::log(1e-4 * spread);
    b.hi[j] = std::log(1e3 * spread);
  }
  return b;
}

// Value-only evaluation for line-search trials; skips the gradient work.
double lml_value(const Dataset& dataset, KernelKind kind,
                 const KernelParams& params, double mean_const) {
  Eigen::MatrixXd K = kernel_matrix(kind, dataset.X, params, dataset.y_var);
  Eigen::LLT<Eigen::MatrixXd> llt = robust_cholesky(K);
  Eigen::VectorXd r = dataset.y.array() - mean_const;
  Eigen::VectorXd alpha = llt.solve(r);
  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < dataset.size(); ++i)
    logdet_half += std::log(llt.matrixLLT()(i, i));
  return -0.5 * r.dot(alpha) - logdet_half - 0.5 * double(dataset.size()) * kLog2Pi;
}

// t = [log sigma^2, log l_1..log l_d, mean_const]
Eigen::VectorXd pack(const HyperParams& h) {
  const Eigen::Index d = h.kernel.lengthscales.size();
  Eigen::VectorXd t(d + 2);
  t[0] = std::log(h.kernel.signal_variance);
  for (Eigen::Index j = 0; j < d; ++j) t[1 + j] = std::log(h.kernel.lengthscales[j]);
  t[d + 1] = h.mean_const;
  return t;
}

HyperParams unpack(const Eigen::VectorXd& t) {
  const Eigen::Index d = t.size() - 2;
  HyperParams h;
  h.kernel.signal_variance = std::exp(t[0]);
  h.kernel.lengthscales.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) h.kernel.lengthscales[j] = std::exp(t[1 + j]);
  h.mean_const = t[d + 1];
  return h;
}

void clip_to_bounds(Eigen::VectorXd& t, const OptBounds& b) {
  const Eigen::Index d = t.size() - 2;
  // Keep the signal variance strictly positive under exp().
  t[0] = std::clamp(t[0], std::log(1e-12), std::log(1e12));
  for (Eigen::Index j = 0; j < d; ++j)
    t[1 + j] = std::clamp(t[1 + j], b.lo[j], b.hi[j]);
}

}  // namespace

TrainedGP TrainedGP::fit(const Dataset& dataset, KernelKind kind,
                         const std::optional<HyperParams>& warm_start) {
  dataset.validate();
  const Eigen::Index n = dataset.size();
  const Eigen::Index d = dataset.dim();

  TrainedGP gp;
  gp.data_ = dataset;
  gp.kind_ = kind;

  HyperParams init = warm_start ? *warm_start : default_init(dataset);
  if (init.kernel.lengthscales.size() != d)
    throw std::domain_error("warm start dimension mismatch");

  if (n == 1) {
    // Lengthscale fitting is ill-posed; freeze at the initialization.
    init.kernel.signal_variance = 1e-8;
    init.mean_const = dataset.y[0];
    gp.hyper_ = init;
    gp.info_ = {0, true};
  } else {
    const OptBounds bounds = lengthscale_bounds(dataset);
    Eigen::VectorXd t = pack(init);
    clip_to_bounds(t, bounds);

    const Eigen::Index m = t.size();
    HyperParams h = unpack(t);
    LmlResult cur = log_marginal_likelihood(dataset, kind, h.kernel, h.mean_const);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m);  // inverse-Hessian approx

    int iter = 0;
    bool converged = false;
    const int max_iter = 100;
    while (iter < max_iter) {
      if (cur.gradient.lpNorm<Eigen::Infinity>() < 1e-5) {
        converged = true;
        break;
      }
      ++iter;
      Eigen::VectorXd p = H * cur.gradient;  // ascent direction
      if (p.dot(cur.gradient) <= 0.0) {
        H.setIdentity();
        p = cur.gradient;
      }
      // Backtracking line search with Armijo acceptance (monotone).
      const double slope = p.dot(cur.gradient);
      double step = 1.0;
      bool accepted = false;
      Eigen::VectorXd t_new;
      for (int ls = 0; ls < 40; ++ls) {
        t_new = t + step * p;
        clip_to_bounds(t_new, bounds);
        HyperParams h_new = unpack(t_new);
        try {
          const double trial = lml_value(dataset, kind, h_new.kernel, h_new.mean_const);
          if (std::isfinite(trial) && trial >= cur.value + 1e-4 * step * slope) {
            accepted = true;
            break;
          }
        } catch (const std::runtime_error&) {
          // Factorization failure at this trial point; shrink the step.
        }
        step *= 0.5;
      }
      if (!accepted) break;
      HyperParams h_acc = unpack(t_new);
      LmlResult next =
          log_marginal_likelihood(dataset, kind, h_acc.kernel, h_acc.mean_const);

      const Eigen::VectorXd s = t_new - t;
      const Eigen::VectorXd yv = next.gradient - cur.gradient;
      const double rel_change =
          std::abs(next.value - cur.value) / std::max(1.0, std::abs(next.value));
      t = t_new;
      const double old_value = cur.value;
      cur = next;
      if (rel_change < 1e-9 && next.value >= old_value) {
        converged = true;
        break;
      }
      // Inverse BFGS update (note: maximizing, s and yv flip sign together).
      const double sy = s.dot(yv);
      if (sy < -1e-12) {
        const double rho = 1.0 / (-sy);
        Eigen::MatrixXd V = Eigen::MatrixXd::Identity(m, m) + rho * s * yv.transpose();
        H = V * H * V.transpose() + rho * s * s.transpose();
      } else {
        H.setIdentity();
      }
    }
    gp.hyper_ = unpack(t);
    gp.info_ = {iter, converged || iter < max_iter};
  }

  Eigen::MatrixXd K =
      kernel_matrix(kind, dataset.X, gp.hyper_.kernel, dataset.y_var);
  gp.chol_ = robust_cholesky(K);
  Eigen::VectorXd r = dataset.y.array() - gp.hyper_.mean_const;
  gp.alpha_ = gp.chol_.solve(r);
  return gp;
}

TrainedGP TrainedGP::with_hyper(const Dataset& dataset, KernelKind kind,
                                const HyperParams& hyper) {
  dataset.validate();
  TrainedGP gp;
  gp.data_ = dataset;
  gp.kind_ = kind;
  gp.hyper_ = hyper;
  gp.info_ = {0, true};
  Eigen::MatrixXd K = kernel_matrix(kind, dataset.X, hyper.kernel, dataset.y_var);
  gp.chol_ = robust_cholesky(K);
  Eigen::VectorXd r = dataset.y.array() - hyper.mean_const;
  gp.alpha_ = gp.chol_.solve(r);
  return gp;
}

TrainedGP TrainedGP::retrain(const Dataset& added,
                             const std::vector<Eigen::Index>& removed_indices) const {
  if (added.size() == 0 && removed_indices.empty()) return *this;
  Dataset merged = data_;
  merged.remove_rows(removed_indices);
  for (Eigen::Index i = 0; i < added.size(); ++i)
    merged.append(added.X.row(i), added.y[i], added.y_var[i]);
  return fit(merged, kind_, hyper_);
}

Prediction TrainedGP::predict(const Eigen::VectorXd& x_star) const {
  if (x_star.size() != data_.dim())
    throw std::domain_error("predict: dimension mismatch");
  const Eigen::Index n = data_.size();
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k_star[i] = kernel_eval(kind_, x_star, data_.X.row(i).transpose(), hyper_.kernel);
  Prediction p;
  p.mean = hyper_.mean_const + k_star.dot(alpha_);
  const Eigen::VectorXd v =
      chol_.matrixL().solve(k_star);
  p.variance = std::max(hyper_.kernel.signal_variance - v.squaredNorm(), 0.0);
  return p;
}

}  // namespace gptree
