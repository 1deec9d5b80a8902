#include "gptree/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace gptree {

namespace {
constexpr double kSqrt3 = 1.7320508075688772935274463;
constexpr double kSqrt5 = 2.2360679774997896964091737;
}  // namespace

std::string kernel_kind_to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Gaussian: return "gauss";
    case KernelKind::Matern32: return "matern3_2";
    case KernelKind::Matern52: return "matern5_2";
  }
  throw std::logic_error("unreachable kernel kind");
}

KernelKind kernel_kind_from_string(const std::string& tag) {
  if (tag == "gauss") return KernelKind::Gaussian;
  if (tag == "matern3_2") return KernelKind::Matern32;
  if (tag == "matern5_2") return KernelKind::Matern52;
  throw std::invalid_argument("unknown kernel '" + tag +
                              "' (allowed: gauss, matern3_2, matern5_2)");
}

void KernelParams::validate(Eigen::Index dim) const {
  if (!(signal_variance > 0.0))
    throw std::domain_error("signal variance must be positive");
  if (lengthscales.size() != dim)
    throw std::domain_error("lengthscale count does not match input dimension");
  for (Eigen::Index j = 0; j < lengthscales.size(); ++j)
    if (!(lengthscales[j] > 0.0))
      throw std::domain_error("lengthscales must be positive");
}

double kernel_eval_1d(KernelKind kind, double x, double x2, double l) {
  if (!(l > 0.0)) throw std::domain_error("lengthscale must be positive");
  const double r = std::abs(x - x2);
  switch (kind) {
    case KernelKind::Gaussian: {
      const double u = r / l;
      return std::exp(-0.5 * u * u);
    }
    case KernelKind::Matern32: {
      const double a = kSqrt3 * r / l;
      return (1.0 + a) * std::exp(-a);
    }
    case KernelKind::Matern52: {
      const double a = kSqrt5 * r / l;
      return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
  }
  throw std::logic_error("unreachable kernel kind");
}

double kernel_eval(KernelKind kind, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x2, const KernelParams& params) {
  if (x.size() != x2.size())
    throw std::domain_error("kernel_eval: input dimensions differ");
  params.validate(x.size());
  double k = params.signal_variance;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    k *= kernel_eval_1d(kind, x[j], x2[j], params.lengthscales[j]);
  return k;
}

Eigen::MatrixXd kernel_matrix(KernelKind kind, const Eigen::MatrixXd& X,
                              const KernelParams& params,
                              const Eigen::VectorXd& noise_variances) {
  const Eigen::Index n = X.rows();
  if (noise_variances.size() != n)
    throw std::domain_error("kernel_matrix: noise vector length mismatch");
  params.validate(X.cols());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = params.signal_variance + noise_variances[i];
    for (Eigen::Index j = 0; j < i; ++j) {
      double k = params.signal_variance;
      for (Eigen::Index m = 0; m < X.cols(); ++m)
        k *= kernel_eval_1d(kind, X(i, m), X(j, m), params.lengthscales[m]);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

namespace {

// d k1(r; l) / d log l for the one-dimensional kernels.
double kernel_1d_dlogl(KernelKind kind, double r, double l) {
  switch (kind) {
    case KernelKind::Gaussian: {
      const double u = r / l;
      return u * u * std::exp(-0.5 * u * u);
    }
    case KernelKind::Matern32: {
      const double a = kSqrt3 * r / l;
      return a * a * std::exp(-a);
    }
    case KernelKind::Matern52: {
      const double a = kSqrt5 * r / l;
      return a * a * (1.0 + a) / 3.0 * std::exp(-a);
    }
  }
  throw std::logic_error("unreachable kernel kind");
}

}  // namespace

Eigen::VectorXd kernel_param_grad(KernelKind kind, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& x2,
                                  const KernelParams& params) {
  if (x.size() != x2.size())
    throw std::domain_error("kernel_param_grad: input dimensions differ");
  params.validate(x.size());
  const Eigen::Index d = x.size();
  Eigen::VectorXd factors(d);
  double k = params.signal_variance;
  for (Eigen::Index j = 0; j < d; ++j) {
    factors[j] = kernel_eval_1d(kind, x[j], x2[j], params.lengthscales[j]);
    k *= factors[j];
  }
  Eigen::VectorXd grad(d + 1);
  grad[0] = k;  // d k / d log sigma^2
  for (Eigen::Index j = 0; j < d; ++j) {
    const double r = std::abs(x[j] - x2[j]);
    const double dlogl = kernel_1d_dlogl(kind, r, params.lengthscales[j]);
    // Replace factor j by its log-lengthscale derivative.
    grad[1 + j] = factors[j] > 0.0 ? k / factors[j] * dlogl : 0.0;
  }
  return grad;
}

}  // namespace gptree
