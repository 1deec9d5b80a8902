#ifndef GPTREE_KERNELS_HPP
#define GPTREE_KERNELS_HPP

#include <Eigen/Dense>
#include <string>

namespace gptree {

enum class KernelKind { Gaussian, Matern32, Matern52 };

// Config-file tags ("gauss", "matern3_2", "matern5_2").
std::string kernel_kind_to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& tag);

// Signal variance plus one length scale per input dimension.
struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;

  void validate(Eigen::Index dim) const;
};

// One-dimensional kernel value k(x, x2; l), in (0, 1].
double kernel_eval_1d(KernelKind kind, double x, double x2, double l);

// Anisotropic product kernel: sigma^2 * prod_j k_1d(x_j, x2_j; l_j).
double kernel_eval(KernelKind kind, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& x2, const KernelParams& params);

// Covariance matrix of X with per-point noise variances on the diagonal.
Eigen::MatrixXd kernel_matrix(KernelKind kind, const Eigen::MatrixXd& X,
                              const KernelParams& params,
                              const Eigen::VectorXd& noise_variances);

// Gradient of kernel_eval w.r.t. (log sigma^2, log l_1, ..., log l_d).
Eigen::VectorXd kernel_param_grad(KernelKind kind, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& x2,
                                  const KernelParams& params);

}  // namespace gptree

#endif
