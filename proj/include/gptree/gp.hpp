#ifndef GPTREE_GP_HPP
#define GPTREE_GP_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gptree/kernels.hpp"

namespace gptree {

// Inputs, observed targets, and per-point observation variances.
struct Dataset {
  Eigen::MatrixXd X;      // N x d
  Eigen::VectorXd y;      // N
  Eigen::VectorXd y_var;  // N, each >= 0

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
  void validate() const;
  void append(const Eigen::VectorXd& x, double y_obs, double y_obs_var);
  void remove_rows(const std::vector<Eigen::Index>& indices);
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct HyperParams {
  KernelParams kernel;
  double mean_const = 0.0;
};

struct FitInfo {
  int iterations = 0;
  bool converged = true;
};

// Exact GP conditioned on a dataset, with cached Cholesky factorization.
// Immutable after construction; concurrent predicts are safe.
class TrainedGP {
 public:
  static TrainedGP fit(const Dataset& dataset, KernelKind kind,
                       const std::optional<HyperParams>& warm_start = {});

  // Condition on the dataset at fixed hyperparameters (no optimization).
  static TrainedGP with_hyper(const Dataset& dataset, KernelKind kind,
                              const HyperParams& hyper);

  TrainedGP retrain(const Dataset& added,
                    const std::vector<Eigen::Index>& removed_indices) const;

  Prediction predict(const Eigen::VectorXd& x_star) const;

  const Dataset& dataset() const { return data_; }
  KernelKind kind() const { return kind_; }
  const KernelParams& params() const { return hyper_.kernel; }
  double mean_const() const { return hyper_.mean_const; }
  const HyperParams& hyper() const { return hyper_; }
  const FitInfo& fit_info() const { return info_; }

 private:
  TrainedGP() = default;

  Dataset data_;
  KernelKind kind_ = KernelKind::Matern32;
  HyperParams hyper_;
  FitInfo info_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;  // (K)^-1 (y - m)
};

// Log marginal likelihood of the dataset under the given hyperparameters,
// with its gradient over (log sigma^2, log l_1..log l_d, mean_const).
struct LmlResult {
  double value;
  Eigen::VectorXd gradient;
};
LmlResult log_marginal_likelihood(const Dataset& dataset, KernelKind kind,
                                  const KernelParams& params, double mean_const);

// Cholesky of K with escalating jitter; throws after the last level fails.
Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& K);

// Deterministic scale-aware initialization used when no warm start is given.
HyperParams default_init(const Dataset& dataset);

}  // namespace gptree

#endif
