#ifndef GPTREE_TARGETS_HPP
#define GPTREE_TARGETS_HPP

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "gptree/rng.hpp"

namespace gptree {

struct TargetOutput {
  double y = 0.0;
  double y_var = 0.0;
};

// Benchmark target on unit-scaled inputs [0,1]^d; rescales internally to
// its native box.
class TargetFn {
 public:
  virtual ~TargetFn() = default;
  virtual TargetOutput evaluate(const Eigen::VectorXd& x_unit) = 0;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd native_lower() const = 0;
  virtual Eigen::VectorXd native_upper() const = 0;
};

// Raw test functions on their native domains.
double rosenbrock_nd(const Eigen::VectorXd& x);            // [-5,10]^n, n >= 2
double eggholder_2d(double x1, double x2);                 // shifted pair term
double eggholder_4d(const Eigen::VectorXd& x);             // [-512,512]^4
double robot_arm_8d(const Eigen::VectorXd& theta_lengths); // [0,2pi]^4 x [0,1]^4

// y = sin(2 pi x) + 0.2 sin(8 pi x) + 0.1 eps; reported y_var = 0.01.
TargetOutput higdon_1d(double x, CounterRng& rng);

// Affine map from the unit box to the target's native box.
Eigen::VectorXd unit_rescale(const Eigen::VectorXd& x_unit, const TargetFn& target);

// Target selection by tag: rosenbrock4d, rosenbrock8d, eggholder4d,
// robotarm8d, higdon1d.
std::unique_ptr<TargetFn> make_target(const std::string& tag, std::uint64_t seed);

// Multiplicative noise wrapper: y' = y (1 + sd eps), reported
// y_var = (sd y)^2. relative_sd = 0 is the identity wrapper.
std::unique_ptr<TargetFn> add_noise(std::unique_ptr<TargetFn> inner,
                                    double relative_sd, std::uint64_t seed);

}  // namespace gptree

#endif
