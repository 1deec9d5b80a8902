#include "gptree/targets.hpp"

#include <cmath>
#include <stdexcept>

namespace gptree {

namespace {
constexpr double kPi = 3.1415926535897932384626434;
constexpr double kEggholderShift = 960.6407;
}  // namespace

double rosenbrock_nd(const Eigen::VectorXd& x) {
  if (x.size() < 2) throw std::domain_error("rosenbrock_nd needs n >= 2");
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = 1.0 - x[i];
    const double b = x[i + 1] - x[i] * x[i];
    sum += a * a + 100.0 * b * b;
  }
  return sum;
}

double eggholder_2d(double x1, double x2) {
  return -(x2 + 47.0) * std::sin(std::sqrt(std::abs(0.5 * x1 + (x2 + 47.0)))) -
         x1 * std::sin(std::sqrt(std::abs(x1 - (x2 + 47.0)))) + kEggholderShift;
}

double eggholder_4d(const Eigen::VectorXd& x) {
  if (x.size() != 4) throw std::domain_error("eggholder_4d needs 4 components");
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += eggholder_2d(x[i], x[i + 1]);
  return sum;
}

double robot_arm_8d(const Eigen::VectorXd& tl) {
  if (tl.size() != 8) throw std::domain_error("robot_arm_8d needs 8 components");
  double u = 0.0, v = 0.0, angle = 0.0;
  for (int i = 0; i < 4; ++i) {
    angle += tl[i];
    u += tl[4 + i] * std::cos(angle);
    v += tl[4 + i] * std::sin(angle);
  }
  return 1000.0 * std::sqrt(u * u + v * v) + 1.0;
}

TargetOutput higdon_1d(double x, CounterRng& rng) {
  TargetOutput out;
  out.y = std::sin(2.0 * kPi * x) + 0.2 * std::sin(8.0 * kPi * x) + 0.1 * rng.normal();
  out.y_var = 0.01;
  return out;
}

Eigen::VectorXd unit_rescale(const Eigen::VectorXd& x_unit, const TargetFn& target) {
  if (x_unit.size() != target.dim())
    throw std::domain_error("unit_rescale: dimension mismatch");
  for (Eigen::Index j = 0; j < x_unit.size(); ++j)
    if (x_unit[j] < 0.0 || x_unit[j] > 1.0)
      throw std::domain_error("unit_rescale: input outside [0,1]");
  const Eigen::VectorXd lo = target.native_lower();
  const Eigen::VectorXd hi = target.native_upper();
  return lo.array() + x_unit.array() * (hi - lo).array();
}

namespace {

class RosenbrockTarget : public TargetFn {
 public:
  explicit RosenbrockTarget(int n) : n_(n) {}
  TargetOutput evaluate(const Eigen::VectorXd& x_unit) override {
    return {rosenbrock_nd(unit_rescale(x_unit, *this)), 0.0};
  }
  int dim() const override { return n_; }
  Eigen::VectorXd native_lower() const override {
    return Eigen::VectorXd::Constant(n_, -5.0);
  }
  Eigen::VectorXd native_upper() const override {
    return Eigen::VectorXd::Constant(n_, 10.0);
  }

 private:
  int n_;
};

class EggholderTarget : public TargetFn {
 public:
  TargetOutput evaluate(const Eigen::VectorXd& x_unit) override {
    return {eggholder_4d(unit_rescale(x_unit, *this)), 0.0};
  }
  int dim() const override { return 4; }
  Eigen::VectorXd native_lower() const override {
    return Eigen::VectorXd::Constant(4, -512.0);
  }
  Eigen::VectorXd native_upper() const override {
    return Eigen::VectorXd::Constant(4, 512.0);
  }
};

class RobotArmTarget : public TargetFn {
 public:
  TargetOutput evaluate(const Eigen::VectorXd& x_unit) override {
    return {robot_arm_8d(unit_rescale(x_unit, *this)), 0.0};
  }
  int dim() const override { return 8; }
  Eigen::VectorXd native_lower() const override {
    return Eigen::VectorXd::Zero(8);
  }
  Eigen::VectorXd native_upper() const override {
    Eigen::VectorXd hi(8);
    hi << 2.0 * kPi, 2.0 * kPi, 2.0 * kPi, 2.0 * kPi, 1.0, 1.0, 1.0, 1.0;
    return hi;
  }
};

class HigdonTarget : public TargetFn {
 public:
  explicit HigdonTarget(std::uint64_t seed) : rng_(seed) {}
  TargetOutput evaluate(const Eigen::VectorXd& x_unit) override {
    if (x_unit.size() != 1) throw std::domain_error("higdon1d is one-dimensional");
    return higdon_1d(x_unit[0], rng_);
  }
  int dim() const override { return 1; }
  Eigen::VectorXd native_lower() const override { return Eigen::VectorXd::Zero(1); }
  Eigen::VectorXd native_upper() const override { return Eigen::VectorXd::Ones(1); }

 private:
  CounterRng rng_;
};

class NoisyTarget : public TargetFn {
 public:
  NoisyTarget(std::unique_ptr<TargetFn> inner, double relative_sd, std::uint64_t seed)
      : inner_(std::move(inner)), relative_sd_(relative_sd), rng_(seed) {
    if (relative_sd < 0.0) throw std::domain_error("relative_sd must be >= 0");
  }
  TargetOutput evaluate(const Eigen::VectorXd& x_unit) override {
    TargetOutput out = inner_->evaluate(x_unit);
    if (relative_sd_ == 0.0) return out;
    const double sd = relative_sd_ * out.y;
    out.y += sd * rng_.normal();
    out.y_var += sd * sd;
    return out;
  }
  int dim() const override { return inner_->dim(); }
  Eigen::VectorXd native_lower() const override { return inner_->native_lower(); }
  Eigen::VectorXd native_upper() const override { return inner_->native_upper(); }

 private:
  std::unique_ptr<TargetFn> inner_;
  double relative_sd_;
  CounterRng rng_;
};

}  // namespace

std::unique_ptr<TargetFn> make_target(const std::string& tag, std::uint64_t seed) {
  if (tag == "rosenbrock4d") return std::make_unique<RosenbrockTarget>(4);
  if (tag == "rosenbrock8d") return std::make_unique<RosenbrockTarget>(8);
  if (tag == "eggholder4d") return std::make_unique<EggholderTarget>();
  if (tag == "robotarm8d") return std::make_unique<RobotArmTarget>();
  if (tag == "higdon1d") return std::make_unique<HigdonTarget>(seed);
  throw std::invalid_argument(
      "unknown target '" + tag +
      "' (allowed: rosenbrock4d, rosenbrock8d, eggholder4d, robotarm8d, higdon1d)");
}

std::unique_ptr<TargetFn> add_noise(std::unique_ptr<TargetFn> inner,
                                    double relative_sd, std::uint64_t seed) {
  return std::make_unique<NoisyTarget>(std::move(inner), relative_sd, seed);
}

}  // namespace gptree
