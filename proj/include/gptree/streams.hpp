#ifndef GPTREE_STREAMS_HPP
#define GPTREE_STREAMS_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gptree/rng.hpp"

namespace gptree {

// Stateful point generator; points always lie in [0,1]^d.
class StreamSource {
 public:
  virtual ~StreamSource() = default;
  virtual std::optional<Eigen::VectorXd> next_point() = 0;
  virtual int dim() const = 0;
};

class UniformStream : public StreamSource {
 public:
  UniformStream(int dim, std::uint64_t seed);
  std::optional<Eigen::VectorXd> next_point() override;
  int dim() const override { return dim_; }

 private:
  int dim_;
  CounterRng rng_;
};

struct DeConfig {
  int dim = 4;
  int population = 50;
  int iterations = 100;
  double F = 0.8;
  double CR = 0.9;
  std::uint64_t seed = 0;
};

// Classic rand/1/bin differential evolution on [0,1]^d with boundary
// clipping; emits every evaluated candidate in evaluation order.
class DeStream : public StreamSource {
 public:
  DeStream(std::function<double(const Eigen::VectorXd&)> loss, DeConfig config);
  std::optional<Eigen::VectorXd> next_point() override;
  int dim() const override { return config_.dim; }

  double best_value() const { return best_value_; }
  const std::vector<double>& generation_best() const { return generation_best_; }

 private:
  Eigen::VectorXd make_trial(int target_index);

  std::function<double(const Eigen::VectorXd&)> loss_;
  DeConfig config_;
  CounterRng rng_;
  std::vector<Eigen::VectorXd> population_;
  std::vector<double> fitness_;
  std::vector<double> generation_best_;
  double best_value_;
  int generation_ = 0;  // 0 is initialization
  int cursor_ = 0;
  Eigen::VectorXd pending_trial_;
  bool done_ = false;
};

// Replays a stream CSV written by write_stream_csv.
class ReplayStream : public StreamSource {
 public:
  explicit ReplayStream(const std::string& path);
  std::optional<Eigen::VectorXd> next_point() override;
  int dim() const override { return dim_; }

 private:
  int dim_;
  std::vector<Eigen::VectorXd> points_;
  std::size_t cursor_ = 0;
};

// Runs DE to completion; returns the full trace of evaluated points
// (length population * (iterations + 1)) and the best loss value found.
struct DeResult {
  std::vector<Eigen::VectorXd> trace;
  double best_value;
  std::vector<double> generation_best;
};
DeResult de_minimize(const std::function<double(const Eigen::VectorXd&)>& loss,
                     const DeConfig& config);

// Stream CSV: header x1,...,xd; 17 significant digits per coordinate.
void write_stream_csv(const std::string& path,
                      const std::vector<Eigen::VectorXd>& points);
std::vector<Eigen::VectorXd> read_stream_csv(const std::string& path);

}  // namespace gptree

#endif
