#ifndef GPTREE_TREE_HPP
#define GPTREE_TREE_HPP

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gptree/gp.hpp"
#include "gptree/rng.hpp"

namespace gptree {

enum class DecayShape { Linear, Exponential, Gaussian, Deterministic };
enum class SplitDirectionCriterion {
  MaxSpread,
  MinLengthscale,
  MaxSpreadPerLengthscale,
  MaxCorr,
  PrincipalComponent
};
enum class SplitPositionCriterion { Mean, Median };

std::string decay_shape_to_string(DecayShape d);
DecayShape decay_shape_from_string(const std::string& tag);
std::string split_direction_to_string(SplitDirectionCriterion c);
SplitDirectionCriterion split_direction_from_string(const std::string& tag);
std::string split_position_to_string(SplitPositionCriterion c);
SplitPositionCriterion split_position_from_string(const std::string& tag);

// Routing rule attached to an internal node. Child "0" is the high side of
// the split coordinate, child "1" the low side.
struct SplitRule {
  int axis = 0;               // axis-aligned split dimension; -1 for vector splits
  Eigen::VectorXd direction;  // unit vector, used when axis < 0
  double position = 0.0;
  double width = 0.0;
  double theta = 0.0;
  DecayShape decay = DecayShape::Linear;

  double project(const Eigen::VectorXd& x) const {
    return axis >= 0 ? x[axis] : direction.dot(x);
  }
};

// Probability that x is routed to child "0". Equals 1/2 at the split
// position, monotone non-decreasing in the projected coordinate, and
// saturates to {0, 1} outside the overlap region.
double branch_probability(const SplitRule& rule, const Eigen::VectorXd& x);

// Ring buffer of recent (residual, predicted sigma) pairs plus the current
// uncertainty scaling factor.
struct CalibrationState {
  static constexpr int kCapacity = 25;
  std::vector<std::pair<double, double>> pairs;  // (e_i, sigma_i)
  int head = 0;
  double scale = 10.0;

  void push(double residual, double sigma);
  int size() const { return static_cast<int>(pairs.size()); }
};

// The ceil(0.68*n)-th smallest |e|/sigma over the stored pairs.
double calibration_target(const CalibrationState& state);

// New scaling factor: the target statistic, floored so it never drops by
// more than the rate limit per update.
double calibration_scale(const CalibrationState& state, double rate_limit);

struct TreeConfig {
  int nbar = 1000;
  int retrain_buffer_length = 0;  // 0 means "equal to nbar"
  double theta = 0.0;
  bool gradual_split = true;
  KernelKind kernel = KernelKind::Matern32;
  SplitDirectionCriterion split_direction_criterion =
      SplitDirectionCriterion::MaxSpreadPerLengthscale;
  SplitPositionCriterion split_position_criterion = SplitPositionCriterion::Median;
  DecayShape shape_decay = DecayShape::Linear;
  bool use_empirical_error = true;
  std::uint64_t seed = 0;
  double calibration_initial_scale = 10.0;
  double calibration_rate_limit = 0.95;
  double untrained_prior_variance = 1e6;

  int buffer_length() const { return retrain_buffer_length > 0 ? retrain_buffer_length : nbar; }
  void validate() const;
};

struct Node {
  std::string id;
  Dataset points;                // leaf only
  std::vector<int> shared_rank;  // per point; -1 exclusive (gradual splitting)
  std::optional<TrainedGP> gp;   // leaf only
  int buffer_count = 0;
  std::optional<SplitRule> split;  // internal only
  CalibrationState calib;

  bool is_leaf() const { return !split.has_value(); }
  int shared_count() const;
};

SplitRule choose_split(const Node& node, const TrainedGP& gp,
                       SplitDirectionCriterion direction_criterion,
                       SplitPositionCriterion position_criterion, double theta,
                       DecayShape decay);

class Tree {
 public:
  explicit Tree(TreeConfig config);

  struct JointPrediction {
    double mean = 0.0;
    double sigma_raw = 0.0;
    double sigma_calibrated = 0.0;
  };

  // Predict-then-update entry point: assignment, calibration bookkeeping,
  // buffered retraining, and splitting, in that order.
  void update(const Eigen::VectorXd& x, double y, double y_var);

  JointPrediction joint_prediction(const Eigen::VectorXd& x_star) const;

  // Leaf id -> marginal probability, restricted to leaves with positive mass.
  std::map<std::string, double> marginal_probabilities(const Eigen::VectorXd& x) const;

  // Bernoulli descent from the root; consumes one rng draw per branch.
  std::string assign_leaf(const Eigen::VectorXd& x);

  void split_node(const std::string& id);

  const TreeConfig& config() const { return config_; }
  const Node& node(const std::string& id) const;
  bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }
  std::vector<std::string> leaf_ids() const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t total_points() const { return total_points_; }

  nlohmann::json to_json() const;
  static Tree from_json(const nlohmann::json& doc);

 private:
  void evict_shared(Node& child);
  void maybe_split(const std::string& id);
  void refit_leaf(Node& leaf);
  struct LeafContribution {
    double mean, variance, scale;
  };
  LeafContribution leaf_contribution(const Node& leaf, const Eigen::VectorXd& x) const;

  TreeConfig config_;
  std::unordered_map<std::string, Node> nodes_;
  std::size_t total_points_ = 0;
  CounterRng rng_;
};

}  // namespace gptree

#endif
