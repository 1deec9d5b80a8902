#include "gptree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gptree {

using nlohmann::json;

namespace {
// Saturation target for the exponential / half-Gaussian tails: the branch
// probability is within 1e-12 of {0,1} at the overlap boundary.
const double kTailLog = std::log(0.5e12);
}  // namespace

std::string decay_shape_to_string(DecayShape d) {
  switch (d) {
    case DecayShape::Linear: return "linear";
    case DecayShape::Exponential: return "exponential";
    case DecayShape::Gaussian: return "gaussian";
    case DecayShape::Deterministic: return "deterministic";
  }
  throw std::logic_error("unreachable decay shape");
}

DecayShape decay_shape_from_string(const std::string& tag) {
  if (tag == "linear") return DecayShape::Linear;
  if (tag == "exponential") return DecayShape::Exponential;
  if (tag == "gaussian") return DecayShape::Gaussian;
  if (tag == "deterministic") return DecayShape::Deterministic;
  throw std::invalid_argument(
      "unknown shape_decay '" + tag +
      "' (allowed: linear, exponential, gaussian, deterministic)");
}

std::string split_direction_to_string(SplitDirectionCriterion c) {
  switch (c) {
    case SplitDirectionCriterion::MaxSpread: return "max_spread";
    case SplitDirectionCriterion::MinLengthscale: return "min_lengthscale";
    case SplitDirectionCriterion::MaxSpreadPerLengthscale:
      return "max_spread_per_lengthscale";
    case SplitDirectionCriterion::MaxCorr: return "max_corr";
    case SplitDirectionCriterion::PrincipalComponent: return "principal_component";
  }
  throw std::logic_error("unreachable split direction");
}

SplitDirectionCriterion split_direction_from_string(const std::string& tag) {
  if (tag == "max_spread") return SplitDirectionCriterion::MaxSpread;
  if (tag == "min_lengthscale") return SplitDirectionCriterion::MinLengthscale;
  if (tag == "max_spread_per_lengthscale")
    return SplitDirectionCriterion::MaxSpreadPerLengthscale;
  if (tag == "max_corr") return SplitDirectionCriterion::MaxCorr;
  if (tag == "principal_component") return SplitDirectionCriterion::PrincipalComponent;
  throw std::invalid_argument(
      "unknown split_direction_criterion '" + tag +
      "' (allowed: max_spread, min_lengthscale, max_spread_per_lengthscale, "
      "max_corr, principal_component)");
}

std::string split_position_to_string(SplitPositionCriterion c) {
  return c == SplitPositionCriterion::Mean ? "mean" : "median";
}

SplitPositionCriterion split_position_from_string(const std::string& tag) {
  if (tag == "mean") return SplitPositionCriterion::Mean;
  if (tag == "median") return SplitPositionCriterion::Median;
  throw std::invalid_argument("unknown split_position_criterion '" + tag +
                              "' (allowed: mean, median)");
}

double branch_probability(const SplitRule& rule, const Eigen::VectorXd& x) {
  const double t = rule.project(x);
  const double ow = rule.theta * rule.width;
  if (rule.decay == DecayShape::Deterministic || ow <= 0.0) {
    if (t > rule.position) return 1.0;
    if (t < rule.position) return 0.0;
    return 0.5;
  }
  const double lo = rule.position - 0.5 * ow;
  const double hi = rule.position + 0.5 * ow;
  switch (rule.decay) {
    case DecayShape::Linear:
      if (t < lo) return 0.0;
      if (t > hi) return 1.0;
      return (t - rule.position) / ow + 0.5;
    case DecayShape::Exponential: {
      if (t <= lo) return 0.0;
      if (t >= hi) return 1.0;
      const double lambda = 2.0 * kTailLog / ow;
      if (t >= rule.position) return 1.0 - 0.5 * std::exp(-lambda * (t - rule.position));
      return 0.5 * std::exp(-lambda * (rule.position - t));
    }
    case DecayShape::Gaussian: {
      if (t <= lo) return 0.0;
      if (t >= hi) return 1.0;
      const double tau2 = 0.25 * ow * ow / (2.0 * kTailLog);
      const double z = t - rule.position;
      if (z >= 0.0) return 1.0 - 0.5 * std::exp(-z * z / (2.0 * tau2));
      return 0.5 * std::exp(-z * z / (2.0 * tau2));
    }
    default:
      throw std::logic_error("unreachable decay shape");
  }
}

void CalibrationState::push(double residual, double sigma) {
  if (static_cast<int>(pairs.size()) < kCapacity) {
    pairs.emplace_back(residual, sigma);
  } else {
    pairs[head] = {residual, sigma};
  }
  head = (head + 1) % kCapacity;
}

double calibration_target(const CalibrationState& state) {
  const int n = state.size();
  if (n == 0) return state.scale;
  std::vector<double> ratios(n);
  for (int i = 0; i < n; ++i)
    ratios[i] = std::abs(state.pairs[i].first) / std::max(state.pairs[i].second, 1e-12);
  std::sort(ratios.begin(), ratios.end());
  const int k = static_cast<int>(std::ceil(0.68 * n));  // 1-based order statistic
  return ratios[k - 1];
}

double calibration_scale(const CalibrationState& state, double rate_limit) {
  if (state.size() == 0) return state.scale;
  return std::max(calibration_target(state), rate_limit * state.scale);
}

void TreeConfig::validate() const {
  if (nbar < 1) throw std::invalid_argument("nbar must be a positive integer");
  if (retrain_buffer_length < 0)
    throw std::invalid_argument("retrain_buffer_length must be positive");
  if (theta < 0.0 || theta > 1.0)
    throw std::invalid_argument("theta must lie in [0, 1]");
  if (!(calibration_initial_scale > 0.0) || !(calibration_rate_limit > 0.0) ||
      calibration_rate_limit > 1.0)
    throw std::invalid_argument("bad calibration constants");
}

int Node::shared_count() const {
  return static_cast<int>(
      std::count_if(shared_rank.begin(), shared_rank.end(), [](int r) { return r >= 0; }));
}

SplitRule choose_split(const Node& node, const TrainedGP& gp,
                       SplitDirectionCriterion direction_criterion,
                       SplitPositionCriterion position_criterion, double theta,
                       DecayShape decay) {
  const Eigen::MatrixXd& X = node.points.X;
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 1) throw std::logic_error("choose_split on empty node");

  Eigen::VectorXd spread(d);
  for (Eigen::Index j = 0; j < d; ++j)
    spread[j] = X.col(j).maxCoeff() - X.col(j).minCoeff();

  SplitRule rule;
  rule.theta = theta;
  rule.decay = decay;

  if (spread.maxCoeff() <= 0.0) {
    // Degenerate data: deterministic split on dimension 0 with zero width.
    rule.axis = 0;
    rule.position = n > 0 ? X(0, 0) : 0.0;
    rule.width = 0.0;
    return rule;
  }

  switch (direction_criterion) {
    case SplitDirectionCriterion::MaxSpread: {
      Eigen::Index j;
      spread.maxCoeff(&j);
      rule.axis = static_cast<int>(j);
      break;
    }
    case SplitDirectionCriterion::MinLengthscale: {
      Eigen::Index j;
      gp.params().lengthscales.minCoeff(&j);
      rule.axis = static_cast<int>(j);
      break;
    }
    case SplitDirectionCriterion::MaxSpreadPerLengthscale: {
      Eigen::Index j;
      (spread.array() / gp.params().lengthscales.array()).matrix().maxCoeff(&j);
      rule.axis = static_cast<int>(j);
      break;
    }
    case SplitDirectionCriterion::MaxCorr: {
      const Eigen::VectorXd& y = node.points.y;
      const double ym = y.mean();
      const double ysd = std::sqrt((y.array() - ym).square().sum());
      double best = -1.0;
      Eigen::Index best_j = 0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double xm = X.col(j).mean();
        const double xsd = std::sqrt((X.col(j).array() - xm).square().sum());
        double corr = 0.0;
        if (xsd > 0.0 && ysd > 0.0) {
          corr = std::abs(((X.col(j).array() - xm) * (y.array() - ym)).sum() /
                          (xsd * ysd));
        }
        if (corr > best) {
          best = corr;
          best_j = j;
        }
      }
      rule.axis = static_cast<int>(best_j);
      break;
    }
    case SplitDirectionCriterion::PrincipalComponent: {
      Eigen::RowVectorXd mean = X.colwise().mean();
      Eigen::MatrixXd centered = X.rowwise() - mean;
      Eigen::MatrixXd cov =
          centered.transpose() * centered / double(std::max<Eigen::Index>(n - 1, 1));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
      Eigen::VectorXd v = es.eigenvectors().col(d - 1);  // leading eigenvector
      // Fix the sign for determinism.
      Eigen::Index imax;
      v.cwiseAbs().maxCoeff(&imax);
      if (v[imax] < 0.0) v = -v;
      rule.axis = -1;
      rule.direction = v;
      break;
    }
  }

  Eigen::VectorXd proj(n);
  for (Eigen::Index i = 0; i < n; ++i) proj[i] = rule.project(X.row(i).transpose());

  if (position_criterion == SplitPositionCriterion::Mean) {
    rule.position = proj.mean();
  } else {
    std::vector<double> sorted(proj.data(), proj.data() + n);
    std::sort(sorted.begin(), sorted.end());
    rule.position = (n % 2 == 1) ? sorted[n / 2]
                                 : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  rule.width = proj.maxCoeff() - proj.minCoeff();
  return rule;
}

Tree::Tree(TreeConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  Node root;
  root.id = "0";
  root.calib.scale = config_.calibration_initial_scale;
  nodes_.emplace("0", std::move(root));
}

const Node& Tree::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::out_of_range("no node with id " + id);
  return it->second;
}

std::vector<std::string> Tree::leaf_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, n] : nodes_)
    if (n.is_leaf()) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

std::string Tree::assign_leaf(const Eigen::VectorXd& x) {
  std::string cur = "0";
  while (true) {
    const Node& n = nodes_.at(cur);
    if (n.is_leaf()) return cur;
    const double p0 = branch_probability(*n.split, x);
    cur += rng_.bernoulli(p0) ? '0' : '1';
  }
}

std::map<std::string, double> Tree::marginal_probabilities(
    const Eigen::VectorXd& x) const {
  std::map<std::string, double> out;
  std::vector<std::pair<std::string, double>> stack{{"0", 1.0}};
  while (!stack.empty()) {
    auto [id, prob] = std::move(stack.back());
    stack.pop_back();
    const Node& n = nodes_.at(id);
    if (n.is_leaf()) {
      out[id] = prob;
      continue;
    }
    const double p0 = branch_probability(*n.split, x);
    if (prob * p0 > 0.0) stack.emplace_back(id + "0", prob * p0);
    if (prob * (1.0 - p0) > 0.0) stack.emplace_back(id + "1", prob * (1.0 - p0));
  }
  return out;
}

Tree::LeafContribution Tree::leaf_contribution(const Node& leaf,
                                               const Eigen::VectorXd& x) const {
  LeafContribution c{0.0, config_.untrained_prior_variance, leaf.calib.scale};
  if (leaf.gp) {
    const Prediction p = leaf.gp->predict(x);
    c.mean = p.mean;
    c.variance = p.variance;
  } else if (leaf.points.size() >= 1) {
    c.mean = leaf.points.y.mean();
    if (leaf.points.size() >= 2) {
      c.variance = (leaf.points.y.array() - c.mean).square().sum() /
                   double(leaf.points.size() - 1);
    }
  }
  return c;
}

Tree::JointPrediction Tree::joint_prediction(const Eigen::VectorXd& x_star) const {
  const auto probs = marginal_probabilities(x_star);
  double mean = 0.0, second_raw = 0.0, second_cal = 0.0;
  for (const auto& [id, p] : probs) {
    const LeafContribution c = leaf_contribution(nodes_.at(id), x_star);
    mean += p * c.mean;
    second_raw += p * (c.variance + c.mean * c.mean);
    const double var_cal = config_.use_empirical_error
                               ? c.scale * c.scale * c.variance
                               : c.variance;
    second_cal += p * (var_cal + c.mean * c.mean);
  }
  JointPrediction out;
  out.mean = mean;
  out.sigma_raw = std::sqrt(std::max(second_raw - mean * mean, 0.0));
  out.sigma_calibrated = std::sqrt(std::max(second_cal - mean * mean, 0.0));
  return out;
}

void Tree::refit_leaf(Node& leaf) {
  if (leaf.points.size() < 2) return;
  try {
    std::optional<HyperParams> warm;
    if (leaf.gp) warm = leaf.gp->hyper();
    leaf.gp = TrainedGP::fit(leaf.points, config_.kernel, warm);
  } catch (const std::runtime_error&) {
    // Keep the previous GP; the next buffer flush retries.
  }
}

void Tree::evict_shared(Node& child) {
  if (child.shared_count() == 0) return;
  // Child "0" sits on the high side of the split coordinate: it sheds its
  // lowest-projection shared point (lowest rank); child "1" the opposite.
  const bool high_side = child.id.back() == '0';
  Eigen::Index evict_i = -1;
  int evict_rank = 0;
  for (std::size_t i = 0; i < child.shared_rank.size(); ++i) {
    const int r = child.shared_rank[i];
    if (r < 0) continue;
    if (evict_i < 0 || (high_side ? r < evict_rank : r > evict_rank)) {
      evict_i = static_cast<Eigen::Index>(i);
      evict_rank = r;
    }
  }
  child.points.remove_rows({evict_i});
  child.shared_rank.erase(child.shared_rank.begin() + evict_i);

  const std::string sibling_id =
      child.id.substr(0, child.id.size() - 1) + (high_side ? '1' : '0');
  Node& sibling = nodes_.at(sibling_id);
  for (auto& r : sibling.shared_rank)
    if (r == evict_rank) {
      r = -1;
      break;
    }
}

void Tree::maybe_split(const std::string& id) {
  Node& n = nodes_.at(id);
  if (!n.is_leaf()) return;
  if (n.points.size() < config_.nbar) return;
  if (config_.gradual_split && n.shared_count() > 0) return;
  split_node(id);
}

void Tree::split_node(const std::string& id) {
  Node& parent = nodes_.at(id);
  if (!parent.is_leaf()) throw std::logic_error("split_node on internal node " + id);
  if (parent.points.size() < 2)
    throw std::logic_error("split_node needs at least two points");
  if (!parent.gp) parent.gp = TrainedGP::fit(parent.points, config_.kernel);

  const SplitRule rule =
      choose_split(parent, *parent.gp, config_.split_direction_criterion,
                   config_.split_position_criterion, config_.theta,
                   config_.shape_decay);
  const HyperParams warm = parent.gp->hyper();

  Node c0, c1;
  c0.id = id + "0";
  c1.id = id + "1";
  c0.calib = parent.calib;
  c1.calib = parent.calib;

  if (config_.gradual_split) {
    // Identical twins: both children inherit the full dataset; shared ranks
    // follow the projection order so eviction can walk in from both ends.
    const Eigen::Index n = parent.points.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::vector<double> proj(n);
    for (Eigen::Index i = 0; i < n; ++i)
      proj[i] = rule.project(parent.points.X.row(i).transpose());
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return proj[a] < proj[b]; });
    std::vector<int> rank(n);
    for (Eigen::Index r = 0; r < n; ++r) rank[order[r]] = static_cast<int>(r);

    c0.points = parent.points;
    c1.points = parent.points;
    c0.shared_rank = rank;
    c1.shared_rank = rank;
    TrainedGP child_gp = TrainedGP::fit(c0.points, config_.kernel, warm);
    c0.gp = child_gp;
    c1.gp = std::move(child_gp);
  } else {
    for (Eigen::Index i = 0; i < parent.points.size(); ++i) {
      const Eigen::VectorXd xi = parent.points.X.row(i).transpose();
      const double p0 = branch_probability(rule, xi);
      Node& dst = rng_.bernoulli(p0) ? c0 : c1;
      dst.points.append(xi, parent.points.y[i], parent.points.y_var[i]);
      dst.shared_rank.push_back(-1);
    }
    if (c0.points.size() >= 1)
      c0.gp = TrainedGP::fit(c0.points, config_.kernel, warm);
    if (c1.points.size() >= 1)
      c1.gp = TrainedGP::fit(c1.points, config_.kernel, warm);
  }

  parent.points = Dataset{};
  parent.shared_rank.clear();
  parent.gp.reset();
  parent.buffer_count = 0;
  parent.split = rule;

  nodes_.emplace(c0.id, std::move(c0));
  nodes_.emplace(c1.id, std::move(c1));
}

void Tree::update(const Eigen::VectorXd& x, double y, double y_var) {
  if (!x.allFinite() || !std::isfinite(y) || !std::isfinite(y_var))
    throw std::domain_error("update: non-finite input");
  if (y_var < 0.0) throw std::domain_error("update: y_var must be >= 0");

  const std::string leaf_id = assign_leaf(x);
  Node& leaf = nodes_.at(leaf_id);

  if (leaf.gp) {
    const Prediction pred = leaf.gp->predict(x);
    leaf.calib.push(y - pred.mean, std::sqrt(pred.variance));
    leaf.calib.scale = calibration_scale(leaf.calib, config_.calibration_rate_limit);
  }

  leaf.points.append(x, y, y_var);
  leaf.shared_rank.push_back(-1);
  if (config_.gradual_split && leaf.shared_count() > 0) evict_shared(leaf);

  ++leaf.buffer_count;
  if (leaf.buffer_count >= config_.buffer_length()) {
    refit_leaf(leaf);
    leaf.buffer_count = 0;
  }
  ++total_points_;

  std::string sibling_id;
  if (config_.gradual_split && leaf_id != "0") {
    sibling_id = leaf_id.substr(0, leaf_id.size() - 1) +
                 (leaf_id.back() == '0' ? '1' : '0');
  }
  maybe_split(leaf_id);
  // The eviction above may have cleared the sibling's last shared flag.
  if (!sibling_id.empty() && has_node(sibling_id)) maybe_split(sibling_id);
}

// ---------------------------------------------------------------------------
// Snapshot serialization

namespace {

json dataset_to_json(const Dataset& d) {
  json j;
  j["dim"] = d.X.cols();
  json rows = json::array();
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < d.X.cols(); ++c) row.push_back(d.X(i, c));
    rows.push_back(std::move(row));
  }
  j["X"] = std::move(rows);
  j["y"] = std::vector<double>(d.y.data(), d.y.data() + d.y.size());
  j["y_var"] = std::vector<double>(d.y_var.data(), d.y_var.data() + d.y_var.size());
  return j;
}

Dataset dataset_from_json(const json& j) {
  Dataset d;
  const Eigen::Index dim = j.at("dim").get<Eigen::Index>();
  const auto& rows = j.at("X");
  d.X.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (Eigen::Index i = 0; i < d.X.rows(); ++i)
    for (Eigen::Index c = 0; c < dim; ++c) d.X(i, c) = rows[i][c].get<double>();
  const auto y = j.at("y").get<std::vector<double>>();
  const auto yv = j.at("y_var").get<std::vector<double>>();
  d.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  d.y_var =
      Eigen::Map<const Eigen::VectorXd>(yv.data(), static_cast<Eigen::Index>(yv.size()));
  return d;
}

json config_to_json(const TreeConfig& c) {
  return json{
      {"nbar", c.nbar},
      {"retrain_buffer_length", c.retrain_buffer_length},
      {"theta", c.theta},
      {"gradual_split", c.gradual_split},
      {"kernel", kernel_kind_to_string(c.kernel)},
      {"split_direction_criterion", split_direction_to_string(c.split_direction_criterion)},
      {"split_position_criterion", split_position_to_string(c.split_position_criterion)},
      {"shape_decay", decay_shape_to_string(c.shape_decay)},
      {"use_empirical_error", c.use_empirical_error},
      {"seed", c.seed},
      {"calibration_initial_scale", c.calibration_initial_scale},
      {"calibration_rate_limit", c.calibration_rate_limit},
      {"untrained_prior_variance", c.untrained_prior_variance},
  };
}

TreeConfig config_from_json(const json& j) {
  TreeConfig c;
  c.nbar = j.at("nbar").get<int>();
  c.retrain_buffer_length = j.at("retrain_buffer_length").get<int>();
  c.theta = j.at("theta").get<double>();
  c.gradual_split = j.at("gradual_split").get<bool>();
  c.kernel = kernel_kind_from_string(j.at("kernel").get<std::string>());
  c.split_direction_criterion =
      split_direction_from_string(j.at("split_direction_criterion").get<std::string>());
  c.split_position_criterion =
      split_position_from_string(j.at("split_position_criterion").get<std::string>());
  c.shape_decay = decay_shape_from_string(j.at("shape_decay").get<std::string>());
  c.use_empirical_error = j.at("use_empirical_error").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.calibration_initial_scale = j.at("calibration_initial_scale").get<double>();
  c.calibration_rate_limit = j.at("calibration_rate_limit").get<double>();
  c.untrained_prior_variance = j.at("untrained_prior_variance").get<double>();
  return c;
}

}  // namespace

json Tree::to_json() const {
  json doc;
  doc["config"] = config_to_json(config_);
  doc["total_points"] = total_points_;
  doc["rng_counter"] = rng_.counter();
  json nodes = json::object();
  for (const auto& [id, n] : nodes_) {
    json nj;
    nj["points"] = dataset_to_json(n.points);
    nj["shared_rank"] = n.shared_rank;
    nj["buffer_count"] = n.buffer_count;
    if (n.gp) {
      const HyperParams& h = n.gp->hyper();
      // The conditioning set can lag behind the leaf's point set (buffered
      // arrivals, evictions), so it is stored alongside the hyperparameters.
      nj["gp"] = json{
          {"signal_variance", h.kernel.signal_variance},
          {"lengthscales",
           std::vector<double>(h.kernel.lengthscales.data(),
                               h.kernel.lengthscales.data() + h.kernel.lengthscales.size())},
          {"mean_const", h.mean_const},
          {"data", dataset_to_json(n.gp->dataset())},
      };
    } else {
      nj["gp"] = nullptr;
    }
    if (n.split) {
      const SplitRule& r = *n.split;
      nj["split"] = json{
          {"axis", r.axis},
          {"direction",
           std::vector<double>(r.direction.data(), r.direction.data() + r.direction.size())},
          {"position", r.position},
          {"width", r.width},
          {"theta", r.theta},
          {"decay", decay_shape_to_string(r.decay)},
      };
    } else {
      nj["split"] = nullptr;
    }
    json pairs = json::array();
    for (const auto& [e, s] : n.calib.pairs) pairs.push_back(json::array({e, s}));
    nj["calib"] = json{{"pairs", std::move(pairs)},
                       {"head", n.calib.head},
                       {"scale", n.calib.scale}};
    nodes[id] = std::move(nj);
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

Tree Tree::from_json(const json& doc) {
  Tree tree(config_from_json(doc.at("config")));
  tree.total_points_ = doc.at("total_points").get<std::size_t>();
  tree.rng_.set_counter(doc.at("rng_counter").get<std::uint64_t>());
  tree.nodes_.clear();
  for (const auto& [id, nj] : doc.at("nodes").items()) {
    Node n;
    n.id = id;
    n.points = dataset_from_json(nj.at("points"));
    n.shared_rank = nj.at("shared_rank").get<std::vector<int>>();
    n.buffer_count = nj.at("buffer_count").get<int>();
    if (!nj.at("gp").is_null()) {
      const json& gj = nj.at("gp");
      HyperParams h;
      h.kernel.signal_variance = gj.at("signal_variance").get<double>();
      const auto ls = gj.at("lengthscales").get<std::vector<double>>();
      h.kernel.lengthscales = Eigen::Map<const Eigen::VectorXd>(
          ls.data(), static_cast<Eigen::Index>(ls.size()));
      h.mean_const = gj.at("mean_const").get<double>();
      n.gp = TrainedGP::with_hyper(dataset_from_json(gj.at("data")),
                                   tree.config_.kernel, h);
    }
    if (!nj.at("split").is_null()) {
      const json& sj = nj.at("split");
      SplitRule r;
      r.axis = sj.at("axis").get<int>();
      const auto dir = sj.at("direction").get<std::vector<double>>();
      r.direction = Eigen::Map<const Eigen::VectorXd>(
          dir.data(), static_cast<Eigen::Index>(dir.size()));
      r.position = sj.at("position").get<double>();
      r.width = sj.at("width").get<double>();
      r.theta = sj.at("theta").get<double>();
      r.decay = decay_shape_from_string(sj.at("decay").get<std::string>());
      n.split = r;
    }
    const json& cj = nj.at("calib");
    for (const auto& pr : cj.at("pairs"))
      n.calib.pairs.emplace_back(pr[0].get<double>(), pr[1].get<double>());
    n.calib.head = cj.at("head").get<int>();
    n.calib.scale = cj.at("scale").get<double>();
    tree.nodes_.emplace(id, std::move(n));
  }
  return tree;
}

}  // namespace gptree
