#include "gptree/config.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gptree {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw std::invalid_argument("config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + key + "' in config section '" +
                                  section + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_tree_section(const json& j, TreeConfig& tree) {
  check_keys(j, "tree",
             {"nbar", "retrain_buffer_length", "theta", "gradual_split", "wrapper",
              "gp_control", "split_direction_criterion", "split_position_criterion",
              "shape_decay", "use_empirical_error", "calibration_initial_scale",
              "calibration_rate_limit"});
  read(j, "nbar", tree.nbar);
  read(j, "retrain_buffer_length", tree.retrain_buffer_length);
  read(j, "theta", tree.theta);
  read(j, "gradual_split", tree.gradual_split);
  if (j.contains("wrapper")) {
    const auto w = j.at("wrapper").get<std::string>();
    if (w != "internal")
      throw std::invalid_argument("unknown wrapper '" + w +
                                  "' (allowed: internal)");
  }
  if (j.contains("gp_control")) {
    const json& gc = j.at("gp_control");
    check_keys(gc, "tree.gp_control", {"kernel"});
    if (gc.contains("kernel"))
      tree.kernel = kernel_kind_from_string(gc.at("kernel").get<std::string>());
  }
  if (j.contains("split_direction_criterion"))
    tree.split_direction_criterion = split_direction_from_string(
        j.at("split_direction_criterion").get<std::string>());
  if (j.contains("split_position_criterion"))
    tree.split_position_criterion = split_position_from_string(
        j.at("split_position_criterion").get<std::string>());
  if (j.contains("shape_decay"))
    tree.shape_decay = decay_shape_from_string(j.at("shape_decay").get<std::string>());
  read(j, "use_empirical_error", tree.use_empirical_error);
  read(j, "calibration_initial_scale", tree.calibration_initial_scale);
  read(j, "calibration_rate_limit", tree.calibration_rate_limit);
}

void parse_stream_section(const json& j, StreamSpec& stream) {
  check_keys(j, "stream",
             {"kind", "dim", "seed", "loss", "population", "iterations", "F", "CR",
              "path"});
  if (j.contains("kind")) {
    const auto k = j.at("kind").get<std::string>();
    if (k == "uniform")
      stream.kind = StreamSpec::Kind::Uniform;
    else if (k == "de")
      stream.kind = StreamSpec::Kind::De;
    else if (k == "replay")
      stream.kind = StreamSpec::Kind::Replay;
    else
      throw std::invalid_argument("unknown stream kind '" + k +
                                  "' (allowed: uniform, de, replay)");
  }
  read(j, "dim", stream.dim);
  if (j.contains("seed")) {
    stream.seed = j.at("seed").get<std::uint64_t>();
    stream.seed_set = true;
  }
  read(j, "loss", stream.loss);
  read(j, "population", stream.population);
  read(j, "iterations", stream.iterations);
  read(j, "F", stream.F);
  read(j, "CR", stream.CR);
  read(j, "path", stream.path);
  if (stream.kind == StreamSpec::Kind::Replay && stream.path.empty())
    throw std::invalid_argument("stream kind 'replay' requires 'path'");
}

void parse_target_section(const json& j, TargetSpec& target) {
  check_keys(j, "target", {"tag", "noise_relative_sd", "seed"});
  read(j, "tag", target.tag);
  read(j, "noise_relative_sd", target.noise_relative_sd);
  if (j.contains("seed")) {
    target.seed = j.at("seed").get<std::uint64_t>();
    target.seed_set = true;
  }
  if (target.noise_relative_sd < 0.0)
    throw std::invalid_argument("noise_relative_sd must be >= 0");
}

void parse_run_section(const json& j, RunSpec& run) {
  check_keys(j, "run", {"n_points", "burn_in", "seed", "outlier_bound", "out_dir"});
  read(j, "n_points", run.n_points);
  read(j, "burn_in", run.burn_in);
  read(j, "seed", run.seed);
  read(j, "outlier_bound", run.outlier_bound);
  read(j, "out_dir", run.out_dir);
}

void resolve_seeds(RunConfig& config) {
  config.tree.seed = config.run.seed;
  if (!config.stream.seed_set) config.stream.seed = config.run.seed + 1;
  if (!config.target.seed_set) config.target.seed = config.run.seed + 2;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  check_keys(doc, "(top level)", {"tree", "stream", "target", "run"});
  RunConfig config;
  if (doc.contains("tree")) parse_tree_section(doc.at("tree"), config.tree);
  if (doc.contains("stream")) parse_stream_section(doc.at("stream"), config.stream);
  if (doc.contains("target")) parse_target_section(doc.at("target"), config.target);
  if (doc.contains("run")) parse_run_section(doc.at("run"), config.run);
  config.tree.validate();
  resolve_seeds(config);
  // Target tag validation happens eagerly so bad configs fail before a run.
  make_target(config.target);
  return config;
}

std::vector<RunConfig> parse_sweep_config(const json& doc) {
  struct SweepField {
    std::vector<const char*> path;
    std::vector<json> values;
    bool was_list = false;
  };
  std::vector<SweepField> fields = {
      {{"tree", "nbar"}, {}},
      {{"tree", "retrain_buffer_length"}, {}},
      {{"tree", "theta"}, {}},
      {{"tree", "gradual_split"}, {}},
      {{"tree", "gp_control", "kernel"}, {}},
      {{"tree", "split_direction_criterion"}, {}},
      {{"tree", "split_position_criterion"}, {}},
      {{"tree", "shape_decay"}, {}},
      {{"tree", "use_empirical_error"}, {}},
      {{"run", "seed"}, {}},
  };

  auto lookup = [](const json& root, const std::vector<const char*>& path) -> const json* {
    const json* cur = &root;
    for (const char* key : path) {
      if (!cur->is_object() || !cur->contains(key)) return nullptr;
      cur = &cur->at(key);
    }
    return cur;
  };

  bool any_list = false;
  for (auto& f : fields) {
    const json* v = lookup(doc, f.path);
    if (!v) continue;
    if (v->is_array()) {
      f.was_list = true;
      any_list = true;
      if (v->empty())
        throw std::invalid_argument("sweep list for '" + std::string(f.path.back()) +
                                    "' is empty");
      for (const auto& item : *v) f.values.push_back(item);
    } else {
      f.values.push_back(*v);
    }
  }
  if (!any_list)
    throw std::invalid_argument("sweep config needs at least one list-valued field");

  auto assign = [](json& root, const std::vector<const char*>& path, const json& value) {
    json* cur = &root;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!cur->contains(path[i])) (*cur)[path[i]] = json::object();
      cur = &(*cur)[path[i]];
    }
    (*cur)[path.back()] = value;
  };

  // Product order follows the canonical field order, last field fastest.
  std::size_t total = 1;
  for (const auto& f : fields)
    if (!f.values.empty()) total *= f.values.size();

  std::vector<RunConfig> out;
  out.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    json combo = doc;
    std::size_t rem = n;
    for (std::size_t f = fields.size(); f-- > 0;) {
      if (fields[f].values.empty()) continue;
      const std::size_t k = fields[f].values.size();
      assign(combo, fields[f].path, fields[f].values[rem % k]);
      rem /= k;
    }
    out.push_back(parse_run_config(combo));
  }
  return out;
}

json run_config_to_json(const RunConfig& config) {
  const TreeConfig& t = config.tree;
  json tree{
      {"nbar", t.nbar},
      {"retrain_buffer_length", t.buffer_length()},
      {"theta", t.theta},
      {"gradual_split", t.gradual_split},
      {"wrapper", "internal"},
      {"gp_control", json{{"kernel", kernel_kind_to_string(t.kernel)}}},
      {"split_direction_criterion", split_direction_to_string(t.split_direction_criterion)},
      {"split_position_criterion", split_position_to_string(t.split_position_criterion)},
      {"shape_decay", decay_shape_to_string(t.shape_decay)},
      {"use_empirical_error", t.use_empirical_error},
      {"calibration_initial_scale", t.calibration_initial_scale},
      {"calibration_rate_limit", t.calibration_rate_limit},
  };
  json stream;
  switch (config.stream.kind) {
    case StreamSpec::Kind::Uniform:
      stream = json{{"kind", "uniform"}, {"dim", config.stream.dim},
                    {"seed", config.stream.seed}};
      break;
    case StreamSpec::Kind::De:
      stream = json{{"kind", "de"},
                    {"loss", config.stream.loss},
                    {"population", config.stream.population},
                    {"iterations", config.stream.iterations},
                    {"F", config.stream.F},
                    {"CR", config.stream.CR},
                    {"seed", config.stream.seed}};
      break;
    case StreamSpec::Kind::Replay:
      stream = json{{"kind", "replay"}, {"path", config.stream.path}};
      break;
  }
  json target{{"tag", config.target.tag},
              {"noise_relative_sd", config.target.noise_relative_sd},
              {"seed", config.target.seed}};
  json run{{"n_points", config.run.n_points},
           {"burn_in", config.run.burn_in},
           {"seed", config.run.seed},
           {"outlier_bound", config.run.outlier_bound},
           {"out_dir", config.run.out_dir}};
  return json{{"tree", std::move(tree)},
              {"stream", std::move(stream)},
              {"target", std::move(target)},
              {"run", std::move(run)}};
}

std::unique_ptr<StreamSource> make_stream(const StreamSpec& spec, int target_dim) {
  const int dim = spec.dim > 0 ? spec.dim : target_dim;
  switch (spec.kind) {
    case StreamSpec::Kind::Uniform:
      return std::make_unique<UniformStream>(dim, spec.seed);
    case StreamSpec::Kind::De: {
      auto loss_target = make_target(spec.loss, /*seed=*/0);
      if (loss_target->dim() != dim)
        throw std::invalid_argument("DE loss dimension does not match stream dimension");
      DeConfig de;
      de.dim = dim;
      de.population = spec.population;
      de.iterations = spec.iterations;
      de.F = spec.F;
      de.CR = spec.CR;
      de.seed = spec.seed;
      auto shared = std::shared_ptr<TargetFn>(std::move(loss_target));
      return std::make_unique<DeStream>(
          [shared](const Eigen::VectorXd& x) { return shared->evaluate(x).y; }, de);
    }
    case StreamSpec::Kind::Replay:
      return std::make_unique<ReplayStream>(spec.path);
  }
  throw std::logic_error("unreachable stream kind");
}

std::unique_ptr<TargetFn> make_target(const TargetSpec& spec) {
  auto target = make_target(spec.tag, spec.seed);
  if (spec.noise_relative_sd > 0.0)
    target = add_noise(std::move(target), spec.noise_relative_sd, spec.seed + 1);
  return target;
}

}  // namespace gptree
