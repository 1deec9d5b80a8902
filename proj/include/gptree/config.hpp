#ifndef GPTREE_CONFIG_HPP
#define GPTREE_CONFIG_HPP

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gptree/streams.hpp"
#include "gptree/targets.hpp"
#include "gptree/tree.hpp"

namespace gptree {

struct StreamSpec {
  enum class Kind { Uniform, De, Replay };
  Kind kind = Kind::Uniform;
  int dim = 0;  // 0: take the target's dimension
  std::uint64_t seed = 0;
  bool seed_set = false;
  // DE settings
  std::string loss = "rosenbrock4d";
  int population = 1000;
  int iterations = 300;
  double F = 0.8;
  double CR = 0.9;
  // Replay settings
  std::string path;
};

struct TargetSpec {
  std::string tag = "higdon1d";
  double noise_relative_sd = 0.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

struct RunSpec {
  std::size_t n_points = 50000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 0;
  double outlier_bound = 1e5;
  std::string out_dir = ".";
};

struct RunConfig {
  TreeConfig tree;
  StreamSpec stream;
  TargetSpec target;
  RunSpec run;
};

// Strict parse: unknown keys rejected, missing keys take defaults.
RunConfig parse_run_config(const nlohmann::json& doc);

// List-valued fields expand to a cartesian product in canonical field order
// (nbar, retrain_buffer_length, theta, gradual_split, kernel, split
// direction, split position, shape_decay, use_empirical_error, run seed).
std::vector<RunConfig> parse_sweep_config(const nlohmann::json& doc);

nlohmann::json run_config_to_json(const RunConfig& config);

std::unique_ptr<StreamSource> make_stream(const StreamSpec& spec, int target_dim);
std::unique_ptr<TargetFn> make_target(const TargetSpec& spec);

}  // namespace gptree

#endif
