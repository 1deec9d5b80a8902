#include <doctest.h>

#include <nlohmann/json.hpp>

#include "gptree/config.hpp"

using namespace gptree;
using nlohmann::json;

TEST_CASE("an empty document yields the documented defaults") {
  RunConfig cfg = parse_run_config(json::object());
  CHECK(cfg.tree.nbar == 1000);
  CHECK(cfg.tree.buffer_length() == 1000);
  CHECK(cfg.tree.theta == 0.0);
  CHECK(cfg.tree.gradual_split);
  CHECK(cfg.tree.kernel == KernelKind::Matern32);
  CHECK(cfg.tree.split_direction_criterion ==
        SplitDirectionCriterion::MaxSpreadPerLengthscale);
  CHECK(cfg.tree.split_position_criterion == SplitPositionCriterion::Median);
  CHECK(cfg.tree.shape_decay == DecayShape::Linear);
  CHECK(cfg.tree.use_empirical_error);
  CHECK(cfg.target.tag == "higdon1d");
  CHECK(cfg.stream.kind == StreamSpec::Kind::Uniform);
  CHECK(cfg.run.n_points == 50000);
  CHECK(cfg.run.burn_in == 1000);
}

TEST_CASE("explicit settings override the defaults") {
  json doc = {
      {"tree",
       {{"nbar", 200},
        {"retrain_buffer_length", 15},
        {"theta", 0.05},
        {"gradual_split", false},
        {"wrapper", "internal"},
        {"gp_control", {{"kernel", "gauss"}}},
        {"split_direction_criterion", "max_spread"},
        {"split_position_criterion", "mean"},
        {"shape_decay", "gaussian"},
        {"use_empirical_error", false}}},
      {"stream", {{"kind", "de"}, {"loss", "eggholder4d"}, {"population", 40}}},
      {"target", {{"tag", "eggholder4d"}}},
      {"run", {{"n_points", 2000}, {"seed", 9}}},
  };
  RunConfig cfg = parse_run_config(doc);
  CHECK(cfg.tree.nbar == 200);
  CHECK(cfg.tree.buffer_length() == 15);
  CHECK(cfg.tree.theta == 0.05);
  CHECK(!cfg.tree.gradual_split);
  CHECK(cfg.tree.kernel == KernelKind::Gaussian);
  CHECK(cfg.tree.split_direction_criterion == SplitDirectionCriterion::MaxSpread);
  CHECK(cfg.tree.split_position_criterion == SplitPositionCriterion::Mean);
  CHECK(cfg.tree.shape_decay == DecayShape::Gaussian);
  CHECK(!cfg.tree.use_empirical_error);
  CHECK(cfg.stream.kind == StreamSpec::Kind::De);
  CHECK(cfg.stream.population == 40);
  CHECK(cfg.run.n_points == 2000);
}

TEST_CASE("seeds derive from the run seed unless pinned") {
  RunConfig cfg = parse_run_config(json{{"run", {{"seed", 100}}}});
  CHECK(cfg.tree.seed == 100);
  CHECK(cfg.stream.seed == 101);
  CHECK(cfg.target.seed == 102);

  cfg = parse_run_config(
      json{{"run", {{"seed", 100}}}, {"stream", {{"seed", 7}}}});
  CHECK(cfg.stream.seed == 7);
  CHECK(cfg.target.seed == 102);
}

TEST_CASE("unknown keys and values are rejected") {
  CHECK_THROWS_AS(parse_run_config(json{{"tres", json::object()}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(json{{"tree", {{"n_bar", 100}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_run_config(json{{"tree", {{"gp_control", {{"kernel", "rbf"}}}}}}),
      std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(json{{"tree", {{"wrapper", "gpytorch"}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(json{{"tree", {{"theta", 2.0}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(json{{"target", {{"tag", "branin"}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(json{{"stream", {{"kind", "replay"}}}}),
                  std::invalid_argument);  // replay requires a path
}

TEST_CASE("sweeps expand list fields into a cartesian product") {
  json doc = {
      {"tree",
       {{"theta", json::array({0.0, 0.05, 0.1, 0.2})},
        {"gradual_split", false},
        {"gp_control", {{"kernel", json::array({"gauss", "matern3_2", "matern5_2"})}}}}},
  };
  const auto configs = parse_sweep_config(doc);
  REQUIRE(configs.size() == 12);
  // Canonical order: theta varies slowest of the two lists, kernel fastest.
  CHECK(configs[0].tree.theta == 0.0);
  CHECK(configs[0].tree.kernel == KernelKind::Gaussian);
  CHECK(configs[1].tree.theta == 0.0);
  CHECK(configs[1].tree.kernel == KernelKind::Matern32);
  CHECK(configs[2].tree.kernel == KernelKind::Matern52);
  CHECK(configs[3].tree.theta == 0.05);
  CHECK(configs[3].tree.kernel == KernelKind::Gaussian);
  CHECK(configs[11].tree.theta == 0.2);
  CHECK(configs[11].tree.kernel == KernelKind::Matern52);
  for (const auto& c : configs) CHECK(!c.tree.gradual_split);
}

TEST_CASE("sweeps cover the run seed and reject scalar-only documents") {
  json doc = {{"run", {{"seed", json::array({1, 2, 3})}}}};
  const auto configs = parse_sweep_config(doc);
  REQUIRE(configs.size() == 3);
  CHECK(configs[0].run.seed == 1);
  CHECK(configs[0].stream.seed == 2);
  CHECK(configs[2].run.seed == 3);

  CHECK_THROWS_AS(parse_sweep_config(json{{"tree", {{"nbar", 100}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_sweep_config(json{{"tree", {{"theta", json::array()}}}}),
      std::invalid_argument);
}

TEST_CASE("a resolved config document parses back to the same settings") {
  json doc = {
      {"tree", {{"nbar", 50}, {"theta", 0.1}, {"gradual_split", false}}},
      {"stream", {{"kind", "de"}, {"loss", "rosenbrock4d"}}},
      {"target", {{"tag", "rosenbrock4d"}}},
      {"run", {{"seed", 5}, {"n_points", 1234}}},
  };
  RunConfig cfg = parse_run_config(doc);
  RunConfig back = parse_run_config(run_config_to_json(cfg));
  CHECK(back.tree.nbar == cfg.tree.nbar);
  CHECK(back.tree.theta == cfg.tree.theta);
  CHECK(back.tree.gradual_split == cfg.tree.gradual_split);
  CHECK(back.stream.kind == cfg.stream.kind);
  CHECK(back.stream.loss == cfg.stream.loss);
  CHECK(back.stream.seed == cfg.stream.seed);
  CHECK(back.target.seed == cfg.target.seed);
  CHECK(back.run.n_points == cfg.run.n_points);
}

TEST_CASE("stream factories build the configured sources") {
  StreamSpec spec;
  spec.kind = StreamSpec::Kind::Uniform;
  spec.seed = 3;
  auto s = make_stream(spec, 4);
  CHECK(s->dim() == 4);

  spec.kind = StreamSpec::Kind::De;
  spec.loss = "eggholder4d";
  spec.population = 20;
  spec.iterations = 2;
  auto de = make_stream(spec, 4);
  CHECK(de->dim() == 4);
  std::size_t n = 0;
  while (de->next_point()) ++n;
  CHECK(n == 60);

  // A DE loss whose dimension conflicts with the stream dimension fails.
  spec.loss = "rosenbrock8d";
  CHECK_THROWS_AS(make_stream(spec, 4), std::invalid_argument);
}

TEST_CASE("target factory applies the noise wrapper") {
  TargetSpec spec;
  spec.tag = "rosenbrock4d";
  spec.noise_relative_sd = 0.0;
  auto clean = gptree::make_target(spec);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(4, 0.4);
  CHECK(clean->evaluate(u).y_var == 0.0);

  spec.noise_relative_sd = 0.1;
  auto noisy = gptree::make_target(spec);
  CHECK(noisy->evaluate(u).y_var == 0.0);  // value is 0 at the optimum
  Eigen::VectorXd v = Eigen::VectorXd::Constant(4, 0.9);
  CHECK(noisy->evaluate(v).y_var > 0.0);
}
