#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "gptree/bench.hpp"
#include "gptree/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gptree;

namespace {

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> nbar;
  std::optional<int> buffer;
  std::optional<double> theta;
  bool theta_given = false;
  std::optional<std::string> kernel;
  std::optional<std::string> split_dir;
  std::optional<std::string> split_pos;
  std::optional<std::string> gradual_split;
  std::optional<std::string> decay;
  std::optional<std::string> calibrate;
  std::optional<std::string> wrapper;
  std::optional<std::size_t> points;
  std::optional<std::size_t> burn_in;
};

bool parse_bool_flag(const std::string& value, const char* flag) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument(std::string(flag) +
                              " expects true/false (or 1/0), got '" + value + "'");
}

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config document");
  cmd->add_option("--seed", o.seed, "Run seed (overrides run.seed)");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--nbar", o.nbar, "Leaf size cap N-bar");
  cmd->add_option("--buffer", o.buffer, "Retrain buffer length b");
  cmd->add_option("--theta", o.theta, "Overlap parameter in [0,1]");
  cmd->add_option("--kernel", o.kernel, "gauss | matern3_2 | matern5_2");
  cmd->add_option("--split-dir", o.split_dir, "Split direction criterion");
  cmd->add_option("--split-pos", o.split_pos, "mean | median");
  cmd->add_option("--gradual-split", o.gradual_split, "true | false");
  cmd->add_option("--decay", o.decay,
                  "linear | exponential | gaussian | deterministic");
  cmd->add_option("--calibrate", o.calibrate,
                  "true | false (uncertainty calibration)");
  cmd->add_option("--wrapper", o.wrapper, "GP engine (internal)");
  cmd->add_option("--points", o.points, "Number of stream points");
  cmd->add_option("--burn-in", o.burn_in, "Records excluded from indicators");
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.nbar) cfg.tree.nbar = *o.nbar;
  if (o.buffer) cfg.tree.retrain_buffer_length = *o.buffer;
  if (o.theta) cfg.tree.theta = *o.theta;
  if (o.kernel) cfg.tree.kernel = kernel_kind_from_string(*o.kernel);
  if (o.split_dir)
    cfg.tree.split_direction_criterion = split_direction_from_string(*o.split_dir);
  if (o.split_pos)
    cfg.tree.split_position_criterion = split_position_from_string(*o.split_pos);
  if (o.gradual_split)
    cfg.tree.gradual_split = parse_bool_flag(*o.gradual_split, "--gradual-split");
  if (o.decay) cfg.tree.shape_decay = decay_shape_from_string(*o.decay);
  if (o.calibrate)
    cfg.tree.use_empirical_error = parse_bool_flag(*o.calibrate, "--calibrate");
  if (o.wrapper && *o.wrapper != "internal")
    throw std::invalid_argument("unknown wrapper '" + *o.wrapper +
                                "' (allowed: internal)");
  if (o.points) cfg.run.n_points = *o.points;
  if (o.burn_in) cfg.run.burn_in = *o.burn_in;
  if (o.out_dir) cfg.run.out_dir = *o.out_dir;
  if (o.seed) {
    cfg.run.seed = *o.seed;
    cfg.tree.seed = *o.seed;
    if (!cfg.stream.seed_set) cfg.stream.seed = *o.seed + 1;
    if (!cfg.target.seed_set) cfg.target.seed = *o.seed + 2;
  }
  cfg.tree.validate();
}

json load_config_doc(const Overrides& o) {
  if (!o.config_path) return json::object();
  std::ifstream in(*o.config_path);
  if (!in) throw std::invalid_argument("cannot open config file " + *o.config_path);
  return json::parse(in);
}

void print_summary(const SummaryRow& row) {
  std::printf("nbar=%d b=%d %s=%s kernel=%s split_dir=%s rmse=%.6g delta005=%.4f "
              "uncert=%.6g t_upd=%.3gs t_pred=%.3gs outliers=%zu\n",
              row.config.nbar, row.config.buffer_length(),
              row.config.gradual_split ? "split" : "theta",
              row.config.gradual_split
                  ? "gradual"
                  : std::to_string(row.config.theta).c_str(),
              kernel_kind_to_string(row.config.kernel).c_str(),
              split_direction_to_string(row.config.split_direction_criterion).c_str(),
              row.summary.rmse, row.summary.delta_005, row.summary.mean_uncertainty,
              row.summary.mean_t_update, row.summary.mean_t_pred,
              row.summary.n_outliers_removed);
}

SummaryRow execute_run(const RunConfig& cfg, bool write_outputs) {
  auto target = make_target(cfg.target);
  auto stream = make_stream(cfg.stream, target->dim());
  RunOptions ro;
  ro.n_points = cfg.run.n_points;
  ro.burn_in = cfg.run.burn_in;
  ro.outlier_bound = cfg.run.outlier_bound;
  RunResult result = run(cfg.tree, *stream, *target, ro);

  SummaryRow row;
  row.config = cfg.tree;
  row.summary = result.summary;
  if (write_outputs) {
    fs::create_directories(cfg.run.out_dir);
    write_records_csv(result.records, cfg.run.out_dir + "/records.csv");
    emit_csv({row}, cfg.run.out_dir + "/summary.csv");
    std::ofstream cj(cfg.run.out_dir + "/resolved_config.json");
    cj << run_config_to_json(cfg).dump(2) << "\n";
  }
  return row;
}

int cmd_run(const Overrides& o) {
  RunConfig cfg = parse_run_config(load_config_doc(o));
  apply_overrides(cfg, o);
  SummaryRow row = execute_run(cfg, true);
  print_summary(row);
  return 0;
}

int cmd_sweep(const Overrides& o) {
  std::vector<RunConfig> configs = parse_sweep_config(load_config_doc(o));
  for (auto& cfg : configs) apply_overrides(cfg, o);

  std::vector<SummaryRow> rows;
  rows.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::fprintf(stderr, "[%zu/%zu] ", i + 1, configs.size());
    SummaryRow row;
    row.config = configs[i].tree;
    try {
      row = execute_run(configs[i], false);
      print_summary(row);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      std::fprintf(stderr, "failed: %s\n", e.what());
    }
    rows.push_back(std::move(row));
  }
  const std::string out_dir = configs.empty() ? "." : configs.front().run.out_dir;
  fs::create_directories(out_dir);
  emit_csv(rows, out_dir + "/sweep_summary.csv");
  std::printf("wrote %zu rows to %s/sweep_summary.csv\n", rows.size(), out_dir.c_str());
  return 0;
}

int cmd_stream_gen(const Overrides& o, const std::string& output) {
  RunConfig cfg = parse_run_config(load_config_doc(o));
  apply_overrides(cfg, o);

  auto target = make_target(cfg.target);
  auto stream = make_stream(cfg.stream, target->dim());
  std::vector<Eigen::VectorXd> points;
  // DE streams have an intrinsic length; bounded streams stop on their own.
  const std::size_t limit = cfg.stream.kind == StreamSpec::Kind::Uniform
                                ? cfg.run.n_points
                                : std::size_t(-1);
  while (points.size() < limit) {
    auto x = stream->next_point();
    if (!x) break;
    points.push_back(std::move(*x));
  }
  std::string path = output;
  if (path.empty()) path = cfg.run.out_dir + "/stream.csv";
  fs::create_directories(fs::path(path).parent_path().empty()
                             ? "."
                             : fs::path(path).parent_path().string());
  write_stream_csv(path, points);
  std::printf("%zu points written to %s\n", points.size(), path.c_str());
  return 0;
}

int cmd_calibrate_demo(const Overrides& o) {
  RunConfig cfg = parse_run_config(load_config_doc(o));
  apply_overrides(cfg, o);
  if (!o.theta) cfg.tree.theta = 0.0;  // local calibration is exact at theta=0

  auto run_once = [&](bool calibrate) {
    RunConfig c = cfg;
    c.tree.use_empirical_error = calibrate;
    auto target = make_target(c.target);
    auto stream = make_stream(c.stream, target->dim());
    RunOptions ro;
    ro.n_points = c.run.n_points;
    ro.burn_in = c.run.burn_in;
    ro.outlier_bound = c.run.outlier_bound;
    return run(c.tree, *stream, *target, ro);
  };

  RunResult with = run_once(true);
  RunResult without = run_once(false);
  const auto cov_with = coverage_batches(with.records, 2000, true);
  const auto cov_without = coverage_batches(without.records, 2000, false);

  fs::create_directories(cfg.run.out_dir);
  const std::string path = cfg.run.out_dir + "/coverage.csv";
  std::ofstream out(path);
  out << "batch,n,coverage_calibrated,coverage_uncalibrated\n";
  for (std::size_t i = 0; i < cov_with.size(); ++i) {
    out << i << "," << cov_with[i].count << "," << cov_with[i].fraction << ","
        << cov_without[i].fraction << "\n";
  }
  double mean_with = 0.0, mean_without = 0.0;
  for (std::size_t i = 0; i < cov_with.size(); ++i) {
    mean_with += cov_with[i].fraction;
    mean_without += cov_without[i].fraction;
  }
  if (!cov_with.empty()) {
    mean_with /= double(cov_with.size());
    mean_without /= double(cov_with.size());
  }
  std::printf("coverage mean: calibrated=%.4f uncalibrated=%.4f (target 0.68)\n",
              mean_with, mean_without);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming GP-tree regression and benchmark harness"};
  app.require_subcommand(1);

  Overrides o;
  std::string gen_output;
  auto* run_cmd = app.add_subcommand("run", "Execute one benchmark run");
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Cartesian sweep over list-valued config fields");
  auto* gen_cmd = app.add_subcommand("stream-gen", "Materialize a stream to CSV");
  auto* cal_cmd = app.add_subcommand(
      "calibrate-demo", "Coverage batches with and without uncertainty calibration");
  for (auto* cmd : {run_cmd, sweep_cmd, gen_cmd, cal_cmd}) add_common_options(cmd, o);
  gen_cmd->add_option("--output", gen_output, "Stream CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(o);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
    if (gen_cmd->parsed()) return cmd_stream_gen(o, gen_output);
    if (cal_cmd->parsed()) return cmd_calibrate_demo(o);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
