#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cmd_output.txt";
  const std::string cmd = std::string(GPTREE_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

fs::path make_work_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
}

std::size_t count_lines(const fs::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_run_config(const fs::path& out_dir) {
  return json{
      {"tree",
       {{"nbar", 25}, {"retrain_buffer_length", 5}, {"theta", 0.0},
        {"gradual_split", false}}},
      {"stream", {{"kind", "uniform"}}},
      {"target", {{"tag", "higdon1d"}}},
      {"run",
       {{"n_points", 100}, {"burn_in", 10}, {"seed", 4},
        {"out_dir", out_dir.string()}}},
  };
}

}  // namespace

TEST_CASE("run executes a small configured benchmark") {
  const fs::path dir = make_work_dir("gptree_cli_run");
  write_json(dir / "config.json", small_run_config(dir));
  CmdResult r = run_cli("run --config " + (dir / "config.json").string(), dir);
  CHECK(r.exit_code == 0);
  CHECK(count_lines(dir / "records.csv") == 101);  // header + 100 rows
  CHECK(count_lines(dir / "summary.csv") == 2);
  CHECK(fs::exists(dir / "resolved_config.json"));
  const std::string summary = read_file(dir / "summary.csv");
  CHECK(summary.rfind("nbar,b,theta,kernel,split_dir", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("command line overrides beat the config file") {
  const fs::path dir = make_work_dir("gptree_cli_override");
  write_json(dir / "config.json", small_run_config(dir));
  CmdResult r = run_cli("run --config " + (dir / "config.json").string() +
                            " --theta 0.05 --kernel gauss",
                        dir);
  CHECK(r.exit_code == 0);
  const std::string summary = read_file(dir / "summary.csv");
  CHECK(summary.find("0.05") != std::string::npos);
  CHECK(summary.find("gauss") != std::string::npos);
  const json resolved = json::parse(read_file(dir / "resolved_config.json"));
  CHECK(resolved.at("tree").at("theta").get<double>() == 0.05);
  fs::remove_all(dir);
}

TEST_CASE("invalid configuration values exit with the config error code") {
  const fs::path dir = make_work_dir("gptree_cli_bad");
  write_json(dir / "config.json", small_run_config(dir));
  CmdResult r = run_cli("run --config " + (dir / "config.json").string() +
                            " --kernel rbf",
                        dir);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("rbf") != std::string::npos);

  json bad = small_run_config(dir);
  bad["tree"]["mystery_knob"] = 1;
  write_json(dir / "bad.json", bad);
  r = run_cli("run --config " + (dir / "bad.json").string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("mystery_knob") != std::string::npos);

  r = run_cli("run --config " + (dir / "missing.json").string(), dir);
  CHECK(r.exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("stream-gen materializes reproducible streams") {
  const fs::path dir = make_work_dir("gptree_cli_gen");
  json cfg{{"stream", {{"kind", "uniform"}, {"dim", 8}, {"seed", 11}}},
           {"target", {{"tag", "robotarm8d"}}},
           {"run", {{"n_points", 1000}, {"out_dir", dir.string()}}}};
  write_json(dir / "config.json", cfg);
  const std::string out1 = (dir / "s1.csv").string();
  const std::string out2 = (dir / "s2.csv").string();
  CmdResult r = run_cli("stream-gen --config " + (dir / "config.json").string() +
                            " --output " + out1,
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(count_lines(out1) == 1001);
  r = run_cli("stream-gen --config " + (dir / "config.json").string() +
                  " --output " + out2,
              dir);
  CHECK(r.exit_code == 0);
  CHECK(read_file(out1) == read_file(out2));
  fs::remove_all(dir);
}

TEST_CASE("sweep writes one summary row per combination") {
  const fs::path dir = make_work_dir("gptree_cli_sweep");
  json cfg = small_run_config(dir);
  cfg["tree"]["theta"] = json::array({0.0, 0.1});
  cfg["tree"]["gp_control"] = {{"kernel", json::array({"gauss", "matern3_2"})}};
  cfg["run"]["n_points"] = 60;
  write_json(dir / "sweep.json", cfg);
  CmdResult r = run_cli("sweep --config " + (dir / "sweep.json").string(), dir);
  CHECK(r.exit_code == 0);
  CHECK(count_lines(dir / "sweep_summary.csv") == 5);  // header + 4 rows
  fs::remove_all(dir);
}

TEST_CASE("calibrate-demo reports paired coverage columns") {
  const fs::path dir = make_work_dir("gptree_cli_cal");
  json cfg = small_run_config(dir);
  cfg["run"]["n_points"] = 300;
  write_json(dir / "config.json", cfg);
  CmdResult r =
      run_cli("calibrate-demo --config " + (dir / "config.json").string(), dir);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("coverage mean") != std::string::npos);
  const fs::path cov = dir / "coverage.csv";
  REQUIRE(fs::exists(cov));
  std::ifstream in(cov);
  std::string line;
  std::getline(in, line);
  CHECK(line == "batch,n,coverage_calibrated,coverage_uncalibrated");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
    ++rows;
  }
  CHECK(rows == 1);  // 300 records form a single (partial) batch
  fs::remove_all(dir);
}

TEST_CASE("an unknown subcommand fails fast") {
  const fs::path dir = make_work_dir("gptree_cli_unknown");
  CmdResult r = run_cli("frobnicate", dir);
  CHECK(r.exit_code != 0);
  fs::remove_all(dir);
}
