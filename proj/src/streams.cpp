#include "gptree/streams.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gptree {

UniformStream::UniformStream(int dim, std::uint64_t seed) : dim_(dim), rng_(seed) {
  if (dim < 1) throw std::invalid_argument("stream dimension must be >= 1");
}

std::optional<Eigen::VectorXd> UniformStream::next_point() {
  Eigen::VectorXd x(dim_);
  for (int j = 0; j < dim_; ++j) x[j] = rng_.uniform();
  return x;
}

DeStream::DeStream(std::function<double(const Eigen::VectorXd&)> loss, DeConfig config)
    : loss_(std::move(loss)),
      config_(config),
      rng_(config.seed),
      best_value_(std::numeric_limits<double>::infinity()) {
  if (config_.population < 4)
    throw std::invalid_argument("DE population must be >= 4");
  if (config_.dim < 1) throw std::invalid_argument("DE dimension must be >= 1");
  population_.reserve(config_.population);
  for (int i = 0; i < config_.population; ++i) {
    Eigen::VectorXd x(config_.dim);
    for (int j = 0; j < config_.dim; ++j) x[j] = rng_.uniform();
    population_.push_back(std::move(x));
  }
  fitness_.assign(config_.population, 0.0);
}

Eigen::VectorXd DeStream::make_trial(int target_index) {
  const int np = config_.population;
  auto pick = [&](std::initializer_list<int> exclude) {
    while (true) {
      int r = static_cast<int>(rng_.next_u64() % static_cast<std::uint64_t>(np));
      bool ok = true;
      for (int e : exclude)
        if (r == e) ok = false;
      if (ok) return r;
    }
  };
  const int r1 = pick({target_index});
  const int r2 = pick({target_index, r1});
  const int r3 = pick({target_index, r1, r2});

  Eigen::VectorXd trial = population_[target_index];
  const int jrand = static_cast<int>(rng_.next_u64() % static_cast<std::uint64_t>(config_.dim));
  for (int j = 0; j < config_.dim; ++j) {
    if (rng_.uniform() < config_.CR || j == jrand) {
      trial[j] = population_[r1][j] +
                 config_.F * (population_[r2][j] - population_[r3][j]);
    }
  }
  // Boundary clipping keeps every emitted point inside the unit box.
  for (int j = 0; j < config_.dim; ++j)
    trial[j] = std::clamp(trial[j], 0.0, 1.0);
  return trial;
}

std::optional<Eigen::VectorXd> DeStream::next_point() {
  if (done_) return std::nullopt;
  if (generation_ == 0) {
    const int i = cursor_;
    fitness_[i] = loss_(population_[i]);
    best_value_ = std::min(best_value_, fitness_[i]);
    Eigen::VectorXd out = population_[i];
    if (++cursor_ == config_.population) {
      generation_best_.push_back(best_value_);
      cursor_ = 0;
      generation_ = 1;
      if (config_.iterations == 0) done_ = true;
    }
    return out;
  }
  const int i = cursor_;
  Eigen::VectorXd trial = make_trial(i);
  const double f_trial = loss_(trial);
  if (f_trial <= fitness_[i]) {
    fitness_[i] = f_trial;
    population_[i] = trial;
    best_value_ = std::min(best_value_, f_trial);
  }
  if (++cursor_ == config_.population) {
    generation_best_.push_back(best_value_);
    cursor_ = 0;
    if (++generation_ > config_.iterations) done_ = true;
  }
  return trial;
}

DeResult de_minimize(const std::function<double(const Eigen::VectorXd&)>& loss,
                     const DeConfig& config) {
  DeStream stream(loss, config);
  DeResult result;
  result.trace.reserve(static_cast<std::size_t>(config.population) *
                       (config.iterations + 1));
  while (auto x = stream.next_point()) result.trace.push_back(std::move(*x));
  result.best_value = stream.best_value();
  result.generation_best = stream.generation_best();
  return result;
}

void write_stream_csv(const std::string& path,
                      const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) throw std::invalid_argument("cannot write an empty stream");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const Eigen::Index d = points.front().size();
  for (Eigen::Index j = 0; j < d; ++j) out << (j ? "," : "") << "x" << (j + 1);
  out << "\n";
  char buf[64];
  for (const auto& p : points) {
    for (Eigen::Index j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", p[j]);
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<Eigen::VectorXd> read_stream_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty stream file");
  const Eigen::Index d =
      1 + static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  std::vector<Eigen::VectorXd> points;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Eigen::VectorXd x(d);
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index j = 0;
    while (std::getline(ss, cell, ',')) {
      if (j >= d)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": too many columns");
      try {
        x[j++] = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": bad number '" + cell + "'");
      }
    }
    if (j != d)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(d) + " columns");
    points.push_back(std::move(x));
  }
  return points;
}

ReplayStream::ReplayStream(const std::string& path) {
  points_ = read_stream_csv(path);
  dim_ = points_.empty() ? 0 : static_cast<int>(points_.front().size());
}

std::optional<Eigen::VectorXd> ReplayStream::next_point() {
  if (cursor_ >= points_.size()) return std::nullopt;
  return points_[cursor_++];
}

}  // namespace gptree
