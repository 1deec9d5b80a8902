#include "gptree/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gptree {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void print_double(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

RunResult run(const TreeConfig& config, StreamSource& stream, TargetFn& target,
              const RunOptions& options) {
  Tree tree(config);
  std::vector<RunRecord> records;
  records.reserve(options.n_points);
  for (std::size_t i = 0; i < options.n_points; ++i) {
    auto x = stream.next_point();
    if (!x) break;
    RunRecord rec;
    rec.index = i;
    rec.x = *x;

    double t0 = now_seconds();
    const Tree::JointPrediction pred = tree.joint_prediction(*x);
    rec.t_pred = now_seconds() - t0;
    rec.mu_pred = pred.mean;
    rec.sigma_raw = pred.sigma_raw;
    rec.sigma_calibrated = pred.sigma_calibrated;

    const TargetOutput out = target.evaluate(*x);
    rec.y_true = out.y;

    t0 = now_seconds();
    tree.update(*x, out.y, out.y_var);
    rec.t_update = now_seconds() - t0;
    records.push_back(std::move(rec));
  }
  IndicatorSummary summary =
      compute_indicators(records, options.burn_in, options.outlier_bound);
  return RunResult{std::move(records), std::move(summary), std::move(tree)};
}

IndicatorSummary compute_indicators(const std::vector<RunRecord>& records,
                                    std::size_t burn_in, double outlier_bound) {
  IndicatorSummary s;
  std::vector<const RunRecord*> eligible;
  for (const auto& r : records)
    if (r.index >= burn_in) eligible.push_back(&r);
  if (eligible.empty()) {
    s.rmse = s.delta_005 = s.mean_uncertainty = kNan;
    s.mean_t_update = s.mean_t_pred = kNan;
    return s;
  }

  std::vector<const RunRecord*> filtered;
  for (const auto* r : eligible) {
    if (std::abs(r->mu_pred) > outlier_bound) {
      ++s.n_outliers_removed;
    } else {
      filtered.push_back(r);
    }
  }

  if (filtered.empty()) {
    s.rmse = s.delta_005 = kNan;
  } else {
    double sq = 0.0;
    for (const auto* r : filtered) {
      const double e = r->mu_pred - r->y_true;
      sq += e * e;
    }
    s.rmse = std::sqrt(sq / double(filtered.size()));

    const std::size_t window = std::min<std::size_t>(2000, filtered.size());
    s.delta_window_truncated = filtered.size() < 2000;
    std::size_t hits = 0;
    for (std::size_t i = filtered.size() - window; i < filtered.size(); ++i) {
      const auto* r = filtered[i];
      const double rel =
          std::abs(r->mu_pred - r->y_true) / std::max(std::abs(r->y_true), 1e-12);
      if (rel < 0.05) ++hits;
    }
    s.delta_005 = double(hits) / double(window);
  }

  double su = 0.0, tu = 0.0, tp = 0.0;
  for (const auto* r : eligible) {
    su += r->sigma_raw;
    tu += r->t_update;
    tp += r->t_pred;
  }
  s.mean_uncertainty = su / double(eligible.size());
  s.mean_t_update = tu / double(eligible.size());
  s.mean_t_pred = tp / double(eligible.size());

  std::vector<RunRecord> eligible_copy;
  eligible_copy.reserve(eligible.size());
  for (const auto* r : eligible) eligible_copy.push_back(*r);
  for (const auto& b : coverage_batches(eligible_copy, 2000, true))
    s.coverage_per_batch.push_back(b.fraction);
  return s;
}

std::vector<BatchFraction> coverage_batches(const std::vector<RunRecord>& records,
                                            std::size_t batch_size,
                                            bool use_calibrated) {
  std::vector<BatchFraction> out;
  for (std::size_t start = 0; start < records.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, records.size());
    BatchFraction b;
    b.count = end - start;
    b.partial = b.count < batch_size;
    std::size_t hits = 0;
    for (std::size_t i = start; i < end; ++i) {
      const double sigma =
          use_calibrated ? records[i].sigma_calibrated : records[i].sigma_raw;
      if (std::abs(records[i].mu_pred - records[i].y_true) <= sigma) ++hits;
    }
    b.fraction = b.count ? double(hits) / double(b.count) : 0.0;
    out.push_back(b);
  }
  return out;
}

std::vector<BatchFraction> accuracy_fraction_batches(
    const std::vector<RunRecord>& records, double threshold,
    std::size_t batch_size) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");
  std::vector<BatchFraction> out;
  for (std::size_t start = 0; start < records.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, records.size());
    BatchFraction b;
    b.count = end - start;
    b.partial = b.count < batch_size;
    std::size_t hits = 0;
    for (std::size_t i = start; i < end; ++i) {
      const double rel = std::abs(records[i].mu_pred - records[i].y_true) /
                         std::max(std::abs(records[i].y_true), 1e-12);
      if (rel < threshold) ++hits;
    }
    b.fraction = b.count ? double(hits) / double(b.count) : 0.0;
    out.push_back(b);
  }
  return out;
}

void emit_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "nbar,b,theta,kernel,split_dir,rmse,delta005,uncert,t_upd,t_pred\n";
  for (const auto& row : rows) {
    const TreeConfig& c = row.config;
    out << c.nbar << "," << c.buffer_length() << ",";
    if (c.gradual_split) {
      out << "grad.split";
    } else {
      print_double(out, c.theta);
    }
    out << "," << kernel_kind_to_string(c.kernel) << ","
        << split_direction_to_string(c.split_direction_criterion) << ",";
    if (row.failed) {
      out << "error,error,error,error,error";
    } else {
      print_double(out, row.summary.rmse);
      out << ",";
      print_double(out, row.summary.delta_005);
      out << ",";
      print_double(out, row.summary.mean_uncertainty);
      out << ",";
      print_double(out, row.summary.mean_t_update);
      out << ",";
      print_double(out, row.summary.mean_t_pred);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_records_csv(const std::vector<RunRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const Eigen::Index d = records.empty() ? 0 : records.front().x.size();
  out << "i";
  for (Eigen::Index j = 0; j < d; ++j) out << ",x" << (j + 1);
  out << ",y,mu,sigma_raw,sigma_cal,t_upd,t_pred\n";
  for (const auto& r : records) {
    out << r.index;
    for (Eigen::Index j = 0; j < d; ++j) {
      out << ",";
      print_double(out, r.x[j]);
    }
    for (double v : {r.y_true, r.mu_pred, r.sigma_raw, r.sigma_calibrated,
                     r.t_update, r.t_pred}) {
      out << ",";
      print_double(out, v);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto ncols =
      1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (ncols < 7) throw std::runtime_error(path + ": malformed header");
  const Eigen::Index d = static_cast<Eigen::Index>(ncols) - 7;
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != ncols) throw std::runtime_error(path + ": malformed row");
    RunRecord r;
    r.index = static_cast<std::size_t>(vals[0]);
    r.x.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) r.x[j] = vals[1 + j];
    r.y_true = vals[1 + d];
    r.mu_pred = vals[2 + d];
    r.sigma_raw = vals[3 + d];
    r.sigma_calibrated = vals[4 + d];
    r.t_update = vals[5 + d];
    r.t_pred = vals[6 + d];
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace gptree
