#ifndef GPTREE_BENCH_HPP
#define GPTREE_BENCH_HPP

#include <string>
#include <vector>

#include "gptree/streams.hpp"
#include "gptree/targets.hpp"
#include "gptree/tree.hpp"

namespace gptree {

// One entry per stream point, in arrival order.
struct RunRecord {
  std::size_t index = 0;
  Eigen::VectorXd x;
  double y_true = 0.0;
  double mu_pred = 0.0;
  double sigma_raw = 0.0;
  double sigma_calibrated = 0.0;
  double t_update = 0.0;  // seconds
  double t_pred = 0.0;    // seconds
};

struct IndicatorSummary {
  double rmse = 0.0;
  double delta_005 = 0.0;
  double mean_uncertainty = 0.0;
  double mean_t_update = 0.0;
  double mean_t_pred = 0.0;
  std::size_t n_outliers_removed = 0;
  bool delta_window_truncated = false;  // fewer than 2000 eligible records
  std::vector<double> coverage_per_batch;
};

struct RunResult {
  std::vector<RunRecord> records;
  IndicatorSummary summary;
  Tree tree;
};

struct RunOptions {
  std::size_t n_points = 50000;
  std::size_t burn_in = 1000;
  double outlier_bound = 1e5;
};

// Per point: timestamped joint_prediction, target evaluation, timestamped
// update. Indicators are computed over indices > burn_in.
RunResult run(const TreeConfig& config, StreamSource& stream, TargetFn& target,
              const RunOptions& options);

IndicatorSummary compute_indicators(const std::vector<RunRecord>& records,
                                    std::size_t burn_in, double outlier_bound);

struct BatchFraction {
  double fraction = 0.0;
  std::size_t count = 0;
  bool partial = false;
};

// Per consecutive batch, the fraction of records with |mu - y| <= sigma.
std::vector<BatchFraction> coverage_batches(const std::vector<RunRecord>& records,
                                            std::size_t batch_size,
                                            bool use_calibrated);

// Per batch, the fraction with relative error below the threshold.
std::vector<BatchFraction> accuracy_fraction_batches(
    const std::vector<RunRecord>& records, double threshold,
    std::size_t batch_size = 2000);

struct SummaryRow {
  TreeConfig config;
  IndicatorSummary summary;
  bool failed = false;
  std::string error;
};

// Header: nbar,b,theta,kernel,split_dir,rmse,delta005,uncert,t_upd,t_pred.
// The theta column carries "grad.split" when gradual splitting is on.
void emit_csv(const std::vector<SummaryRow>& rows, const std::string& path);

// Record log CSV: i,x1..xd,y,mu,sigma_raw,sigma_cal,t_upd,t_pred.
void write_records_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_records_csv(const std::string& path);

}  // namespace gptree

#endif
