#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polyrisk/dataset.hpp"
#include "polyrisk/fit.hpp"
#include "polyrisk/losses.hpp"
#include "polyrisk/types.hpp"

namespace polyrisk {

struct DatasetSpec {
  std::string kind = "random";  // random | long-servedio | mease-wyner | surrogate | file
  std::string path;             // kind == "file": libsvm input
  int m = 1000;
  int n = 9;
  Real density = 0.113;            // surrogate only
  Real positive_fraction = 0.2393; // surrogate only

  /// Materializes m + extra examples; synthetic kinds generate them, "file"
  /// loads and (if needed) truncates after a seeded shuffle.
  Dataset realize(int extra, std::uint64_t seed) const;
};

struct SolverSettings {
  std::string method = "exact";  // exact | sa
  int topk = 50;
  Real beta_initial = 0.1;
  Real beta_final = 10.0;
  int sweeps = 1000;
  int restarts = 100;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<LossKind> losses;
  std::vector<Real> lambda_grid;
  std::vector<Real> omega_grid;
  std::vector<Real> noise_levels;
  int bit_depth = 2;
  Real weight_scale_r = 2.0;  // zeta = r / sqrt(lambda2 * m_train)
  int folds = 10;
  int repetitions = 10;
  int m_test = 10000;      // held-out test examples (fig2, cv)
  int num_states = 10000;  // sampled states (correlation, convergence)
  std::vector<int> m_grid; // convergence subsample sizes, ascending
  SolverSettings solver;
  std::uint64_t seed = 0;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct Fig2Row {
  Real noise = 0;
  int repetition = 0;
  LossKind loss = LossKind::ZeroOne;
  Real err_lowest = 0;        // test error of the lowest-objective state
  Real err_best50 = 0;        // best test error among the 50 lowest states
  std::int64_t rank01 = 0;    // best rank of a 0-1 global minimum in this spectrum
  bool rank_le50 = false;
};

/// Exhaustive Fig.-2-style study; writes fig2.csv and fig2_summary.csv.
std::vector<Fig2Row> run_fig2(const ExperimentConfig& cfg, const std::string& out_dir);

struct CvCell {
  LossKind loss = LossKind::ZeroOne;
  Real noise = 0;
  Real lambda2 = 0;
  Real omega = 0;
  int fold = 0;
  Real validation_error = 0;
  Real test_error = 0;
};

struct CvSelection {
  LossKind loss = LossKind::ZeroOne;
  Real noise = 0;
  Real lambda2 = 0;
  Real omega = 0;
  Real validation_error_mean = 0;
  Real test_error_mean = 0;
  Real test_error_std = 0;
};

struct CvResult {
  std::vector<CvCell> cells;
  std::vector<CvSelection> selected;  // per (loss, noise), grid argmin
  Real baseline_error = 0;            // majority vote on the test split
};

/// Cross-validated hyperparameter study; writes cv.csv and cv_selected.csv.
CvResult run_cv(const ExperimentConfig& cfg, const std::string& out_dir);

struct CorrelationResult {
  std::map<LossKind, Real> pearson;  // r(loss risk, 0-1 risk), normalized
};

/// Risk-correlation study over random states; writes correlation.csv and
/// correlation_scatter.csv.
CorrelationResult run_correlation(const ExperimentConfig& cfg, const std::string& out_dir);

struct ConvergenceResult {
  std::vector<int> m_values;
  std::vector<Real> err_all;    // embedding error over all sampled states
  std::vector<Real> err_low50;  // restricted to the 50 lowest-risk states
  Real slope_all = 0;           // log-log least-squares slope
  Real slope_low50 = 0;
};

/// Embedding-error-vs-m study; writes convergence.csv.
ConvergenceResult run_convergence(const ExperimentConfig& cfg, const std::string& out_dir);

/// Full-precision regularized convex fit by gradient descent with
/// backtracking line search; runs until the gradient norm drops below 1e-6.
VecX train_convex_baseline(LossKind kind, const Dataset& d, Real lambda2);

/// Pearson correlation coefficient of two equal-length samples.
Real pearson(const VecX& a, const VecX& b);

}  // namespace polyrisk
