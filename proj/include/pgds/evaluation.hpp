#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgds/gibbs.hpp"
#include "pgds/model.hpp"

namespace pgds {

// Held-out columns for one experiment. Smoothing indices are strictly
// interior (2 .. T - n_forecast - 1); forecast indices are the contiguous
// tail ending at T.
struct Mask {
  std::vector<int> smoothing;  // sorted, 1-based
  std::vector<int> forecast;   // sorted, 1-based, contiguous, ends at T

  void validate(int T) const;  // throws std::invalid_argument
};

struct MaskSpec {
  int n_smoothing = 6;
  int n_forecast = 2;
};

// Seeded, non-overlapping masks following the interior/tail protocol.
std::vector<Mask> make_masks(int T, const MaskSpec& spec, int count, RngStream& rng);

// mean |y - yhat| / (1 + y)
double mean_relative_error(std::span<const double> truth, std::span<const double> pred);
// mean |y - yhat|
double mean_absolute_error(std::span<const double> truth, std::span<const double> pred);

struct BurstinessReport {
  std::vector<double> per_feature;  // NaN for features with zero mean (excluded)
  int included = 0;
  double aggregate = 0.0;
};

// Mean absolute one-step jump normalized by the feature mean; features with
// an all-zero series are excluded from the aggregate.
BurstinessReport burstiness(const CountMatrix& counts);

// Posterior-mean rate for held-out interior columns, averaged over the
// retained samples. Rows are features, column j corresponds to cols[j].
MatD smoothing_rates(const SampleChain& chain, const std::vector<int>& cols);

// Monte Carlo forecast of the next `steps` rates from one posterior sample:
// theta is rolled forward through the transition kernel `rollouts` times and
// the resulting rates are averaged. Rows are features, column s-1 is T+s.
MatD forecast_rates(const ModelState& state, const Hyperparams& hyper, int steps, int rollouts,
                    RngStream& rng);
MatD chain_forecast(const SampleChain& chain, int steps, int rollouts, RngStream& rng);

struct PredictionCell {
  int v = 0;
  int t = 0;                // 1-based index into the full matrix
  std::int64_t truth = 0;
  double pred = 0.0;
  char task = 'S';          // 'S' smoothing, 'F' forecasting
};

struct PredictionReport {
  double smoothing_mre = 0.0;
  double smoothing_mae = 0.0;
  double forecast_mre = 0.0;
  double forecast_mae = 0.0;
  int smoothing_cells = 0;
  int forecast_cells = 0;
};

// Training matrix for a masked experiment: the forecast tail is dropped
// (T_train = T - |forecast|) and smoothing columns are emptied, to be
// re-imputed during sampling.
CountMatrix training_counts(const CountMatrix& full, const Mask& mask);

// Fits on the masked data (imputing the smoothing columns each sweep).
SampleChain fit_masked(const CountMatrix& full, const Mask& mask, const Hyperparams& hyper,
                       FitOptions options, RngStream& rng);

// Predictions for every masked cell, scored as posterior-mean rates.
std::vector<PredictionCell> predict_masked(const SampleChain& chain, const CountMatrix& full,
                                           const Mask& mask, int forecast_rollouts,
                                           RngStream& rng);

// Baselines used by the harness: per-feature mean of the observed training
// columns, and last observed value carried forward.
std::vector<PredictionCell> baseline_feature_mean(const CountMatrix& full, const Mask& mask);
std::vector<PredictionCell> baseline_last_value(const CountMatrix& full, const Mask& mask);

PredictionReport score_predictions(std::span<const PredictionCell> cells);

}  // namespace pgds
