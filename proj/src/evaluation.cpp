#include "pgds/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pgds/distributions.hpp"

namespace pgds {

void Mask::validate(int T) const {
  if (forecast.empty() && smoothing.empty())
    throw std::invalid_argument("mask holds out nothing");
  if (!std::is_sorted(smoothing.begin(), smoothing.end()) ||
      std::adjacent_find(smoothing.begin(), smoothing.end()) != smoothing.end())
    throw std::invalid_argument("mask.smoothing must be sorted and distinct");
  if (!std::is_sorted(forecast.begin(), forecast.end()))
    throw std::invalid_argument("mask.forecast must be sorted");
  const int n_f = static_cast<int>(forecast.size());
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    if (forecast[i] != T - n_f + 1 + static_cast<int>(i))
      throw std::invalid_argument("mask.forecast must be the contiguous tail ending at T");
  }
  for (int t : smoothing) {
    if (t < 2 || t > T - n_f - 1)
      throw std::invalid_argument("mask.smoothing indices must lie in [2, T - n_forecast - 1]");
  }
  if (static_cast<int>(smoothing.size()) + n_f >= T)
    throw std::invalid_argument("mask holds out every time step");
}

std::vector<Mask> make_masks(int T, const MaskSpec& spec, int count, RngStream& rng) {
  if (spec.n_smoothing < 0 || spec.n_forecast < 0 || count < 1)
    throw std::invalid_argument("make_masks: negative spec");
  const int lo = 2, hi = T - spec.n_forecast - 1;
  const int available = hi - lo + 1;
  if (available < spec.n_smoothing)
    throw std::invalid_argument("make_masks: T too small for the requested smoothing count");

  std::vector<Mask> masks;
  masks.reserve(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) {
    Mask mask;
    // Sample n_smoothing distinct indices from [lo, hi] by partial shuffle.
    std::vector<int> pool(static_cast<std::size_t>(available));
    for (int i = 0; i < available; ++i) pool[static_cast<std::size_t>(i)] = lo + i;
    for (int i = 0; i < spec.n_smoothing; ++i) {
      const int j = i + static_cast<int>(rng.uniform() * static_cast<double>(available - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      mask.smoothing.push_back(pool[static_cast<std::size_t>(i)]);
    }
    std::sort(mask.smoothing.begin(), mask.smoothing.end());
    for (int s = 0; s < spec.n_forecast; ++s)
      mask.forecast.push_back(T - spec.n_forecast + 1 + s);
    mask.validate(T);
    masks.push_back(std::move(mask));
  }
  return masks;
}

double mean_relative_error(std::span<const double> truth, std::span<const double> pred) {
  if (truth.empty() || truth.size() != pred.size())
    throw std::domain_error("mean_relative_error: empty or mismatched inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    s += std::fabs(truth[i] - pred[i]) / (1.0 + truth[i]);
  return s / static_cast<double>(truth.size());
}

double mean_absolute_error(std::span<const double> truth, std::span<const double> pred) {
  if (truth.empty() || truth.size() != pred.size())
    throw std::domain_error("mean_absolute_error: empty or mismatched inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += std::fabs(truth[i] - pred[i]);
  return s / static_cast<double>(truth.size());
}

BurstinessReport burstiness(const CountMatrix& counts) {
  const int V = counts.V(), T = counts.T();
  if (T < 2) throw std::domain_error("burstiness requires T >= 2");

  MatI dense(V, T);
  for (const auto& e : counts.entries()) dense(e.v - 1, e.t - 1) += e.count;

  BurstinessReport report;
  report.per_feature.assign(static_cast<std::size_t>(V),
                            std::numeric_limits<double>::quiet_NaN());
  double total = 0.0;
  for (int v = 0; v < V; ++v) {
    std::int64_t row_sum = 0;
    double jumps = 0.0;
    for (int t = 0; t < T; ++t) row_sum += dense(v, t);
    if (row_sum == 0) continue;  // zero-mean features are excluded
    for (int t = 0; t + 1 < T; ++t)
      jumps += std::fabs(static_cast<double>(dense(v, t + 1) - dense(v, t)));
    const double mu = static_cast<double>(row_sum) / static_cast<double>(T);
    const double b = jumps / (static_cast<double>(T - 1) * mu);
    report.per_feature[static_cast<std::size_t>(v)] = b;
    total += b;
    ++report.included;
  }
  if (report.included == 0) throw std::domain_error("burstiness of an all-zero matrix");
  report.aggregate = total / static_cast<double>(report.included);
  return report;
}

MatD smoothing_rates(const SampleChain& chain, const std::vector<int>& cols) {
  if (chain.samples.empty()) throw std::invalid_argument("chain has no retained samples");
  MatD rates(chain.V, static_cast<int>(cols.size()));
  for (const auto& state : chain.samples) {
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (int v = 1; v <= chain.V; ++v)
        rates(v - 1, static_cast<int>(j)) += poisson_rate(state, v, cols[j]);
  }
  const double n = static_cast<double>(chain.samples.size());
  for (double& x : rates.data()) x /= n;
  return rates;
}

MatD forecast_rates(const ModelState& state, const Hyperparams& hyper, int steps, int rollouts,
                    RngStream& rng) {
  if (steps < 1 || rollouts < 1) throw std::invalid_argument("forecast needs steps, rollouts >= 1");
  const int V = state.V(), K = state.K(), T = state.T();
  const double delta = state.delta.back();

  MatD rates(V, steps);
  std::vector<double> cur(static_cast<std::size_t>(K)), next(static_cast<std::size_t>(K));
  for (int r = 0; r < rollouts; ++r) {
    for (int k = 0; k < K; ++k) cur[static_cast<std::size_t>(k)] = state.theta(T - 1, k);
    for (int s = 0; s < steps; ++s) {
      for (int k = 0; k < K; ++k) {
        double drift = 0.0;
        for (int k2 = 0; k2 < K; ++k2) drift += state.pi(k, k2) * cur[static_cast<std::size_t>(k2)];
        next[static_cast<std::size_t>(k)] =
            sample_gamma(std::max(hyper.tau0 * drift, 1e-300), hyper.tau0, rng);
      }
      cur = next;
      for (int v = 0; v < V; ++v) {
        double rate = 0.0;
        for (int k = 0; k < K; ++k) rate += state.phi(v, k) * cur[static_cast<std::size_t>(k)];
        rates(v, s) += delta * rate;
      }
    }
  }
  for (double& x : rates.data()) x /= static_cast<double>(rollouts);
  return rates;
}

MatD chain_forecast(const SampleChain& chain, int steps, int rollouts, RngStream& rng) {
  if (chain.samples.empty()) throw std::invalid_argument("chain has no retained samples");
  MatD mean(chain.V, steps);
  for (const auto& state : chain.samples) {
    const MatD r = forecast_rates(state, chain.hyper, steps, rollouts, rng);
    for (std::size_t i = 0; i < mean.data().size(); ++i) mean.data()[i] += r.data()[i];
  }
  for (double& x : mean.data()) x /= static_cast<double>(chain.samples.size());
  return mean;
}

CountMatrix training_counts(const CountMatrix& full, const Mask& mask) {
  mask.validate(full.T());
  const int T_train = full.T() - static_cast<int>(mask.forecast.size());
  std::vector<char> held(static_cast<std::size_t>(full.T()) + 1, 0);
  for (int t : mask.smoothing) held[static_cast<std::size_t>(t)] = 1;

  std::vector<CountEntry> kept;
  for (const auto& e : full.entries())
    if (e.t <= T_train && !held[static_cast<std::size_t>(e.t)]) kept.push_back(e);
  return CountMatrix::from_triplets(full.V(), T_train, std::move(kept));
}

SampleChain fit_masked(const CountMatrix& full, const Mask& mask, const Hyperparams& hyper,
                       FitOptions options, RngStream& rng) {
  const CountMatrix train = training_counts(full, mask);
  options.impute_time_steps = mask.smoothing;
  return fit(train, hyper, options, rng);
}

std::vector<PredictionCell> predict_masked(const SampleChain& chain, const CountMatrix& full,
                                           const Mask& mask, int forecast_rollouts,
                                           RngStream& rng) {
  mask.validate(full.T());
  if (chain.V != full.V()) throw std::invalid_argument("chain/data feature dimensions differ");
  std::vector<PredictionCell> cells;

  const MatD smooth = smoothing_rates(chain, mask.smoothing);
  for (std::size_t j = 0; j < mask.smoothing.size(); ++j) {
    const int t = mask.smoothing[j];
    for (int v = 1; v <= full.V(); ++v)
      cells.push_back({v, t, full.at(v, t), smooth(v - 1, static_cast<int>(j)), 'S'});
  }

  if (!mask.forecast.empty()) {
    const MatD fc = chain_forecast(chain, static_cast<int>(mask.forecast.size()),
                                   forecast_rollouts, rng);
    for (std::size_t s = 0; s < mask.forecast.size(); ++s) {
      const int t = mask.forecast[s];
      for (int v = 1; v <= full.V(); ++v)
        cells.push_back({v, t, full.at(v, t), fc(v - 1, static_cast<int>(s)), 'F'});
    }
  }
  return cells;
}

namespace {

// Per-feature mean over the observed training columns.
std::vector<double> feature_means(const CountMatrix& full, const Mask& mask) {
  const int T_train = full.T() - static_cast<int>(mask.forecast.size());
  std::vector<char> held(static_cast<std::size_t>(full.T()) + 1, 0);
  for (int t : mask.smoothing) held[static_cast<std::size_t>(t)] = 1;
  int observed_cols = 0;
  for (int t = 1; t <= T_train; ++t)
    if (!held[static_cast<std::size_t>(t)]) ++observed_cols;

  std::vector<double> means(static_cast<std::size_t>(full.V()), 0.0);
  for (const auto& e : full.entries())
    if (e.t <= T_train && !held[static_cast<std::size_t>(e.t)])
      means[static_cast<std::size_t>(e.v - 1)] += static_cast<double>(e.count);
  for (double& m : means) m /= static_cast<double>(observed_cols);
  return means;
}

}  // namespace

std::vector<PredictionCell> baseline_feature_mean(const CountMatrix& full, const Mask& mask) {
  mask.validate(full.T());
  const auto means = feature_means(full, mask);
  std::vector<PredictionCell> cells;
  for (int t : mask.smoothing)
    for (int v = 1; v <= full.V(); ++v)
      cells.push_back({v, t, full.at(v, t), means[static_cast<std::size_t>(v - 1)], 'S'});
  for (int t : mask.forecast)
    for (int v = 1; v <= full.V(); ++v)
      cells.push_back({v, t, full.at(v, t), means[static_cast<std::size_t>(v - 1)], 'F'});
  return cells;
}

std::vector<PredictionCell> baseline_last_value(const CountMatrix& full, const Mask& mask) {
  mask.validate(full.T());
  const int T_train = full.T() - static_cast<int>(mask.forecast.size());
  std::vector<char> held(static_cast<std::size_t>(full.T()) + 1, 0);
  for (int t : mask.smoothing) held[static_cast<std::size_t>(t)] = 1;
  int last_observed = T_train;
  while (last_observed >= 1 && held[static_cast<std::size_t>(last_observed)]) --last_observed;
  if (last_observed < 1) throw std::invalid_argument("no observed column to carry forward");

  std::vector<PredictionCell> cells;
  for (int t : mask.forecast)
    for (int v = 1; v <= full.V(); ++v)
      cells.push_back({v, t, full.at(v, t),
                       static_cast<double>(full.at(v, last_observed)), 'F'});
  return cells;
}

PredictionReport score_predictions(std::span<const PredictionCell> cells) {
  std::vector<double> st, sp, ft, fp;
  for (const auto& c : cells) {
    if (c.task == 'S') {
      st.push_back(static_cast<double>(c.truth));
      sp.push_back(c.pred);
    } else {
      ft.push_back(static_cast<double>(c.truth));
      fp.push_back(c.pred);
    }
  }
  PredictionReport r;
  r.smoothing_cells = static_cast<int>(st.size());
  r.forecast_cells = static_cast<int>(ft.size());
  if (!st.empty()) {
    r.smoothing_mre = mean_relative_error(st, sp);
    r.smoothing_mae = mean_absolute_error(st, sp);
  }
  if (!ft.empty()) {
    r.forecast_mre = mean_relative_error(ft, fp);
    r.forecast_mae = mean_absolute_error(ft, fp);
  }
  return r;
}

}  // namespace pgds
