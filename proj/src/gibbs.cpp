#include "pgds/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pgds/distributions.hpp"
#include "pgds/numeric.hpp"

namespace pgds {

namespace {
constexpr double kConcFloor = 1e-300;

double lgamma_floored(double x) { return std::lgamma(std::max(x, kConcFloor)); }

double row_drift(const ModelState& state, int t_prev, int k) {
  double s = 0.0;
  for (int k2 = 0; k2 < state.K(); ++k2) s += state.pi(k, k2) * state.theta(t_prev - 1, k2);
  return s;
}
}  // namespace

ZetaSchedule compute_zeta(const std::vector<double>& delta, double tau0, bool steady) {
  if (delta.empty()) throw std::domain_error("compute_zeta requires T >= 1");
  if (!(tau0 > 0.0)) throw std::domain_error("compute_zeta requires tau0 > 0");
  for (double d : delta)
    if (!(d > 0.0) || !std::isfinite(d)) throw std::domain_error("compute_zeta requires delta > 0");

  const int T = static_cast<int>(delta.size());
  ZetaSchedule z;
  z.values.assign(static_cast<std::size_t>(T) + 1, 0.0);
  if (steady) {
    for (double d : delta)
      if (d != delta[0]) throw std::domain_error("steady-state zeta requires a stationary delta");
    z.steady = true;
    z.steady_value = steady_state_zeta(delta[0], tau0);
    std::fill(z.values.begin(), z.values.end(), z.steady_value);
  } else {
    for (int t = T; t >= 1; --t)
      z.values[static_cast<std::size_t>(t - 1)] =
          std::log1p(delta[static_cast<std::size_t>(t - 1)] / tau0 +
                     z.values[static_cast<std::size_t>(t)]);
  }
  return z;
}

void LatentCounts::resize(int V, int T, int K, int nnz) {
  subcounts = MatI(nnz, K);
  y_dot_k = MatI(T, K);
  phi_counts = MatI(V, K);
  trans.assign(static_cast<std::size_t>(std::max(T - 1, 0)), MatI(K, K));
  l_row = MatI(std::max(T - 1, 0), K);
  l_col = MatI(T, K);
}

void sample_subcounts(const CountMatrix& counts, const ModelState& state,
                      LatentCounts& lat, RngStream& rng) {
  const int K = state.K();
  const auto entries = counts.entries();
  if (lat.subcounts.rows() != static_cast<int>(entries.size()) || lat.subcounts.cols() != K)
    lat.subcounts = MatI(static_cast<int>(entries.size()), K);
  lat.y_dot_k.fill(0);
  lat.phi_counts.fill(0);

  std::vector<double> weights(static_cast<std::size_t>(K));
  std::vector<std::int64_t> cells(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    for (int k = 0; k < K; ++k)
      weights[static_cast<std::size_t>(k)] = state.phi(e.v - 1, k) * state.theta(e.t - 1, k);
    sample_multinomial(e.count, weights, rng, cells);
    for (int k = 0; k < K; ++k) {
      const std::int64_t c = cells[static_cast<std::size_t>(k)];
      lat.subcounts(static_cast<int>(i), k) = c;
      lat.y_dot_k(e.t - 1, k) += c;
      lat.phi_counts(e.v - 1, k) += c;
    }
  }
}

void sample_aux_backward(const ModelState& state, LatentCounts& lat, const ZetaSchedule& zeta,
                         const Hyperparams& hyper, RngStream& rng, SweepMutation mutation) {
  const int T = state.T(), K = state.K();

  // Tail term: zero unless running in the steady state, where the source
  // l_{.k}^{(T+1)} ~ Pois(zeta* tau0 theta_k^{(T)}) replaces it.
  for (int k = 0; k < K; ++k) {
    lat.l_col(T - 1, k) =
        zeta.steady ? sample_poisson(zeta.steady_value * hyper.tau0 * state.theta(T - 1, k), rng)
                    : 0;
  }

  std::vector<double> weights(static_cast<std::size_t>(K));
  std::vector<std::int64_t> cells(static_cast<std::size_t>(K));
  for (int t = T; t >= 2; --t) {
    MatI& table = lat.trans[static_cast<std::size_t>(t - 2)];
    for (int k = 0; k < K; ++k) {
      const double shape = hyper.tau0 * row_drift(state, t - 1, k);
      const std::int64_t m = lat.m(t, k);
      std::int64_t tables;
      if (mutation == SweepMutation::crt_skip_first_table) {
        tables = 0;
        for (std::int64_t i = 1; i < m; ++i)
          if (rng.uniform() * (shape + static_cast<double>(i)) < shape) ++tables;
      } else {
        tables = sample_crt(m, std::max(shape, kConcFloor), rng);
      }
      lat.l_row(t - 2, k) = tables;
      for (int k2 = 0; k2 < K; ++k2)
        weights[static_cast<std::size_t>(k2)] = state.pi(k, k2) * state.theta(t - 2, k2);
      sample_multinomial(tables, weights, rng, cells);
      for (int k2 = 0; k2 < K; ++k2) table(k, k2) = cells[static_cast<std::size_t>(k2)];
    }
    for (int k2 = 0; k2 < K; ++k2) {
      std::int64_t s = 0;
      for (int k1 = 0; k1 < K; ++k1) s += table(k1, k2);
      lat.l_col(t - 2, k2) = s;
    }
  }
}

void sample_theta_forward(ModelState& state, const LatentCounts& lat, const ZetaSchedule& zeta,
                          const Hyperparams& hyper, RngStream& rng, SweepMutation mutation) {
  const int T = state.T(), K = state.K();
  for (int t = 1; t <= T; ++t) {
    double rate = hyper.tau0 + state.delta[static_cast<std::size_t>(t - 1)] +
                  zeta.at(t + 1) * hyper.tau0;
    if (mutation == SweepMutation::theta_rate_drop_zeta)
      rate = hyper.tau0 + state.delta[static_cast<std::size_t>(t - 1)];
    for (int k = 0; k < K; ++k) {
      const double prior_shape =
          t == 1 ? hyper.tau0 * state.nu[static_cast<std::size_t>(k)]
                 : hyper.tau0 * row_drift(state, t - 1, k);
      const double shape =
          static_cast<double>(lat.y_dot(t, k) + lat.l_col_at(t + 1, k)) + prior_shape;
      state.theta(t - 1, k) = sample_gamma(std::max(shape, kConcFloor), rate, rng);
    }
  }
}

void sample_pi(ModelState& state, const LatentCounts& lat, RngStream& rng) {
  const int T = state.T(), K = state.K();
  std::vector<double> conc(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    for (int k1 = 0; k1 < K; ++k1) {
      std::int64_t c = 0;
      for (int t = 2; t <= T; ++t) c += lat.trans[static_cast<std::size_t>(t - 2)](k1, k);
      const double prior = (k1 == k ? state.xi : state.nu[static_cast<std::size_t>(k1)]) *
                           state.nu[static_cast<std::size_t>(k)];
      conc[static_cast<std::size_t>(k1)] = std::max(prior, kConcFloor) + static_cast<double>(c);
    }
    const auto col = sample_dirichlet(conc, rng);
    for (int k1 = 0; k1 < K; ++k1) state.pi(k1, k) = col[static_cast<std::size_t>(k1)];
  }
}

void sample_phi(ModelState& state, const LatentCounts& lat, double eta0, RngStream& rng) {
  const int V = state.V(), K = state.K();
  std::vector<double> conc(static_cast<std::size_t>(V));
  for (int k = 0; k < K; ++k) {
    for (int v = 0; v < V; ++v)
      conc[static_cast<std::size_t>(v)] = eta0 + static_cast<double>(lat.phi_counts(v, k));
    const auto col = sample_dirichlet(conc, rng);
    for (int v = 0; v < V; ++v) state.phi(v, k) = col[static_cast<std::size_t>(v)];
  }
}

void sample_delta(ModelState& state, const CountMatrix& counts, double eps0, bool stationary,
                  RngStream& rng) {
  const int T = state.T();
  std::vector<std::int64_t> col_totals(static_cast<std::size_t>(T), 0);
  for (const auto& e : counts.entries()) col_totals[static_cast<std::size_t>(e.t - 1)] += e.count;

  if (stationary) {
    double theta_total = 0.0;
    std::int64_t y_total = 0;
    for (int t = 0; t < T; ++t) {
      theta_total += state.theta.row_sum(t);
      y_total += col_totals[static_cast<std::size_t>(t)];
    }
    const double d =
        sample_gamma(eps0 + static_cast<double>(y_total), eps0 + theta_total, rng);
    std::fill(state.delta.begin(), state.delta.end(), d);
  } else {
    for (int t = 0; t < T; ++t) {
      state.delta[static_cast<std::size_t>(t)] =
          sample_gamma(eps0 + static_cast<double>(col_totals[static_cast<std::size_t>(t)]),
                       eps0 + state.theta.row_sum(t), rng);
    }
  }
}

namespace {

// Log conditional density (up to constants) of nu_k at the candidate value,
// holding everything else fixed. Terms: gamma prior, every transition column
// whose Dirichlet concentration involves nu_k, and the negative binomial
// likelihood of m_k^{(1)} with theta^{(1)} marginalized out.
double nu_log_target(const ModelState& state, const LatentCounts& lat, const ZetaSchedule& zeta,
                     const Hyperparams& hyper, int k, double candidate, double nu_sum) {
  if (!(candidate > 0.0) || !std::isfinite(candidate)) return -std::numeric_limits<double>::infinity();
  const int K = state.K();
  const double s_new = nu_sum - state.nu[static_cast<std::size_t>(k)] + candidate;

  double lp = (hyper.gamma0 / K - 1.0) * std::log(candidate) - state.beta * candidate;

  // Column k: all entries scale with nu_k.
  lp += lgamma_floored(candidate * (s_new - candidate + state.xi));
  for (int k1 = 0; k1 < K; ++k1) {
    const double a = (k1 == k ? state.xi : state.nu[static_cast<std::size_t>(k1)]) * candidate;
    lp += -lgamma_floored(a) + (a - 1.0) * std::log(state.pi(k1, k));
  }
  // Other columns: nu_k enters entry k and the concentration total.
  for (int kc = 0; kc < K; ++kc) {
    if (kc == k) continue;
    const double nu_c = state.nu[static_cast<std::size_t>(kc)];
    const double a = nu_c * candidate;
    lp += lgamma_floored(nu_c * (s_new - nu_c + state.xi));
    lp += -lgamma_floored(a) + (a - 1.0) * std::log(state.pi(k, kc));
  }

  const double r = hyper.tau0 * candidate;
  const double m = static_cast<double>(lat.m(1, k));
  lp += lgamma_floored(m + r) - lgamma_floored(r) - r * zeta.at(1);
  return lp;
}

double xi_log_target(const ModelState& state, const Hyperparams& hyper, double candidate,
                     double nu_sum) {
  if (!(candidate > 0.0) || !std::isfinite(candidate)) return -std::numeric_limits<double>::infinity();
  const int K = state.K();
  double lp = (hyper.eps0 - 1.0) * std::log(candidate) - hyper.eps0 * candidate;
  for (int k = 0; k < K; ++k) {
    const double nu_k = state.nu[static_cast<std::size_t>(k)];
    const double a = candidate * nu_k;
    lp += lgamma_floored(nu_k * (nu_sum - nu_k + candidate));
    lp += -lgamma_floored(a) + (a - 1.0) * std::log(state.pi(k, k));
  }
  return lp;
}

}  // namespace

void sample_nu_xi_beta(ModelState& state, const LatentCounts& lat, const ZetaSchedule& zeta,
                       const Hyperparams& hyper, RngStream& rng, const SweepOptions& options,
                       SweepStats* stats) {
  const int K = state.K();

  if (options.update_beta) {
    double nu_sum = 0.0;
    for (double v : state.nu) nu_sum += v;
    double shape = hyper.eps0 + hyper.gamma0;
    if (options.mutation == SweepMutation::beta_shape_halved) shape = hyper.eps0 + 0.5 * hyper.gamma0;
    state.beta = sample_gamma(shape, hyper.eps0 + nu_sum, rng);
  }

  if (!options.update_nu_xi) return;

  double nu_sum = 0.0;
  for (double v : state.nu) nu_sum += v;

  // Log-normal random walk on each nu_k, then on xi. The log(candidate/current)
  // term is the Hastings correction for the multiplicative proposal.
  for (int k = 0; k < K; ++k) {
    const double current = state.nu[static_cast<std::size_t>(k)];
    const double candidate = current * std::exp(options.mh_step_nu * sample_normal(rng));
    const double lp_cur = nu_log_target(state, lat, zeta, hyper, k, current, nu_sum);
    const double lp_new = nu_log_target(state, lat, zeta, hyper, k, candidate, nu_sum);
    const double log_accept = lp_new - lp_cur + std::log(candidate) - std::log(current);
    if (stats) ++stats->nu_proposals;
    if (std::log(rng.uniform()) < log_accept) {
      state.nu[static_cast<std::size_t>(k)] = candidate;
      nu_sum += candidate - current;
      if (stats) ++stats->nu_accepts;
    }
  }

  {
    const double current = state.xi;
    const double candidate = current * std::exp(options.mh_step_xi * sample_normal(rng));
    const double lp_cur = xi_log_target(state, hyper, current, nu_sum);
    const double lp_new = xi_log_target(state, hyper, candidate, nu_sum);
    const double log_accept = lp_new - lp_cur + std::log(candidate) - std::log(current);
    if (stats) ++stats->xi_proposals;
    if (std::log(rng.uniform()) < log_accept) {
      state.xi = candidate;
      if (stats) ++stats->xi_accepts;
    }
  }
}

namespace {

std::string diagnostic_dump(const ModelState& state) {
  std::ostringstream os;
  auto span_minmax = [&](const char* name, std::span<const double> xs) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    bool bad = false;
    for (double x : xs) {
      if (!std::isfinite(x)) bad = true;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    os << " " << name << "=[" << lo << "," << hi << (bad ? ",non-finite]" : "]");
  };
  os << "state dump:";
  span_minmax("phi", state.phi.data());
  span_minmax("theta", state.theta.data());
  span_minmax("pi", state.pi.data());
  span_minmax("nu", state.nu);
  span_minmax("delta", state.delta);
  os << " xi=" << state.xi << " beta=" << state.beta;
  return os.str();
}

}  // namespace

void gibbs_sweep(ModelState& state, const CountMatrix& counts, const Hyperparams& hyper,
                 RngStream& rng, const SweepOptions& options, SweepStats* stats) {
  if (counts.V() != state.V() || counts.T() != state.T())
    throw std::invalid_argument("count matrix shape does not match state");

  static thread_local LatentCounts lat;
  lat.resize(state.V(), state.T(), state.K(), static_cast<int>(counts.entries().size()));

  const ZetaSchedule zeta = compute_zeta(state.delta, hyper.tau0, hyper.steady_state);
  sample_subcounts(counts, state, lat, rng);
  sample_aux_backward(state, lat, zeta, hyper, rng, options.mutation);
  sample_theta_forward(state, lat, zeta, hyper, rng, options.mutation);
  if (options.update_pi) sample_pi(state, lat, rng);
  if (options.update_phi) sample_phi(state, lat, hyper.eta0, rng);
  if (options.update_delta) sample_delta(state, counts, hyper.eps0, hyper.stationary_delta, rng);
  sample_nu_xi_beta(state, lat, zeta, hyper, rng, options, stats);

  if (!state.all_finite())
    throw std::runtime_error("gibbs_sweep produced a non-finite value; " + diagnostic_dump(state));
}

void Schedule::validate() const {
  if (iterations < 1) throw std::invalid_argument("schedule.iterations must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("schedule.burn_in must be >= 0");
  if (burn_in >= iterations) throw std::invalid_argument("schedule.burn_in must be < iterations");
  if (thin < 1) throw std::invalid_argument("schedule.thin must be >= 1");
}

SampleChain fit(const CountMatrix& counts, const Hyperparams& hyper, const FitOptions& options,
                RngStream& rng) {
  hyper.validate();
  options.schedule.validate();
  for (int t : options.impute_time_steps)
    if (t < 1 || t > counts.T())
      throw std::invalid_argument("impute_time_steps contains an out-of-range index");
  if (static_cast<int>(options.impute_time_steps.size()) >= counts.T())
    throw std::invalid_argument("cannot hold out every time step");

  SampleChain chain;
  chain.hyper = hyper;
  chain.schedule = options.schedule;
  chain.seed = rng.seed();
  chain.stream = rng.stream();
  chain.V = counts.V();
  chain.T = counts.T();

  ModelState state = init_from_prior(hyper, counts.V(), counts.T(), rng);

  // Observed entries excluding held-out columns; imputations are appended
  // each sweep so the sampler always sees a complete matrix.
  std::vector<char> held(static_cast<std::size_t>(counts.T()) + 1, 0);
  for (int t : options.impute_time_steps) held[static_cast<std::size_t>(t)] = 1;
  std::vector<CountEntry> observed;
  for (const auto& e : counts.entries())
    if (!held[static_cast<std::size_t>(e.t)]) observed.push_back(e);

  CountMatrix working(counts.V(), counts.T());
  const bool imputing = !options.impute_time_steps.empty();

  SweepOptions sweep = options.sweep;
  SweepStats totals;
  SweepStats window;
  int window_sweeps = 0;

  const auto t_start = std::chrono::steady_clock::now();
  for (int iter = 1; iter <= options.schedule.iterations; ++iter) {
    const CountMatrix* current = &counts;
    if (imputing) {
      working.clear();
      std::vector<CountEntry> merged = observed;
      for (int t : options.impute_time_steps) {
        for (int v = 1; v <= counts.V(); ++v) {
          const std::int64_t y = sample_poisson(poisson_rate(state, v, t), rng);
          if (y > 0) merged.push_back({v, t, y});
        }
      }
      working = CountMatrix::from_triplets(counts.V(), counts.T(), std::move(merged));
      current = &working;
    }

    SweepStats stats;
    gibbs_sweep(state, *current, hyper, rng, sweep, &stats);
    totals.nu_proposals += stats.nu_proposals;
    totals.nu_accepts += stats.nu_accepts;
    totals.xi_proposals += stats.xi_proposals;
    totals.xi_accepts += stats.xi_accepts;
    window.nu_proposals += stats.nu_proposals;
    window.nu_accepts += stats.nu_accepts;
    window.xi_proposals += stats.xi_proposals;
    window.xi_accepts += stats.xi_accepts;
    ++window_sweeps;

    // Step-size tuning, frozen once burn-in ends so the retained part of the
    // chain comes from a fixed kernel.
    if (options.adapt_mh && iter <= options.schedule.burn_in && window_sweeps >= 50) {
      auto tune = [](double rate, double& step) {
        if (rate < 0.20) step = std::max(step * 0.8, 1e-3);
        else if (rate > 0.45) step = std::min(step * 1.25, 10.0);
      };
      tune(window.nu_accept_rate(), sweep.mh_step_nu);
      tune(window.xi_accept_rate(), sweep.mh_step_xi);
      window = SweepStats{};
      window_sweeps = 0;
    }

    if (options.log_every > 0 && options.log && iter % options.log_every == 0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      double nu_sum = 0.0;
      for (double v : state.nu) nu_sum += v;
      (*options.log) << "iter=" << iter << " log_joint=" << log_joint(state, *current, hyper)
                     << " acc_nu=" << totals.nu_accept_rate()
                     << " acc_xi=" << totals.xi_accept_rate() << " nu_sum=" << nu_sum
                     << " sweeps_per_sec=" << static_cast<double>(iter) / std::max(elapsed, 1e-9)
                     << "\n";
    }

    if (iter > options.schedule.burn_in &&
        (iter - options.schedule.burn_in) % options.schedule.thin == 0) {
      chain.samples.push_back(state);
      chain.log_joint_trace.push_back(log_joint(state, *current, hyper));
    }
  }

  chain.nu_accept_rate = totals.nu_accept_rate();
  chain.xi_accept_rate = totals.xi_accept_rate();
  return chain;
}

}  // namespace pgds
