#include "pgds/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pgds/distributions.hpp"
#include "pgds/numeric.hpp"

namespace pgds {

namespace {
constexpr double kConcFloor = 1e-300;

void require_positive(double x, const char* field) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument(std::string(field) + " must be positive and finite");
}
}  // namespace

void Hyperparams::validate() const {
  require_positive(tau0, "tau0");
  require_positive(gamma0, "gamma0");
  require_positive(eta0, "eta0");
  require_positive(eps0, "eps0");
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (steady_state && !stationary_delta)
    throw std::invalid_argument("steady_state requires stationary_delta");
}

bool ModelState::all_finite() const {
  auto finite_positive = [](std::span<const double> xs) {
    for (double x : xs)
      if (!(x > 0.0) || !std::isfinite(x)) return false;
    return true;
  };
  return finite_positive(phi.data()) && finite_positive(theta.data()) &&
         finite_positive(pi.data()) && finite_positive(nu) && finite_positive(delta) &&
         std::isfinite(xi) && xi > 0.0 && std::isfinite(beta) && beta > 0.0;
}

void ModelState::validate(double tol) const {
  if (phi.cols() != K() || pi.rows() != K() || pi.cols() != K() || theta.cols() != K())
    throw std::domain_error("state dimensions are inconsistent");
  if (static_cast<int>(delta.size()) != T())
    throw std::domain_error("delta length does not match T");
  if (!all_finite()) throw std::domain_error("state contains a non-positive or non-finite value");
  for (int k = 0; k < K(); ++k) {
    if (std::fabs(phi.col_sum(k) - 1.0) > tol)
      throw std::domain_error("phi column " + std::to_string(k + 1) + " does not sum to 1");
    if (std::fabs(pi.col_sum(k) - 1.0) > tol)
      throw std::domain_error("pi column " + std::to_string(k + 1) + " does not sum to 1");
  }
}

CountMatrix::CountMatrix(int V, int T) : V_(V), T_(T) {
  if (V < 1 || T < 1) throw std::invalid_argument("CountMatrix requires V, T >= 1");
}

void CountMatrix::check_indices(int v, int t) const {
  if (v < 1 || v > V_) throw std::out_of_range("feature index out of range: " + std::to_string(v));
  if (t < 1 || t > T_) throw std::out_of_range("time index out of range: " + std::to_string(t));
}

CountMatrix CountMatrix::from_triplets(int V, int T, std::vector<CountEntry> triplets) {
  CountMatrix m(V, T);
  for (const auto& e : triplets) {
    m.check_indices(e.v, e.t);
    if (e.count < 1) throw std::invalid_argument("counts must be >= 1");
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const CountEntry& a, const CountEntry& b) {
              return a.t != b.t ? a.t < b.t : a.v < b.v;
            });
  for (const auto& e : triplets) {
    if (!m.entries_.empty() && m.entries_.back().v == e.v && m.entries_.back().t == e.t)
      m.entries_.back().count += e.count;  // duplicates sum
    else
      m.entries_.push_back(e);
  }
  return m;
}

void CountMatrix::add(int v, int t, std::int64_t count) {
  check_indices(v, t);
  if (count < 1) throw std::invalid_argument("counts must be >= 1");
  CountEntry e{v, t, count};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), e,
                             [](const CountEntry& a, const CountEntry& b) {
                               return a.t != b.t ? a.t < b.t : a.v < b.v;
                             });
  if (it != entries_.end() && it->v == v && it->t == t)
    it->count += count;
  else
    entries_.insert(it, e);
}

void CountMatrix::clear() { entries_.clear(); }

std::int64_t CountMatrix::col_total(int t) const {
  check_indices(1, t);
  std::int64_t s = 0;
  for (const auto& e : entries_)
    if (e.t == t) s += e.count;
  return s;
}

std::int64_t CountMatrix::total() const {
  std::int64_t s = 0;
  for (const auto& e : entries_) s += e.count;
  return s;
}

std::int64_t CountMatrix::at(int v, int t) const {
  check_indices(v, t);
  const CountEntry probe{v, t, 0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                             [](const CountEntry& a, const CountEntry& b) {
                               return a.t != b.t ? a.t < b.t : a.v < b.v;
                             });
  if (it != entries_.end() && it->t == t && it->v == v) return it->count;
  return 0;
}

ModelState init_from_prior(const Hyperparams& hyper, int V, int T, RngStream& rng) {
  hyper.validate();
  if (V < 1 || T < 1) throw std::invalid_argument("init_from_prior requires V, T >= 1");
  const int K = hyper.K;

  ModelState s;
  s.beta = sample_gamma(hyper.eps0, hyper.eps0, rng);
  s.nu.resize(K);
  for (int k = 0; k < K; ++k) s.nu[k] = sample_gamma(hyper.gamma0 / K, s.beta, rng);
  s.xi = sample_gamma(hyper.eps0, hyper.eps0, rng);

  s.pi = MatD(K, K);
  std::vector<double> conc(K);
  for (int k = 0; k < K; ++k) {
    for (int k1 = 0; k1 < K; ++k1)
      conc[k1] = std::max((k1 == k ? s.xi : s.nu[k1]) * s.nu[k], kConcFloor);
    const auto col = sample_dirichlet(conc, rng);
    for (int k1 = 0; k1 < K; ++k1) s.pi(k1, k) = col[k1];
  }

  s.phi = MatD(V, K);
  std::vector<double> eta(V, hyper.eta0);
  for (int k = 0; k < K; ++k) {
    const auto col = sample_dirichlet(eta, rng);
    for (int v = 0; v < V; ++v) s.phi(v, k) = col[v];
  }

  s.delta.resize(T);
  if (hyper.stationary_delta) {
    const double d = sample_gamma(hyper.eps0, hyper.eps0, rng);
    std::fill(s.delta.begin(), s.delta.end(), d);
  } else {
    for (int t = 0; t < T; ++t) s.delta[t] = sample_gamma(hyper.eps0, hyper.eps0, rng);
  }

  s.theta = MatD(T, K);
  for (int k = 0; k < K; ++k)
    s.theta(0, k) = sample_gamma(std::max(hyper.tau0 * s.nu[k], kConcFloor), hyper.tau0, rng);
  for (int t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      double drift = 0.0;
      for (int k2 = 0; k2 < K; ++k2) drift += s.pi(k, k2) * s.theta(t - 1, k2);
      s.theta(t, k) = sample_gamma(std::max(hyper.tau0 * drift, kConcFloor), hyper.tau0, rng);
    }
  }
  return s;
}

Generated generate(const Hyperparams& hyper, int V, int T, RngStream& rng) {
  Generated g{init_from_prior(hyper, V, T, rng), CountMatrix(V, T)};
  for (int t = 1; t <= T; ++t) {
    for (int v = 1; v <= V; ++v) {
      const std::int64_t y = sample_poisson(poisson_rate(g.state, v, t), rng);
      if (y > 0) g.counts.add(v, t, y);
    }
  }
  return g;
}

double poisson_rate(const ModelState& state, int v, int t) {
  if (v < 1 || v > state.V() || t < 1 || t > state.T())
    throw std::out_of_range("poisson_rate index out of range");
  double s = 0.0;
  for (int k = 0; k < state.K(); ++k) s += state.phi(v - 1, k) * state.theta(t - 1, k);
  return state.delta[static_cast<std::size_t>(t - 1)] * s;
}

double log_joint(const ModelState& state, const CountMatrix& counts, const Hyperparams& hyper) {
  hyper.validate();
  state.validate();
  if (counts.V() != state.V() || counts.T() != state.T())
    throw std::domain_error("count matrix shape does not match state");
  const int V = state.V(), T = state.T(), K = state.K();

  double lp = log_gamma_pdf(state.beta, hyper.eps0, hyper.eps0) +
              log_gamma_pdf(state.xi, hyper.eps0, hyper.eps0);
  for (int k = 0; k < K; ++k)
    lp += log_gamma_pdf(state.nu[k], hyper.gamma0 / K, state.beta);

  std::vector<double> col(K), conc(K);
  for (int k = 0; k < K; ++k) {
    for (int k1 = 0; k1 < K; ++k1) {
      col[k1] = state.pi(k1, k);
      conc[k1] = std::max((k1 == k ? state.xi : state.nu[k1]) * state.nu[k], kConcFloor);
    }
    lp += log_dirichlet_pdf(col, conc);
  }

  std::vector<double> phicol(V), eta(V, hyper.eta0);
  for (int k = 0; k < K; ++k) {
    for (int v = 0; v < V; ++v) phicol[v] = state.phi(v, k);
    lp += log_dirichlet_pdf(phicol, eta);
  }

  if (hyper.stationary_delta) {
    lp += log_gamma_pdf(state.delta[0], hyper.eps0, hyper.eps0);
  } else {
    for (double d : state.delta) lp += log_gamma_pdf(d, hyper.eps0, hyper.eps0);
  }

  for (int k = 0; k < K; ++k)
    lp += log_gamma_pdf(state.theta(0, k), std::max(hyper.tau0 * state.nu[k], kConcFloor), hyper.tau0);
  for (int t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      double drift = 0.0;
      for (int k2 = 0; k2 < K; ++k2) drift += state.pi(k, k2) * state.theta(t - 1, k2);
      lp += log_gamma_pdf(state.theta(t, k), std::max(hyper.tau0 * drift, kConcFloor), hyper.tau0);
    }
  }

  // Poisson likelihood: zero cells contribute -rate, and since phi columns
  // sum to one the total rate telescopes to sum_t delta^(t) sum_k theta_k^(t).
  for (int t = 0; t < T; ++t) {
    double theta_sum = 0.0;
    for (int k = 0; k < K; ++k) theta_sum += state.theta(t, k);
    lp -= state.delta[static_cast<std::size_t>(t)] * theta_sum;
  }
  for (const auto& e : counts.entries()) {
    const double rate = poisson_rate(state, e.v, e.t);
    lp += static_cast<double>(e.count) * std::log(rate) -
          std::lgamma(static_cast<double>(e.count) + 1.0);
  }
  return lp;
}

}  // namespace pgds
