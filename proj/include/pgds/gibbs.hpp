#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pgds/matrix.hpp"
#include "pgds/model.hpp"
#include "pgds/rng.hpp"

namespace pgds {

// Backward-pass scalars. zeta(t) is defined for t = 1 .. T+1, with
// zeta(T+1) = 0 in the non-steady case and zeta(t) = zeta_star throughout in
// the steady-state case.
struct ZetaSchedule {
  std::vector<double> values;  // values[t-1] holds zeta(t)
  bool steady = false;
  double steady_value = 0.0;

  int T() const { return static_cast<int>(values.size()) - 1; }
  double at(int t) const { return values[static_cast<std::size_t>(t - 1)]; }
};

ZetaSchedule compute_zeta(const std::vector<double>& delta, double tau0, bool steady);

// Auxiliary counts for one sweep. Time indices are 1-based in the accessors;
// the transition tables exist for t = 2 .. T and the column sums additionally
// cover the tail t = T+1.
struct LatentCounts {
  MatI subcounts;           // nnz x K, aligned with the count matrix entry order
  MatI y_dot_k;             // T x K: y_{.k}^{(t)} at row t-1
  MatI phi_counts;          // V x K: sum_t y_{vk}^{(t)}
  std::vector<MatI> trans;  // T-1 matrices; trans[t-2] is the K x K table l^{(t)}
  MatI l_row;               // (T-1) x K: l_{k.}^{(t)} at row t-2
  MatI l_col;               // T x K: l_{.k}^{(t)} at row t-2, t = 2 .. T+1

  void resize(int V, int T, int K, int nnz);

  std::int64_t y_dot(int t, int k) const { return y_dot_k(t - 1, k); }
  std::int64_t l_col_at(int t, int k) const { return l_col(t - 2, k); }
  // m_k^{(t)} = y_{.k}^{(t)} + l_{.k}^{(t+1)}, computed on demand.
  std::int64_t m(int t, int k) const { return y_dot_k(t - 1, k) + l_col(t - 1, k); }
};

// Deliberate single-update corruptions used by the validation suite to
// confirm the Geweke test actually detects broken conditionals.
enum class SweepMutation {
  none,
  theta_rate_drop_zeta,   // forward pass rate omits the zeta^(t+1) tau0 term
  crt_skip_first_table,   // CRT sum starts at the second customer
  beta_shape_halved,      // beta update uses half the correct shape
};

struct SweepOptions {
  bool update_pi = true;
  bool update_phi = true;
  bool update_delta = true;
  bool update_nu_xi = true;
  bool update_beta = true;
  double mh_step_nu = 0.5;  // log-scale random-walk sd
  double mh_step_xi = 0.5;
  SweepMutation mutation = SweepMutation::none;
};

struct SweepStats {
  std::int64_t nu_proposals = 0;
  std::int64_t nu_accepts = 0;
  std::int64_t xi_proposals = 0;
  std::int64_t xi_accepts = 0;

  double nu_accept_rate() const {
    return nu_proposals ? static_cast<double>(nu_accepts) / static_cast<double>(nu_proposals) : 0.0;
  }
  double xi_accept_rate() const {
    return xi_proposals ? static_cast<double>(xi_accepts) / static_cast<double>(xi_proposals) : 0.0;
  }
};

// Individual conditional updates. Each draws from the conditional posterior
// given the current values of everything else.
void sample_subcounts(const CountMatrix& counts, const ModelState& state,
                      LatentCounts& lat, RngStream& rng);
void sample_aux_backward(const ModelState& state, LatentCounts& lat, const ZetaSchedule& zeta,
                         const Hyperparams& hyper, RngStream& rng,
                         SweepMutation mutation = SweepMutation::none);
void sample_theta_forward(ModelState& state, const LatentCounts& lat, const ZetaSchedule& zeta,
                          const Hyperparams& hyper, RngStream& rng,
                          SweepMutation mutation = SweepMutation::none);
void sample_pi(ModelState& state, const LatentCounts& lat, RngStream& rng);
void sample_phi(ModelState& state, const LatentCounts& lat, double eta0, RngStream& rng);
void sample_delta(ModelState& state, const CountMatrix& counts, double eps0, bool stationary,
                  RngStream& rng);
void sample_nu_xi_beta(ModelState& state, const LatentCounts& lat, const ZetaSchedule& zeta,
                       const Hyperparams& hyper, RngStream& rng, const SweepOptions& options,
                       SweepStats* stats = nullptr);

// One full Gibbs scan. Throws std::runtime_error with a diagnostic dump if a
// non-finite value appears anywhere in the state.
void gibbs_sweep(ModelState& state, const CountMatrix& counts, const Hyperparams& hyper,
                 RngStream& rng, const SweepOptions& options = {}, SweepStats* stats = nullptr);

struct Schedule {
  int iterations = 6000;
  int burn_in = 4000;
  int thin = 100;

  void validate() const;  // throws std::invalid_argument
  int retained() const { return (iterations - burn_in) / thin; }

  bool operator==(const Schedule&) const = default;
};

struct FitOptions {
  Schedule schedule;
  SweepOptions sweep;
  // 1-based time steps whose columns are held out and re-imputed from the
  // current rates during every sweep (the smoothing task).
  std::vector<int> impute_time_steps;
  bool adapt_mh = true;   // tune MH steps toward 20-45% acceptance during burn-in
  int log_every = 0;      // 0 disables progress records
  std::ostream* log = nullptr;
};

struct SampleChain {
  Hyperparams hyper;
  Schedule schedule;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int V = 0;
  int T = 0;
  std::vector<ModelState> samples;
  std::vector<double> log_joint_trace;  // one value per retained sample
  double nu_accept_rate = 0.0;
  double xi_accept_rate = 0.0;

  bool operator==(const SampleChain&) const = default;
};

SampleChain fit(const CountMatrix& counts, const Hyperparams& hyper, const FitOptions& options,
                RngStream& rng);

}  // namespace pgds
