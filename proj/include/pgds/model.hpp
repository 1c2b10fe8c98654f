#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pgds/matrix.hpp"
#include "pgds/rng.hpp"

namespace pgds {

struct Hyperparams {
  double tau0 = 1.0;    // gamma chain concentration
  double gamma0 = 50.0; // total component-weight mass
  double eta0 = 0.1;    // feature-factor Dirichlet concentration
  double eps0 = 0.1;    // non-informative gamma parameter
  int K = 100;          // truncation level
  bool stationary_delta = true;
  bool steady_state = false;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const Hyperparams&) const = default;
};

// Full latent state. phi and pi are column-stochastic; every entry of every
// field is strictly positive and finite.
struct ModelState {
  MatD phi;                   // V x K feature factors, columns sum to 1
  MatD theta;                 // T x K time-step factors
  MatD pi;                    // K x K transition weights, columns sum to 1
  std::vector<double> nu;     // K component weights
  double xi = 1.0;            // transition prior diagonal concentration
  double beta = 1.0;          // component-weight rate
  std::vector<double> delta;  // T scale factors (all equal when stationary)

  int V() const { return phi.rows(); }
  int T() const { return theta.rows(); }
  int K() const { return static_cast<int>(nu.size()); }

  bool all_finite() const;
  // Throws std::domain_error when a structural invariant is violated.
  void validate(double tol = 1e-10) const;

  bool operator==(const ModelState&) const = default;
};

struct CountEntry {
  int v = 0;
  int t = 0;
  std::int64_t count = 0;
  bool operator==(const CountEntry&) const = default;
};

// Sparse V x T count matrix stored as a coordinate list sorted by (t, v).
// Stored counts are >= 1; absent cells are zero.
class CountMatrix {
 public:
  CountMatrix() = default;
  CountMatrix(int V, int T);

  // Builds from (possibly duplicated) triplets; duplicates are summed.
  static CountMatrix from_triplets(int V, int T, std::vector<CountEntry> triplets);

  int V() const { return V_; }
  int T() const { return T_; }

  void add(int v, int t, std::int64_t count);  // accumulates; keeps sorted order
  void clear();

  std::span<const CountEntry> entries() const { return entries_; }
  std::int64_t col_total(int t) const;  // t is 1-based
  std::int64_t total() const;
  std::int64_t at(int v, int t) const;  // 1-based; 0 when absent

  bool operator==(const CountMatrix&) const = default;

 private:
  void check_indices(int v, int t) const;
  int V_ = 0;
  int T_ = 0;
  std::vector<CountEntry> entries_;
};

struct Generated {
  ModelState state;
  CountMatrix counts;
};

// Ancestral draw of all parameters from the prior (no observations).
ModelState init_from_prior(const Hyperparams& hyper, int V, int T, RngStream& rng);

// Ancestral draw of parameters plus a count matrix from the model.
Generated generate(const Hyperparams& hyper, int V, int T, RngStream& rng);

// delta^(t) * sum_k phi_vk theta_k^(t); v, t are 1-based.
double poisson_rate(const ModelState& state, int v, int t);

// Log of the joint density of the state and the observed counts.
double log_joint(const ModelState& state, const CountMatrix& counts, const Hyperparams& hyper);

}  // namespace pgds
