#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgds/gibbs.hpp"
#include "pgds/model.hpp"
#include "pgds/rng.hpp"

namespace pgds {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::string detail;
};

// Samples y from the gamma-Poisson compound and compares the histogram
// against the closed-form negative binomial NB(a, c/(b+c)); also checks the
// reparameterization through the Bernoulli-Poisson link. Reports the
// chi-square p-value (pass when p > 0.001).
TestReport check_def2_marginalization(double a, double c, double b, int trials, RngStream& rng);

// Total-variation distance between the two exact joint pmfs of (y, l):
// NB x CRT versus Poisson x SumLog, on the truncated grid y <= y_max.
TestReport check_def3_equivalence(double a, double zeta, int y_max);

// Backward recursion from zero converges to the closed-form fixed point, and
// the closed form satisfies the defining equation.
TestReport check_proposition1(double delta, double tau0, int T);

struct GewekeStat {
  std::string name;
  double z = 0.0;
  double forward_mean = 0.0;
  double chain_mean = 0.0;
};

struct GewekeOptions {
  int transitions = 10000;
  int forward_draws = 10000;
  double z_threshold = 4.0;
  SweepMutation mutation = SweepMutation::none;
  double mh_step = 0.5;
};

struct GewekeReport {
  TestReport report;
  std::vector<GewekeStat> stats;
  double max_abs_z = 0.0;
};

// Forward ancestral simulation versus successive-conditional simulation
// (Gibbs sweep followed by resimulating Y from the current state). Tracked
// statistics: first and second moments of sum(nu), xi, beta, mean(delta),
// per-step theta sums and the total count.
GewekeReport geweke_test(const Hyperparams& hyper, int V, int T, const GewekeOptions& options,
                         RngStream& rng);

// V=2, T=2, K=1 instance with phi, nu, xi, beta clamped: compares the Gibbs
// marginals of theta^{(1)} and delta against a dense grid quadrature of the
// posterior. Statistic is the larger of the two KS distances.
TestReport small_posterior_oracle(RngStream& rng);

// Everything above at its acceptance settings, plus the three mutation
// detection runs. Deterministic given the seed.
std::vector<TestReport> run_validation_suite(std::uint64_t seed);

}  // namespace pgds
