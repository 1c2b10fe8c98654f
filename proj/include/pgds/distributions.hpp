#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgds/rng.hpp"

namespace pgds {

// Bernoulli–Poisson link g(z) = 1 - exp(-z). Maps a non-negative exposure to
// a success probability; computed via expm1 so tiny z keeps full precision.
double bp_link(double z);

// Lower real branch W_{-1} of the Lambert W function on [-1/e, 0).
// Returns w <= -1 with w * exp(w) = x to 1e-12 relative accuracy.
double lambert_w_minus1(double x);

// Fixed point of z = log(1 + delta/tau0 + z), the stationary limit of the
// backward recursion. Strictly positive for delta, tau0 > 0.
double steady_state_zeta(double delta, double tau0);

double sample_normal(RngStream& rng);

// Gamma(shape, rate) variate, valid for any shape > 0 (shapes below one use
// the boost-by-power trick). The result is floored at 1e-300 so downstream
// logs and divisions stay finite.
double sample_gamma(double shape, double rate, RngStream& rng);

// Dirichlet draw; components are clamped at 1e-300 before renormalizing, so
// the output is strictly positive and sums to one exactly.
std::vector<double> sample_dirichlet(std::span<const double> conc, RngStream& rng);

std::int64_t sample_poisson(double rate, RngStream& rng);

// Chinese restaurant table count: l = sum_{i=0}^{y-1} Bernoulli(a / (a + i)).
// Exact O(y); l = 0 iff y = 0, otherwise 1 <= l <= y.
std::int64_t sample_crt(std::int64_t y, double a, RngStream& rng);

// Logarithmic-series variate on {1, 2, ...} with parameter p in (0, 1),
// drawn by Kemp's method.
std::int64_t sample_logarithmic(double p, RngStream& rng);

// Sum of l independent logarithmic variates; 0 iff l = 0.
std::int64_t sample_sumlog(std::int64_t l, double p, RngStream& rng);

// Multinomial allocation of n items over the given (unnormalized) weights.
void sample_multinomial(std::int64_t n, std::span<const double> weights,
                        RngStream& rng, std::span<std::int64_t> out);
std::vector<std::int64_t> sample_multinomial(std::int64_t n, std::span<const double> weights,
                                             RngStream& rng);

// Exact pmfs, used as oracles when validating the augmentation identities.
// crt_pmf uses unsigned Stirling numbers of the first kind; sumlog_pmf is the
// l-fold convolution of the logarithmic pmf. Out-of-support queries return 0.
double crt_pmf(std::int64_t l, std::int64_t y, double a);
double logarithmic_pmf(std::int64_t x, double p);
double sumlog_pmf(std::int64_t y, std::int64_t l, double p);

// A negative binomial NB(shape, g(zeta)) paired with its table-count
// augmentation; invariant: p() = 1 - exp(-zeta) exactly.
struct NbAugParams {
  std::int64_t tables = 0;  // l
  double shape = 1.0;       // a
  double zeta = 0.0;        // exposure
  double p() const { return bp_link(zeta); }
};

}  // namespace pgds
