#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pgds {

// Log densities / pmfs used across the sampler, the log-joint and the
// validation suite. Gamma is parameterized by (shape, rate) throughout.

double log_poisson_pmf(std::int64_t k, double rate);
double log_gamma_pdf(double x, double shape, double rate);
// Negative binomial with success probability p: pmf(y) ∝ p^y (1-p)^shape.
double log_nb_pmf(std::int64_t y, double shape, double p);
double log_dirichlet_pdf(std::span<const double> x, std::span<const double> conc);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// CDF of Gamma(shape, rate) at x.
double gamma_cdf(double x, double shape, double rate);

// Survival function of the chi-square distribution with dof degrees of
// freedom (the p-value of a chi-square statistic).
double chi_square_sf(double stat, double dof);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);

// Standard error of the mean of a correlated series via batch means.
double batch_means_se(std::span<const double> xs, int n_batches = 50);

}  // namespace pgds
