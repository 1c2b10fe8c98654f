#include "pgds/numeric.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pgds {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_poisson_pmf(std::int64_t k, double rate) {
  if (k < 0) return kNegInf;
  if (rate < 0 || !std::isfinite(rate)) throw std::domain_error("poisson rate must be finite and >= 0");
  if (rate == 0.0) return k == 0 ? 0.0 : kNegInf;
  return static_cast<double>(k) * std::log(rate) - rate - std::lgamma(static_cast<double>(k) + 1.0);
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::domain_error("gamma shape/rate must be > 0");
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_nb_pmf(std::int64_t y, double shape, double p) {
  if (!(shape > 0.0) || p < 0.0 || p >= 1.0) throw std::domain_error("nb requires shape > 0 and p in [0,1)");
  if (y < 0) return kNegInf;
  if (p == 0.0) return y == 0 ? 0.0 : kNegInf;
  const double yd = static_cast<double>(y);
  return std::lgamma(yd + shape) - std::lgamma(shape) - std::lgamma(yd + 1.0) +
         shape * std::log1p(-p) + yd * std::log(p);
}

double log_dirichlet_pdf(std::span<const double> x, std::span<const double> conc) {
  if (x.size() != conc.size() || x.empty()) throw std::domain_error("dirichlet dimension mismatch");
  if (x.size() == 1) return 0.0;  // point mass at 1
  double conc_sum = 0.0, lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(conc[i] > 0.0)) throw std::domain_error("dirichlet concentration must be > 0");
    if (!(x[i] > 0.0)) return kNegInf;
    conc_sum += conc[i];
    lp += (conc[i] - 1.0) * std::log(x[i]) - std::lgamma(conc[i]);
  }
  return lp + std::lgamma(conc_sum);
}

namespace {

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_p requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double gamma_cdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::domain_error("gamma shape/rate must be > 0");
  if (x <= 0.0) return 0.0;
  return gamma_p(shape, rate * x);
}

double chi_square_sf(double stat, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("chi_square_sf requires dof > 0");
  if (stat <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * stat);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::domain_error("mean of empty range");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::domain_error("variance needs at least two values");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double batch_means_se(std::span<const double> xs, int n_batches) {
  if (n_batches < 2) throw std::domain_error("batch_means_se needs >= 2 batches");
  const std::size_t n = xs.size();
  const std::size_t m = n / static_cast<std::size_t>(n_batches);
  if (m < 1) throw std::domain_error("batch_means_se: series shorter than batch count");
  std::vector<double> batch(static_cast<std::size_t>(n_batches));
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += xs[static_cast<std::size_t>(b) * m + i];
    batch[static_cast<std::size_t>(b)] = s / static_cast<double>(m);
  }
  return std::sqrt(variance(batch) / static_cast<double>(n_batches));
}

}  // namespace pgds
