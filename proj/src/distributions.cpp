#include "pgds/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pgds {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kValueFloor = 1e-300;
}  // namespace

double bp_link(double z) {
  if (!(z >= 0.0) || !std::isfinite(z)) throw std::domain_error("bp_link requires finite z >= 0");
  return -std::expm1(-z);
}

double lambert_w_minus1(double x) {
  const double branch = -std::exp(-1.0);
  if (!std::isfinite(x) || x < branch * (1.0 + 1e-12) || x >= 0.0)
    throw std::domain_error("lambert_w_minus1 requires x in [-1/e, 0)");
  if (x <= branch) return -1.0;

  double w;
  if (x < -0.25) {
    // Series around the branch point with p = -sqrt(2 (1 + e x)).
    const double p = -std::sqrt(std::max(0.0, 2.0 * (1.0 + std::exp(1.0) * x)));
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)));
  } else {
    // Asymptotic guess for x near 0^-: w ~ ln(-x) - ln(-ln(-x)).
    const double lx = std::log(-x);
    w = lx - std::log(-lx);
  }

  // Halley iteration on f(w) = w e^w - x.
  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    const double step = f / denom;
    w -= step;
    if (std::fabs(step) <= 1e-14 * (1.0 + std::fabs(w))) break;
  }
  return std::min(w, -1.0);
}

double steady_state_zeta(double delta, double tau0) {
  if (!(delta > 0.0) || !(tau0 > 0.0) || !std::isfinite(delta) || !std::isfinite(tau0))
    throw std::domain_error("steady_state_zeta requires delta, tau0 > 0");
  const double c = delta / tau0;
  const double x = -std::exp(-1.0 - c);
  if (x == 0.0) {
    // exp underflow for extreme delta/tau0; fall back to the fixed point
    // iteration, which contracts quickly from log(1 + c).
    double z = std::log1p(c);
    for (int it = 0; it < 200; ++it) z = std::log1p(c + z);
    return z;
  }
  return -lambert_w_minus1(x) - 1.0 - c;
}

double sample_normal(RngStream& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
    throw std::domain_error("sample_gamma requires shape, rate > 0");
  shape = std::max(shape, kValueFloor);

  if (shape < 1.0) {
    // Gamma(shape) = Gamma(shape + 1) * U^{1/shape}.
    const double boost = std::exp(std::log(rng.uniform()) / shape);
    return std::max(sample_gamma(shape + 1.0, rate, rng) * boost, kValueFloor);
  }

  // Marsaglia–Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return std::max(d * v / rate, kValueFloor);
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return std::max(d * v / rate, kValueFloor);
  }
}

std::vector<double> sample_dirichlet(std::span<const double> conc, RngStream& rng) {
  if (conc.empty()) throw std::domain_error("sample_dirichlet requires at least one component");
  std::vector<double> out(conc.size());
  double total = 0.0;
  for (std::size_t i = 0; i < conc.size(); ++i) {
    if (!(conc[i] > 0.0)) throw std::domain_error("sample_dirichlet requires positive concentrations");
    out[i] = std::max(sample_gamma(conc[i], 1.0, rng), kValueFloor);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

namespace {

std::int64_t poisson_inversion(double rate, RngStream& rng) {
  const double u = rng.uniform();
  double p = std::exp(-rate);
  double cdf = p;
  std::int64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
    if (p < 1e-320) break;  // tail exhausted by rounding
  }
  return k;
}

// Hörmann's transformed rejection (PTRS), valid for rate >= 10.
std::int64_t poisson_ptrs(double rate, RngStream& rng) {
  const double log_rate = std::log(rate);
  const double b = 0.931 + 2.53 * std::sqrt(rate);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + rate + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_rate - rate - std::lgamma(kf + 1.0))
      return static_cast<std::int64_t>(kf);
  }
}

}  // namespace

std::int64_t sample_poisson(double rate, RngStream& rng) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::domain_error("sample_poisson requires finite rate >= 0");
  if (rate == 0.0) return 0;
  return rate < 10.0 ? poisson_inversion(rate, rng) : poisson_ptrs(rate, rng);
}

std::int64_t sample_crt(std::int64_t y, double a, RngStream& rng) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::domain_error("sample_crt requires a > 0");
  if (y < 0) throw std::domain_error("sample_crt requires y >= 0");
  std::int64_t tables = 0;
  for (std::int64_t i = 0; i < y; ++i) {
    if (rng.uniform() * (a + static_cast<double>(i)) < a) ++tables;
  }
  return tables;
}

std::int64_t sample_logarithmic(double p, RngStream& rng) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("sample_logarithmic requires p in (0,1)");
  const double r = std::log1p(-p);
  for (;;) {
    const double v = rng.uniform();
    if (v >= p) return 1;
    const double u = rng.uniform();
    const double q = -std::expm1(r * u);
    if (v <= q * q) {
      const double res = std::floor(1.0 + std::log(v) / std::log(q));
      if (res < 1.0 || !std::isfinite(res)) continue;
      return static_cast<std::int64_t>(res);
    }
    if (v >= q) return 1;
    return 2;
  }
}

std::int64_t sample_sumlog(std::int64_t l, double p, RngStream& rng) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("sample_sumlog requires p in (0,1)");
  if (l < 0) throw std::domain_error("sample_sumlog requires l >= 0");
  std::int64_t sum = 0;
  for (std::int64_t i = 0; i < l; ++i) sum += sample_logarithmic(p, rng);
  return sum;
}

void sample_multinomial(std::int64_t n, std::span<const double> weights,
                        RngStream& rng, std::span<std::int64_t> out) {
  if (weights.empty() || out.size() != weights.size())
    throw std::domain_error("sample_multinomial dimension mismatch");
  for (auto& c : out) c = 0;
  if (n == 0) return;
  if (n < 0) throw std::domain_error("sample_multinomial requires n >= 0");

  // Cumulative weights once, then binary search per item.
  static thread_local std::vector<double> cum;
  cum.resize(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::domain_error("sample_multinomial requires finite weights >= 0");
    total += w;
    cum[i] = total;
  }
  if (!(total > 0.0)) throw std::domain_error("sample_multinomial requires a positive total weight");

  for (std::int64_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    std::size_t lo = 0, hi = cum.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (u <= cum[mid]) hi = mid; else lo = mid + 1;
    }
    ++out[lo];
  }
}

std::vector<std::int64_t> sample_multinomial(std::int64_t n, std::span<const double> weights,
                                             RngStream& rng) {
  std::vector<std::int64_t> out(weights.size());
  sample_multinomial(n, weights, rng, out);
  return out;
}

double crt_pmf(std::int64_t l, std::int64_t y, double a) {
  if (!(a > 0.0)) throw std::domain_error("crt_pmf requires a > 0");
  if (y < 0 || l < 0) return 0.0;
  if (y == 0) return l == 0 ? 1.0 : 0.0;
  if (l < 1 || l > y) return 0.0;
  if (y > 170) throw std::domain_error("crt_pmf supports y <= 170");

  // Unsigned Stirling numbers of the first kind, row y.
  std::vector<double> row(static_cast<std::size_t>(y) + 1, 0.0);
  row[0] = 1.0;  // |s(0, 0)|
  for (std::int64_t n = 0; n < y; ++n) {
    for (std::int64_t k = n + 1; k >= 1; --k)
      row[static_cast<std::size_t>(k)] = static_cast<double>(n) * row[static_cast<std::size_t>(k)] +
                                         row[static_cast<std::size_t>(k - 1)];
    row[0] = 0.0;
  }
  const double scale = std::exp(static_cast<double>(l) * std::log(a) + std::lgamma(a) -
                                std::lgamma(a + static_cast<double>(y)));
  return row[static_cast<std::size_t>(l)] * scale;
}

double logarithmic_pmf(std::int64_t x, double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("logarithmic_pmf requires p in (0,1)");
  if (x < 1) return 0.0;
  return std::exp(static_cast<double>(x) * std::log(p)) /
         (static_cast<double>(x) * -std::log1p(-p));
}

double sumlog_pmf(std::int64_t y, std::int64_t l, double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("sumlog_pmf requires p in (0,1)");
  if (l < 0 || y < 0) return 0.0;
  if (l == 0) return y == 0 ? 1.0 : 0.0;
  if (y < l) return 0.0;

  // l-fold convolution of the logarithmic pmf, truncated at y.
  const std::size_t n = static_cast<std::size_t>(y);
  std::vector<double> base(n + 1, 0.0), acc(n + 1, 0.0), next(n + 1, 0.0);
  for (std::size_t x = 1; x <= n; ++x) base[x] = logarithmic_pmf(static_cast<std::int64_t>(x), p);
  acc = base;
  for (std::int64_t j = 2; j <= l; ++j) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = static_cast<std::size_t>(j - 1); s < n; ++s) {
      if (acc[s] == 0.0) continue;
      for (std::size_t x = 1; s + x <= n; ++x) next[s + x] += acc[s] * base[x];
    }
    acc.swap(next);
  }
  return acc[n];
}

}  // namespace pgds
