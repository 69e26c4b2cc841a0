#include "condex/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "condex/rng.hpp"

namespace condex {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_probability(double p, const char* where) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << where << ": probability must lie in (0, 1), got " << p;
    throw std::domain_error(os.str());
  }
}

bool is_zero_shape(double xi) { return std::abs(xi) < kShapeZeroTol; }

template <class Quantile>
std::vector<double> inverse_cdf_sample(std::size_t n, std::uint64_t seed, Quantile&& q) {
  UniformStream stream(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = q(stream.next());
  return out;
}

}  // namespace

void GevParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(xi)) {
    std::ostringstream os;
    os << "GevParams: require finite parameters and sigma > 0 (mu=" << mu << ", sigma=" << sigma
       << ", xi=" << xi << ")";
    throw std::domain_error(os.str());
  }
}

void GpParams::validate() const {
  if (!(sigma_u > 0.0) || !std::isfinite(u) || !std::isfinite(sigma_u) || !std::isfinite(xi)) {
    std::ostringstream os;
    os << "GpParams: require finite parameters and sigma_u > 0 (u=" << u
       << ", sigma_u=" << sigma_u << ", xi=" << xi << ")";
    throw std::domain_error(os.str());
  }
}

double GpParams::upper_endpoint() const {
  if (xi < 0.0 && !is_zero_shape(xi)) return u - sigma_u / xi;
  return kInf;
}

void WeibullParams::validate() const {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
    std::ostringstream os;
    os << "WeibullParams: shape and scale must be positive (shape=" << shape
       << ", scale=" << scale << ")";
    throw std::domain_error(os.str());
  }
}

// --- GEV -----------------------------------------------------------------

double gev_quantile(double p, const GevParams& params) {
  require_probability(p, "gev_quantile");
  params.validate();
  const double log_y = std::log(-std::log(p));
  if (is_zero_shape(params.xi)) return params.mu - params.sigma * log_y;
  // ((-ln p)^(-xi) - 1) / xi, written with expm1 for accuracy near xi = 0.
  return params.mu + params.sigma * std::expm1(-params.xi * log_y) / params.xi;
}

double gev_cdf(double x, const GevParams& params) {
  params.validate();
  const double z = (x - params.mu) / params.sigma;
  if (is_zero_shape(params.xi)) return std::exp(-std::exp(-z));
  const double t = 1.0 + params.xi * z;
  if (t <= 0.0) return params.xi > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log1p(params.xi * z) / params.xi));
}

double gev_logpdf(double x, const GevParams& params) {
  params.validate();
  const double z = (x - params.mu) / params.sigma;
  const double log_sigma = std::log(params.sigma);
  if (is_zero_shape(params.xi)) return -log_sigma - z - std::exp(-z);
  const double t = 1.0 + params.xi * z;
  if (t <= 0.0) return -kInf;
  const double log_t = std::log1p(params.xi * z);
  return -log_sigma - (1.0 + 1.0 / params.xi) * log_t - std::exp(-log_t / params.xi);
}

std::vector<double> gev_sample(const GevParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  return inverse_cdf_sample(n, seed, [&](double u) { return gev_quantile(u, params); });
}

// --- GP ------------------------------------------------------------------

double gp_cdf(double x, const GpParams& params) {
  params.validate();
  if (x < params.u) {
    std::ostringstream os;
    os << "gp_cdf: x=" << x << " lies below the threshold u=" << params.u;
    throw std::domain_error(os.str());
  }
  const double z = (x - params.u) / params.sigma_u;
  if (is_zero_shape(params.xi)) return -std::expm1(-z);
  const double t = 1.0 + params.xi * z;
  if (t <= 0.0) return 1.0;  // beyond the finite upper endpoint
  return -std::expm1(-std::log1p(params.xi * z) / params.xi);
}

double gp_quantile(double p, const GpParams& params) {
  require_probability(p, "gp_quantile");
  params.validate();
  const double log_s = std::log1p(-p);  // ln(1 - p)
  if (is_zero_shape(params.xi)) return params.u - params.sigma_u * log_s;
  return params.u + params.sigma_u * std::expm1(-params.xi * log_s) / params.xi;
}

double gp_logpdf(double x, const GpParams& params) {
  params.validate();
  if (x < params.u) return -kInf;
  const double z = (x - params.u) / params.sigma_u;
  const double log_sigma = std::log(params.sigma_u);
  if (is_zero_shape(params.xi)) return -log_sigma - z;
  const double t = 1.0 + params.xi * z;
  if (t <= 0.0) return -kInf;
  return -log_sigma - (1.0 + 1.0 / params.xi) * std::log1p(params.xi * z);
}

std::vector<double> gp_sample(const GpParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  return inverse_cdf_sample(n, seed, [&](double u) { return gp_quantile(u, params); });
}

// --- Weibull -------------------------------------------------------------

double weibull_cdf(double x, const WeibullParams& params) {
  params.validate();
  if (x <= 0.0) return 0.0;
  return -std::expm1(-std::pow(x / params.scale, params.shape));
}

double weibull_quantile(double p, const WeibullParams& params) {
  require_probability(p, "weibull_quantile");
  params.validate();
  return params.scale * std::pow(-std::log1p(-p), 1.0 / params.shape);
}

double weibull_logpdf(double x, const WeibullParams& params) {
  params.validate();
  if (x <= 0.0) return -kInf;
  const double k = params.shape;
  const double log_z = std::log(x / params.scale);
  return std::log(k / params.scale) + (k - 1.0) * log_z - std::exp(k * log_z);
}

std::vector<double> weibull_sample(const WeibullParams& params, std::size_t n,
                                   std::uint64_t seed) {
  params.validate();
  return inverse_cdf_sample(n, seed, [&](double u) { return weibull_quantile(u, params); });
}

WeibullParams fit_weibull_mle(std::span<const double> data) {
  if (data.size() < 10) {
    throw std::invalid_argument("fit_weibull_mle: need at least 10 observations");
  }
  double x_max = 0.0;
  for (double x : data) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      std::ostringstream os;
      os << "fit_weibull_mle: data must be strictly positive and finite, got " << x;
      throw std::invalid_argument(os.str());
    }
    x_max = std::max(x_max, x);
  }
  const auto n = static_cast<double>(data.size());

  // Work with s = x / max(x) <= 1 so s^k cannot overflow.
  std::vector<double> log_s(data.size());
  double mean_log_s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    log_s[i] = std::log(data[i] / x_max);
    mean_log_s += log_s[i];
  }
  mean_log_s /= n;

  // Profile score g(k) = sum s^k ln s / sum s^k - 1/k - mean ln s, increasing in k.
  struct Score {
    double value;
    double slope;
  };
  auto score = [&](double k) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double ls : log_s) {
      const double w = std::exp(k * ls);
      s0 += w;
      s1 += w * ls;
      s2 += w * ls * ls;
    }
    const double ratio = s1 / s0;
    return Score{ratio - 1.0 / k - mean_log_s, s2 / s0 - ratio * ratio + 1.0 / (k * k)};
  };

  double lo = 1.0, hi = 1.0;
  int expansions = 0;
  while (score(lo).value > 0.0) {
    lo *= 0.5;
    if (++expansions > 60) break;
  }
  while (score(hi).value < 0.0) {
    hi *= 2.0;
    if (++expansions > 60) break;
  }
  if (score(lo).value > 0.0 || score(hi).value < 0.0) {
    std::ostringstream os;
    os << "fit_weibull_mle: could not bracket the shape equation after " << expansions
       << " expansions (bracket [" << lo << ", " << hi << "], data may be constant)";
    throw ConvergenceError(os.str());
  }

  double k = 0.5 * (lo + hi);
  constexpr int kMaxIter = 200;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const auto [g, dg] = score(k);
    if (g > 0.0) hi = k; else lo = k;
    double next = k - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - k) <= 1e-13 * k || hi - lo <= 1e-13 * k) {
      k = next;
      double mean_pow = 0.0;
      for (double ls : log_s) mean_pow += std::exp(k * ls);
      mean_pow /= n;
      return WeibullParams{k, x_max * std::pow(mean_pow, 1.0 / k)};
    }
    k = next;
  }
  std::ostringstream os;
  os << "fit_weibull_mle: shape iteration did not converge in " << kMaxIter
     << " iterations (last k=" << k << ", bracket [" << lo << ", " << hi << "])";
  throw ConvergenceError(os.str());
}

// --- Standard margins ------------------------------------------------------

double laplace_cdf(double x) {
  return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
}

double laplace_quantile(double p) {
  require_probability(p, "laplace_quantile");
  return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double gumbel_quantile(double p) {
  require_probability(p, "gumbel_quantile");
  return -std::log(-std::log(p));
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  require_probability(p, "normal_quantile");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        ((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
             6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
           1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
         1.3314166789178437745e+2) * r + 3.3871328727963666080e+0;
    const double den =
        ((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
             3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
           5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
         4.2313330701600911252e+1) * r + 1.0;
    return q * num / den;
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
             2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
           3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
         4.63033784615654529590e+0) * r + 1.42343711074968357734e+0;
    const double den =
        ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
             1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
           6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
         2.05319162663775882187e+0) * r + 1.0;
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
             1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
           2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
         5.46378491116411436990e+0) * r + 6.65790464350110377720e+0;
    const double den =
        ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
             1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
           1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
         5.99832206555887937690e-1) * r + 1.0;
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

double std_margin_cdf(StdMargin family, double x) {
  switch (family) {
    case StdMargin::laplace: return laplace_cdf(x);
    case StdMargin::gumbel: return gumbel_cdf(x);
    case StdMargin::normal: return normal_cdf(x);
  }
  throw std::domain_error("std_margin_cdf: unknown family");
}

double std_margin_quantile(StdMargin family, double p) {
  switch (family) {
    case StdMargin::laplace: return laplace_quantile(p);
    case StdMargin::gumbel: return gumbel_quantile(p);
    case StdMargin::normal: return normal_quantile(p);
  }
  throw std::domain_error("std_margin_quantile: unknown family");
}

}  // namespace condex
