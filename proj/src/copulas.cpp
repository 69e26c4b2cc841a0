#include "condex/copulas.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "condex/distributions.hpp"
#include "condex/rng.hpp"

namespace condex {
namespace {

constexpr double kBracketLo = 1e-12;
constexpr double kBracketHi = 1.0 - 1e-12;

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << what << " must lie in (0, 1), got " << v;
    throw std::domain_error(os.str());
  }
}

// log(a + b) from log a and log b.
double log_add(double la, double lb) {
  const double hi = std::max(la, lb), lo = std::min(la, lb);
  return hi + std::log1p(std::exp(lo - hi));
}

struct GumbelTerms {
  double x, y;      // -ln u1, -ln u2
  double log_a;     // ln(x^theta + y^theta)
  double a_root;    // A^(1/theta)
};

GumbelTerms gumbel_terms(double theta, double u1, double u2) {
  GumbelTerms t;
  t.x = -std::log(u1);
  t.y = -std::log(u2);
  t.log_a = log_add(theta * std::log(t.x), theta * std::log(t.y));
  t.a_root = std::exp(t.log_a / theta);
  return t;
}

double gumbel_h(double alpha, double u2, double u1) {
  const double theta = 1.0 / alpha;
  const GumbelTerms t = gumbel_terms(theta, u1, u2);
  const double log_h = -t.a_root + (1.0 / theta - 1.0) * t.log_a + (theta - 1.0) * std::log(t.x) + t.x;
  return std::exp(log_h);
}

double gumbel_density(double alpha, double u1, double u2) {
  const double theta = 1.0 / alpha;
  const GumbelTerms t = gumbel_terms(theta, u1, u2);
  const double log_c = -t.a_root + (theta - 1.0) * (std::log(t.x) + std::log(t.y)) + t.x + t.y +
                       (2.0 / theta - 2.0) * t.log_a +
                       std::log1p((theta - 1.0) * std::exp(-t.log_a / theta));
  return std::exp(log_c);
}

double gumbel_inverse(double alpha, double tau, double u1) {
  auto h = [&](double u2) { return gumbel_h(alpha, u2, u1); };
  double lo = kBracketLo, hi = kBracketHi;
  const double h_lo = h(lo), h_hi = h(hi);
  if (tau <= h_lo) return lo;
  if (tau >= h_hi) return hi;
  if (!(h_lo < tau && tau < h_hi)) {
    std::ostringstream os;
    os << "gumbel conditional inverse: no sign change on [" << lo << ", " << hi << "] (h=" << h_lo
       << ", " << h_hi << ", tau=" << tau << ", u1=" << u1 << ", alpha=" << alpha << ")";
    throw ConvergenceError(os.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) < tau) lo = mid; else hi = mid;
  }
  double u2 = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double step = (h(u2) - tau) / gumbel_density(alpha, u1, u2);
    const double next = u2 - step;
    if (!(next > lo && next < hi) || !std::isfinite(next)) break;
    u2 = next;
    if (std::abs(step) < 1e-16) break;
  }
  return u2;
}

double clayton_cdf(double delta, double u1, double u2) {
  const double s = std::expm1(-delta * std::log(u1)) + std::expm1(-delta * std::log(u2));
  return std::exp(-std::log1p(s) / delta);
}

double clayton_h(double delta, double u2, double u1) {
  const double l1 = std::log(u1);
  const double log_a = std::log1p(std::expm1(-delta * l1) + std::expm1(-delta * std::log(u2)));
  return std::exp((-delta - 1.0) * l1 + (-1.0 / delta - 1.0) * log_a);
}

double clayton_density(double delta, double u1, double u2) {
  const double l1 = std::log(u1), l2 = std::log(u2);
  const double log_a = std::log1p(std::expm1(-delta * l1) + std::expm1(-delta * l2));
  return std::exp(std::log1p(delta) + (-delta - 1.0) * (l1 + l2) + (-1.0 / delta - 2.0) * log_a);
}

double clayton_inverse(double delta, double tau, double u1) {
  // u2 = [ (tau u1^(delta+1))^(-delta/(1+delta)) - u1^-delta + 1 ]^(-1/delta)
  const double l1 = std::log(u1);
  const double lt = std::log(tau) + (delta + 1.0) * l1;
  const double b = std::expm1(-delta / (1.0 + delta) * lt) - std::expm1(-delta * l1);
  return std::exp(-std::log1p(b) / delta);
}

double gaussian_cdf(double rho, double u1, double u2) {
  // Plackett: dPhi2/drho = phi2, so C = u1 u2 + int_0^rho phi2(a, b; r) dr.
  const double a = normal_quantile(u1), b = normal_quantile(u2);
  auto phi2 = [&](double r) {
    const double s = 1.0 - r * r;
    return std::exp(-(a * a - 2.0 * r * a * b + b * b) / (2.0 * s)) / (2.0 * std::numbers::pi * std::sqrt(s));
  };
  return u1 * u2 + boost::math::quadrature::gauss<double, 30>::integrate(phi2, 0.0, rho);
}

}  // namespace

void CopulaSpec::validate() const {
  const double p = parameter;
  bool ok = std::isfinite(p);
  switch (family) {
    case CopulaFamily::gaussian: ok = ok && p > -1.0 && p < 1.0; break;
    case CopulaFamily::gumbel: ok = ok && p > 0.0 && p <= 1.0; break;
    case CopulaFamily::clayton: ok = ok && p > 0.0; break;
  }
  if (!ok) {
    std::ostringstream os;
    os << "CopulaSpec: parameter " << p << " outside the domain of the " << to_string(family)
       << " family";
    throw std::domain_error(os.str());
  }
}

double CopulaSpec::kendall_tau() const {
  validate();
  switch (family) {
    case CopulaFamily::gaussian: return 2.0 / std::numbers::pi * std::asin(parameter);
    case CopulaFamily::gumbel: return 1.0 - parameter;
    case CopulaFamily::clayton: return parameter / (parameter + 2.0);
  }
  return 0.0;
}

CopulaSpec copula_preset(CopulaFamily family, Strength strength) {
  const auto idx = static_cast<std::size_t>(strength);
  switch (family) {
    case CopulaFamily::gaussian: return {family, std::array{0.1, 0.3, 0.6}[idx]};
    case CopulaFamily::gumbel: return {family, std::array{0.9, 0.7, 0.5}[idx]};
    case CopulaFamily::clayton: return {family, std::array{0.1, 0.5, 0.9}[idx]};
  }
  throw std::domain_error("copula_preset: unknown family");
}

std::string_view to_string(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::gaussian: return "gaussian";
    case CopulaFamily::gumbel: return "gumbel";
    case CopulaFamily::clayton: return "clayton";
  }
  return "unknown";
}

std::string_view to_string(Strength strength) {
  switch (strength) {
    case Strength::weak: return "weak";
    case Strength::median: return "median";
    case Strength::strong: return "strong";
  }
  return "unknown";
}

CopulaFamily parse_copula_family(std::string_view name) {
  if (name == "gaussian") return CopulaFamily::gaussian;
  if (name == "gumbel") return CopulaFamily::gumbel;
  if (name == "clayton") return CopulaFamily::clayton;
  throw std::invalid_argument("unknown copula family '" + std::string(name) + "'");
}

Strength parse_strength(std::string_view name) {
  if (name == "weak") return Strength::weak;
  if (name == "median") return Strength::median;
  if (name == "strong") return Strength::strong;
  throw std::invalid_argument("unknown dependence strength '" + std::string(name) + "'");
}

double copula_cdf(const CopulaSpec& spec, double u1, double u2) {
  spec.validate();
  require_open_unit(u1, "copula_cdf: u1");
  require_open_unit(u2, "copula_cdf: u2");
  switch (spec.family) {
    case CopulaFamily::gaussian: return gaussian_cdf(spec.parameter, u1, u2);
    case CopulaFamily::gumbel: {
      const GumbelTerms t = gumbel_terms(1.0 / spec.parameter, u1, u2);
      return std::exp(-t.a_root);
    }
    case CopulaFamily::clayton: return clayton_cdf(spec.parameter, u1, u2);
  }
  return 0.0;
}

double conditional_cdf(const CopulaSpec& spec, double u2, double u1) {
  spec.validate();
  require_open_unit(u1, "conditional_cdf: u1");
  require_open_unit(u2, "conditional_cdf: u2");
  switch (spec.family) {
    case CopulaFamily::gaussian: {
      const double rho = spec.parameter;
      return normal_cdf((normal_quantile(u2) - rho * normal_quantile(u1)) / std::sqrt(1.0 - rho * rho));
    }
    case CopulaFamily::gumbel: return gumbel_h(spec.parameter, u2, u1);
    case CopulaFamily::clayton: return clayton_h(spec.parameter, u2, u1);
  }
  return 0.0;
}

double copula_density(const CopulaSpec& spec, double u1, double u2) {
  spec.validate();
  require_open_unit(u1, "copula_density: u1");
  require_open_unit(u2, "copula_density: u2");
  switch (spec.family) {
    case CopulaFamily::gaussian: {
      const double rho = spec.parameter, a = normal_quantile(u1), b = normal_quantile(u2);
      const double s = 1.0 - rho * rho;
      return std::exp(-(rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (2.0 * s)) / std::sqrt(s);
    }
    case CopulaFamily::gumbel: return gumbel_density(spec.parameter, u1, u2);
    case CopulaFamily::clayton: return clayton_density(spec.parameter, u1, u2);
  }
  return 0.0;
}

double conditional_quantile_copula_scale(const CopulaSpec& spec, double tau, double u1) {
  spec.validate();
  require_open_unit(tau, "conditional quantile: tau");
  require_open_unit(u1, "conditional quantile: u1");
  switch (spec.family) {
    case CopulaFamily::gaussian: {
      const double rho = spec.parameter;
      return normal_cdf(rho * normal_quantile(u1) + std::sqrt(1.0 - rho * rho) * normal_quantile(tau));
    }
    case CopulaFamily::gumbel: return gumbel_inverse(spec.parameter, tau, u1);
    case CopulaFamily::clayton: return clayton_inverse(spec.parameter, tau, u1);
  }
  return 0.0;
}

double true_conditional_quantile(const CopulaSpec& spec, double tau, double u1,
                                 const std::function<double(double)>& marginal2_quantile) {
  const double u2 = conditional_quantile_copula_scale(spec, tau, u1);
  return marginal2_quantile(std::clamp(u2, kBracketLo, kBracketHi));
}

BivariateSample sample_copula(const CopulaSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  BivariateSample out;
  out.seed = seed;
  out.u1.resize(n);
  out.u2.resize(n);
  UniformStream stream(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u1 = stream.next();
    const double v = stream.next();
    out.u1[i] = u1;
    out.u2[i] = conditional_quantile_copula_scale(spec, v, u1);
  }
  return out;
}

}  // namespace condex
