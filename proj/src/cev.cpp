#include "condex/cev.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "condex/distributions.hpp"
#include "condex/empirical.hpp"
#include "condex/optimize.hpp"

namespace condex {

namespace {

constexpr double kVarianceFloor = 1e-12;

struct Moments {
  double mean;
  double var;
};

Moments residual_moments(std::span<const double> y1, std::span<const double> y2, double alpha,
                         double beta, std::vector<double>& z) {
  z.resize(y1.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    z[i] = (y2[i] - alpha * y1[i]) / std::pow(y1[i], beta);
    s += z[i];
  }
  const double m = s / static_cast<double>(z.size());
  double ss = 0.0;
  for (double v : z) ss += (v - m) * (v - m);
  return {m, std::max(ss / static_cast<double>(z.size()), kVarianceFloor)};
}

}  // namespace

void CevConfig::validate() const {
  for (double q : {u_quantile_cond, u_quantile_concom, u1_quantile}) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("cev threshold quantiles must lie in (0, 1)");
  }
  if (u1_quantile <= 0.5) {
    throw std::domain_error("cev dependence threshold quantile must exceed 0.5 so that y1 > 0");
  }
  if (min_exceedances < 3) throw std::domain_error("cev min_exceedances must be at least 3");
}

double cev_profile_nll(std::span<const double> y1, std::span<const double> y2, double alpha,
                       double beta) {
  std::vector<double> z;
  const Moments mo = residual_moments(y1, y2, alpha, beta, z);
  double log_sum = 0.0;
  for (double v : y1) log_sum += std::log(v);
  const auto m = static_cast<double>(y1.size());
  return 0.5 * m * std::log(mo.var) + beta * log_sum + 0.5 * m;
}

CevFit fit_cev_laplace(std::span<const double> y1, std::span<const double> y2) {
  if (y1.size() != y2.size()) throw std::invalid_argument("fit_cev: y1 and y2 differ in length");
  if (y1.size() < 3) throw std::invalid_argument("fit_cev: need at least 3 exceedance pairs");
  double log_sum = 0.0;
  std::vector<double> log_y1(y1.size());
  for (std::size_t i = 0; i < y1.size(); ++i) {
    if (!(y1[i] > 0.0) || !std::isfinite(y2[i])) {
      throw std::invalid_argument("fit_cev: conditioning Laplace values must be positive");
    }
    log_y1[i] = std::log(y1[i]);
    log_sum += log_y1[i];
  }

  std::vector<double> z;
  const auto objective = [&](std::span<const double> p) {
    return cev_profile_nll(y1, y2, p[0], p[1]);
  };
  const auto gradient = [&](std::span<const double> p, std::span<double> g) {
    const Moments mo = residual_moments(y1, y2, p[0], p[1], z);
    double ga = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double c = z[i] - mo.mean;
      ga -= c * y1[i] / std::pow(y1[i], p[1]);
      gb -= c * z[i] * log_y1[i];
    }
    g[0] = ga / mo.var;
    g[1] = gb / mo.var + log_sum;
  };

  const std::array<double, 2> lower{kCevAlphaMin, kCevBetaMin};
  const std::array<double, 2> upper{kCevAlphaMax, kCevBetaMax};
  optim::BoxOptions opts;
  opts.max_iterations = 1000;
  opts.g_tolerance = 1e-9;

  optim::Result best;
  best.value = std::numeric_limits<double>::infinity();
  for (double a0 : {-0.5, 0.0, 0.5, 0.9}) {
    for (double b0 : {-0.5, 0.0, 0.5}) {
      optim::Result r = optim::minimize_box(objective, gradient, {a0, b0}, lower, upper, opts);
      if (std::isfinite(r.value) && r.value < best.value) best = std::move(r);
    }
  }
  if (!std::isfinite(best.value)) throw ConvergenceError("fit_cev: pseudo-likelihood is not finite at any start");

  CevFit fit;
  fit.alpha = best.x[0];
  fit.beta = best.x[1];
  fit.nll = best.value;
  const Moments mo = residual_moments(y1, y2, fit.alpha, fit.beta, fit.residuals);
  fit.mu_z = mo.mean;
  fit.sigma_z = std::sqrt(mo.var);
  std::sort(fit.residuals.begin(), fit.residuals.end());

  constexpr double kEdge = 1e-6;
  const bool alpha_edge = fit.alpha <= kCevAlphaMin + kEdge || fit.alpha >= kCevAlphaMax - kEdge;
  const bool beta_edge = fit.beta <= kCevBetaMin + kEdge || fit.beta >= kCevBetaMax - kEdge;
  if (alpha_edge || beta_edge) {
    fit.at_boundary = true;
    fit.warnings.push_back("fit_cev: optimum on the parameter box boundary (alpha " + std::to_string(fit.alpha) +
                           ", beta " + std::to_string(fit.beta) + ")");
  }
  return fit;
}

CevFit fit_cev(const PairData& pairs, const CevConfig& config) {
  config.validate();
  if (pairs.x1.size() != pairs.x2.size()) throw std::invalid_argument("fit_cev: x1 and x2 differ in length");
  SemiParamMarginal m1 = build_semiparam_marginal(pairs.x1, config.u_quantile_cond);
  SemiParamMarginal m2 = build_semiparam_marginal(pairs.x2, config.u_quantile_concom);
  const double u1 = empirical_quantile_type7(pairs.x1, config.u1_quantile);

  std::vector<double> y1, y2;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs.x1[i] > u1) {
      y1.push_back(to_laplace(pairs.x1[i], m1));
      y2.push_back(to_laplace(pairs.x2[i], m2));
    }
  }
  if (y1.size() < config.min_exceedances) {
    throw std::invalid_argument("fit_cev: " + std::to_string(y1.size()) + " exceedances of the dependence threshold, need " +
                                std::to_string(config.min_exceedances));
  }
  const double u1_laplace = to_laplace(u1, m1);
  if (!(u1_laplace > 0.0)) throw std::logic_error("fit_cev: dependence threshold is not positive on the Laplace scale");

  CevFit fit = fit_cev_laplace(y1, y2);
  fit.u1_original = u1;
  fit.u1_laplace = u1_laplace;
  fit.marginal1 = std::move(m1);
  fit.marginal2 = std::move(m2);
  fit.config = config;
  return fit;
}

double cev_laplace_quantile(const CevFit& fit, double y1, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("cev quantile level must lie in (0, 1)");
  if (!(y1 > 0.0)) throw std::domain_error("cev conditioning Laplace value must be positive");
  const double q = sorted_quantile_type7(fit.residuals, tau);
  return fit.alpha * y1 + std::pow(y1, fit.beta) * q;
}

double cev_conditional_quantile(const CevFit& fit, double x1, double tau) {
  if (!(x1 > fit.u1_original)) {
    throw std::domain_error("cev_conditional_quantile: x1 = " + std::to_string(x1) +
                            " is not above the dependence threshold " + std::to_string(fit.u1_original) +
                            "; use unconditional estimation there");
  }
  const double y1 = to_laplace(x1, fit.marginal1);
  return from_laplace(cev_laplace_quantile(fit, y1, tau), fit.marginal2);
}

ConditionalQuantileCurve cev_curve(const CevFit& fit, std::span<const double> x1_grid,
                                   std::span<const double> taus) {
  ConditionalQuantileCurve c;
  c.x1.assign(x1_grid.begin(), x1_grid.end());
  c.taus.assign(taus.begin(), taus.end());
  c.values.reserve(c.x1.size() * c.taus.size());
  for (double x : c.x1) {
    for (double t : c.taus) c.values.push_back(cev_conditional_quantile(fit, x, t));
  }
  return c;
}

}  // namespace condex
