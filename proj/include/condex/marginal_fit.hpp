#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "condex/distributions.hpp"

namespace condex {

/// Shape box used by the GEV and GP likelihood fits.
inline constexpr double kGevShapeMin = -0.5;
inline constexpr double kGevShapeMax = 0.5;
inline constexpr double kGpShapeMin = -0.95;
inline constexpr double kGpShapeMax = 1.0;

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct GevFit {
  GevParams params;
  double nll = 0.0;
  /// Inverse observed information in (mu, sigma, xi).
  Matrix3 cov{};
  std::size_t n = 0;
  std::vector<std::string> warnings;
};

/// Fit failure that still carries the best point the optimizer reached.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, GevParams best, double best_nll)
      : std::runtime_error(what), best_(best), best_nll_(best_nll) {}
  [[nodiscard]] const GevParams& best() const noexcept { return best_; }
  [[nodiscard]] double best_nll() const noexcept { return best_nll_; }

 private:
  GevParams best_;
  double best_nll_;
};

/// GEV negative log-likelihood; +infinity when any point is off the support.
[[nodiscard]] double gev_nll(std::span<const double> data, const GevParams& params);

/// Probability-weighted-moment estimate (Hosking 1985), used as a start.
[[nodiscard]] GevParams gev_pwm_estimate(std::span<const double> data);

/// Maximum likelihood GEV fit with sigma = exp(s) and xi boxed to
/// [kGevShapeMin, kGevShapeMax]. Multi-start simplex search from the PWM
/// estimate, a Gumbel moment estimate and shape perturbations.
[[nodiscard]] GevFit fit_gev_mle(std::span<const double> maxima);

/// The 1 - 1/r quantile of the fitted distribution. Requires r > 1.
[[nodiscard]] double return_level(const GevFit& fit, double r);

struct ReturnLevelCI {
  double r = 0.0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  bool lower_found = true;  // false: lower is the edge of the search window
  bool upper_found = true;
  std::vector<std::string> warnings;
};

/// Wald interval from the observed-information covariance.
[[nodiscard]] ReturnLevelCI delta_method_ci(const GevFit& fit, double r, double level = 0.95);

/// Profile-likelihood interval for the r-year return level. The likelihood is
/// reparameterized by the return level and the remaining parameters are
/// profiled out; bounds solve 2 (l_max - l_profile(z)) = chi2_1(level) by
/// outward bracketing and bisection within +/- 10 standard errors.
[[nodiscard]] ReturnLevelCI profile_likelihood_ci(const GevFit& fit, std::span<const double> data,
                                                  double r, double level = 0.95);

/// Profile negative log-likelihood at return level z (exposed for tests).
[[nodiscard]] double gev_profile_nll(std::span<const double> data, double r, double z,
                                     const GevParams& start);

/// Maximum likelihood GP fit to the values of `data` strictly above u.
[[nodiscard]] GpParams fit_gp_mle(std::span<const double> data, double u);

/// Empirical distribution below u, GP tail above u.
///
/// The empirical part interpolates linearly between the distinct sample
/// values, each placed at its average rank divided by (n + 1). Above u the
/// CDF is 1 - (1 - u_prob) * S_gp(x), so it is continuous at u.
class SemiParamMarginal {
 public:
  SemiParamMarginal() = default;
  /// Rebuilds the marginal from stored parts (the sample need not be sorted).
  SemiParamMarginal(std::vector<double> sample, double u, const GpParams& gp);

  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double quantile(double p) const;

  [[nodiscard]] const std::vector<double>& sorted_sample() const noexcept { return sorted_; }
  [[nodiscard]] double u() const noexcept { return u_; }
  [[nodiscard]] double u_prob() const noexcept { return u_prob_; }
  [[nodiscard]] const GpParams& gp() const noexcept { return gp_; }
  [[nodiscard]] std::size_t n() const noexcept { return sorted_.size(); }

  /// Probability bounds applied before the standard-margin map.
  [[nodiscard]] double p_min() const noexcept;
  [[nodiscard]] double p_max() const noexcept;

  /// 64-bit FNV-1a digest of the sorted sample, as 16 hex digits.
  [[nodiscard]] std::string sample_digest() const;

 private:
  [[nodiscard]] double empirical_cdf(double x) const;
  [[nodiscard]] double empirical_quantile(double p) const;

  std::vector<double> sorted_;
  std::vector<double> knot_x_;
  std::vector<double> knot_p_;
  double u_ = 0.0;
  double u_prob_ = 0.0;
  GpParams gp_;
};

/// u is the type-7 quantile of the data at u_quantile; the GP tail is fitted
/// by maximum likelihood to the exceedances of u.
///
/// Requires at least 50 observations, 0.5 <= u_quantile < 1 and at least 10
/// exceedances.
[[nodiscard]] SemiParamMarginal build_semiparam_marginal(std::span<const double> data,
                                                         double u_quantile);

[[nodiscard]] double to_laplace(double x, const SemiParamMarginal& m);
[[nodiscard]] double from_laplace(double y, const SemiParamMarginal& m);

}  // namespace condex
