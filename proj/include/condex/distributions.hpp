#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace condex {

/// Shape parameters with |xi| below this are evaluated on the exact xi = 0 branch.
inline constexpr double kShapeZeroTol = 1e-9;

/// Generalized extreme value parameters.
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  void validate() const;
  friend bool operator==(const GevParams&, const GevParams&) = default;
};

/// Generalized Pareto parameters for exceedances of threshold u.
struct GpParams {
  double u = 0.0;
  double sigma_u = 1.0;
  double xi = 0.0;

  void validate() const;
  /// Upper endpoint of the support (+inf when xi >= 0).
  [[nodiscard]] double upper_endpoint() const;
  friend bool operator==(const GpParams&, const GpParams&) = default;
};

struct WeibullParams {
  double shape = 1.0;  // k
  double scale = 1.0;  // lambda

  void validate() const;
  friend bool operator==(const WeibullParams&, const WeibullParams&) = default;
};

enum class StdMargin { laplace, gumbel, normal };

// --- GEV -----------------------------------------------------------------

[[nodiscard]] double gev_quantile(double p, const GevParams& params);
[[nodiscard]] double gev_cdf(double x, const GevParams& params);
/// Log density; -infinity off the support.
[[nodiscard]] double gev_logpdf(double x, const GevParams& params);
[[nodiscard]] std::vector<double> gev_sample(const GevParams& params, std::size_t n,
                                             std::uint64_t seed);

// --- GP ------------------------------------------------------------------

/// Throws std::domain_error for x below the threshold.
[[nodiscard]] double gp_cdf(double x, const GpParams& params);
[[nodiscard]] double gp_quantile(double p, const GpParams& params);
/// Log density of an exceedance value x (not the excess); -infinity off support.
[[nodiscard]] double gp_logpdf(double x, const GpParams& params);
[[nodiscard]] std::vector<double> gp_sample(const GpParams& params, std::size_t n,
                                            std::uint64_t seed);

// --- Weibull -------------------------------------------------------------

[[nodiscard]] double weibull_cdf(double x, const WeibullParams& params);
[[nodiscard]] double weibull_quantile(double p, const WeibullParams& params);
[[nodiscard]] double weibull_logpdf(double x, const WeibullParams& params);
[[nodiscard]] std::vector<double> weibull_sample(const WeibullParams& params, std::size_t n,
                                                 std::uint64_t seed);

/// Maximum likelihood fit. Solves the profile score equation in the shape by
/// safeguarded Newton, then takes the scale in closed form.
///
/// Throws std::invalid_argument for n < 10 or nonpositive data and
/// ConvergenceError when the shape equation cannot be solved.
[[nodiscard]] WeibullParams fit_weibull_mle(std::span<const double> data);

// --- Standard margins ------------------------------------------------------

[[nodiscard]] double laplace_cdf(double x);
[[nodiscard]] double laplace_quantile(double p);
[[nodiscard]] double gumbel_cdf(double x);
[[nodiscard]] double gumbel_quantile(double p);
[[nodiscard]] double normal_pdf(double x);
[[nodiscard]] double normal_cdf(double x);
/// Wichura's AS 241 (PPND16); relative error about 1e-16 over (1e-300, 1).
[[nodiscard]] double normal_quantile(double p);

[[nodiscard]] double std_margin_cdf(StdMargin family, double x);
[[nodiscard]] double std_margin_quantile(StdMargin family, double p);

/// Raised when an iterative solver fails; the message carries diagnostics.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace condex
