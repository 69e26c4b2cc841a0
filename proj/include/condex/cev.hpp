#pragma once

#include <span>
#include <string>
#include <vector>

#include "condex/curve.hpp"
#include "condex/marginal_fit.hpp"

namespace condex {

struct CevConfig {
  double u_quantile_cond = 0.6;    // marginal threshold, conditioning variable
  double u_quantile_concom = 0.75; // marginal threshold, concomitant variable
  double u1_quantile = 0.6;        // dependence threshold
  std::size_t min_exceedances = 30;

  void validate() const;
};

inline constexpr double kCevAlphaMin = -1.0;
inline constexpr double kCevAlphaMax = 1.0;
inline constexpr double kCevBetaMin = -5.0;
inline constexpr double kCevBetaMax = 1.0;

/// Conditional extreme value fit on Laplace margins:
/// Y2 = alpha * Y1 + Y1^beta * Z for Y1 above the dependence threshold.
///
/// `residuals` holds z_i = (y2_i - alpha * y1_i) / y1_i^beta, sorted. The
/// location mu_z is not subtracted, so mean(residuals) == mu_z.
struct CevFit {
  double alpha = 0.0;
  double beta = 0.0;
  double mu_z = 0.0;
  double sigma_z = 1.0;
  double nll = 0.0;
  std::vector<double> residuals;
  double u1_original = 0.0;
  double u1_laplace = 0.0;
  SemiParamMarginal marginal1;
  SemiParamMarginal marginal2;
  CevConfig config;
  bool at_boundary = false;
  std::vector<std::string> warnings;
};

/// Gaussian pseudo negative log-likelihood with (mu_z, sigma_z) profiled out.
[[nodiscard]] double cev_profile_nll(std::span<const double> y1, std::span<const double> y2,
                                     double alpha, double beta);

/// Fits (alpha, beta) directly on Laplace-scale exceedance pairs (all y1 > 0).
/// Marginal and threshold fields of the result are left default.
[[nodiscard]] CevFit fit_cev_laplace(std::span<const double> y1, std::span<const double> y2);

[[nodiscard]] CevFit fit_cev(const PairData& pairs, const CevConfig& config = {});

/// Quantile of Y2 on the Laplace scale given Y1 = y1.
[[nodiscard]] double cev_laplace_quantile(const CevFit& fit, double y1, double tau);

/// Throws std::domain_error when x1 is not above the dependence threshold.
[[nodiscard]] double cev_conditional_quantile(const CevFit& fit, double x1, double tau);

[[nodiscard]] ConditionalQuantileCurve cev_curve(const CevFit& fit, std::span<const double> x1_grid,
                                                 std::span<const double> taus);

}  // namespace condex
