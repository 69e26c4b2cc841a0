#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace condex {

enum class CopulaFamily { gaussian, gumbel, clayton };

/// Dependence-strength labels of the simulation design. For the Gumbel family
/// a smaller alpha means stronger dependence (the exponent is 1/alpha).
enum class Strength { weak, median, strong };

/// One-parameter bivariate copula.
///
/// gaussian: rho in (-1, 1). gumbel: alpha in (0, 1] with
/// C = exp(-[(-ln u1)^(1/alpha) + (-ln u2)^(1/alpha)]^alpha); alpha = 1 is
/// independence. clayton: delta > 0 with C = (u1^-delta + u2^-delta - 1)^(-1/delta);
/// delta -> 0 is independence.
struct CopulaSpec {
  CopulaFamily family = CopulaFamily::gaussian;
  double parameter = 0.0;

  void validate() const;
  /// Kendall's tau implied by the parameter.
  [[nodiscard]] double kendall_tau() const;
  friend bool operator==(const CopulaSpec&, const CopulaSpec&) = default;
};

/// Gaussian rho {0.1, 0.3, 0.6}, Gumbel alpha {0.9, 0.7, 0.5}, Clayton
/// delta {0.1, 0.5, 0.9}, in weak/median/strong order.
[[nodiscard]] CopulaSpec copula_preset(CopulaFamily family, Strength strength);

[[nodiscard]] std::string_view to_string(CopulaFamily family);
[[nodiscard]] std::string_view to_string(Strength strength);
[[nodiscard]] CopulaFamily parse_copula_family(std::string_view name);
[[nodiscard]] Strength parse_strength(std::string_view name);

struct BivariateSample {
  std::vector<double> u1;
  std::vector<double> u2;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t size() const noexcept { return u1.size(); }
};

/// Conditional-distribution method: u1 uniform, u2 = h^-1(v | u1) with v
/// uniform. Two uniforms of the counter stream per pair.
[[nodiscard]] BivariateSample sample_copula(const CopulaSpec& spec, std::size_t n,
                                            std::uint64_t seed);

[[nodiscard]] double copula_cdf(const CopulaSpec& spec, double u1, double u2);

/// h(u2 | u1) = dC/du1. Throws std::domain_error unless u1, u2 in (0, 1).
[[nodiscard]] double conditional_cdf(const CopulaSpec& spec, double u2, double u1);

/// Copula density c(u1, u2) = d h / d u2.
[[nodiscard]] double copula_density(const CopulaSpec& spec, double u1, double u2);

/// Solves h(u2 | u1) = tau for u2. Closed form for Gaussian and Clayton;
/// Gumbel uses bisection on [1e-12, 1 - 1e-12] followed by Newton polishing.
[[nodiscard]] double conditional_quantile_copula_scale(const CopulaSpec& spec, double tau,
                                                       double u1);

/// Ground-truth tau-quantile of X2 given the conditioning variable sits at
/// probability level u1, mapped through the quantile function of X2.
[[nodiscard]] double true_conditional_quantile(const CopulaSpec& spec, double tau, double u1,
                                               const std::function<double(double)>& marginal2_quantile);

}  // namespace condex
