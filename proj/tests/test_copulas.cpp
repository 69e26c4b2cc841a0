#include <doctest.h>

#include <array>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "condex/copulas.hpp"
#include "condex/distributions.hpp"
#include "condex/empirical.hpp"

using namespace condex;

namespace {

std::vector<CopulaSpec> all_presets() {
  std::vector<CopulaSpec> out;
  for (auto f : {CopulaFamily::gaussian, CopulaFamily::gumbel, CopulaFamily::clayton}) {
    for (auto s : {Strength::weak, Strength::median, Strength::strong}) out.push_back(copula_preset(f, s));
  }
  return out;
}

}  // namespace

TEST_CASE("presets") {
  CHECK(copula_preset(CopulaFamily::gaussian, Strength::strong).parameter == 0.6);
  CHECK(copula_preset(CopulaFamily::gumbel, Strength::weak).parameter == 0.9);
  CHECK(copula_preset(CopulaFamily::gumbel, Strength::strong).parameter == 0.5);
  CHECK(copula_preset(CopulaFamily::clayton, Strength::median).parameter == 0.5);
  CHECK(parse_copula_family(to_string(CopulaFamily::clayton)) == CopulaFamily::clayton);
  CHECK(parse_strength(to_string(Strength::median)) == Strength::median);
  CHECK_THROWS((void)parse_copula_family("frank"));
  CHECK_THROWS(CopulaSpec{CopulaFamily::gumbel, 1.5}.validate());
  CHECK_THROWS(CopulaSpec{CopulaFamily::gaussian, 1.0}.validate());
  CHECK_THROWS(CopulaSpec{CopulaFamily::clayton, 0.0}.validate());
}

TEST_CASE("sampled Kendall tau matches the closed forms") {
  const std::size_t n = 100000;
  const auto ind = sample_copula({CopulaFamily::gumbel, 1.0}, n, 1);
  CHECK(std::abs(kendall_tau(ind.u1, ind.u2)) < 0.01);
  const auto cl = sample_copula({CopulaFamily::clayton, 0.9}, n, 2);
  CHECK(std::abs(kendall_tau(cl.u1, cl.u2) - 0.9 / 2.9) < 0.01);
  const auto ga = sample_copula({CopulaFamily::gaussian, 0.6}, n, 3);
  CHECK(std::abs(kendall_tau(ga.u1, ga.u2) - 0.409665529) < 0.01);
  const auto gu = sample_copula({CopulaFamily::gumbel, 0.5}, n, 4);
  CHECK(std::abs(kendall_tau(gu.u1, gu.u2) - 0.5) < 0.01);
  for (const auto& spec : all_presets()) {
    const auto s = sample_copula(spec, 20000, 9);
    CHECK(std::abs(kendall_tau(s.u1, s.u2) - spec.kendall_tau()) < 0.02);
  }
}

TEST_CASE("samples are uniform marginally") {
  const boost::math::chi_squared_distribution<double> chi(19);
  const double crit = boost::math::quantile(chi, 0.99);
  for (const auto& spec : all_presets()) {
    const auto s = sample_copula(spec, 20000, 77);
    for (const auto* col : {&s.u1, &s.u2}) {
      std::array<double, 20> counts{};
      for (double u : *col) {
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        counts[static_cast<std::size_t>(u * 20.0)] += 1.0;
      }
      double stat = 0.0;
      for (double c : counts) stat += (c - 1000.0) * (c - 1000.0) / 1000.0;
      CHECK(stat < crit);
    }
    CHECK(sample_copula(spec, 500, 5).u2 == sample_copula(spec, 500, 5).u2);
  }
}

TEST_CASE("conditional cdf") {
  for (double u2 : {0.01, 0.3, 0.77}) {
    CHECK(conditional_cdf({CopulaFamily::gaussian, 0.0}, u2, 0.4) == doctest::Approx(u2).epsilon(1e-14));
  }
  CHECK_THROWS_AS((void)conditional_cdf({CopulaFamily::gaussian, 0.3}, 1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS((void)conditional_cdf({CopulaFamily::clayton, 0.3}, 0.5, 0.0), std::domain_error);

  for (const auto& spec : all_presets()) {
    for (int i = 1; i < 50; ++i) {
      const double u1 = i / 50.0;
      double prev = 0.0;
      for (int j = 1; j < 200; ++j) {
        const double h = conditional_cdf(spec, j / 200.0, u1);
        CHECK(h >= prev);
        prev = h;
      }
    }
  }

  // Clayton h against a central difference of C in u1 on a 50 x 50 grid.
  const CopulaSpec cl{CopulaFamily::clayton, 0.5};
  double worst = 0.0;
  for (int i = 1; i <= 50; ++i) {
    for (int j = 1; j <= 50; ++j) {
      const double u1 = i / 51.0, u2 = j / 51.0;
      const double step = 1e-5 * u1;
      const double fd = (copula_cdf(cl, u1 + step, u2) - copula_cdf(cl, u1 - step, u2)) / (2.0 * step);
      worst = std::max(worst, std::abs(fd - conditional_cdf(cl, u2, u1)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("copula cdf is consistent with the conditional cdfs") {
  for (const auto& spec : all_presets()) {
    for (double u1 : {0.2, 0.6, 0.95}) {
      for (double u2 : {0.1, 0.5, 0.9}) {
        const double c = copula_cdf(spec, u1, u2);
        CHECK(c <= std::min(u1, u2) + 1e-12);
        CHECK(c >= std::max(u1 + u2 - 1.0, 0.0) - 1e-12);
        const double step = 1e-4;
        const double fd = (copula_cdf(spec, u1 + step, u2) - copula_cdf(spec, u1 - step, u2)) / (2.0 * step);
        CHECK(fd == doctest::Approx(conditional_cdf(spec, u2, u1)).epsilon(1e-6));
        const double hd = (conditional_cdf(spec, u2 + step, u1) - conditional_cdf(spec, u2 - step, u1)) / (2.0 * step);
        CHECK(hd == doctest::Approx(copula_density(spec, u1, u2)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("conditional quantiles") {
  const CopulaSpec ga{CopulaFamily::gaussian, 0.6};
  const double u1 = normal_cdf(normal_quantile(0.99));
  CHECK(conditional_quantile_copula_scale(ga, 0.9, u1) == doctest::Approx(0.992262125258465736).epsilon(1e-12));

  // 30-digit root of h(u2 | 0.99) = 0.9 for Gumbel alpha = 0.5.
  CHECK(conditional_quantile_copula_scale({CopulaFamily::gumbel, 0.5}, 0.9, 0.99) ==
        doctest::Approx(0.995172434823783343).epsilon(1e-10));

  auto identity = [](double p) { return p; };
  for (double a : {0.1, 0.5, 0.9}) {
    CHECK(true_conditional_quantile({CopulaFamily::clayton, 1e-10}, 0.7, a, identity) ==
          doctest::Approx(0.7).epsilon(1e-8));
  }
  auto gev2 = [](double p) { return gev_quantile(p, {40, 10, 0.1}); };
  CHECK(true_conditional_quantile(ga, 0.9, u1, gev2) == doctest::Approx(gev2(0.992262125258465736)).epsilon(1e-10));

  for (const auto& spec : all_presets()) {
    for (double v : {0.6, 0.9, 0.95, 0.99, 0.999}) {
      double prev = 0.0;
      for (int k = 1; k < 100; ++k) {
        const double tau = k / 100.0;
        const double q = conditional_quantile_copula_scale(spec, tau, v);
        CHECK(q >= prev);
        prev = q;
        CHECK(std::abs(conditional_cdf(spec, q, v) - tau) < 1e-8);
      }
    }
  }
}
