#include <doctest.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "condex/distributions.hpp"
#include "condex/empirical.hpp"

using namespace condex;

namespace {
constexpr double kE = 2.718281828459045;
}

TEST_CASE("gev_quantile closed-form values") {
  CHECK(gev_quantile(1.0 / kE, {0, 1, 0}) == doctest::Approx(0.0).epsilon(1e-15));
  // 1/ln 2 - 1 and -ln(-ln 0.98), 30-digit reference values.
  CHECK(gev_quantile(0.5, {0, 1, 1}) == doctest::Approx(0.442695040888963407).epsilon(1e-14));
  CHECK(gev_quantile(0.98, {0, 1, 0}) == doctest::Approx(3.90193865793583427).epsilon(1e-14));
  CHECK_THROWS_AS((void)gev_quantile(0.0, {0, 1, 0}), std::domain_error);
  CHECK_THROWS_AS((void)gev_quantile(0.5, {0, -1, 0}), std::domain_error);
}

TEST_CASE("gev shape below tolerance uses the exact Gumbel branch") {
  const double p = 0.9;
  CHECK(gev_quantile(p, {0, 1, 5e-10}) == gev_quantile(p, {0, 1, 0}));
  for (double q : {0.5, 0.9, 0.99}) {
    CHECK(std::abs(gev_quantile(q, {0, 1, 1e-7}) - gev_quantile(q, {0, 1, 0})) < 1e-5);
  }
}

TEST_CASE("gev cdf and logpdf") {
  CHECK(gev_cdf(0.0, {0, 1, 0}) == doctest::Approx(1.0 / kE).epsilon(1e-15));
  CHECK(gev_logpdf(-3.0, {0, 1, 0.5}) == -std::numeric_limits<double>::infinity());
  CHECK(gev_cdf(-3.0, {0, 1, 0.5}) == 0.0);
  CHECK(gev_cdf(10.0, {0, 1, -0.5}) == 1.0);
  for (double xi : {-0.3, 0.0, 0.3}) {
    const GevParams p{2.0, 1.5, xi};
    for (int i = 1; i < 1000; ++i) {
      const double u = i / 1000.0;
      CHECK(std::abs(gev_cdf(gev_quantile(u, p), p) - u) < 1e-12);
    }
  }
}

TEST_CASE("gev_sample matches the inverse-cdf quantile") {
  const GevParams p{0, 1, 0.1};
  const auto x = gev_sample(p, 100000, 42);
  const double q = gev_quantile(0.9, p);
  const double f = std::exp(gev_logpdf(q, p));
  const double se = std::sqrt(0.9 * 0.1 / 1e5) / f;
  CHECK(std::abs(empirical_quantile_type7(x, 0.9) - q) < 4.0 * se);
  CHECK(gev_sample(p, 1000, 7) == gev_sample(p, 1000, 7));
  CHECK(gev_sample(p, 1000, 7) != gev_sample(p, 1000, 8));
}

TEST_CASE("gp cdf and quantile") {
  CHECK(gp_quantile(1.0 - 1.0 / kE, {0, 1, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gp_cdf(3.0, {3.0, 2.0, 0.4}) == 0.0);
  CHECK(gp_cdf(3.0, {3.0, 2.0, -0.4}) == 0.0);
  CHECK(gp_quantile(0.99, {10, 2, 0.2}) == doctest::Approx(25.1188643150958011).epsilon(1e-13));
  CHECK_THROWS_AS((void)gp_cdf(-1.0, {0, 1, 0}), std::domain_error);
  CHECK_THROWS_AS((void)gp_quantile(1.0, {0, 1, 0}), std::domain_error);
  const GpParams bounded{0, 1, -0.5};
  CHECK(bounded.upper_endpoint() == doctest::Approx(2.0));
  CHECK(gp_cdf(2.5, bounded) == 1.0);
}

TEST_CASE("weibull quantile and fit") {
  CHECK(weibull_quantile(1.0 - 1.0 / kE, {1, 3}) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(weibull_quantile(0.9, {5, 9.5}) == doctest::Approx(11.2244932479006936).epsilon(1e-13));

  const WeibullParams truth{5, 9.5};
  const auto x = weibull_sample(truth, 100000, 2024);
  const WeibullParams fit = fit_weibull_mle(x);
  CHECK(std::abs(fit.shape / truth.shape - 1.0) < 0.02);
  CHECK(std::abs(fit.scale / truth.scale - 1.0) < 0.02);

  std::vector<double> bad(x.begin(), x.begin() + 20);
  bad[3] = -1.0;
  CHECK_THROWS_AS((void)fit_weibull_mle(bad), std::invalid_argument);
  CHECK_THROWS_AS((void)fit_weibull_mle(std::vector<double>(5, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS((void)fit_weibull_mle(std::vector<double>(20, 2.0)), ConvergenceError);
}

TEST_CASE("standard margins") {
  CHECK(laplace_quantile(0.5) == 0.0);
  CHECK(gumbel_cdf(0.0) == doctest::Approx(1.0 / kE).epsilon(1e-15));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.95996398454005423552).epsilon(1e-14));
  CHECK(laplace_cdf(-1.0) == doctest::Approx(0.5 / kE).epsilon(1e-15));
  CHECK(laplace_cdf(1.0) == doctest::Approx(1.0 - 0.5 / kE).epsilon(1e-15));
  CHECK_THROWS_AS((void)laplace_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS((void)normal_quantile(0.0), std::domain_error);
}

TEST_CASE("normal quantile against an independent high-precision implementation") {
  const boost::math::normal_distribution<double> nd;
  double worst = 0.0;
  for (int e = 1; e <= 12; ++e) {
    for (int m = 1; m <= 9; ++m) {
      const double p = m * std::pow(10.0, -e);
      worst = std::max(worst, std::abs(normal_quantile(p) - boost::math::quantile(nd, p)));
      worst = std::max(worst, std::abs(normal_quantile(1.0 - p) - boost::math::quantile(nd, 1.0 - p)));
    }
  }
  for (int i = 1; i < 10000; ++i) {
    const double p = i / 10000.0;
    worst = std::max(worst, std::abs(normal_quantile(p) - boost::math::quantile(nd, p)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("cdf(quantile(p)) = p for every family on a 10^4 grid") {
  double worst = 0.0;
  auto track = [&](double got, double p) { worst = std::max(worst, std::abs(got - p)); };
  for (int i = 0; i < 10000; ++i) {
    const double p = (i + 0.5) / 10000.0;
    for (double xi : {-0.3, 0.0, 0.3}) {
      const GevParams g{1, 2, xi};
      track(gev_cdf(gev_quantile(p, g), g), p);
      const GpParams gp{1, 2, xi};
      track(gp_cdf(gp_quantile(p, gp), gp), p);
    }
    const WeibullParams w{5, 9.5};
    track(weibull_cdf(weibull_quantile(p, w), w), p);
    for (auto fam : {StdMargin::laplace, StdMargin::gumbel, StdMargin::normal}) {
      track(std_margin_cdf(fam, std_margin_quantile(fam, p)), p);
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("samplers are bit-reproducible") {
  CHECK(weibull_sample({2, 3}, 500, 99) == weibull_sample({2, 3}, 500, 99));
  CHECK(gp_sample({0, 1, 0.2}, 500, 99) == gp_sample({0, 1, 0.2}, 500, 99));
}
