#include "condex/marginal_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "condex/empirical.hpp"
#include "condex/optimize.hpp"

namespace condex {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEuler = 0.57721566490153286061;

double chi2_1_quantile(double level) {
  const double z = normal_quantile(0.5 + 0.5 * level);
  return z * z;
}

// y_p(xi) = ((-ln p)^(-xi) - 1) / xi, the standardized return level.
double standardized_level(double p, double xi) {
  const double log_y = std::log(-std::log(p));
  if (std::abs(xi) < kShapeZeroTol) return -log_y;
  return std::expm1(-xi * log_y) / xi;
}

double standardized_level_dxi(double p, double xi) {
  const double L = std::log(-std::log(p));
  if (std::abs(xi) < 1e-6) return 0.5 * L * L - xi * L * L * L / 3.0;
  const double e = std::exp(-xi * L);
  return (-L * e * xi - (e - 1.0)) / (xi * xi);
}

bool shape_in_box(double xi) { return xi >= kGevShapeMin && xi <= kGevShapeMax; }

// Makes a start feasible by widening sigma; returns false if that fails.
bool make_feasible(std::span<const double> data, GevParams& p) {
  for (int i = 0; i < 40; ++i) {
    if (std::isfinite(gev_nll(data, p))) return true;
    p.sigma *= 1.5;
  }
  return false;
}

struct ProfilePoint {
  double nll;
  double log_sigma;
  double xi;
};

ProfilePoint profile_at(std::span<const double> data, double p, double z, double log_sigma0,
                        double xi0) {
  auto objective = [&](std::span<const double> th) {
    if (!shape_in_box(th[1])) return kInf;
    const double sigma = std::exp(th[0]);
    const GevParams gp{z - sigma * standardized_level(p, th[1]), sigma, th[1]};
    return gev_nll(data, gp);
  };
  // The warm start may be infeasible at a new z; widen sigma until it is not.
  double ls = log_sigma0;
  for (int i = 0; i < 40 && !std::isfinite(objective(std::vector<double>{ls, xi0})); ++i) {
    ls += 0.1;
  }
  optim::NelderMeadOptions opt;
  opt.restarts = 1;
  opt.f_tolerance = 1e-12;
  opt.x_tolerance = 1e-8;
  const std::vector<double> step{0.05, 0.03};
  const auto res = optim::nelder_mead(objective, {ls, std::clamp(xi0, kGevShapeMin, kGevShapeMax)},
                                      step, opt);
  return {res.value, res.x[0], res.x[1]};
}

}  // namespace

double gev_nll(std::span<const double> data, const GevParams& params) {
  if (!(params.sigma > 0.0)) return kInf;
  const double log_sigma = std::log(params.sigma);
  double total = 0.0;
  if (std::abs(params.xi) < kShapeZeroTol) {
    for (double x : data) {
      const double z = (x - params.mu) / params.sigma;
      total += log_sigma + z + std::exp(-z);
    }
    return total;
  }
  const double inv_xi = 1.0 / params.xi;
  for (double x : data) {
    const double t = params.xi * (x - params.mu) / params.sigma;
    if (t <= -1.0) return kInf;
    const double log_t = std::log1p(t);
    total += log_sigma + (1.0 + inv_xi) * log_t + std::exp(-inv_xi * log_t);
  }
  return total;
}

GevParams gev_pwm_estimate(std::span<const double> data) {
  std::vector<double> x(data.begin(), data.end());
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto j = static_cast<double>(i);  // zero-based rank
    b0 += x[i];
    b1 += j / (n - 1.0) * x[i];
    b2 += j * (j - 1.0) / ((n - 1.0) * (n - 2.0)) * x[i];
  }
  b0 /= n;
  b1 /= n;
  b2 /= n;
  const double c = (2.0 * b1 - b0) / (3.0 * b2 - b0) - std::numbers::ln2 / std::log(3.0);
  const double k = 7.8590 * c + 2.9554 * c * c;
  GevParams p;
  if (std::abs(k) < 1e-6 || !std::isfinite(k)) {
    p.sigma = (2.0 * b1 - b0) / std::numbers::ln2;
    p.mu = b0 - kEuler * p.sigma;
    p.xi = 0.0;
  } else {
    const double g = std::tgamma(1.0 + k);
    p.sigma = (2.0 * b1 - b0) * k / (g * (1.0 - std::pow(2.0, -k)));
    p.mu = b0 + p.sigma * (g - 1.0) / k;
    p.xi = -k;
  }
  return p;
}

GevFit fit_gev_mle(std::span<const double> maxima) {
  if (maxima.size() < 3) throw std::invalid_argument("fit_gev_mle: need at least 3 maxima");
  for (double x : maxima) {
    if (!std::isfinite(x)) throw std::invalid_argument("fit_gev_mle: data must be finite");
  }
  const auto [min_it, max_it] = std::minmax_element(maxima.begin(), maxima.end());
  if (*min_it == *max_it) throw std::invalid_argument("fit_gev_mle: all data values are equal");

  GevFit fit;
  fit.n = maxima.size();
  if (fit.n < 20) {
    fit.warnings.push_back("fit_gev_mle: fewer than 20 maxima; estimates are unreliable");
  }

  const double sd = std::sqrt(variance_pop(maxima));
  GevParams gumbel_start;
  gumbel_start.sigma = sd * std::sqrt(6.0) / std::numbers::pi;
  gumbel_start.mu = mean(maxima) - kEuler * gumbel_start.sigma;
  gumbel_start.xi = 0.0;

  GevParams pwm = gev_pwm_estimate(maxima);
  if (!(pwm.sigma > 0.0) || !std::isfinite(pwm.mu)) pwm = gumbel_start;
  pwm.xi = std::clamp(pwm.xi, kGevShapeMin + 0.05, kGevShapeMax - 0.05);

  std::vector<GevParams> starts{pwm, gumbel_start};
  for (double dxi : {-0.15, 0.15}) {
    GevParams s = pwm;
    s.xi = std::clamp(pwm.xi + dxi, kGevShapeMin + 0.02, kGevShapeMax - 0.02);
    starts.push_back(s);
  }

  auto objective = [&](std::span<const double> th) {
    if (!shape_in_box(th[2])) return kInf;
    return gev_nll(maxima, GevParams{th[0], std::exp(th[1]), th[2]});
  };

  optim::Result best;
  best.value = kInf;
  bool any_converged = false;
  for (GevParams s : starts) {
    if (!make_feasible(maxima, s)) continue;
    const std::vector<double> step{0.2 * s.sigma, 0.2, 0.1};
    auto res = optim::nelder_mead(objective, {s.mu, std::log(s.sigma), s.xi}, step);
    any_converged = any_converged || res.converged;
    if (res.value < best.value) best = std::move(res);
  }
  if (best.x.empty()) {
    throw FitError("fit_gev_mle: no feasible starting point", gumbel_start, kInf);
  }
  const GevParams best_params{best.x[0], std::exp(best.x[1]), best.x[2]};
  if (!any_converged) {
    std::ostringstream os;
    os << "fit_gev_mle: optimizer did not converge from any start (best nll=" << best.value << ")";
    throw FitError(os.str(), best_params, best.value);
  }
  fit.params = best_params;
  fit.nll = best.value;
  if (std::abs(fit.params.xi - kGevShapeMin) < 1e-6 || std::abs(fit.params.xi - kGevShapeMax) < 1e-6) {
    fit.warnings.push_back("fit_gev_mle: shape estimate on the box boundary");
  }

  // Observed information by central differences in (mu, sigma, xi).
  const std::array<double, 3> theta{fit.params.mu, fit.params.sigma, fit.params.xi};
  const std::array<double, 3> h{1e-4 * fit.params.sigma, 1e-4 * fit.params.sigma, 1e-4};
  auto nll_at = [&](std::array<double, 3> t) { return gev_nll(maxima, GevParams{t[0], t[1], t[2]}); };
  Eigen::Matrix3d hess;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      auto shifted = [&](double si, double sj) {
        auto t = theta;
        t[i] += si * h[i];
        t[j] += sj * h[j];
        return nll_at(t);
      };
      double v;
      if (i == j) {
        v = (shifted(1.0, 0.0) - 2.0 * fit.nll + shifted(-1.0, 0.0)) / (h[i] * h[i]);
      } else {
        v = (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0) + shifted(-1.0, -1.0)) /
            (4.0 * h[i] * h[j]);
      }
      hess(i, j) = hess(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(hess);
  Eigen::Vector3d inv_vals;
  bool clipped = !hess.allFinite();
  for (int i = 0; i < 3; ++i) {
    const double lam = eig.eigenvalues()(i);
    if (lam > 0.0 && std::isfinite(lam)) inv_vals(i) = 1.0 / lam;
    else {
      inv_vals(i) = 0.0;
      clipped = true;
    }
  }
  if (clipped) {
    fit.warnings.push_back("fit_gev_mle: observed information not positive definite; covariance is a pseudo-inverse");
  }
  const Eigen::Matrix3d cov = eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().transpose();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) fit.cov[i][j] = 0.5 * (cov(i, j) + cov(j, i));
  }
  return fit;
}

double return_level(const GevFit& fit, double r) {
  if (!(r > 1.0)) {
    std::ostringstream os;
    os << "return_level: return period must exceed 1, got " << r;
    throw std::domain_error(os.str());
  }
  return gev_quantile(1.0 - 1.0 / r, fit.params);
}

ReturnLevelCI delta_method_ci(const GevFit& fit, double r, double level) {
  ReturnLevelCI ci;
  ci.r = r;
  ci.level = level;
  ci.estimate = return_level(fit, r);
  const double p = 1.0 - 1.0 / r;
  const std::array<double, 3> grad{1.0, standardized_level(p, fit.params.xi),
                                   fit.params.sigma * standardized_level_dxi(p, fit.params.xi)};
  double var = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) var += grad[i] * fit.cov[i][j] * grad[j];
  }
  const double half = normal_quantile(0.5 + 0.5 * level) * std::sqrt(std::max(var, 0.0));
  ci.lower = ci.estimate - half;
  ci.upper = ci.estimate + half;
  return ci;
}

double gev_profile_nll(std::span<const double> data, double r, double z, const GevParams& start) {
  return profile_at(data, 1.0 - 1.0 / r, z, std::log(start.sigma), start.xi).nll;
}

ReturnLevelCI profile_likelihood_ci(const GevFit& fit, std::span<const double> data, double r,
                                    double level) {
  ReturnLevelCI ci;
  ci.r = r;
  ci.level = level;
  ci.estimate = return_level(fit, r);
  const double p = 1.0 - 1.0 / r;
  const double crit = chi2_1_quantile(level);

  const ReturnLevelCI wald = delta_method_ci(fit, r, 0.6826894921370859);  // one standard error
  double se = wald.upper - wald.estimate;
  if (!(se > 0.0) || !std::isfinite(se)) se = 0.05 * std::abs(ci.estimate) + 0.1 * fit.params.sigma;

  constexpr int kSteps = 20;  // 20 half-SE steps cover the +/- 10 SE window
  for (int side : {-1, 1}) {
    ProfilePoint inner{fit.nll, std::log(fit.params.sigma), fit.params.xi};
    double z_in = ci.estimate;
    double z_out = 0.0;
    bool bracketed = false;
    for (int k = 1; k <= kSteps; ++k) {
      const double z = ci.estimate + side * 0.5 * k * se;
      const ProfilePoint pt = profile_at(data, p, z, inner.log_sigma, inner.xi);
      if (2.0 * (pt.nll - fit.nll) >= crit) {
        z_out = z;
        bracketed = true;
        break;
      }
      z_in = z;
      inner = pt;
    }
    double bound;
    if (bracketed) {
      double lo = z_in, hi = z_out;
      for (int it = 0; it < 60 && std::abs(hi - lo) > 1e-7 * se; ++it) {
        const double mid = 0.5 * (lo + hi);
        const ProfilePoint pt = profile_at(data, p, mid, inner.log_sigma, inner.xi);
        if (2.0 * (pt.nll - fit.nll) >= crit) {
          hi = mid;
        } else {
          lo = mid;
          inner = pt;
        }
      }
      bound = 0.5 * (lo + hi);
    } else {
      bound = ci.estimate + side * 10.0 * se;
      ci.warnings.push_back(std::string("profile_likelihood_ci: profile did not reach the cutoff on the ") +
                            (side < 0 ? "lower" : "upper") + " side; interval is one-sided");
    }
    if (side < 0) {
      ci.lower = std::min(bound, ci.estimate);
      ci.lower_found = bracketed;
    } else {
      ci.upper = std::max(bound, ci.estimate);
      ci.upper_found = bracketed;
    }
  }
  return ci;
}

GpParams fit_gp_mle(std::span<const double> data, double u) {
  std::vector<double> excess;
  for (double x : data) {
    if (x > u) excess.push_back(x - u);
  }
  if (excess.size() < 3) throw std::invalid_argument("fit_gp_mle: need at least 3 exceedances");
  const double max_excess = *std::max_element(excess.begin(), excess.end());
  const auto m = static_cast<double>(excess.size());

  auto nll = [&](double sigma, double xi) {
    if (!(sigma > 0.0) || xi < kGpShapeMin || xi > kGpShapeMax) return kInf;
    if (std::abs(xi) < kShapeZeroTol) {
      double s = 0.0;
      for (double e : excess) s += e;
      return m * std::log(sigma) + s / sigma;
    }
    double s = 0.0;
    for (double e : excess) {
      const double t = xi * e / sigma;
      if (t <= -1.0) return kInf;
      s += std::log1p(t);
    }
    return m * std::log(sigma) + (1.0 + 1.0 / xi) * s;
  };
  auto objective = [&](std::span<const double> th) { return nll(std::exp(th[0]), th[1]); };

  const double em = mean(excess);
  const double ev = variance_pop(excess);
  double xi_mom = ev > 0.0 ? 0.5 * (1.0 - em * em / ev) : 0.0;
  xi_mom = std::clamp(xi_mom, kGpShapeMin + 0.05, kGpShapeMax - 0.05);
  double sigma_mom = ev > 0.0 ? 0.5 * em * (em * em / ev + 1.0) : em;
  if (xi_mom < 0.0) sigma_mom = std::max(sigma_mom, -xi_mom * max_excess * 1.05);

  optim::Result best;
  best.value = kInf;
  for (auto [s0, x0] : {std::pair{sigma_mom, xi_mom}, std::pair{em, 0.0}}) {
    if (!std::isfinite(nll(s0, x0))) continue;
    auto res = optim::nelder_mead(objective, {std::log(s0), x0}, std::vector<double>{0.2, 0.1});
    if (res.value < best.value) best = std::move(res);
  }
  if (best.x.empty()) throw ConvergenceError("fit_gp_mle: no feasible starting point");
  return GpParams{u, std::exp(best.x[0]), best.x[1]};
}

// --- SemiParamMarginal -------------------------------------------------------

SemiParamMarginal::SemiParamMarginal(std::vector<double> sample, double u, const GpParams& gp)
    : sorted_(std::move(sample)), u_(u), gp_(gp) {
  if (sorted_.empty()) throw std::invalid_argument("SemiParamMarginal: empty sample");
  gp_.validate();
  if (gp_.u != u_) throw std::invalid_argument("SemiParamMarginal: GP threshold must equal u");
  std::sort(sorted_.begin(), sorted_.end());
  const auto n1 = static_cast<double>(sorted_.size() + 1);
  for (std::size_t i = 0; i < sorted_.size();) {
    std::size_t j = i;
    while (j + 1 < sorted_.size() && sorted_[j + 1] == sorted_[i]) ++j;
    knot_x_.push_back(sorted_[i]);
    knot_p_.push_back((0.5 * static_cast<double>(i + j) + 1.0) / n1);  // average rank
    i = j + 1;
  }
  u_prob_ = empirical_cdf(u_);
}

double SemiParamMarginal::empirical_cdf(double x) const {
  if (x <= knot_x_.front()) return knot_p_.front();
  if (x >= knot_x_.back()) return knot_p_.back();
  const auto it = std::upper_bound(knot_x_.begin(), knot_x_.end(), x);
  const auto j = static_cast<std::size_t>(it - knot_x_.begin());
  const double w = (x - knot_x_[j - 1]) / (knot_x_[j] - knot_x_[j - 1]);
  return knot_p_[j - 1] + w * (knot_p_[j] - knot_p_[j - 1]);
}

double SemiParamMarginal::empirical_quantile(double p) const {
  if (p <= knot_p_.front()) return knot_x_.front();
  if (p >= knot_p_.back()) return knot_x_.back();
  const auto it = std::upper_bound(knot_p_.begin(), knot_p_.end(), p);
  const auto j = static_cast<std::size_t>(it - knot_p_.begin());
  const double w = (p - knot_p_[j - 1]) / (knot_p_[j] - knot_p_[j - 1]);
  return knot_x_[j - 1] + w * (knot_x_[j] - knot_x_[j - 1]);
}

double SemiParamMarginal::cdf(double x) const {
  if (x <= u_) return empirical_cdf(x);
  return 1.0 - (1.0 - u_prob_) * (1.0 - gp_cdf(x, gp_));
}

double SemiParamMarginal::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << "SemiParamMarginal::quantile: probability must lie in (0, 1), got " << p;
    throw std::domain_error(os.str());
  }
  if (p <= u_prob_) return empirical_quantile(p);
  const double q = (p - u_prob_) / (1.0 - u_prob_);
  if (q >= 1.0) return gp_.upper_endpoint();
  return gp_quantile(q, gp_);
}

double SemiParamMarginal::p_min() const noexcept { return 1.0 / static_cast<double>(n() + 1); }

double SemiParamMarginal::p_max() const noexcept { return 1.0 - 1e-12; }

std::string SemiParamMarginal::sample_digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : sorted_) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

SemiParamMarginal build_semiparam_marginal(std::span<const double> data, double u_quantile) {
  if (data.size() < 50) {
    throw std::invalid_argument("build_semiparam_marginal: need at least 50 observations");
  }
  if (!(u_quantile >= 0.5 && u_quantile < 1.0)) {
    throw std::domain_error("build_semiparam_marginal: u_quantile must lie in [0.5, 1)");
  }
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double u = sorted_quantile_type7(sorted, u_quantile);
  const auto exceed = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), u));
  if (exceed < 10) {
    std::ostringstream os;
    os << "build_semiparam_marginal: only " << exceed << " exceedances of u=" << u << " (need 10)";
    throw std::invalid_argument(os.str());
  }
  const GpParams gp = fit_gp_mle(sorted, u);
  return SemiParamMarginal(std::move(sorted), u, gp);
}

double to_laplace(double x, const SemiParamMarginal& m) {
  return laplace_quantile(std::clamp(m.cdf(x), m.p_min(), m.p_max()));
}

double from_laplace(double y, const SemiParamMarginal& m) {
  return m.quantile(std::clamp(laplace_cdf(y), m.p_min(), m.p_max()));
}

}  // namespace condex
