#include "condex/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace condex::optim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// One simplex run from x0; returns the best vertex.
Result nelder_mead_once(const Objective& f, const std::vector<double>& x0,
                        std::span<const double> step, const NelderMeadOptions& opt) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(f, simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  Result result;
  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    // Convergence: small value spread and small simplex.
    const double f_best = values[best], f_worst = values[worst];
    bool small = std::isfinite(f_worst) &&
                 std::abs(f_worst - f_best) <= opt.f_tolerance * (std::abs(f_best) + 1e-12);
    if (small) {
      for (std::size_t i = 0; i <= n && small; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (std::abs(simplex[i][j] - simplex[best][j]) >
              opt.x_tolerance * (1.0 + std::abs(simplex[best][j]))) {
            small = false;
            break;
          }
        }
      }
    }
    if (small) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }
    auto along = [&](double coef, std::vector<double>& out) {
      for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
      return safe_eval(f, out);
    };

    const double f_reflect = along(-1.0, trial);
    if (f_reflect < values[best]) {
      const double f_expand = along(-2.0, trial2);
      if (f_expand < f_reflect) {
        simplex[worst] = trial2;
        values[worst] = f_expand;
      } else {
        simplex[worst] = trial;
        values[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second]) {
      simplex[worst] = trial;
      values[worst] = f_reflect;
      continue;
    }
    const bool outside = f_reflect < values[worst];
    const double f_contract = along(outside ? -0.5 : 0.5, trial2);
    if (f_contract < (outside ? f_reflect : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = f_contract;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) {
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      }
      values[i] = safe_eval(f, simplex[i]);
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best = static_cast<std::size_t>(best_it - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  result.iterations = iter;
  return result;
}

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, std::span<const double> initial_step,
                   const NelderMeadOptions& options) {
  if (initial_step.size() != x0.size()) {
    throw std::invalid_argument("nelder_mead: step and start dimensions differ");
  }
  Result best = nelder_mead_once(f, x0, initial_step, options);
  std::vector<double> step(initial_step.begin(), initial_step.end());
  for (int r = 0; r < options.restarts && std::isfinite(best.value); ++r) {
    for (auto& s : step) s *= 0.5;
    Result again = nelder_mead_once(f, best.x, step, options);
    again.iterations += best.iterations;
    const bool improved = again.value < best.value - 1e-14 * (std::abs(best.value) + 1.0);
    if (again.value <= best.value) best = std::move(again);
    if (!improved && best.converged) break;
  }
  return best;
}

void numeric_gradient(const Objective& f, std::span<const double> x, std::span<const double> lower,
                      std::span<const double> upper, std::span<double> g) {
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    const double up = std::min(upper[i], x[i] + h);
    const double dn = std::max(lower[i], x[i] - h);
    probe[i] = up;
    const double f_up = f(probe);
    probe[i] = dn;
    const double f_dn = f(probe);
    probe[i] = x[i];
    g[i] = (up > dn) ? (f_up - f_dn) / (up - dn) : 0.0;
  }
}

Result minimize_box(const Objective& f, const Gradient& gradient, std::vector<double> x0,
                    std::span<const double> lower, std::span<const double> upper,
                    const BoxOptions& options) {
  const std::size_t n = x0.size();
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("minimize_box: bound dimensions differ from start");
  }
  auto project = [&](std::vector<double>& v) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lower[i], upper[i]);
  };
  auto grad = [&](std::span<const double> at, std::span<double> out) {
    if (gradient) gradient(at, out);
    else numeric_gradient(f, at, lower, upper, out);
  };

  std::vector<double> x = std::move(x0);
  project(x);
  double fx = safe_eval(f, x);
  if (!std::isfinite(fx)) throw std::domain_error("minimize_box: objective not finite at start");
  std::vector<double> g(n), gn(n), d(n), xn(n), s(n), y(n), hy(n);
  grad(x, g);

  std::vector<double> H(n * n, 0.0);
  auto reset_h = [&] {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  };
  reset_h();
  bool h_is_identity = true;

  Result result;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    std::vector<bool> free(n);
    double pg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pinned = (x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0);
      free[i] = !pinned;
      if (free[i]) pg = std::max(pg, std::abs(g[i]));
    }
    if (pg <= options.g_tolerance) {
      result.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = 0.0;
      if (!free[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (free[j]) d[i] -= H[i * n + j] * g[j];
      }
    }
    if (dot(g, d) >= 0.0) {
      reset_h();
      h_is_identity = true;
      for (std::size_t i = 0; i < n; ++i) d[i] = free[i] ? -g[i] : 0.0;
    }
    double t = 1.0;
    if (h_is_identity) {
      double dmax = 0.0;
      for (double v : d) dmax = std::max(dmax, std::abs(v));
      if (dmax > 1.0) t = 1.0 / dmax;
    }
    bool accepted = false;
    double fn = kInf;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + t * d[i];
      project(xn);
      for (std::size_t i = 0; i < n; ++i) s[i] = xn[i] - x[i];
      fn = safe_eval(f, xn);
      if (fn <= fx + 1e-4 * dot(g, s)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (h_is_identity) {
        // No descent along steepest direction: stationary to working precision.
        result.converged = true;
        break;
      }
      reset_h();
      h_is_identity = true;
      continue;
    }
    grad(xn, gn);
    for (std::size_t i = 0; i < n; ++i) y[i] = gn[i] - g[i];
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        hy[i] = 0.0;
        for (std::size_t j = 0; j < n; ++j) hy[i] += H[i * n + j] * y[j];
      }
      const double yhy = dot(y, hy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
      }
      h_is_identity = false;
    }
    const double decrease = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    if (decrease <= options.f_tolerance * (std::abs(fx) + 1e-12)) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.x = std::move(x);
  result.value = fx;
  result.iterations = it;
  return result;
}

}  // namespace condex::optim
