// Acceptance suite. Prints one PASS/FAIL line per criterion; the exit code is
// nonzero when any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "condex/empirical.hpp"
#include "condex/harness.hpp"
#include "condex/marginal_fit.hpp"
#include "condex/rng.hpp"

using namespace condex;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    notes.push_back(std::string(ok ? "  ok    " : "  FAIL  ") + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { notes.push_back("  info  " + what); }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<CopulaSpec> copula_presets() {
  std::vector<CopulaSpec> out;
  for (auto f : {CopulaFamily::gaussian, CopulaFamily::gumbel, CopulaFamily::clayton})
    for (auto s : {Strength::weak, Strength::median, Strength::strong}) out.push_back(copula_preset(f, s));
  return out;
}

std::string label(const CopulaSpec& c) { return std::string(to_string(c.family)) + "(" + fmt(c.parameter) + ")"; }

// --- 1 ----------------------------------------------------------------------

Outcome quantile_bias() {
  Outcome o;
  const std::vector<std::size_t> ns{100, 50, 20};
  const std::vector<double> taus{0.9, 0.95, 0.99};
  const auto rows = run_quantile_bias_study({5.0, 9.5}, ns, taus, 5000, 20240601);
  auto at = [&](std::size_t n, double tau) -> const QuantileBiasRow& {
    for (const auto& r : rows)
      if (r.n == n && r.tau == tau) return r;
    throw std::logic_error("missing row");
  };
  for (const auto& r : rows)
    o.note("n=" + std::to_string(r.n) + " tau=" + fmt(r.tau) + " truth=" + fmt(r.truth, 7) + " bias=" +
           fmt(r.errors.bias) + " (mc se " + fmt(r.bias_mc_se, 2) + ")");
  const auto& base = at(100, 0.9);
  // Closed form 9.5 * ln(10)^(1/5) = 11.224493; the reference figure quoted as
  // 11.2226 is slightly lower, so the mean is checked against both.
  o.require(std::abs(base.truth - 9.5 * std::pow(std::log(10.0), 0.2)) < 1e-12, "closed-form truth " + fmt(base.truth, 8));
  o.require(base.errors.mean_estimate < 11.2226 && base.errors.mean_estimate < base.truth,
            "mean n=100 tau=0.9 estimate " + fmt(base.errors.mean_estimate, 6) + " below 11.2226");
  o.require(base.errors.bias + 2.326 * base.bias_mc_se < 0.0, "bias < 0 at 99% one-sided Monte Carlo confidence");
  o.require(std::abs(at(100, 0.99).errors.bias) > std::abs(at(100, 0.95).errors.bias) &&
                std::abs(at(100, 0.95).errors.bias) > std::abs(base.errors.bias),
            "|bias| ordering 0.99 > 0.95 > 0.9 at n=100");
  o.require(std::abs(at(20, 0.9).errors.bias) > std::abs(at(50, 0.9).errors.bias) &&
                std::abs(at(50, 0.9).errors.bias) > std::abs(base.errors.bias),
            "|bias| ordering n=20 > n=50 > n=100 at tau=0.9");
  return o;
}

// --- 2 ----------------------------------------------------------------------

Outcome kendall() {
  Outcome o;
  std::uint64_t seed = 500;
  for (const auto& c : copula_presets()) {
    const auto s = sample_copula(c, 100000, ++seed);
    const double tau = kendall_tau(s.u1, s.u2);
    double target = 0.0;
    switch (c.family) {
      case CopulaFamily::clayton: target = c.parameter / (c.parameter + 2.0); break;
      case CopulaFamily::gumbel: target = 1.0 - c.parameter; break;
      case CopulaFamily::gaussian: target = 2.0 / std::numbers::pi * std::asin(c.parameter); break;
    }
    o.require(std::abs(tau - target) <= 0.01,
              label(c) + ": sample tau " + fmt(tau, 5) + " vs " + fmt(target, 5));
  }
  return o;
}

// --- 3 ----------------------------------------------------------------------

// Gumbel pairs through the Marshall-Olkin frailty construction with a
// positive-stable mixing variable (Kanter's representation); independent of
// the conditional-inversion sampler under test.
struct FrailtyGumbel {
  double alpha;
  UniformStream rng;

  std::pair<double, double> draw() {
    const double w = std::numbers::pi * rng.next();
    const double e = -std::log(rng.next());
    const double s = std::sin(alpha * w) / std::pow(std::sin(w), 1.0 / alpha) *
                     std::pow(std::sin((1.0 - alpha) * w) / e, (1.0 - alpha) / alpha);
    const double e1 = -std::log(rng.next());
    const double e2 = -std::log(rng.next());
    return {std::exp(-std::pow(e1 / s, alpha)), std::exp(-std::pow(e2 / s, alpha))};
  }
};

Outcome oracles() {
  Outcome o;
  for (const auto& c : copula_presets()) {
    double worst_fd = 0.0, worst_inv = 0.0;
    for (int i = 1; i <= 50; ++i) {
      for (int j = 1; j <= 50; ++j) {
        const double u1 = i / 51.0, u2 = j / 51.0;
        const double step = 1e-5 * std::min(u1, 1.0 - u1);
        const double fd = (copula_cdf(c, u1 + step, u2) - copula_cdf(c, u1 - step, u2)) / (2.0 * step);
        worst_fd = std::max(worst_fd, std::abs(fd - conditional_cdf(c, u2, u1)));
        const double tau = u2;  // reuse the grid as quantile levels
        const double q = conditional_quantile_copula_scale(c, tau, u1);
        worst_inv = std::max(worst_inv, std::abs(conditional_cdf(c, q, u1) - tau));
      }
    }
    o.require(worst_fd < 1e-6, label(c) + ": max |h - dC/du1| = " + fmt(worst_fd, 3));
    o.require(worst_inv < 1e-8, label(c) + ": max |h(q|u1) - tau| = " + fmt(worst_inv, 3));
  }

  // Brute-force conditional-window check of the Gumbel inversion.
  constexpr std::size_t kPairs = 10'000'000;
  constexpr double kHalfWidth = 0.005;
  const std::vector<double> centers{0.5, 0.9};
  const std::vector<double> taus{0.5, 0.9};
  for (double alpha : {0.5, 0.7, 0.9}) {
    const CopulaSpec c{CopulaFamily::gumbel, alpha};
    FrailtyGumbel gen{alpha, UniformStream(derive_seed(99, 0, static_cast<std::uint64_t>(alpha * 10)))};
    std::vector<std::vector<double>> window(centers.size());
    for (std::size_t k = 0; k < kPairs; ++k) {
      const auto [u1, u2] = gen.draw();
      for (std::size_t w = 0; w < centers.size(); ++w)
        if (std::abs(u1 - centers[w]) < kHalfWidth) window[w].push_back(u2);
    }
    for (std::size_t w = 0; w < centers.size(); ++w) {
      const auto m = static_cast<double>(window[w].size());
      for (double tau : taus) {
        const double q = conditional_quantile_copula_scale(c, tau, centers[w]);
        // Expected hit rate over the window: average of h(q | u1) across it.
        double expected = 0.0;
        constexpr int kNodes = 200;
        for (int i = 0; i < kNodes; ++i) {
          expected += conditional_cdf(c, q, centers[w] - kHalfWidth + 2.0 * kHalfWidth * (i + 0.5) / kNodes);
        }
        expected /= kNodes;
        const double hits = static_cast<double>(std::count_if(window[w].begin(), window[w].end(),
                                                              [&](double v) { return v <= q; }));
        const double se = std::sqrt(expected * (1.0 - expected) / m);
        const double z = (hits / m - expected) / se;
        o.require(std::abs(z) < 4.0, "gumbel(" + fmt(alpha) + ") u1=" + fmt(centers[w]) + " tau=" + fmt(tau) +
                                         ": window hit rate " + fmt(hits / m, 5) + " vs " + fmt(expected, 5) +
                                         " (z=" + fmt(z, 2) + ", m=" + std::to_string(window[w].size()) + ")");
      }
    }
  }
  return o;
}

// --- 4, 5, 6 ----------------------------------------------------------------

void crossing_audit(const SimulationResult& r, std::size_t& models, std::size_t& crossings, double& worst) {
  for (double step : r.mcqrnn_min_tau_step) {
    if (!std::isfinite(step)) continue;
    ++models;
    worst = std::min(worst, step);
    if (step < -1e-9) ++crossings;
  }
}

struct SimulationOutcomes {
  Outcome c4, c5, c6;
  double seconds4 = 0.0, seconds5 = 0.0;
};

SimulationOutcomes simulation() {
  SimulationOutcomes out;
  const auto t0 = Clock::now();
  std::size_t models = 0, crossings = 0;
  double worst = std::numeric_limits<double>::infinity();
  int se_wins = 0;

  const auto presets = preset_scenarios();
  auto find = [&](const std::string& name) {
    for (const auto& s : presets)
      if (s.name == name) return s;
    throw std::logic_error("missing preset " + name);
  };

  const auto m = find("gaussian-weak");
  out.c4.note("stand-in margins: GEV(" + fmt(m.marginal1.mu, 6) + ", " + fmt(m.marginal1.sigma, 6) + ", " +
              fmt(m.marginal1.xi, 4) + "), Weibull(" + fmt(m.marginal2.shape, 5) + ", " + fmt(m.marginal2.scale, 5) +
              ")");
  SimulationResult gaussian_median;
  for (auto f : {CopulaFamily::gaussian, CopulaFamily::gumbel, CopulaFamily::clayton}) {
    for (auto st : {Strength::weak, Strength::median, Strength::strong}) {
      const std::string name = std::string(to_string(f)) + "-" + std::string(to_string(st));
      const auto res = run_simulation_study(find(name));
      crossing_audit(res, models, crossings, worst);
      if (name == "gaussian-median") gaussian_median = res;
      const auto& c20 = res.row(Method::cev, 20.0, 0.9);
      const auto& n20 = res.row(Method::mcqrnn, 20.0, 0.9);
      se_wins += c20.se <= n20.se;
      out.c4.note(name + " failures cev/mcqrnn " + std::to_string(res.cev_failures) + "/" +
                  std::to_string(res.mcqrnn_failures) + ", SE at 20y: cev " + fmt(c20.se) + " mcqrnn " + fmt(n20.se));
      if (f != CopulaFamily::clayton) {
        for (Method meth : {Method::cev, Method::mcqrnn}) {
          std::string detail;
          bool all_negative = true;
          for (double rp : {5.0, 20.0, 100.0}) {
            const double med = res.row(meth, rp, 0.9).median_error;
            all_negative = all_negative && med < 0.0;
            detail += " " + fmt(rp) + "y:" + fmt(med, 3);
          }
          out.c4.require(all_negative, name + " " + to_string(meth) + " median error at tau=0.9 < 0 [" + detail + " ]");
        }
      }
    }
  }
  out.c4.require(se_wins >= 7, "CEV SE <= MCQRNN SE at the 20-year level in " + std::to_string(se_wins) + " of 9 presets");

  const auto big = run_simulation_study(find("gaussian-median-n2000"));
  crossing_audit(big, models, crossings, worst);
  for (Method meth : {Method::cev, Method::mcqrnn}) {
    const double ratio = gaussian_median.row(meth, 20.0, 0.9).se / big.row(meth, 20.0, 0.9).se;
    out.c4.require(ratio >= 3.0 && ratio <= 6.0,
                   to_string(meth) + " SE(n=100)/SE(n=2000) at 20y, tau=0.9 = " + fmt(ratio) + " (sqrt 20 = 4.47)");
  }

  const auto t1 = Clock::now();
  out.seconds4 = std::chrono::duration<double>(t1 - t0).count();
  const auto hump = run_simulation_study(find("nonmonotone"));
  out.seconds5 = std::chrono::duration<double>(Clock::now() - t1).count();
  crossing_audit(hump, models, crossings, worst);
  const auto& cev100 = hump.row(Method::cev, 100.0, 0.9);
  const auto& net100 = hump.row(Method::mcqrnn, 100.0, 0.9);
  for (const auto& g : hump.grid) {
    out.c5.note("rp " + fmt(g.return_period) + ": median error cev " +
                fmt(hump.row(Method::cev, g.return_period, 0.9).median_error, 3) + " mcqrnn " +
                fmt(hump.row(Method::mcqrnn, g.return_period, 0.9).median_error, 3) + ", mean error cev " +
                fmt(hump.row(Method::cev, g.return_period, 0.9).bias, 3) + " mcqrnn " +
                fmt(hump.row(Method::mcqrnn, g.return_period, 0.9).bias, 3));
  }
  out.c5.require(cev100.median_error > 0.0, "CEV median error at the 100-year level > 0: " + fmt(cev100.median_error));
  out.c5.require(net100.median_error < 0.0, "MCQRNN median error at the 100-year level < 0: " + fmt(net100.median_error));
  out.c5.require(cev100.iqr < net100.iqr,
                 "IQR at the 100-year level: cev " + fmt(cev100.iqr) + " < mcqrnn " + fmt(net100.iqr));
  out.c5.note("failures cev/mcqrnn " + std::to_string(hump.cev_failures) + "/" + std::to_string(hump.mcqrnn_failures));

  out.c6.require(models > 0 && crossings == 0, std::to_string(crossings) + " crossing models among " +
                                                   std::to_string(models) + " (worst adjacent step " + fmt(worst, 3) +
                                                   ")");
  return out;
}

// --- 7 ----------------------------------------------------------------------

Outcome gev_inference() {
  Outcome o;
  const GevParams truth{10, 2, 0.1};
  const auto x = gev_sample(truth, 10000, 17);
  const GevFit fit = fit_gev_mle(x);
  o.require(std::abs(fit.params.mu - 10.0) < 0.1 && std::abs(fit.params.sigma - 2.0) < 0.1 &&
                std::abs(fit.params.xi - 0.1) < 0.03,
            "GEV(10, 2, 0.1) from 1e4 draws: (" + fmt(fit.params.mu, 5) + ", " + fmt(fit.params.sigma, 5) + ", " +
                fmt(fit.params.xi, 4) + ")");
  std::vector<double> shifted(x), scaled(x);
  for (auto& v : shifted) v += 25.0;
  for (auto& v : scaled) v *= 2.5;
  const GevFit fs = fit_gev_mle(shifted), fc = fit_gev_mle(scaled);
  o.require(std::abs(fs.params.mu - fit.params.mu - 25.0) < 1e-4 && std::abs(fs.params.sigma - fit.params.sigma) < 1e-4 &&
                std::abs(fs.params.xi - fit.params.xi) < 1e-4,
            "location equivariance");
  o.require(std::abs(fc.params.mu - 2.5 * fit.params.mu) < 1e-4 && std::abs(fc.params.sigma - 2.5 * fit.params.sigma) < 1e-4 &&
                std::abs(fc.params.xi - fit.params.xi) < 1e-4,
            "scale equivariance");

  const GevParams gumbel{20.0, 5.0, 0.0};
  const double r = 50.0;
  const double target = gev_quantile(1.0 - 1.0 / r, gumbel);
  int covered = 0, done = 0, open_bounds = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const auto d = gev_sample(gumbel, 100, derive_seed(4242, 0, static_cast<std::uint64_t>(rep)));
    const GevFit f = fit_gev_mle(d);
    const auto ci = profile_likelihood_ci(f, d, r);
    ++done;
    open_bounds += !ci.lower_found || !ci.upper_found;
    covered += ci.lower <= target && target <= ci.upper;
  }
  const double coverage = static_cast<double>(covered) / done;
  o.require(coverage >= 0.90 && coverage <= 0.99, "profile 95% CI coverage at r=50 over 500 Gumbel samples: " +
                                                      fmt(coverage, 4) + " (" + std::to_string(open_bounds) +
                                                      " intervals hit the search window)");
  return o;
}

// --- 8 ----------------------------------------------------------------------

Outcome ensemble() {
  Outcome o;
  const auto margins = fit_standin_margins(kReferenceGev, kReferenceWeibull, kStandinSeed);
  const CopulaSpec strong = copula_preset(CopulaFamily::gumbel, Strength::strong);
  const auto members = synthetic_ensemble(35, 75, margins.gev, margins.weibull, strong, 8080);
  std::vector<double> grid;
  for (double rp : {5.0, 10.0, 20.0, 50.0, 100.0}) grid.push_back(gev_quantile(1.0 - 1.0 / rp, margins.gev));

  const auto net = ensemble_bootstrap(members, 100, make_estimator(Method::mcqrnn), grid, 0.9, 31);
  const auto cev = ensemble_bootstrap(members, 100, make_estimator(Method::cev), grid, 0.9, 32);
  std::vector<double> width;
  int contains = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    width.push_back(net.upper[g] - net.lower[g]);
    contains += net.lower[g] <= net.point[g] && net.point[g] <= net.upper[g];
    contains += cev.lower[g] <= cev.point[g] && cev.point[g] <= cev.upper[g];
    o.note("x1=" + fmt(grid[g]) + " band width mcqrnn " + fmt(width.back(), 3) + " cev " +
           fmt(cev.upper[g] - cev.lower[g], 3));
  }
  o.note("bootstrap failures mcqrnn " + std::to_string(net.failed_draws) + " (redraws " + std::to_string(net.redraws) +
         "), cev " + std::to_string(cev.failed_draws) + " (redraws " + std::to_string(cev.redraws) + ")");
  o.note("bands containing the full-ensemble estimate: " + std::to_string(contains) + " of " +
         std::to_string(2 * grid.size()));
  o.require(width[4] > width[2] && width[2] > width[0], "MCQRNN band widens from the 5- to 20- to 100-year level");

  const auto a = single_member_assessment(members, {}, {}, grid[2], 0.9, 77);
  for (const auto& s : a.table)
    o.note(to_string(s.method) + " vs " + s.truth_convention + " truth " + fmt(s.truth) + ": bias " +
           fmt(s.errors.bias, 3) + " se " + fmt(s.errors.se, 3) + " rmse " + fmt(s.errors.rmse, 3));
  const double se_cev = a.table[0].errors.se;
  const double se_net = a.table[2].errors.se;
  o.require(se_cev < se_net, "per-member SE at the 20-year level: cev " + fmt(se_cev) + " < mcqrnn " + fmt(se_net));
  o.note("member failures cev/mcqrnn " + std::to_string(a.cev_failures) + "/" + std::to_string(a.mcqrnn_failures));
  return o;
}

// --- 9 ----------------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  auto twice = [&](const std::string& what, const std::function<std::string(int)>& run) {
    const std::string a = run(1);
    const std::string b = run(2);
    o.require(!a.empty() && a == b, what + " (" + std::to_string(a.size()) + " bytes)");
  };
  twice("quantile-bias CSV", [](int) {
    const std::vector<std::size_t> ns{100, 50, 20};
    const std::vector<double> taus{0.9, 0.95, 0.99};
    std::ostringstream s;
    write_quantile_bias_csv(s, run_quantile_bias_study({5.0, 9.5}, ns, taus, 5000, 20240601));
    return s.str();
  });
  for (const char* name : {"gumbel-median", "nonmonotone"}) {
    twice(std::string("simulation CSVs for ") + name + ", threads 1 vs 2", [&](int run) {
      ScenarioSpec s = preset_scenario(name);
      s.replications = 8;
      s.threads = run;
      const auto r = run_simulation_study(s);
      std::ostringstream out;
      write_metrics_csv(out, r.rows);
      write_estimates_csv(out, r);
      write_truth_csv(out, r);
      return out.str();
    });
  }
  const auto margins = fit_standin_margins(kReferenceGev, kReferenceWeibull, kStandinSeed);
  const auto members =
      synthetic_ensemble(12, 75, margins.gev, margins.weibull, copula_preset(CopulaFamily::gumbel, Strength::strong), 5);
  const std::vector<double> grid{gev_quantile(0.8, margins.gev), gev_quantile(0.99, margins.gev)};
  for (Method m : {Method::cev, Method::mcqrnn}) {
    twice("bootstrap CSV for " + to_string(m), [&](int) {
      std::ostringstream s;
      write_bootstrap_csv(s, ensemble_bootstrap(members, 6, make_estimator(m), grid, 0.9, 17), 0.9);
      return s.str();
    });
  }
  twice("single-member CSVs", [&](int) {
    const auto a = single_member_assessment(members, {}, {}, grid[0], 0.9, 3);
    std::ostringstream s;
    write_single_member_csv(s, a);
    write_table1_csv(s, a);
    return s.str();
  });
  return o;
}

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;  // 0 = no runtime budget
};

const std::vector<Criterion> kCriteria{
    {1, "quantile-bias reproduction", 60},
    {2, "copula sampler Kendall tau", 60},
    {3, "conditional oracle equivalence", 0},
    {4, "simulation-study patterns", 30 * 60},
    {5, "non-monotone scenario", 15 * 60},
    {6, "MCQRNN non-crossing", 0},
    {7, "GEV inference", 5 * 60},
    {8, "ensemble bootstrap and single-member assessment", 20 * 60},
    {9, "determinism", 0},
};

bool report(const Criterion& c, Outcome o, double seconds) {
  if (c.limit_seconds > 0.0) {
    o.require(seconds < c.limit_seconds,
              "runtime " + fmt(seconds, 4) + " s within " + fmt(c.limit_seconds, 4) + " s");
  }
  for (const auto& n : o.notes) std::cout << n << '\n';
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " (" << fmt(seconds, 4)
            << " s)\n"
            << std::flush;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "Criteria to run (default all)")->delimiter(',')->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  std::set<int> want(selected.begin(), selected.end());
  if (want.empty())
    for (const auto& c : kCriteria) want.insert(c.id);

  bool all = true;
  auto timed = [&](int id, const std::function<Outcome()>& fn) {
    if (!want.count(id)) return;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all = report(kCriteria[static_cast<std::size_t>(id - 1)], o,
                 std::chrono::duration<double>(Clock::now() - t0).count()) && all;
  };

  timed(1, quantile_bias);
  timed(2, kendall);
  timed(3, oracles);
  if (want.count(4) || want.count(5) || want.count(6)) {
    // One pass feeds three criteria; criterion 6 audits the models of 4 and 5.
    const auto t0 = Clock::now();
    SimulationOutcomes s;
    try {
      s = simulation();
    } catch (const std::exception& e) {
      for (Outcome* o : {&s.c4, &s.c5, &s.c6}) o->require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (want.count(4)) all = report(kCriteria[3], s.c4, s.seconds4) && all;
    if (want.count(5)) all = report(kCriteria[4], s.c5, s.seconds5) && all;
    if (want.count(6)) all = report(kCriteria[5], s.c6, seconds) && all;
  }
  timed(7, gev_inference);
  timed(8, ensemble);
  timed(9, determinism);
  return all ? 0 : 1;
}
