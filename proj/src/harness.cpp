#include "condex/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "condex/empirical.hpp"
#include "condex/marginal_fit.hpp"
#include "condex/rng.hpp"
#include "condex/text.hpp"

namespace condex {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kProbeX = 100;
constexpr int kProbeTau = 50;
constexpr int kMaxRetries = 3;

// Stream identifiers for derive_seed.
constexpr std::uint64_t kStreamData = 1;
constexpr std::uint64_t kStreamNetwork = 2;
constexpr std::uint64_t kStreamMember = 3;
constexpr std::uint64_t kStreamBootstrap = 4;
constexpr std::uint64_t kStreamBootstrapFit = 5;
constexpr std::uint64_t kStreamPointFit = 6;
constexpr std::uint64_t kStreamStandin = 7;
constexpr std::uint64_t kStreamProbe = 8;

std::string num(double v) { return std::isfinite(v) ? format_number(v) : std::string("NA"); }

std::vector<double> finite_only(std::span<const double> v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v)
    if (std::isfinite(x)) out.push_back(x);
  return out;
}

// Smallest adjacent-tau step of the model over a fixed random probe.
double crossing_probe(const McqrnnModel& model, const GevParams& margin, std::uint64_t seed) {
  UniformStream rng(seed);
  const double lo = gev_quantile(0.001, margin);
  const double hi = gev_quantile(0.999, margin);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kProbeX; ++i) {
    const double x = lo + (hi - lo) * rng.next();
    double prev = mcqrnn_predict(model, x, 0.5 / kProbeTau);
    for (int j = 1; j < kProbeTau; ++j) {
      const double q = mcqrnn_predict(model, x, (j + 0.5) / kProbeTau);
      worst = std::min(worst, q - prev);
      prev = q;
    }
  }
  return worst;
}

}  // namespace

std::string to_string(Method m) { return m == Method::cev ? "cev" : "mcqrnn"; }

double QuadraticWeibull::quantile(double tau, double x1) const {
  const double s = scale(x1);
  if (!(s > 0.0)) throw std::domain_error("quadratic Weibull scale is not positive at x1 = " + format_number(x1));
  return weibull_quantile(tau, {shape, s});
}

void QuadraticWeibull::validate() const {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw std::domain_error("quadratic Weibull shape must be positive");
  if (!(c2 < 0.0)) throw std::domain_error("quadratic Weibull needs c2 < 0");
}

void ScenarioSpec::validate() const {
  marginal1.validate();
  marginal2.validate();
  if (const auto* c = std::get_if<CopulaSpec>(&dependence)) {
    c->validate();
  } else {
    const auto& q = std::get<QuadraticWeibull>(dependence);
    q.validate();
    // Scale must stay positive over the central 1 - 2e-4 of the x1 law; a draw
    // beyond that fails its replicate.
    for (double p : {1e-4, 0.5, 1.0 - 1e-4}) {
      if (!(q.scale(gev_quantile(p, marginal1)) > 0.0)) {
        throw std::domain_error("quadratic Weibull scale turns nonpositive within the x1 range");
      }
    }
  }
  if (n < 30) throw std::domain_error("scenario sample size must be at least 30");
  if (replications < 1) throw std::domain_error("scenario needs at least one replication");
  if (taus.empty() || return_periods.empty()) throw std::domain_error("scenario grids must be non-empty");
  for (double t : taus)
    if (!(t > 0.0 && t < 1.0)) throw std::domain_error("scenario taus must lie in (0, 1)");
  for (double r : return_periods)
    if (!(r > 1.0)) throw std::domain_error("return periods must exceed 1");
  if (fine_grid < 0) throw std::domain_error("fine_grid must be nonnegative");
  cev.validate();
  mcqrnn.validate();
}

std::vector<GridPoint> conditioning_grid(const ScenarioSpec& spec) {
  std::vector<double> periods = spec.return_periods;
  if (spec.fine_grid > 0) {
    const auto [lo, hi] = std::minmax_element(periods.begin(), periods.end());
    const double a = std::log(*lo);
    const double b = std::log(*hi);
    const int k = spec.fine_grid;
    for (int i = 0; i < k; ++i) {
      periods.push_back(std::exp(a + (b - a) * (i + 1.0) / (k + 1.0)));
    }
  }
  std::sort(periods.begin(), periods.end());
  periods.erase(std::unique(periods.begin(), periods.end()), periods.end());
  std::vector<GridPoint> grid;
  for (double r : periods) grid.push_back({r, gev_quantile(1.0 - 1.0 / r, spec.marginal1)});
  return grid;
}

double scenario_truth(const ScenarioSpec& spec, double x1, double tau) {
  if (const auto* c = std::get_if<CopulaSpec>(&spec.dependence)) {
    const double u1 = gev_cdf(x1, spec.marginal1);
    const WeibullParams m2 = spec.marginal2;
    return true_conditional_quantile(*c, tau, u1, [&](double p) { return weibull_quantile(p, m2); });
  }
  return std::get<QuadraticWeibull>(spec.dependence).quantile(tau, x1);
}

PairData sample_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  PairData out;
  out.x1.resize(spec.n);
  out.x2.resize(spec.n);
  if (const auto* c = std::get_if<CopulaSpec>(&spec.dependence)) {
    const auto u = sample_copula(*c, spec.n, seed);
    for (std::size_t i = 0; i < spec.n; ++i) {
      out.x1[i] = gev_quantile(u.u1[i], spec.marginal1);
      out.x2[i] = weibull_quantile(u.u2[i], spec.marginal2);
    }
    return out;
  }
  const auto& q = std::get<QuadraticWeibull>(spec.dependence);
  const UniformStream rng(seed);
  for (std::size_t i = 0; i < spec.n; ++i) {
    out.x1[i] = gev_quantile(rng.at(2 * i), spec.marginal1);
    out.x2[i] = q.quantile(rng.at(2 * i + 1), out.x1[i]);
  }
  return out;
}

MetricRow summarize_errors(std::span<const double> estimates, double truth) {
  MetricRow row;
  row.truth = truth;
  const auto est = finite_only(estimates);
  row.count = est.size();
  if (est.empty()) {
    row.mean_estimate = row.bias = row.se = row.rmse = row.median_error = row.iqr = kNaN;
    return row;
  }
  std::vector<double> err(est.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    err[i] = est[i] - truth;
    sq += err[i] * err[i];
  }
  row.mean_estimate = mean(est);
  row.bias = mean(err);
  row.se = std::sqrt(variance_pop(est));
  row.rmse = std::sqrt(sq / static_cast<double>(est.size()));
  row.median_error = median(err);
  row.iqr = iqr(est);
  return row;
}

const MetricRow& SimulationResult::row(Method m, double return_period, double tau) const {
  for (const auto& r : rows) {
    if (r.method == m && std::abs(r.return_period - return_period) <= 1e-9 * return_period &&
        std::abs(r.tau - tau) <= 1e-12) {
      return r;
    }
  }
  throw std::out_of_range("no metric row for " + to_string(m) + " at return period " + format_number(return_period) +
                          ", tau " + format_number(tau));
}

SimulationResult run_simulation_study(const ScenarioSpec& spec) {
  spec.validate();
  SimulationResult res;
  res.spec = spec;
  res.grid = conditioning_grid(spec);
  const std::size_t nt = spec.taus.size();
  const std::size_t cells = res.grid.size() * nt;

  res.truth.resize(cells);
  for (std::size_t g = 0; g < res.grid.size(); ++g)
    for (std::size_t t = 0; t < nt; ++t) res.truth[g * nt + t] = scenario_truth(spec, res.grid[g].x1, spec.taus[t]);

  const auto reps = static_cast<std::size_t>(spec.replications);
  res.estimates.assign(2, std::vector<std::vector<double>>(reps, std::vector<double>(cells, kNaN)));
  res.mcqrnn_min_tau_step.assign(reps, kNaN);
  std::vector<std::string> cev_msg(reps), net_msg(reps);

  parallel_for(reps, spec.threads, [&](std::size_t r) {
    PairData data;
    try {
      data = sample_scenario(spec, derive_seed(spec.seed, kStreamData, r));
    } catch (const std::domain_error& e) {
      cev_msg[r] = net_msg[r] = std::string("sampling: ") + e.what();
      return;
    }
    try {
      const CevFit fit = fit_cev(data, spec.cev);
      auto& out = res.estimates[0][r];
      for (std::size_t g = 0; g < res.grid.size(); ++g)
        for (std::size_t t = 0; t < nt; ++t) out[g * nt + t] = cev_conditional_quantile(fit, res.grid[g].x1, spec.taus[t]);
    } catch (const std::exception& e) {
      std::fill(res.estimates[0][r].begin(), res.estimates[0][r].end(), kNaN);
      cev_msg[r] = e.what();
    }
    try {
      McqrnnConfig cfg = spec.mcqrnn;
      cfg.seed = derive_seed(spec.seed, kStreamNetwork, r);
      const McqrnnModel model = train_mcqrnn(data, cfg);
      auto& out = res.estimates[1][r];
      for (std::size_t g = 0; g < res.grid.size(); ++g)
        for (std::size_t t = 0; t < nt; ++t) out[g * nt + t] = mcqrnn_predict(model, res.grid[g].x1, spec.taus[t]);
      res.mcqrnn_min_tau_step[r] = crossing_probe(model, spec.marginal1, derive_seed(spec.seed, kStreamProbe, r));
    } catch (const std::exception& e) {
      std::fill(res.estimates[1][r].begin(), res.estimates[1][r].end(), kNaN);
      net_msg[r] = e.what();
    }
  });

  for (std::size_t r = 0; r < reps; ++r) {
    if (!cev_msg[r].empty()) {
      ++res.cev_failures;
      res.failure_messages.push_back("replicate " + std::to_string(r) + " cev: " + cev_msg[r]);
    }
    if (!net_msg[r].empty()) {
      ++res.mcqrnn_failures;
      res.failure_messages.push_back("replicate " + std::to_string(r) + " mcqrnn: " + net_msg[r]);
    }
  }
  const double limit = 0.1 * static_cast<double>(reps);
  if (static_cast<double>(res.cev_failures) > limit || static_cast<double>(res.mcqrnn_failures) > limit) {
    throw StudyError("scenario " + spec.name + ": too many failed replications (cev " +
                     std::to_string(res.cev_failures) + ", mcqrnn " + std::to_string(res.mcqrnn_failures) + " of " +
                     std::to_string(reps) + ")");
  }

  std::vector<double> column(reps);
  for (int m = 0; m < 2; ++m) {
    for (std::size_t g = 0; g < res.grid.size(); ++g) {
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t c = g * nt + t;
        for (std::size_t r = 0; r < reps; ++r) column[r] = res.estimates[m][r][c];
        MetricRow row = summarize_errors(column, res.truth[c]);
        row.scenario = spec.name;
        row.method = m == 0 ? Method::cev : Method::mcqrnn;
        row.return_period = res.grid[g].return_period;
        row.x1 = res.grid[g].x1;
        row.tau = spec.taus[t];
        res.rows.push_back(std::move(row));
      }
    }
  }
  return res;
}

std::vector<QuantileBiasRow> run_quantile_bias_study(const WeibullParams& params, std::span<const std::size_t> ns,
                                                     std::span<const double> taus, int replications,
                                                     std::uint64_t seed) {
  params.validate();
  if (replications < 2) throw std::invalid_argument("quantile bias study needs at least two replications");
  std::vector<QuantileBiasRow> rows;
  for (std::size_t n : ns) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    std::vector<std::vector<double>> est(taus.size(), std::vector<double>(static_cast<std::size_t>(replications)));
    for (int r = 0; r < replications; ++r) {
      auto sample = weibull_sample(params, n, derive_seed(seed, n, static_cast<std::uint64_t>(r)));
      std::sort(sample.begin(), sample.end());
      for (std::size_t t = 0; t < taus.size(); ++t) est[t][static_cast<std::size_t>(r)] = sorted_quantile_type7(sample, taus[t]);
    }
    for (std::size_t t = 0; t < taus.size(); ++t) {
      QuantileBiasRow row;
      row.n = n;
      row.tau = taus[t];
      row.truth = weibull_quantile(taus[t], params);
      row.errors = summarize_errors(est[t], row.truth);
      row.errors.tau = taus[t];
      row.bias_mc_se = std::sqrt(variance_pop(est[t]) / (replications - 1.0));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Estimator make_estimator(Method method, const CevConfig& cev, const McqrnnConfig& mcqrnn) {
  if (method == Method::cev) {
    return [cev](const PairData& data, std::span<const double> grid, double tau, std::uint64_t) {
      const CevFit fit = fit_cev(data, cev);
      std::vector<double> out;
      for (double x : grid) out.push_back(cev_conditional_quantile(fit, x, tau));
      return out;
    };
  }
  return [mcqrnn](const PairData& data, std::span<const double> grid, double tau, std::uint64_t seed) {
    McqrnnConfig cfg = mcqrnn;
    cfg.seed = seed;
    const McqrnnModel model = train_mcqrnn(data, cfg);
    std::vector<double> out;
    for (double x : grid) out.push_back(mcqrnn_predict(model, x, tau));
    return out;
  };
}

std::vector<PairData> synthetic_ensemble(int members, std::size_t years, const GevParams& margin1,
                                         const WeibullParams& margin2, const CopulaSpec& copula,
                                         std::uint64_t seed) {
  if (members < 1 || years < 1) throw std::invalid_argument("ensemble needs members and years");
  std::vector<PairData> out(static_cast<std::size_t>(members));
  for (int m = 0; m < members; ++m) {
    const auto u = sample_copula(copula, years, derive_seed(seed, kStreamMember, static_cast<std::uint64_t>(m)));
    auto& p = out[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < years; ++i) {
      p.x1.push_back(gev_quantile(u.u1[i], margin1));
      p.x2.push_back(weibull_quantile(u.u2[i], margin2));
    }
  }
  return out;
}

PairData pool_members(std::span<const PairData> members, std::span<const std::size_t> indices) {
  PairData out;
  for (std::size_t i : indices) {
    const auto& m = members[i];
    out.x1.insert(out.x1.end(), m.x1.begin(), m.x1.end());
    out.x2.insert(out.x2.end(), m.x2.begin(), m.x2.end());
  }
  return out;
}

BootstrapBands ensemble_bootstrap(std::span<const PairData> members, int draws, const Estimator& estimator,
                                  std::span<const double> x1_grid, double tau, std::uint64_t seed) {
  if (members.size() < 5) throw std::invalid_argument("ensemble bootstrap needs at least 5 members");
  if (draws < 1) throw std::invalid_argument("ensemble bootstrap needs at least one draw");
  if (x1_grid.empty()) throw std::invalid_argument("ensemble bootstrap needs a non-empty grid");

  BootstrapBands out;
  out.x1.assign(x1_grid.begin(), x1_grid.end());
  std::vector<std::size_t> all(members.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  out.point = estimator(pool_members(members, all), x1_grid, tau, derive_seed(seed, kStreamPointFit, 0));

  const auto nd = static_cast<std::size_t>(draws);
  std::vector<std::vector<double>> results(nd);
  std::vector<int> attempts(nd, 0);
  parallel_for(nd, 0, [&](std::size_t b) {
    UniformStream rng(derive_seed(seed, kStreamBootstrap, b));
    std::vector<std::size_t> pick(members.size());
    for (int a = 0; a <= kMaxRetries; ++a) {
      attempts[b] = a + 1;
      for (auto& p : pick) p = rng.next_below(members.size());
      try {
        auto est = estimator(pool_members(members, pick), x1_grid, tau,
                             derive_seed(seed, kStreamBootstrapFit, b * (kMaxRetries + 1) + static_cast<std::size_t>(a)));
        if (std::all_of(est.begin(), est.end(), [](double v) { return std::isfinite(v); })) {
          results[b] = std::move(est);
          return;
        }
      } catch (const std::exception&) {
      }
    }
  });

  for (std::size_t b = 0; b < nd; ++b) {
    out.redraws += static_cast<std::size_t>(attempts[b] - 1);
    if (results[b].empty()) {
      ++out.failed_draws;
    } else {
      out.draws.push_back(std::move(results[b]));
    }
  }
  if (out.draws.empty()) throw StudyError("every bootstrap draw failed");

  std::vector<double> column(out.draws.size());
  for (std::size_t g = 0; g < x1_grid.size(); ++g) {
    for (std::size_t b = 0; b < out.draws.size(); ++b) column[b] = out.draws[b][g];
    std::sort(column.begin(), column.end());
    out.lower.push_back(sorted_quantile_type7(column, 0.025));
    out.upper.push_back(sorted_quantile_type7(column, 0.975));
  }
  return out;
}

SingleMemberAssessment single_member_assessment(std::span<const PairData> members, const CevConfig& cev,
                                                const McqrnnConfig& mcqrnn, double x1_star, double tau,
                                                std::uint64_t seed) {
  if (members.size() < 10) throw std::invalid_argument("single-member assessment needs at least 10 members");
  SingleMemberAssessment a;
  a.x1 = x1_star;
  a.tau = tau;
  const std::array<Estimator, 2> est{make_estimator(Method::cev, cev), make_estimator(Method::mcqrnn, {}, mcqrnn)};
  const std::array<double, 1> grid{x1_star};

  std::vector<std::size_t> all(members.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const PairData pooled = pool_members(members, all);
  a.truth_cev = est[0](pooled, grid, tau, derive_seed(seed, kStreamPointFit, 0))[0];
  a.truth_mcqrnn = est[1](pooled, grid, tau, derive_seed(seed, kStreamPointFit, 1))[0];

  a.cev.assign(members.size(), kNaN);
  a.mcqrnn.assign(members.size(), kNaN);
  parallel_for(members.size(), 0, [&](std::size_t i) {
    try {
      a.cev[i] = est[0](members[i], grid, tau, 0)[0];
    } catch (const std::exception&) {
    }
    try {
      a.mcqrnn[i] = est[1](members[i], grid, tau, derive_seed(seed, kStreamNetwork, i))[0];
    } catch (const std::exception&) {
    }
  });
  for (std::size_t i = 0; i < members.size(); ++i) {
    a.cev_failures += !std::isfinite(a.cev[i]);
    a.mcqrnn_failures += !std::isfinite(a.mcqrnn[i]);
  }

  auto add = [&](Method m, const std::string& convention, double truth) {
    MetricRow row = summarize_errors(m == Method::cev ? a.cev : a.mcqrnn, truth);
    row.method = m;
    row.x1 = x1_star;
    row.tau = tau;
    a.table.push_back({m, convention, truth, row});
  };
  add(Method::cev, "own", a.truth_cev);
  add(Method::cev, "mcqrnn", a.truth_mcqrnn);
  add(Method::mcqrnn, "own", a.truth_mcqrnn);
  add(Method::mcqrnn, "mcqrnn", a.truth_mcqrnn);
  return a;
}

StandinMargins fit_standin_margins(const GevParams& reference_gev, const WeibullParams& reference_weibull,
                                   std::uint64_t seed) {
  constexpr std::size_t kCount = 35 * 50;
  const auto x1 = gev_sample(reference_gev, kCount, derive_seed(seed, kStreamStandin, 0));
  const auto x2 = weibull_sample(reference_weibull, kCount, derive_seed(seed, kStreamStandin, 1));
  return {fit_gev_mle(x1).params, fit_weibull_mle(x2)};
}

std::vector<ScenarioSpec> preset_scenarios() {
  const StandinMargins m = fit_standin_margins(kReferenceGev, kReferenceWeibull, kStandinSeed);
  std::vector<ScenarioSpec> out;
  auto base = [&](std::string name, Dependence dep) {
    ScenarioSpec s;
    s.name = std::move(name);
    s.marginal1 = m.gev;
    s.marginal2 = m.weibull;
    s.dependence = dep;
    s.seed = derive_seed(20240101, out.size(), 0);
    return s;
  };
  for (auto f : {CopulaFamily::gaussian, CopulaFamily::gumbel, CopulaFamily::clayton}) {
    for (auto st : {Strength::weak, Strength::median, Strength::strong}) {
      out.push_back(base(std::string(to_string(f)) + "-" + std::string(to_string(st)), copula_preset(f, st)));
    }
  }
  ScenarioSpec big = base("gaussian-median-n2000", copula_preset(CopulaFamily::gaussian, Strength::median));
  big.n = 2000;
  out.push_back(big);
  out.push_back(base("independence", CopulaSpec{CopulaFamily::gaussian, 0.0}));
  ScenarioSpec hump = base("nonmonotone", kHumpWeibull);
  hump.fine_grid = 20;
  out.push_back(hump);
  return out;
}

ScenarioSpec preset_scenario(const std::string& name) {
  for (auto& s : preset_scenarios())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown scenario preset: " + name);
}

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows) {
  out << "scenario,method,return_period,x1,tau,truth,count,mean_estimate,bias,se,rmse,median_error,iqr\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << to_string(r.method) << ',' << num(r.return_period) << ',' << num(r.x1) << ','
        << num(r.tau) << ',' << num(r.truth) << ',' << r.count << ',' << num(r.mean_estimate) << ',' << num(r.bias)
        << ',' << num(r.se) << ',' << num(r.rmse) << ',' << num(r.median_error) << ',' << num(r.iqr) << '\n';
  }
}

void write_estimates_csv(std::ostream& out, const SimulationResult& result) {
  const auto& taus = result.spec.taus;
  out << "scenario,method,replicate,return_period,x1,tau,estimate\n";
  for (int m = 0; m < 2; ++m) {
    const std::string name = to_string(m == 0 ? Method::cev : Method::mcqrnn);
    for (std::size_t r = 0; r < result.estimates[m].size(); ++r) {
      for (std::size_t g = 0; g < result.grid.size(); ++g) {
        for (std::size_t t = 0; t < taus.size(); ++t) {
          out << result.spec.name << ',' << name << ',' << r << ',' << num(result.grid[g].return_period) << ','
              << num(result.grid[g].x1) << ',' << num(taus[t]) << ',' << num(result.estimates[m][r][g * taus.size() + t])
              << '\n';
        }
      }
    }
  }
}

void write_truth_csv(std::ostream& out, const SimulationResult& result) {
  const auto& taus = result.spec.taus;
  out << "scenario,return_period,x1,tau,truth\n";
  for (std::size_t g = 0; g < result.grid.size(); ++g) {
    for (std::size_t t = 0; t < taus.size(); ++t) {
      out << result.spec.name << ',' << num(result.grid[g].return_period) << ',' << num(result.grid[g].x1) << ','
          << num(taus[t]) << ',' << num(result.truth[g * taus.size() + t]) << '\n';
    }
  }
}

void write_quantile_bias_csv(std::ostream& out, std::span<const QuantileBiasRow> rows) {
  out << "n,tau,truth,count,mean_estimate,bias,bias_mc_se,se,rmse,median_error\n";
  for (const auto& r : rows) {
    out << r.n << ',' << num(r.tau) << ',' << num(r.truth) << ',' << r.errors.count << ','
        << num(r.errors.mean_estimate) << ',' << num(r.errors.bias) << ',' << num(r.bias_mc_se) << ','
        << num(r.errors.se) << ',' << num(r.errors.rmse) << ',' << num(r.errors.median_error) << '\n';
  }
}

void write_bootstrap_csv(std::ostream& out, const BootstrapBands& bands, double tau) {
  out << "x1,tau,point,lower,upper\n";
  for (std::size_t g = 0; g < bands.x1.size(); ++g) {
    out << num(bands.x1[g]) << ',' << num(tau) << ',' << num(bands.point[g]) << ',' << num(bands.lower[g]) << ','
        << num(bands.upper[g]) << '\n';
  }
}

void write_single_member_csv(std::ostream& out, const SingleMemberAssessment& a) {
  out << "member,x1,tau,cev,mcqrnn\n";
  for (std::size_t i = 0; i < a.cev.size(); ++i) {
    out << i << ',' << num(a.x1) << ',' << num(a.tau) << ',' << num(a.cev[i]) << ',' << num(a.mcqrnn[i]) << '\n';
  }
}

void write_table1_csv(std::ostream& out, const SingleMemberAssessment& a) {
  out << "method,truth_convention,x1,tau,truth,count,bias,se,rmse,min,max\n";
  for (const auto& s : a.table) {
    const auto v = finite_only(s.method == Method::cev ? a.cev : a.mcqrnn);
    const double lo = v.empty() ? kNaN : *std::min_element(v.begin(), v.end());
    const double hi = v.empty() ? kNaN : *std::max_element(v.begin(), v.end());
    out << to_string(s.method) << ',' << s.truth_convention << ',' << num(a.x1) << ',' << num(a.tau) << ','
        << num(s.truth) << ',' << s.errors.count << ',' << num(s.errors.bias) << ',' << num(s.errors.se) << ','
        << num(s.errors.rmse) << ',' << num(lo) << ',' << num(hi) << '\n';
  }
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace condex
