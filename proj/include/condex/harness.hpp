#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "condex/cev.hpp"
#include "condex/copulas.hpp"
#include "condex/curve.hpp"
#include "condex/distributions.hpp"
#include "condex/mcqrnn.hpp"

namespace condex {

enum class Method { cev, mcqrnn };
[[nodiscard]] std::string to_string(Method m);

/// Weibull concomitant whose scale is a quadratic in x1.
struct QuadraticWeibull {
  double shape = 5.0;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  [[nodiscard]] double scale(double x1) const noexcept { return c0 + (c1 + c2 * x1) * x1; }
  [[nodiscard]] double quantile(double tau, double x1) const;
  void validate() const;
  friend bool operator==(const QuadraticWeibull&, const QuadraticWeibull&) = default;
};

using Dependence = std::variant<CopulaSpec, QuadraticWeibull>;

struct ScenarioSpec {
  std::string name = "scenario";
  GevParams marginal1{60.0, 12.0, 0.05};
  WeibullParams marginal2{5.0, 9.5};
  Dependence dependence = CopulaSpec{CopulaFamily::gaussian, 0.3};
  std::size_t n = 100;
  int replications = 100;
  std::vector<double> taus{0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> return_periods{5.0, 20.0, 100.0};
  /// Extra conditioning points, log-spaced in return period between the
  /// smallest and largest entry of return_periods.
  int fine_grid = 0;
  std::uint64_t seed = 20240101;
  CevConfig cev;
  McqrnnConfig mcqrnn;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Conditioning grid as (return period, x1 on the true GEV scale), sorted.
struct GridPoint {
  double return_period = 0.0;
  double x1 = 0.0;
};
[[nodiscard]] std::vector<GridPoint> conditioning_grid(const ScenarioSpec& spec);

/// True tau-quantile of X2 given X1 = x1.
[[nodiscard]] double scenario_truth(const ScenarioSpec& spec, double x1, double tau);

/// One replicate of n (x1, x2) pairs.
[[nodiscard]] PairData sample_scenario(const ScenarioSpec& spec, std::uint64_t seed);

class StudyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MetricRow {
  std::string scenario;
  Method method = Method::cev;
  double return_period = 0.0;
  double x1 = 0.0;
  double tau = 0.0;
  double truth = 0.0;
  std::size_t count = 0;
  double mean_estimate = 0.0;
  double bias = 0.0;          // mean error
  double se = 0.0;            // population standard deviation of estimates
  double rmse = 0.0;
  double median_error = 0.0;
  double iqr = 0.0;
};

/// Bias, standard error and RMSE of a batch of estimates against one truth.
/// Non-finite estimates are skipped.
[[nodiscard]] MetricRow summarize_errors(std::span<const double> estimates, double truth);

struct SimulationResult {
  ScenarioSpec spec;
  std::vector<GridPoint> grid;
  std::vector<double> truth;  // grid-major, grid.size() * taus.size()
  /// estimates[method][replicate][grid * taus + tau]; NaN where a fit failed.
  std::vector<std::vector<std::vector<double>>> estimates;
  std::vector<MetricRow> rows;
  std::size_t cev_failures = 0;
  std::size_t mcqrnn_failures = 0;
  std::vector<std::string> failure_messages;
  /// Smallest adjacent-tau difference over the crossing probe of each model.
  std::vector<double> mcqrnn_min_tau_step;

  [[nodiscard]] const MetricRow& row(Method m, double return_period, double tau) const;
};

/// Replicate r uses derive_seed(spec.seed, 1, r) for data and
/// derive_seed(spec.seed, 2, r) for the network.
[[nodiscard]] SimulationResult run_simulation_study(const ScenarioSpec& spec);

struct QuantileBiasRow {
  std::size_t n = 0;
  double tau = 0.0;
  double truth = 0.0;
  MetricRow errors;
  double bias_mc_se = 0.0;  // Monte Carlo standard error of the bias
};

[[nodiscard]] std::vector<QuantileBiasRow> run_quantile_bias_study(const WeibullParams& params,
                                                                   std::span<const std::size_t> ns,
                                                                   std::span<const double> taus, int replications,
                                                                   std::uint64_t seed);

// --- Ensemble studies -------------------------------------------------------

/// Conditional tau-quantile estimates of a fitted method on an x1 grid.
using Estimator =
    std::function<std::vector<double>(const PairData& data, std::span<const double> x1_grid, double tau,
                                      std::uint64_t seed)>;

[[nodiscard]] Estimator make_estimator(Method method, const CevConfig& cev = {}, const McqrnnConfig& mcqrnn = {});

/// Pairs per ensemble member drawn from a copula with GEV/Weibull margins.
[[nodiscard]] std::vector<PairData> synthetic_ensemble(int members, std::size_t years, const GevParams& margin1,
                                                       const WeibullParams& margin2, const CopulaSpec& copula,
                                                       std::uint64_t seed);

[[nodiscard]] PairData pool_members(std::span<const PairData> members, std::span<const std::size_t> indices);

struct BootstrapBands {
  std::vector<double> x1;
  std::vector<double> point;  // full-ensemble estimate
  std::vector<double> lower;  // 2.5% type-7
  std::vector<double> upper;  // 97.5% type-7
  std::vector<std::vector<double>> draws;
  std::size_t redraws = 0;
  std::size_t failed_draws = 0;
};

[[nodiscard]] BootstrapBands ensemble_bootstrap(std::span<const PairData> members, int draws,
                                                const Estimator& estimator, std::span<const double> x1_grid,
                                                double tau, std::uint64_t seed);

struct SingleMemberAssessment {
  double x1 = 0.0;
  double tau = 0.9;
  double truth_cev = 0.0;     // all-member CEV estimate
  double truth_mcqrnn = 0.0;  // all-member MCQRNN estimate
  std::vector<double> cev;    // per member, NaN on failure
  std::vector<double> mcqrnn;
  std::size_t cev_failures = 0;
  std::size_t mcqrnn_failures = 0;
  /// Rows for (method, truth convention) with convention "own" or "mcqrnn".
  struct Summary {
    Method method;
    std::string truth_convention;
    double truth;
    MetricRow errors;
  };
  std::vector<Summary> table;
};

[[nodiscard]] SingleMemberAssessment single_member_assessment(std::span<const PairData> members,
                                                              const CevConfig& cev, const McqrnnConfig& mcqrnn,
                                                              double x1_star, double tau, std::uint64_t seed);

// --- Reference margins ------------------------------------------------------

struct StandinMargins {
  GevParams gev;
  WeibullParams weibull;
};

/// GEV and Weibull margins fitted once to a synthetic stand-in sample
/// (35 members x 50 seasons) drawn from the given reference distributions.
[[nodiscard]] StandinMargins fit_standin_margins(const GevParams& reference_gev,
                                                 const WeibullParams& reference_weibull, std::uint64_t seed);

inline constexpr GevParams kReferenceGev{60.0, 12.0, 0.05};
inline constexpr WeibullParams kReferenceWeibull{5.0, 9.5};
inline constexpr std::uint64_t kStandinSeed = 7;

/// Non-monotone concomitant: Weibull(5) scale peaking at 12 near the 10-year
/// return level of the stand-in margin, falling by about 1.1 at 100 years.
inline constexpr QuadraticWeibull kHumpWeibull{5.0, 2.567, 0.2128, -0.0012};

/// Named presets on the stand-in margins: "<family>-<strength>" for the nine
/// copulas, "gaussian-median-n2000", "independence" and "nonmonotone".
[[nodiscard]] std::vector<ScenarioSpec> preset_scenarios();
[[nodiscard]] ScenarioSpec preset_scenario(const std::string& name);

// --- CSV output -------------------------------------------------------------

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows);
void write_estimates_csv(std::ostream& out, const SimulationResult& result);
void write_truth_csv(std::ostream& out, const SimulationResult& result);
void write_quantile_bias_csv(std::ostream& out, std::span<const QuantileBiasRow> rows);
void write_bootstrap_csv(std::ostream& out, const BootstrapBands& bands, double tau);
void write_single_member_csv(std::ostream& out, const SingleMemberAssessment& a);
void write_table1_csv(std::ostream& out, const SingleMemberAssessment& a);

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = auto).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace condex
