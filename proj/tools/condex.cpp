// condex: command-line front end for the conditional-extremes library.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "condex/extraction.hpp"
#include "condex/harness.hpp"
#include "condex/json_io.hpp"
#include "condex/text.hpp"

using namespace condex;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Emits to `path`, or to stdout when the path is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
  } else {
    auto out = open_out(path);
    write(out);
  }
}

std::vector<double> read_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file", 1);
  const auto header = split_csv(line);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw ParseError(path + ": no column '" + column + "'", 1);
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  for (std::size_t ln = 2; std::getline(in, line); ++ln) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw ParseError(path + ":" + std::to_string(ln) + ": wrong field count", ln);
    try {
      out.push_back(parse_double(cells[col]));
    } catch (const std::invalid_argument&) {
      throw ParseError(path + ":" + std::to_string(ln) + ": bad number '" + std::string(cells[col]) + "'", ln);
    }
  }
  return out;
}

std::vector<BlockMaxPair> read_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_block_maxima_csv(in, path);
}

PairData to_pairs(const std::vector<BlockMaxPair>& rows) {
  PairData d;
  for (const auto& r : rows) {
    d.x1.push_back(r.max_value);
    d.x2.push_back(r.concomitant);
  }
  return d;
}

std::vector<PairData> by_member(const std::vector<BlockMaxPair>& rows) {
  std::map<int, PairData> groups;
  for (const auto& r : rows) {
    groups[r.member].x1.push_back(r.max_value);
    groups[r.member].x2.push_back(r.concomitant);
  }
  std::vector<PairData> out;
  for (auto& [id, d] : groups) out.push_back(std::move(d));
  return out;
}

void write_curve_csv(std::ostream& out, const std::string& method, const ConditionalQuantileCurve& c) {
  out << "method,x1,tau,quantile\n";
  for (std::size_t i = 0; i < c.x1.size(); ++i)
    for (std::size_t t = 0; t < c.taus.size(); ++t)
      out << method << ',' << format_number(c.x1[i]) << ',' << format_number(c.taus[t]) << ','
          << format_number(c.at(i, t)) << '\n';
}

void write_failures(const fs::path& path, const SimulationResult& r) {
  auto out = open_out(path);
  out << "message\n";
  for (const auto& m : r.failure_messages) out << m << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional quantiles of a concomitant variable given block-maximum extremes"};
  app.require_subcommand(1);

  // fit-gev
  std::string gev_input, gev_column = "max", gev_out, gev_ci = "profile";
  std::vector<double> gev_periods{5, 20, 100};
  double gev_level = 0.95;
  auto* fit_gev = app.add_subcommand("fit-gev", "Fit a GEV by maximum likelihood and report return levels");
  fit_gev->add_option("input", gev_input, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  fit_gev->add_option("--column", gev_column, "Column holding the maxima")->capture_default_str();
  fit_gev->add_option("--return-periods", gev_periods, "Return periods in blocks")->delimiter(',')->capture_default_str();
  fit_gev->add_option("--ci", gev_ci, "Interval method")->check(CLI::IsMember({"profile", "delta", "none"}))->capture_default_str();
  fit_gev->add_option("--level", gev_level, "Confidence level")->check(CLI::Range(0.5, 0.999))->capture_default_str();
  fit_gev->add_option("-o,--out", gev_out, "JSON output (default stdout)");

  // extract-maxima
  std::string ex_input, ex_out, ex_season = "SON", ex_var = "precip", ex_calendar = "gregorian";
  DailySchema ex_schema;
  auto* extract = app.add_subcommand("extract-maxima", "Seasonal block maxima with concomitants from daily CSV");
  extract->add_option("input", ex_input, "Daily CSV")->required()->check(CLI::ExistingFile);
  extract->add_option("--season", ex_season, "DJF, MAM, JJA or SON")->capture_default_str();
  extract->add_option("--variable", ex_var, "Conditioning variable: precip or wind")->capture_default_str();
  extract->add_option("--calendar", ex_calendar, "gregorian or noleap")->capture_default_str();
  extract->add_option("--date-column", ex_schema.date)->capture_default_str();
  extract->add_option("--member-column", ex_schema.member)->capture_default_str();
  extract->add_option("--precip-column", ex_schema.precip)->capture_default_str();
  extract->add_option("--wind-column", ex_schema.wind)->capture_default_str();
  extract->add_option("-o,--out", ex_out, "Block-maximum CSV output (default stdout)");

  // fit-cev and fit-mcqrnn share their inputs
  std::string fit_input, fit_model_out, fit_curve_out;
  std::vector<double> fit_grid, fit_taus{0.5, 0.6, 0.7, 0.8, 0.9};
  CevConfig cev_cfg;
  McqrnnConfig net_cfg;
  auto* fit_cev_cmd = app.add_subcommand("fit-cev", "Fit the conditional extreme value model to block-maximum pairs");
  auto* fit_net_cmd = app.add_subcommand("fit-mcqrnn", "Train the monotone composite quantile network");
  for (auto* cmd : {fit_cev_cmd, fit_net_cmd}) {
    cmd->add_option("input", fit_input, "Block-maximum CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--grid", fit_grid, "x1 values for the curve output")->delimiter(',');
    cmd->add_option("--taus", fit_taus, "Quantile levels for the curve output")->delimiter(',')->capture_default_str();
    cmd->add_option("--model-out", fit_model_out, "JSON dump of the fitted model");
    cmd->add_option("--curve-out", fit_curve_out, "Long-format curve CSV (default stdout)");
  }
  fit_cev_cmd->add_option("--u1-quantile", cev_cfg.u1_quantile, "Dependence threshold quantile")->capture_default_str();
  fit_cev_cmd->add_option("--u-cond", cev_cfg.u_quantile_cond, "Marginal threshold of x1")->capture_default_str();
  fit_cev_cmd->add_option("--u-concom", cev_cfg.u_quantile_concom, "Marginal threshold of x2")->capture_default_str();
  fit_net_cmd->add_option("--hidden-layers", net_cfg.hidden_layers)->capture_default_str();
  fit_net_cmd->add_option("--hidden-nodes", net_cfg.hidden_nodes)->capture_default_str();
  fit_net_cmd->add_option("--epochs", net_cfg.epochs)->capture_default_str();
  fit_net_cmd->add_option("--restarts", net_cfg.restarts)->capture_default_str();
  fit_net_cmd->add_option("--seed", net_cfg.seed)->capture_default_str();

  // sim-study
  std::string sim_scenario, sim_out = "sim-out";
  int sim_reps = 0, sim_threads = -1;
  auto* sim = app.add_subcommand("sim-study", "Monte Carlo comparison of both estimators on a scenario");
  sim->add_option("--scenario", sim_scenario, "Scenario JSON file or preset name")->required();
  sim->add_option("-o,--out-dir", sim_out, "Directory for metrics, estimates and truth CSVs")->capture_default_str();
  sim->add_option("--replications", sim_reps, "Override the replication count");
  sim->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");

  // bootstrap
  std::string bs_input, bs_out, bs_method = "cev";
  std::vector<double> bs_grid;
  double bs_tau = 0.9;
  int bs_draws = 100;
  std::uint64_t bs_seed = 1;
  auto* boot = app.add_subcommand("bootstrap", "Ensemble bootstrap bands by resampling members");
  boot->add_option("input", bs_input, "Block-maximum CSV with member ids")->required()->check(CLI::ExistingFile);
  boot->add_option("--method", bs_method)->check(CLI::IsMember({"cev", "mcqrnn"}))->capture_default_str();
  boot->add_option("--grid", bs_grid, "x1 values")->delimiter(',')->required();
  boot->add_option("--tau", bs_tau)->capture_default_str();
  boot->add_option("--draws", bs_draws)->check(CLI::PositiveNumber)->capture_default_str();
  boot->add_option("--seed", bs_seed)->capture_default_str();
  boot->add_option("-o,--out", bs_out, "Band CSV (default stdout)");

  // single-member
  std::string sm_input, sm_out = "single-member-out";
  double sm_x1 = 0.0, sm_tau = 0.9;
  std::uint64_t sm_seed = 1;
  auto* single = app.add_subcommand("single-member", "Per-member estimates against the all-member fit");
  single->add_option("input", sm_input, "Block-maximum CSV with member ids")->required()->check(CLI::ExistingFile);
  single->add_option("--x1", sm_x1, "Conditioning value")->required();
  single->add_option("--tau", sm_tau)->capture_default_str();
  single->add_option("--seed", sm_seed)->capture_default_str();
  single->add_option("-o,--out-dir", sm_out)->capture_default_str();

  // quantile-bias
  WeibullParams qb_params{5.0, 9.5};
  std::vector<std::size_t> qb_ns{100, 50, 20};
  std::vector<double> qb_taus{0.9, 0.95, 0.99};
  int qb_reps = 5000;
  std::uint64_t qb_seed = 1;
  std::string qb_out;
  auto* qbias = app.add_subcommand("quantile-bias", "Bias of the type-7 sample quantile under a Weibull law");
  qbias->add_option("--shape", qb_params.shape)->capture_default_str();
  qbias->add_option("--scale", qb_params.scale)->capture_default_str();
  qbias->add_option("--ns", qb_ns)->delimiter(',')->capture_default_str();
  qbias->add_option("--taus", qb_taus)->delimiter(',')->capture_default_str();
  qbias->add_option("--reps", qb_reps)->check(CLI::Range(2, 10000000))->capture_default_str();
  qbias->add_option("--seed", qb_seed)->capture_default_str();
  qbias->add_option("-o,--out", qb_out, "CSV output (default stdout)");

  // synth-daily
  DailySynthConfig sd_cfg;
  std::string sd_out;
  auto* synth = app.add_subcommand("synth-daily", "Write a synthetic daily ensemble in the input CSV layout");
  synth->add_option("--members", sd_cfg.members)->capture_default_str();
  synth->add_option("--years", sd_cfg.years)->capture_default_str();
  synth->add_option("--start-year", sd_cfg.start_year)->capture_default_str();
  synth->add_option("--correlation", sd_cfg.correlation)->capture_default_str();
  synth->add_option("--seed", sd_cfg.seed)->capture_default_str();
  synth->add_option("-o,--out", sd_out, "CSV output (default stdout)");

  // synth-pairs
  int sp_members = 35;
  std::size_t sp_years = 75;
  std::string sp_family = "gumbel", sp_out;
  double sp_param = 0.5;
  std::uint64_t sp_seed = 1;
  auto* synth_pairs = app.add_subcommand("synth-pairs", "Write a synthetic block-maximum ensemble on the stand-in margins");
  synth_pairs->add_option("--members", sp_members)->capture_default_str();
  synth_pairs->add_option("--years", sp_years)->capture_default_str();
  synth_pairs->add_option("--family", sp_family)->capture_default_str();
  synth_pairs->add_option("--parameter", sp_param)->capture_default_str();
  synth_pairs->add_option("--seed", sp_seed)->capture_default_str();
  synth_pairs->add_option("-o,--out", sp_out, "Block-maximum CSV (default stdout)");

  // scenario-presets
  std::string pr_out = "scenarios";
  auto* presets = app.add_subcommand("scenario-presets", "Write the built-in scenarios as JSON files");
  presets->add_option("-o,--out-dir", pr_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_gev) {
      const auto data = read_column(gev_input, gev_column);
      const GevFit fit = fit_gev_mle(data);
      Json j = to_json(fit);
      Json levels = Json::array();
      for (double r : gev_periods) {
        if (gev_ci == "profile") {
          levels.push_back(to_json(profile_likelihood_ci(fit, data, r, gev_level)));
        } else if (gev_ci == "delta") {
          levels.push_back(to_json(delta_method_ci(fit, r, gev_level)));
        } else {
          levels.push_back({{"r", r}, {"estimate", return_level(fit, r)}});
        }
      }
      j["return_levels"] = levels;
      emit(gev_out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    } else if (*extract) {
      const auto records = load_daily_csv(ex_input, [&] {
        DailySchema s = ex_schema;
        s.calendar = parse_calendar(ex_calendar);
        return s;
      }());
      const auto ex = extract_block_maxima(records, parse_season(ex_season), parse_variable(ex_var),
                                           parse_calendar(ex_calendar));
      for (const auto& w : ex.warnings) std::cerr << "warning: " << w << '\n';
      emit(ex_out, [&](std::ostream& o) { write_block_maxima_csv(o, ex.pairs); });
    } else if (*fit_cev_cmd || *fit_net_cmd) {
      const PairData data = to_pairs(read_pairs_file(fit_input));
      for (double t : fit_taus)
        if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("taus must lie in (0, 1)");
      if (*fit_cev_cmd) {
        const CevFit fit = fit_cev(data, cev_cfg);
        for (const auto& w : fit.warnings) std::cerr << "warning: " << w << '\n';
        if (!fit_model_out.empty()) save_json(fit_model_out, to_json(fit));
        if (!fit_grid.empty()) emit(fit_curve_out, [&](std::ostream& o) { write_curve_csv(o, "cev", cev_curve(fit, fit_grid, fit_taus)); });
      } else {
        const McqrnnModel model = train_mcqrnn(data, net_cfg);
        for (const auto& w : model.warnings) std::cerr << "warning: " << w << '\n';
        if (!fit_model_out.empty()) save_json(fit_model_out, to_json(model));
        if (!fit_grid.empty())
          emit(fit_curve_out, [&](std::ostream& o) { write_curve_csv(o, "mcqrnn", predict_quantiles(model, fit_grid, fit_taus)); });
      }
      if (fit_grid.empty() && fit_model_out.empty()) std::cerr << "note: neither --grid nor --model-out given\n";
    } else if (*sim) {
      ScenarioSpec spec = fs::exists(sim_scenario) ? scenario_from_json(load_json(sim_scenario)) : preset_scenario(sim_scenario);
      if (sim_reps > 0) spec.replications = sim_reps;
      if (sim_threads >= 0) spec.threads = sim_threads;
      const auto result = run_simulation_study(spec);
      const fs::path dir(sim_out);
      auto metrics = open_out(dir / "metrics.csv");
      write_metrics_csv(metrics, result.rows);
      auto estimates = open_out(dir / "estimates.csv");
      write_estimates_csv(estimates, result);
      auto truth = open_out(dir / "truth.csv");
      write_truth_csv(truth, result);
      write_failures(dir / "failures.csv", result);
      save_json((dir / "scenario.json").string(), to_json(spec));
      std::cerr << spec.name << ": " << spec.replications << " replications, " << result.cev_failures
                << " cev and " << result.mcqrnn_failures << " mcqrnn failures\n";
    } else if (*boot) {
      const auto members = by_member(read_pairs_file(bs_input));
      const Method method = bs_method == "cev" ? Method::cev : Method::mcqrnn;
      const auto bands = ensemble_bootstrap(members, bs_draws, make_estimator(method), bs_grid, bs_tau, bs_seed);
      if (bands.failed_draws > 0) std::cerr << "warning: " << bands.failed_draws << " bootstrap draws failed\n";
      emit(bs_out, [&](std::ostream& o) { write_bootstrap_csv(o, bands, bs_tau); });
    } else if (*single) {
      const auto members = by_member(read_pairs_file(sm_input));
      const auto a = single_member_assessment(members, {}, {}, sm_x1, sm_tau, sm_seed);
      const fs::path dir(sm_out);
      auto per = open_out(dir / "members.csv");
      write_single_member_csv(per, a);
      auto table = open_out(dir / "table1.csv");
      write_table1_csv(table, a);
    } else if (*qbias) {
      const auto rows = run_quantile_bias_study(qb_params, qb_ns, qb_taus, qb_reps, qb_seed);
      emit(qb_out, [&](std::ostream& o) { write_quantile_bias_csv(o, rows); });
    } else if (*synth) {
      const auto recs = synthesize_daily(sd_cfg);
      emit(sd_out, [&](std::ostream& o) { write_daily_csv(o, recs); });
    } else if (*synth_pairs) {
      const auto margins = fit_standin_margins(kReferenceGev, kReferenceWeibull, kStandinSeed);
      const CopulaSpec cop{parse_copula_family(sp_family), sp_param};
      cop.validate();
      const auto members = synthetic_ensemble(sp_members, sp_years, margins.gev, margins.weibull, cop, sp_seed);
      std::vector<BlockMaxPair> rows;
      for (std::size_t m = 0; m < members.size(); ++m) {
        for (std::size_t y = 0; y < members[m].size(); ++y) {
          const int year = 1950 + static_cast<int>(y);
          rows.push_back({Season::son, year, static_cast<int>(m) + 1, members[m].x1[y], members[m].x2[y],
                          std::chrono::year_month_day{std::chrono::year{year}, std::chrono::October, std::chrono::day{15}}});
        }
      }
      emit(sp_out, [&](std::ostream& o) { write_block_maxima_csv(o, rows); });
    } else if (*presets) {
      fs::create_directories(pr_out);
      for (const auto& s : preset_scenarios()) save_json((fs::path(pr_out) / (s.name + ".json")).string(), to_json(s));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
