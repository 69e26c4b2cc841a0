#include "condex/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace condex {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw std::invalid_argument(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

// Non-finite values are written as null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double get_double(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

template <class T>
T get_integer(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) throw std::invalid_argument(std::string("field '") + key + "' must be an integer");
  return v.get<T>();
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if constexpr (std::is_same_v<T, double>) {
    return get_double(j, key);
  } else {
    return get_integer<T>(j, key);
  }
}

std::vector<double> get_doubles(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw std::invalid_argument(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (x.is_null()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (x.is_number()) {
      out.push_back(x.get<double>());
    } else {
      throw std::invalid_argument(std::string("field '") + key + "' must hold numbers");
    }
  }
  return out;
}

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<std::string> get_strings(const Json& j, const char* key) {
  if (!j.contains(key)) return {};
  std::vector<std::string> out;
  for (const auto& x : field(j, key)) out.push_back(x.get<std::string>());
  return out;
}

}  // namespace

Json to_json(const GevParams& p) { return {{"mu", p.mu}, {"sigma", p.sigma}, {"xi", p.xi}}; }
Json to_json(const GpParams& p) { return {{"u", p.u}, {"sigma_u", p.sigma_u}, {"xi", p.xi}}; }
Json to_json(const WeibullParams& p) { return {{"shape", p.shape}, {"scale", p.scale}}; }

Json to_json(const CopulaSpec& c) {
  return {{"type", "copula"}, {"family", std::string(to_string(c.family))}, {"parameter", c.parameter}};
}

Json to_json(const QuadraticWeibull& q) {
  return {{"type", "quadratic_weibull"}, {"shape", q.shape}, {"c0", q.c0}, {"c1", q.c1}, {"c2", q.c2}};
}

Json to_json(const CevConfig& c) {
  return {{"u_quantile_cond", c.u_quantile_cond},
          {"u_quantile_concom", c.u_quantile_concom},
          {"u1_quantile", c.u1_quantile},
          {"min_exceedances", c.min_exceedances}};
}

Json to_json(const McqrnnConfig& c) {
  return {{"hidden_layers", c.hidden_layers}, {"hidden_nodes", c.hidden_nodes},
          {"taus", c.taus},                   {"epochs", c.epochs},
          {"learning_rate", c.learning_rate}, {"final_lr_fraction", c.final_lr_fraction},
          {"smoothing", c.smoothing},         {"restarts", c.restarts},
          {"seed", c.seed}};
}

Json to_json(const ScenarioSpec& s) {
  Json dep = std::visit([](const auto& d) { return to_json(d); }, s.dependence);
  return {{"name", s.name},
          {"marginal1", to_json(s.marginal1)},
          {"marginal2", to_json(s.marginal2)},
          {"dependence", dep},
          {"n", s.n},
          {"replications", s.replications},
          {"taus", s.taus},
          {"return_periods", s.return_periods},
          {"fine_grid", s.fine_grid},
          {"seed", s.seed},
          {"threads", s.threads},
          {"cev", to_json(s.cev)},
          {"mcqrnn", to_json(s.mcqrnn)}};
}

Json to_json(const GevFit& f) {
  Json cov = Json::array();
  for (const auto& row : f.cov) cov.push_back(numbers({row.begin(), row.end()}));
  return {{"params", to_json(f.params)}, {"nll", f.nll}, {"n", f.n}, {"cov", cov}, {"warnings", f.warnings}};
}

Json to_json(const ReturnLevelCI& ci) {
  return {{"r", ci.r},
          {"estimate", ci.estimate},
          {"lower", number(ci.lower)},
          {"upper", number(ci.upper)},
          {"level", ci.level},
          {"lower_found", ci.lower_found},
          {"upper_found", ci.upper_found},
          {"warnings", ci.warnings}};
}

Json to_json(const SemiParamMarginal& m) {
  return {{"u", m.u()},
          {"gp", to_json(m.gp())},
          {"sample", m.sorted_sample()},
          {"sample_digest", m.sample_digest()}};
}

Json to_json(const CevFit& f) {
  return {{"alpha", f.alpha},
          {"beta", f.beta},
          {"mu_z", f.mu_z},
          {"sigma_z", f.sigma_z},
          {"nll", f.nll},
          {"residuals", f.residuals},
          {"u1_original", f.u1_original},
          {"u1_laplace", f.u1_laplace},
          {"marginal1", to_json(f.marginal1)},
          {"marginal2", to_json(f.marginal2)},
          {"config", to_json(f.config)},
          {"at_boundary", f.at_boundary},
          {"warnings", f.warnings}};
}

Json to_json(const McqrnnModel& m) {
  Json layers = Json::array();
  for (const auto& l : m.layers) {
    Json mask = Json::array();
    for (auto b : l.constrained) mask.push_back(static_cast<int>(b));
    layers.push_back({{"inputs", l.inputs},
                      {"outputs", l.outputs},
                      {"raw_weights", l.raw_weights},
                      {"constrained", mask},
                      {"biases", l.biases}});
  }
  return {{"config", to_json(m.config)},
          {"x_mean", m.x_mean},
          {"x_scale", m.x_scale},
          {"y_mean", m.y_mean},
          {"y_scale", m.y_scale},
          {"constant", m.constant},
          {"layers", layers},
          {"restart_losses", numbers(m.restart_losses)},
          {"loss", m.loss},
          {"warnings", m.warnings}};
}

GevParams gev_params_from_json(const Json& j) {
  return {get_double(j, "mu"), get_double(j, "sigma"), get_double(j, "xi")};
}

GpParams gp_params_from_json(const Json& j) {
  return {get_double(j, "u"), get_double(j, "sigma_u"), get_double(j, "xi")};
}

WeibullParams weibull_params_from_json(const Json& j) { return {get_double(j, "shape"), get_double(j, "scale")}; }

CopulaSpec copula_from_json(const Json& j) {
  CopulaSpec c{parse_copula_family(field(j, "family").get<std::string>()), get_double(j, "parameter")};
  c.validate();
  return c;
}

QuadraticWeibull quadratic_weibull_from_json(const Json& j) {
  QuadraticWeibull q{get_double(j, "shape"), get_double(j, "c0"), get_double(j, "c1"), get_double(j, "c2")};
  q.validate();
  return q;
}

CevConfig cev_config_from_json(const Json& j) {
  CevConfig c;
  c.u_quantile_cond = get_or(j, "u_quantile_cond", c.u_quantile_cond);
  c.u_quantile_concom = get_or(j, "u_quantile_concom", c.u_quantile_concom);
  c.u1_quantile = get_or(j, "u1_quantile", c.u1_quantile);
  c.min_exceedances = get_or(j, "min_exceedances", c.min_exceedances);
  c.validate();
  return c;
}

McqrnnConfig mcqrnn_config_from_json(const Json& j) {
  McqrnnConfig c;
  c.hidden_layers = get_or(j, "hidden_layers", c.hidden_layers);
  c.hidden_nodes = get_or(j, "hidden_nodes", c.hidden_nodes);
  if (j.contains("taus")) c.taus = get_doubles(j, "taus");
  c.epochs = get_or(j, "epochs", c.epochs);
  c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
  c.final_lr_fraction = get_or(j, "final_lr_fraction", c.final_lr_fraction);
  c.smoothing = get_or(j, "smoothing", c.smoothing);
  c.restarts = get_or(j, "restarts", c.restarts);
  c.seed = get_or(j, "seed", c.seed);
  c.validate();
  return c;
}

ScenarioSpec scenario_from_json(const Json& j) {
  ScenarioSpec s;
  if (j.contains("name")) s.name = field(j, "name").get<std::string>();
  s.marginal1 = gev_params_from_json(field(j, "marginal1"));
  s.marginal2 = weibull_params_from_json(field(j, "marginal2"));
  const Json& dep = field(j, "dependence");
  const std::string type = field(dep, "type").get<std::string>();
  if (type == "copula") {
    s.dependence = copula_from_json(dep);
  } else if (type == "quadratic_weibull") {
    s.dependence = quadratic_weibull_from_json(dep);
  } else {
    throw std::invalid_argument("unknown dependence type '" + type + "'");
  }
  s.n = get_or(j, "n", s.n);
  s.replications = get_or(j, "replications", s.replications);
  if (j.contains("taus")) s.taus = get_doubles(j, "taus");
  if (j.contains("return_periods")) s.return_periods = get_doubles(j, "return_periods");
  s.fine_grid = get_or(j, "fine_grid", s.fine_grid);
  s.seed = get_or(j, "seed", s.seed);
  s.threads = get_or(j, "threads", s.threads);
  if (j.contains("cev")) s.cev = cev_config_from_json(field(j, "cev"));
  if (j.contains("mcqrnn")) s.mcqrnn = mcqrnn_config_from_json(field(j, "mcqrnn"));
  s.validate();
  return s;
}

GevFit gev_fit_from_json(const Json& j) {
  GevFit f;
  f.params = gev_params_from_json(field(j, "params"));
  f.nll = get_double(j, "nll");
  f.n = get_integer<std::size_t>(j, "n");
  const Json& cov = field(j, "cov");
  if (!cov.is_array() || cov.size() != 3) throw std::invalid_argument("'cov' must be a 3x3 array");
  for (std::size_t r = 0; r < 3; ++r) {
    const Json& row = cov[r];
    if (!row.is_array() || row.size() != 3) throw std::invalid_argument("'cov' must be a 3x3 array");
    for (std::size_t c = 0; c < 3; ++c) {
      f.cov[r][c] = row[c].is_null() ? std::numeric_limits<double>::quiet_NaN() : row[c].get<double>();
    }
  }
  f.warnings = get_strings(j, "warnings");
  return f;
}

SemiParamMarginal semiparam_from_json(const Json& j) {
  SemiParamMarginal m(get_doubles(j, "sample"), get_double(j, "u"), gp_params_from_json(field(j, "gp")));
  const std::string stored = field(j, "sample_digest").get<std::string>();
  if (stored != m.sample_digest()) {
    throw std::invalid_argument("marginal sample digest mismatch: stored " + stored + ", computed " +
                                m.sample_digest());
  }
  return m;
}

CevFit cev_fit_from_json(const Json& j) {
  CevFit f;
  f.alpha = get_double(j, "alpha");
  f.beta = get_double(j, "beta");
  f.mu_z = get_double(j, "mu_z");
  f.sigma_z = get_double(j, "sigma_z");
  f.nll = get_double(j, "nll");
  f.residuals = get_doubles(j, "residuals");
  f.u1_original = get_double(j, "u1_original");
  f.u1_laplace = get_double(j, "u1_laplace");
  f.marginal1 = semiparam_from_json(field(j, "marginal1"));
  f.marginal2 = semiparam_from_json(field(j, "marginal2"));
  f.config = cev_config_from_json(field(j, "config"));
  f.at_boundary = field(j, "at_boundary").get<bool>();
  f.warnings = get_strings(j, "warnings");
  return f;
}

McqrnnModel mcqrnn_model_from_json(const Json& j) {
  McqrnnModel m;
  m.config = mcqrnn_config_from_json(field(j, "config"));
  m.x_mean = get_double(j, "x_mean");
  m.x_scale = get_double(j, "x_scale");
  m.y_mean = get_double(j, "y_mean");
  m.y_scale = get_double(j, "y_scale");
  m.constant = field(j, "constant").get<bool>();
  for (const auto& l : field(j, "layers")) {
    DenseLayer d;
    d.inputs = get_integer<int>(l, "inputs");
    d.outputs = get_integer<int>(l, "outputs");
    d.raw_weights = get_doubles(l, "raw_weights");
    for (const auto& b : field(l, "constrained")) d.constrained.push_back(static_cast<std::uint8_t>(b.get<int>() != 0));
    d.biases = get_doubles(l, "biases");
    const auto cells = static_cast<std::size_t>(d.inputs) * static_cast<std::size_t>(d.outputs);
    if (d.raw_weights.size() != cells || d.constrained.size() != cells ||
        d.biases.size() != static_cast<std::size_t>(d.outputs)) {
      throw std::invalid_argument("layer shape does not match its weight arrays");
    }
    m.layers.push_back(std::move(d));
  }
  m.restart_losses = get_doubles(j, "restart_losses");
  m.loss = get_double(j, "loss");
  m.warnings = get_strings(j, "warnings");
  return m;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace condex
