#include <doctest.h>

#include <cmath>

#include "condex/json_io.hpp"

using namespace condex;

namespace {

PairData demo_pairs(std::size_t n) {
  ScenarioSpec s;
  s.n = n;
  s.dependence = CopulaSpec{CopulaFamily::gumbel, 0.6};
  return sample_scenario(s, 77);
}

}  // namespace

TEST_CASE("scenario round trip") {
  for (const auto& s : preset_scenarios()) {
    const Json j = to_json(s);
    const ScenarioSpec back = scenario_from_json(Json::parse(j.dump()));
    CHECK(to_json(back).dump() == j.dump());
    CHECK(back.marginal1 == s.marginal1);
    CHECK(back.dependence == s.dependence);
  }
}

TEST_CASE("scenario defaults and errors") {
  const Json minimal = Json::parse(R"({
    "marginal1": {"mu": 50, "sigma": 10, "xi": 0.1},
    "marginal2": {"shape": 4, "scale": 8},
    "dependence": {"type": "copula", "family": "clayton", "parameter": 0.5}
  })");
  const auto s = scenario_from_json(minimal);
  CHECK(s.replications == 100);
  CHECK(s.n == 100);
  CHECK(std::get<CopulaSpec>(s.dependence).family == CopulaFamily::clayton);

  Json bad = minimal;
  bad["dependence"]["parameter"] = -2.0;
  CHECK_THROWS((void)scenario_from_json(bad));
  bad = minimal;
  bad.erase("marginal2");
  CHECK_THROWS_AS((void)scenario_from_json(bad), std::invalid_argument);
  bad = minimal;
  bad["n"] = "many";
  CHECK_THROWS_AS((void)scenario_from_json(bad), std::invalid_argument);
  bad = minimal;
  bad["dependence"]["type"] = "vine";
  CHECK_THROWS_AS((void)scenario_from_json(bad), std::invalid_argument);
}

TEST_CASE("fitted models survive serialization") {
  const PairData d = demo_pairs(400);
  const CevFit cev = fit_cev(d);
  const CevFit cev_back = cev_fit_from_json(Json::parse(to_json(cev).dump()));
  for (double x : {90.0, 110.0, 140.0})
    for (double t : {0.5, 0.9}) CHECK(cev_conditional_quantile(cev_back, x, t) == cev_conditional_quantile(cev, x, t));

  McqrnnConfig cfg;
  cfg.epochs = 100;
  cfg.restarts = 1;
  const McqrnnModel net = train_mcqrnn(d, cfg);
  const McqrnnModel net_back = mcqrnn_model_from_json(Json::parse(to_json(net).dump()));
  for (double x : {40.0, 80.0, 200.0}) CHECK(mcqrnn_predict(net_back, x, 0.7) == mcqrnn_predict(net, x, 0.7));

  const GevFit gev = fit_gev_mle(d.x1);
  const GevFit gev_back = gev_fit_from_json(Json::parse(to_json(gev).dump()));
  CHECK(gev_back.params == gev.params);
  CHECK(gev_back.cov == gev.cov);
}

TEST_CASE("marginal digest is checked on load") {
  const PairData d = demo_pairs(200);
  const auto m = build_semiparam_marginal(d.x1, 0.6);
  Json j = to_json(m);
  CHECK(semiparam_from_json(j).cdf(70.0) == m.cdf(70.0));
  j["sample"][3] = j["sample"][3].get<double>() + 1e-9;
  CHECK_THROWS_AS((void)semiparam_from_json(j), std::invalid_argument);
}

TEST_CASE("malformed network dumps are rejected") {
  McqrnnConfig cfg;
  cfg.epochs = 20;
  cfg.restarts = 1;
  Json j = to_json(train_mcqrnn(demo_pairs(60), cfg));
  j["layers"][0]["biases"].push_back(0.0);
  CHECK_THROWS_AS((void)mcqrnn_model_from_json(j), std::invalid_argument);
}
