#include <doctest.h>

#include <nlohmann/json.hpp>

#include "mlz/scenario.hpp"

using namespace mlz;
using namespace mlz::harness;

namespace {

Scenario bowtie_scenario() {
  Scenario s;
  s.model.kind = models::ModelKind::BowTie;
  s.model.p = Eigen::VectorXd::Ones(3);
  s.model.r.resize(3);
  s.model.r << 1.0, 2.0, 3.0;
  s.tasks = {TaskKind::VerifyCommutant, TaskKind::Spectrum};
  s.spectrum.num_points = 9;
  return s;
}

}  // namespace

TEST_CASE("model specs round-trip through JSON") {
  for (const auto kind :
       {models::ModelKind::EqualSlope, models::ModelKind::BowTie,
        models::ModelKind::GeneralizedBowTie, models::ModelKind::Su2Spin,
        models::ModelKind::Oscillator, models::ModelKind::LinearChain,
        models::ModelKind::Su11Sector}) {
    models::ModelSpec spec;
    spec.kind = kind;
    spec.p.resize(2);
    spec.p << 1.0, 0.7;
    spec.a.resize(2);
    spec.a << -0.5, 1.5;
    spec.r.resize(2);
    spec.r << 1.0, -1.2;
    spec.b = 0.9;
    spec.epsilon = 1.4;
    spec.g = 0.8;
    spec.g_o = 0.4;
    spec.g_lc = 0.5;
    spec.g_tilde = 0.3;
    spec.j = 1.5;
    spec.k = 0.75;
    spec.cutoff = 12;
    spec.n_min = -6;
    spec.n_max = 6;
    const auto round = model_spec_from_json(model_spec_to_json(spec));
    CHECK(model_spec_to_json(round) == model_spec_to_json(spec));
    CHECK(round.dim() == spec.dim());
  }

  try {
    model_spec_from_json(Json::parse(R"({"kind": "nope"})"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::validation);
  }
}

TEST_CASE("pencil JSON round-trip") {
  const auto pencil = models::build_generalized_bowtie(
      Eigen::VectorXd(Eigen::VectorXd::Ones(2)), (Eigen::VectorXd(2) << 1.0, -1.0).finished(),
      2.0);
  const auto round = pencil_from_json(pencil_to_json(pencil));
  CHECK(round.degree() == pencil.degree());
  for (int q = 0; q <= pencil.degree(); ++q)
    CHECK((round.coeff(q) - pencil.coeff(q)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bow-tie scenario verifies and reports") {
  const auto report = run_scenario(bowtie_scenario());
  const Json& doc = report.doc();
  CHECK(doc["results"]["verify_commutant"]["ok"].get<bool>());
  CHECK(doc["results"]["verify_commutant"]["max_pairwise_commutator"].get<double>() <= 1e-10);
  CHECK(doc["results"]["verify_commutant"]["symmetry_dim"].get<int>() == 1);
  CHECK(doc["results"]["verify_commutant"]["span_rank"].get<int>() == 4);
  CHECK(doc["results"]["spectrum"]["max_root_residual"].get<double>() <= 1e-10);

  // determinism: identical scenario, byte-identical JSON
  const auto again = run_scenario(bowtie_scenario());
  CHECK(emit_json(report) == emit_json(again));
}

TEST_CASE("empty task lists are rejected") {
  Scenario s = bowtie_scenario();
  s.tasks.clear();
  try {
    run_scenario(s);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::validation);
  }
}

TEST_CASE("compare task guards closed-form coverage") {
  Scenario s = bowtie_scenario();
  s.tasks = {TaskKind::CompareClosedForm};
  try {
    run_scenario(s);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::validation);
  }
}

TEST_CASE("2x2 compare scenario hits the closed form") {
  Scenario s;
  s.model.kind = models::ModelKind::Su2Spin;
  s.model.g = 1.0;
  s.model.j = 0.5;
  s.tasks = {TaskKind::Propagate, TaskKind::CompareClosedForm};
  const auto report = run_scenario(s);
  CHECK(report.doc()["results"]["compare_closed_form"]["max_residual"].get<double>() <= 1e-3);
  CHECK(report.doc()["results"]["propagate"]["row_defect"].get<double>() <= 1e-6);
}

TEST_CASE("reports refuse non-finite numbers at construction") {
  Json doc;
  doc["value"] = std::nan("");
  try {
    ScenarioReport::create(std::move(doc));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::validation);
  }
}

TEST_CASE("csv emission of a 2x2 transition matrix") {
  Scenario s;
  s.model.kind = models::ModelKind::Su2Spin;
  s.model.g = 1.0;
  s.model.j = 0.5;
  s.tasks = {TaskKind::Propagate};
  s.propagation.horizon = 20.0;
  const auto tables = emit_csv(run_scenario(s));
  REQUIRE(tables.size() == 1);
  CHECK(tables[0].first == "propagate");
  const std::string& csv = tables[0].second;
  // header + 2 data rows + row/col defect footers
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("row_defect") != std::string::npos);
  CHECK(csv.find("col_defect") != std::string::npos);
  CHECK(csv.find(',') != std::string::npos);
}

TEST_CASE("commuting family serializes with construction tag and dense members") {
  Eigen::VectorXd p(3), r(3);
  p << 1.0, 1.0, 1.0;
  r << 1.0, 2.0, 3.0;
  const auto family = commutant::bowtie_quadratic_family(p, r);
  const Json j = family_to_json(family);
  CHECK(j["construction"] == "bowtie_quadratic");
  CHECK(j["labels"].size() == 4);
  CHECK(j["members"].size() == 4);
  // members round-trip through the pencil codec
  for (size_t k = 0; k < 4; ++k) {
    const auto round = pencil_from_json(j["members"][k]);
    CHECK(round.degree() == 2);
    CHECK((round.coeff(2) - family.members[k].coeff(2)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("scenario json round-trip") {
  const std::string text = R"({
    "schema_version": 1,
    "seed": 42,
    "model": {"kind": "su11_sector", "g_tilde": 0.3, "k": 0.25, "cutoff": 20},
    "tasks": ["propagate", "compare_closed_form", "convergence_study"],
    "propagation": {"horizon": 60.0, "rel_tol": 1e-9, "abs_tol": 1e-11},
    "convergence": {"cutoffs": [8, 12, 16], "probes": [[0, 0]]},
    "output": {"path": "out.json", "format": "json"},
    "compare_states": 3
  })";
  const Scenario s = scenario_from_json(Json::parse(text));
  CHECK(s.seed == 42);
  CHECK(s.model.kind == models::ModelKind::Su11Sector);
  CHECK(s.tasks.size() == 3);
  CHECK(s.propagation.horizon == 60.0);
  CHECK(s.convergence.cutoffs == std::vector<int>{8, 12, 16});
  CHECK(s.compare_states == 3);
  const Scenario round = scenario_from_json(scenario_to_json(s));
  CHECK(scenario_to_json(round) == scenario_to_json(s));

  try {
    scenario_from_json(Json::parse(R"({"schema_version": 2, "model": {"kind": "bowtie",
      "p": [1], "r": [1]}, "tasks": ["spectrum"]})"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::validation);
  }
}
