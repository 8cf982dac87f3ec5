#include "mlz/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "mlz/closedform.hpp"
#include "mlz/spectra.hpp"

namespace mlz::harness {

namespace {

using models::ModelKind;
using models::ModelSpec;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json vec_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vec_from_json(const Json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index l = 0; l < m.cols(); ++l) row.push_back(m(i, l));
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_finite(const Json& j, const std::string& where) {
  if (j.is_number_float())
    require(std::isfinite(j.get<double>()), errc::validation,
            "report contains a non-finite number at " + where);
  else if (j.is_object())
    for (const auto& [key, value] : j.items()) check_finite(value, where + "/" + key);
  else if (j.is_array())
    for (size_t i = 0; i < j.size(); ++i) check_finite(j[i], where + "/" + std::to_string(i));
}

std::string verdict_name(commutant::Verdict v) {
  return v == commutant::Verdict::Trivial ? "Trivial" : "Nontrivial";
}

// physical state labels per model, index -> label
std::vector<std::string> state_labels(const ModelSpec& spec) {
  std::vector<std::string> labels;
  const Eigen::Index n = spec.dim();
  for (Eigen::Index i = 0; i < n; ++i) {
    switch (spec.kind) {
      case ModelKind::Su2Spin: {
        const double m = spec.j - static_cast<double>(i);
        labels.push_back("m=" + fmt(m));
        break;
      }
      case ModelKind::Oscillator:
        labels.push_back("n=" + std::to_string(i));
        break;
      case ModelKind::LinearChain:
        labels.push_back("n=" + std::to_string(spec.n_min + static_cast<int>(i)));
        break;
      case ModelKind::Su11Sector:
        labels.push_back("mu=" + fmt(spec.k + static_cast<double>(i)));
        break;
      default:
        labels.push_back("state" + std::to_string(i + 1));
    }
  }
  return labels;
}

Json triviality_to_json(const std::string& label, const commutant::TrivialityReport& report) {
  Json j;
  j["label"] = label;
  j["residual"] = report.residual;
  j["verdict"] = verdict_name(report.verdict);
  return j;
}

double pencil_coeff_scale(const MatrixPencil& p) {
  double scale = 1.0;
  for (const auto& c : p.coeffs()) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  return scale;
}

// max entrywise coefficient difference of two pencils (padded to equal degree)
double pencil_coeff_error(const MatrixPencil& a, const MatrixPencil& b) {
  double err = 0.0;
  const int deg = std::max(a.degree(), b.degree());
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(a.dim(), a.dim());
  for (int q = 0; q <= deg; ++q) {
    const Eigen::MatrixXcd& ca = q <= a.degree() ? a.coeff(q) : zero;
    const Eigen::MatrixXcd& cb = q <= b.degree() ? b.coeff(q) : zero;
    err = std::max(err, (ca - cb).cwiseAbs().maxCoeff());
  }
  return err;
}

Json run_verify(const Scenario& scenario) {
  const ModelSpec& spec = scenario.model;
  const std::vector<double> u_samples = verification_u_samples(scenario.seed);
  Json out;

  switch (spec.kind) {
    case ModelKind::EqualSlope: {
      const auto embedding = commutant::embed_equal_slope(spec.p, spec.a);
      out["construction"] = commutant::to_string(commutant::Construction::MaximalLinear);
      out["roots"] = embedding.roots;
      out["reconstruction_errors"] = embedding.reconstruction_errors;
      const auto family = commutant::maximal_linear_family(embedding.params_per_root.front());
      out["params"] = {{"gamma", vec_to_json(embedding.params_per_root.front().gamma)},
                       {"xi", vec_to_json(embedding.params_per_root.front().xi)},
                       {"x", embedding.params_per_root.front().x}};
      out["max_pairwise_commutator"] = commutant::max_pairwise_commutator(family, u_samples);
      const MatrixPencil h = models::build_equal_slope(spec.p, spec.a, 1.0);
      Json trivialities = Json::array();
      trivialities.push_back(
          triviality_to_json("H2", commutant::triviality_residual(family.members[1], h)));
      out["triviality"] = std::move(trivialities);
      out["symmetry_dim"] = commutant::shared_symmetry_dim({h});
      out["ok"] = out["max_pairwise_commutator"].get<double>() <= 1e-8 &&
                  out["symmetry_dim"].get<int>() == 1;
      break;
    }
    case ModelKind::BowTie: {
      const MatrixPencil h = models::build_bowtie(spec.p, spec.r);
      const auto family = commutant::bowtie_quadratic_family(spec.p, spec.r);
      out["construction"] = commutant::to_string(family.construction);
      double worst = commutant::max_pairwise_commutator(family, u_samples);
      for (const auto& member : family.members)
        worst = std::max(worst, commutant::commutator_norm(member, h, u_samples));
      out["max_pairwise_commutator"] = worst;

      // the three linear-combination identities of the quadratic family
      const Eigen::Index n = h.dim();
      const Eigen::MatrixXcd& t = h.coeff(0);
      const Eigen::MatrixXcd& v = h.coeff(1);
      MatrixPencil sum_ik = family.members[1];
      for (size_t k = 2; k < family.members.size(); ++k)
        sum_ik = pencil_sum(sum_ik, family.members[k]);
      MatrixPencil sum_rk = pencil_scale(family.members[1], spec.r[0]);
      MatrixPencil sum_inv = pencil_sum(family.members[0],
                                        pencil_scale(family.members[1], 1.0 / spec.r[0]));
      for (size_t k = 2; k < family.members.size(); ++k) {
        sum_rk = pencil_sum(sum_rk, pencil_scale(family.members[k], spec.r[k - 1]));
        sum_inv = pencil_sum(sum_inv, pencil_scale(family.members[k], 1.0 / spec.r[k - 1]));
      }
      const MatrixPencil uh({Eigen::MatrixXcd::Zero(n, n), t, v});
      const MatrixPencil h2({t * t - spec.p.squaredNorm() * Eigen::MatrixXcd::Identity(n, n),
                             t * v + v * t, v * v});
      const MatrixPencil u2({Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n),
                             Eigen::MatrixXcd::Identity(n, n)});
      const double scale = pencil_coeff_scale(h2);
      out["identity_residuals"] = {pencil_coeff_error(sum_ik, uh) / scale,
                                   pencil_coeff_error(sum_rk, h2) / scale,
                                   pencil_coeff_error(sum_inv, u2) / scale};

      Json trivialities = Json::array();
      bool verdicts_ok = true;
      for (size_t k = 0; k < family.members.size(); ++k) {
        const auto report = commutant::triviality_residual(family.members[k], h);
        const bool expect_trivial = n == 3;
        verdicts_ok = verdicts_ok &&
                      (report.verdict == (expect_trivial ? commutant::Verdict::Trivial
                                                         : commutant::Verdict::Nontrivial));
        trivialities.push_back(triviality_to_json(family.labels[k], report));
      }
      out["triviality"] = std::move(trivialities);
      out["symmetry_dim"] = commutant::shared_symmetry_dim({h});

      std::vector<MatrixPencil> span = family.members;
      span.push_back(uh);
      span.push_back(h2);
      span.push_back(u2);
      out["span_rank"] = commutant::pencil_span_rank(span);

      double ident_max = 0.0;
      for (const auto& r : out["identity_residuals"]) ident_max = std::max(ident_max, r.get<double>());
      out["ok"] = worst <= 1e-8 && ident_max <= 1e-10 && verdicts_ok &&
                  out["symmetry_dim"].get<int>() == 1 &&
                  out["span_rank"].get<int>() == static_cast<int>(n);
      break;
    }
    case ModelKind::GeneralizedBowTie: {
      const MatrixPencil h = models::build_generalized_bowtie(spec.p, spec.r, spec.epsilon);
      const MatrixPencil partner = commutant::gbt_linear_partner(spec.p, spec.r, spec.epsilon);
      out["construction"] = commutant::to_string(commutant::Construction::GbtMinimal);
      out["max_pairwise_commutator"] = commutant::commutator_norm(partner, h, u_samples);
      Json trivialities = Json::array();
      const auto report = commutant::triviality_residual(partner, h);
      trivialities.push_back(triviality_to_json("I", report));
      out["triviality"] = std::move(trivialities);
      out["symmetry_dim"] = commutant::shared_symmetry_dim({h});
      out["linear_nullspace_dim"] =
          static_cast<int>(commutant::commuting_partner_basis(h, 1).size());
      out["ok"] = out["max_pairwise_commutator"].get<double>() <= 1e-8 &&
                  report.verdict == commutant::Verdict::Nontrivial &&
                  out["symmetry_dim"].get<int>() == 1 &&
                  out["linear_nullspace_dim"].get<int>() == 4;
      break;
    }
    default: {
      const MatrixPencil h = models::build_pencil(spec);
      out["construction"] = "descendant";
      if (h.dim() <= 12) {
        out["symmetry_dim"] = commutant::shared_symmetry_dim({h});
        const int dim = static_cast<int>(commutant::commuting_partner_basis(h, 1).size());
        out["linear_nullspace_dim"] = dim;
        // trivially integrable: only (a + b u) Id + c H(u)
        out["ok"] = dim == 3 && out["symmetry_dim"].get<int>() == 1;
      } else {
        out["skipped"] = "dimension too large for dense nullspace search";
        out["ok"] = true;
      }
      break;
    }
  }
  return out;
}

Json run_spectrum(const Scenario& scenario) {
  const ModelSpec& spec = scenario.model;
  const MatrixPencil pencil = models::build_pencil(spec);
  const auto& cfg = scenario.spectrum;
  require(cfg.num_points >= 1 && cfg.u_max >= cfg.u_min, errc::validation,
          "spectrum: bad u grid");

  std::optional<spectra::SecularSpec> secular;
  if (spec.kind == ModelKind::BowTie)
    secular = spectra::secular_from_bowtie(spec.p, spec.r);
  else if (spec.kind == ModelKind::GeneralizedBowTie)
    secular = spectra::secular_from_gbt(spec.p, spec.r, spec.epsilon);

  Json out;
  Json us = Json::array();
  Json roots = Json::array();
  double worst = 0.0;
  for (int s = 0; s < cfg.num_points; ++s) {
    const double u = cfg.num_points == 1
                         ? cfg.u_min
                         : cfg.u_min + (cfg.u_max - cfg.u_min) * s / (cfg.num_points - 1.0);
    us.push_back(u);
    const Eigen::VectorXd dense = hermitian_eigenvalues(pencil(u));
    Json row = Json::array();
    if (secular && u != 0.0) {
      const auto rts = spectra::char_roots(*secular, u);
      const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
      for (size_t i = 0; i < rts.size(); ++i) {
        row.push_back(rts[i]);
        worst = std::max(worst, std::abs(rts[i] - dense[static_cast<Eigen::Index>(i)]) / scale);
      }
    } else {
      for (Eigen::Index i = 0; i < dense.size(); ++i) row.push_back(dense[i]);
    }
    roots.push_back(std::move(row));
  }
  out["u"] = std::move(us);
  out["roots"] = std::move(roots);
  if (secular) out["max_root_residual"] = worst;
  out["ok"] = !secular || worst <= 1e-8;
  return out;
}

Json run_propagate(const Scenario& scenario) {
  const MatrixPencil pencil = models::build_pencil(scenario.model);
  Json out;
  out["horizon"] = scenario.propagation.horizon;
  if (scenario.extrapolate) {
    std::vector<double> horizons = scenario.horizons;
    if (horizons.empty())
      horizons = {scenario.propagation.horizon * 0.25, scenario.propagation.horizon * 0.5,
                  scenario.propagation.horizon};
    const auto result = propagator::horizon_extrapolation(pencil, scenario.propagation, horizons);
    out["horizons"] = horizons;
    out["matrix"] = matrix_to_json(result.extrapolated.p);
    out["row_defect"] = result.extrapolated.row_defect;
    out["col_defect"] = result.extrapolated.col_defect;
    out["tail_estimate"] = result.tail_estimate;
    out["ok"] = result.extrapolated.row_defect <= 1e-5 && result.extrapolated.col_defect <= 1e-5;
  } else {
    const auto tm = propagator::transition_matrix(pencil, scenario.propagation);
    out["matrix"] = matrix_to_json(tm.p);
    out["row_defect"] = tm.row_defect;
    out["col_defect"] = tm.col_defect;
    out["ok"] = tm.row_defect <= 1e-5 && tm.col_defect <= 1e-5;
  }
  return out;
}

Json run_compare(const Scenario& scenario) {
  const ModelSpec& spec = scenario.model;
  const MatrixPencil pencil = models::build_pencil(scenario.model);
  const Eigen::Index n = pencil.dim();
  const std::vector<std::string> labels = state_labels(spec);

  // initial-state indices and closed-form values per model
  std::vector<Eigen::Index> initial;
  std::vector<Eigen::Index> finals;
  switch (spec.kind) {
    case ModelKind::Su2Spin:
      for (Eigen::Index i = 0; i < n; ++i) initial.push_back(i);
      finals = initial;
      break;
    case ModelKind::Oscillator:
    case ModelKind::Su11Sector: {
      const Eigen::Index count = std::min<Eigen::Index>(scenario.compare_states, n);
      for (Eigen::Index i = 0; i < count; ++i) initial.push_back(i);
      finals = initial;
      break;
    }
    case ModelKind::LinearChain: {
      const Eigen::Index center = (n - 1) / 2;
      initial.push_back(center);
      const Eigen::Index shift = std::min<Eigen::Index>(scenario.compare_states - 1, center);
      for (Eigen::Index d = -shift; d <= shift; ++d) finals.push_back(center + d);
      break;
    }
    default:
      fail(errc::validation, "compare: no closed-form coverage for model kind " +
                                 models::to_string(spec.kind));
  }

  auto closed_value = [&](Eigen::Index i, Eigen::Index l) {
    switch (spec.kind) {
      case ModelKind::Su2Spin:
        return closedform::su2_transition(spec.j, spec.j - static_cast<double>(i),
                                          spec.j - static_cast<double>(l), spec.g);
      case ModelKind::Oscillator:
        return closedform::oscillator_transition(static_cast<int>(i), static_cast<int>(l),
                                                 spec.g_o);
      case ModelKind::LinearChain:
        return closedform::chain_transition(spec.n_min + static_cast<int>(i),
                                            spec.n_min + static_cast<int>(l), spec.g_lc);
      case ModelKind::Su11Sector:
        return closedform::su11_transition(spec.k, spec.k + static_cast<double>(i),
                                           spec.k + static_cast<double>(l), spec.g_tilde);
      default:
        fail(errc::validation, "compare: unreachable");
    }
  };

  const Eigen::MatrixXd rows = propagator::propagate_rows(pencil, scenario.propagation, initial);
  Json entries = Json::array();
  double max_residual = 0.0;
  for (size_t ridx = 0; ridx < initial.size(); ++ridx)
    for (const Eigen::Index l : finals) {
      const double numeric = rows(static_cast<Eigen::Index>(ridx), l);
      const double closed = closed_value(initial[ridx], l);
      const double residual = std::abs(numeric - closed);
      max_residual = std::max(max_residual, residual);
      Json e;
      e["from"] = labels[static_cast<size_t>(initial[ridx])];
      e["to"] = labels[static_cast<size_t>(l)];
      e["numeric"] = numeric;
      e["closed_form"] = closed;
      e["residual"] = residual;
      entries.push_back(std::move(e));
    }

  Json out;
  out["entries"] = std::move(entries);
  out["max_residual"] = max_residual;
  if (spec.kind == ModelKind::Su2Spin) {
    double defect = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double rsum = 0.0, csum = 0.0;
      for (Eigen::Index l = 0; l < n; ++l) {
        rsum += closed_value(i, l);
        csum += closed_value(l, i);
      }
      defect = std::max({defect, std::abs(rsum - 1.0), std::abs(csum - 1.0)});
    }
    out["closed_form_stochasticity_defect"] = defect;
  }
  out["ok"] = max_residual <= 1e-2;
  return out;
}

Json run_convergence(const Scenario& scenario) {
  const ModelSpec& spec = scenario.model;
  std::vector<int> cutoffs = scenario.convergence.cutoffs;
  if (cutoffs.empty()) {
    switch (spec.kind) {
      case ModelKind::Oscillator: cutoffs = {20, 40, 60}; break;
      case ModelKind::Su11Sector: cutoffs = {40, 60, 80}; break;
      case ModelKind::LinearChain: cutoffs = {10, 20, 30}; break;
      default: fail(errc::validation, "convergence study applies to truncated models only");
    }
  }
  std::vector<std::pair<int, int>> probes = scenario.convergence.probes;
  if (probes.empty()) {
    const int center =
        spec.kind == ModelKind::LinearChain ? (spec.n_min + spec.n_max) / 2 : 0;
    probes = {{center, center}};
  }
  const auto table = propagator::cutoff_convergence(spec, cutoffs, probes, scenario.propagation);

  Json out;
  out["cutoffs"] = table.cutoffs;
  Json probe_json = Json::array();
  for (const auto& [from, to] : table.probes) probe_json.push_back({from, to});
  out["probes"] = std::move(probe_json);
  Json values = Json::array();
  for (const auto& row : table.values) values.push_back(row);
  out["values"] = std::move(values);
  out["diffs"] = table.diffs;
  out["converged"] = table.converged;
  out["ok"] = table.converged;
  return out;
}

}  // namespace

std::string to_string(TaskKind task) {
  switch (task) {
    case TaskKind::VerifyCommutant: return "verify_commutant";
    case TaskKind::Spectrum: return "spectrum";
    case TaskKind::Propagate: return "propagate";
    case TaskKind::CompareClosedForm: return "compare_closed_form";
    case TaskKind::ConvergenceStudy: return "convergence_study";
  }
  fail(errc::validation, "unknown task");
}

TaskKind task_from_string(const std::string& name) {
  if (name == "verify_commutant") return TaskKind::VerifyCommutant;
  if (name == "spectrum") return TaskKind::Spectrum;
  if (name == "propagate") return TaskKind::Propagate;
  if (name == "compare_closed_form") return TaskKind::CompareClosedForm;
  if (name == "convergence_study") return TaskKind::ConvergenceStudy;
  fail(errc::validation, "unknown task '" + name + "'");
}

void Scenario::validate() const {
  require(!tasks.empty(), errc::validation, "scenario: task list must be non-empty");
  propagation.validate();
  models::build_pencil(model);  // full model validation
  const bool has_closed_form =
      model.kind == ModelKind::Su2Spin || model.kind == ModelKind::Oscillator ||
      model.kind == ModelKind::LinearChain || model.kind == ModelKind::Su11Sector;
  for (const TaskKind task : tasks) {
    if (task == TaskKind::CompareClosedForm)
      require(has_closed_form, errc::validation,
              "scenario: CompareClosedForm needs a model with closed-form coverage");
  }
  require(compare_states >= 1, errc::validation, "scenario: compare_states must be >= 1");
}

ScenarioReport::ScenarioReport(Json doc) : doc_(std::make_shared<Json>(std::move(doc))) {}

ScenarioReport ScenarioReport::create(Json doc) {
  check_finite(doc, "");
  return ScenarioReport(std::move(doc));
}

const Json& ScenarioReport::doc() const { return *doc_; }

ScenarioReport run_scenario(const Scenario& scenario) {
  scenario.validate();
  Json doc;
  doc["schema_version"] = 1;
  doc["scenario"] = scenario_to_json(scenario);
  Json results;
  Json timings;
  for (const TaskKind task : scenario.tasks) {
    const auto start = std::chrono::steady_clock::now();
    Json result;
    try {
      switch (task) {
        case TaskKind::VerifyCommutant: result = run_verify(scenario); break;
        case TaskKind::Spectrum: result = run_spectrum(scenario); break;
        case TaskKind::Propagate: result = run_propagate(scenario); break;
        case TaskKind::CompareClosedForm: result = run_compare(scenario); break;
        case TaskKind::ConvergenceStudy: result = run_convergence(scenario); break;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "task " + to_string(task) + ": " + e.what());
    }
    results[to_string(task)] = std::move(result);
    timings[to_string(task)] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
  }
  doc["results"] = std::move(results);
  Json metadata;
  metadata["seed"] = scenario.seed;
  metadata["model"] = model_spec_to_json(scenario.model);
  if (scenario.include_timings) metadata["timings_ms"] = std::move(timings);
  doc["metadata"] = std::move(metadata);
  return ScenarioReport::create(std::move(doc));
}

std::string emit_json(const ScenarioReport& report) { return report.doc().dump(2) + "\n"; }

namespace {

void csv_row(std::string& out, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
}

std::string csv_number(const Json& j) {
  if (j.is_number_float()) return fmt(j.get<double>());
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number_unsigned()) return std::to_string(j.get<unsigned long long>());
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  return j.is_string() ? j.get<std::string>() : j.dump();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> emit_csv(const ScenarioReport& report) {
  const Json& doc = report.doc();
  std::vector<std::pair<std::string, std::string>> tables;
  if (!doc.contains("results")) return tables;
  const Json& results = doc["results"];
  const models::ModelSpec spec = model_spec_from_json(doc["metadata"]["model"]);
  const std::vector<std::string> labels = state_labels(spec);

  for (const auto& [task, result] : results.items()) {
    std::string csv;
    if (task == "spectrum") {
      std::vector<std::string> header{"u"};
      const size_t n = result["roots"].empty() ? 0 : result["roots"][0].size();
      for (size_t i = 1; i <= n; ++i) header.push_back("root_" + std::to_string(i));
      csv_row(csv, header);
      for (size_t s = 0; s < result["u"].size(); ++s) {
        std::vector<std::string> row{csv_number(result["u"][s])};
        for (const auto& root : result["roots"][s]) row.push_back(csv_number(root));
        csv_row(csv, row);
      }
    } else if (task == "propagate") {
      std::vector<std::string> header{"from\\to"};
      for (const auto& l : labels) header.push_back(l);
      csv_row(csv, header);
      const Json& matrix = result["matrix"];
      for (size_t i = 0; i < matrix.size(); ++i) {
        std::vector<std::string> row{labels[i]};
        for (const auto& value : matrix[i]) row.push_back(csv_number(value));
        csv_row(csv, row);
      }
      csv_row(csv, {"row_defect", csv_number(result["row_defect"])});
      csv_row(csv, {"col_defect", csv_number(result["col_defect"])});
      if (result.contains("tail_estimate"))
        csv_row(csv, {"tail_estimate", csv_number(result["tail_estimate"])});
    } else if (task == "compare_closed_form") {
      csv_row(csv, {"from", "to", "numeric", "closed_form", "residual"});
      for (const auto& e : result["entries"])
        csv_row(csv, {e["from"].get<std::string>(), e["to"].get<std::string>(),
                      csv_number(e["numeric"]), csv_number(e["closed_form"]),
                      csv_number(e["residual"])});
    } else if (task == "convergence_study") {
      csv_row(csv, {"cutoff", "from", "to", "value"});
      for (size_t c = 0; c < result["cutoffs"].size(); ++c)
        for (size_t q = 0; q < result["probes"].size(); ++q)
          csv_row(csv, {csv_number(result["cutoffs"][c]),
                        csv_number(result["probes"][q][0]),
                        csv_number(result["probes"][q][1]),
                        csv_number(result["values"][c][q])});
      csv_row(csv, {"converged", result["converged"].get<bool>() ? "true" : "false"});
    } else {  // verify_commutant and any scalar-style task: flat key/value
      csv_row(csv, {"key", "value"});
      for (const auto& [key, value] : result.items()) {
        if (key == "triviality") {
          for (const auto& t : value)
            csv_row(csv, {"triviality_" + t["label"].get<std::string>(),
                          csv_number(t["residual"]) + ";" + t["verdict"].get<std::string>()});
        } else if (value.is_array()) {
          std::string joined;
          for (const auto& item : value) {
            if (!joined.empty()) joined += ';';
            joined += csv_number(item);
          }
          csv_row(csv, {key, joined});
        } else if (!value.is_object()) {
          csv_row(csv, {key, csv_number(value)});
        }
      }
    }
    tables.emplace_back(task, std::move(csv));
  }
  return tables;
}

void write_report(const ScenarioReport& report, const OutputConfig& output) {
  if (output.format == Format::Json) {
    const std::string text = emit_json(report);
    if (output.path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream file(output.path, std::ios::binary);
    require(file.good(), errc::io, "cannot open output file " + output.path);
    file << text;
    require(file.good(), errc::io, "failed writing " + output.path);
    return;
  }
  const auto tables = emit_csv(report);
  std::string stem = output.path;
  if (const auto dot = stem.rfind(".csv"); dot != std::string::npos && dot == stem.size() - 4)
    stem = stem.substr(0, dot);
  for (const auto& [task, csv] : tables) {
    if (output.path.empty()) {
      std::cout << "# " << task << "\n" << csv;
      continue;
    }
    const std::string path = stem + "_" + task + ".csv";
    std::ofstream file(path, std::ios::binary);
    require(file.good(), errc::io, "cannot open output file " + path);
    file << csv;
    require(file.good(), errc::io, "failed writing " + path);
  }
}

Json model_spec_to_json(const ModelSpec& spec) {
  Json j;
  j["kind"] = models::to_string(spec.kind);
  switch (spec.kind) {
    case ModelKind::EqualSlope:
      j["p"] = vec_to_json(spec.p);
      j["a"] = vec_to_json(spec.a);
      j["b"] = spec.b;
      break;
    case ModelKind::BowTie:
      j["p"] = vec_to_json(spec.p);
      j["r"] = vec_to_json(spec.r);
      break;
    case ModelKind::GeneralizedBowTie:
      j["p"] = vec_to_json(spec.p);
      j["r"] = vec_to_json(spec.r);
      j["epsilon"] = spec.epsilon;
      break;
    case ModelKind::Su2Spin:
      j["g"] = spec.g;
      j["j"] = spec.j;
      break;
    case ModelKind::Oscillator:
      j["g_o"] = spec.g_o;
      j["cutoff"] = spec.cutoff;
      break;
    case ModelKind::LinearChain:
      j["g_lc"] = spec.g_lc;
      j["n_min"] = spec.n_min;
      j["n_max"] = spec.n_max;
      break;
    case ModelKind::Su11Sector:
      j["g_tilde"] = spec.g_tilde;
      j["k"] = spec.k;
      j["cutoff"] = spec.cutoff;
      break;
  }
  return j;
}

ModelSpec model_spec_from_json(const Json& j) {
  try {
    ModelSpec spec;
    spec.kind = models::model_kind_from_string(j.at("kind").get<std::string>());
    switch (spec.kind) {
      case ModelKind::EqualSlope:
        spec.p = vec_from_json(j.at("p"));
        spec.a = vec_from_json(j.at("a"));
        spec.b = j.at("b").get<double>();
        break;
      case ModelKind::BowTie:
        spec.p = vec_from_json(j.at("p"));
        spec.r = vec_from_json(j.at("r"));
        break;
      case ModelKind::GeneralizedBowTie:
        spec.p = vec_from_json(j.at("p"));
        spec.r = vec_from_json(j.at("r"));
        spec.epsilon = j.at("epsilon").get<double>();
        break;
      case ModelKind::Su2Spin:
        spec.g = j.at("g").get<double>();
        spec.j = j.at("j").get<double>();
        break;
      case ModelKind::Oscillator:
        spec.g_o = j.at("g_o").get<double>();
        spec.cutoff = j.at("cutoff").get<int>();
        break;
      case ModelKind::LinearChain:
        spec.g_lc = j.at("g_lc").get<double>();
        spec.n_min = j.at("n_min").get<int>();
        spec.n_max = j.at("n_max").get<int>();
        break;
      case ModelKind::Su11Sector:
        spec.g_tilde = j.at("g_tilde").get<double>();
        spec.k = j.at("k").get<double>();
        spec.cutoff = j.at("cutoff").get<int>();
        break;
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::validation, std::string("model spec: ") + e.what());
  }
}

Json pencil_to_json(const MatrixPencil& pencil) {
  Json j;
  j["dim"] = pencil.dim();
  j["degree"] = pencil.degree();
  Json coeffs = Json::array();
  for (const auto& c : pencil.coeffs()) {
    Json flat = Json::array();
    for (Eigen::Index row = 0; row < c.rows(); ++row)
      for (Eigen::Index col = 0; col < c.cols(); ++col)
        flat.push_back({c(row, col).real(), c(row, col).imag()});
    coeffs.push_back(std::move(flat));
  }
  j["coeffs"] = std::move(coeffs);
  return j;
}

MatrixPencil pencil_from_json(const Json& j) {
  try {
    const Eigen::Index n = j.at("dim").get<Eigen::Index>();
    const int degree = j.at("degree").get<int>();
    std::vector<Eigen::MatrixXcd> coeffs;
    for (int q = 0; q <= degree; ++q) {
      const Json& flat = j.at("coeffs").at(static_cast<size_t>(q));
      require(flat.size() == static_cast<size_t>(n * n), errc::validation,
              "pencil json: coefficient size mismatch");
      Eigen::MatrixXcd c(n, n);
      size_t pos = 0;
      for (Eigen::Index row = 0; row < n; ++row)
        for (Eigen::Index col = 0; col < n; ++col) {
          c(row, col) = Complex(flat[pos][0].get<double>(), flat[pos][1].get<double>());
          ++pos;
        }
      coeffs.push_back(std::move(c));
    }
    return MatrixPencil(std::move(coeffs));
  } catch (const nlohmann::json::exception& e) {
    fail(errc::validation, std::string("pencil json: ") + e.what());
  }
}

Json family_to_json(const commutant::CommutingFamily& family) {
  Json j;
  j["construction"] = commutant::to_string(family.construction);
  j["labels"] = family.labels;
  Json members = Json::array();
  for (const auto& member : family.members) members.push_back(pencil_to_json(member));
  j["members"] = std::move(members);
  return j;
}

Json scenario_to_json(const Scenario& scenario) {
  Json j;
  j["schema_version"] = 1;
  j["seed"] = scenario.seed;
  j["model"] = model_spec_to_json(scenario.model);
  Json tasks = Json::array();
  for (const TaskKind task : scenario.tasks) tasks.push_back(to_string(task));
  j["tasks"] = std::move(tasks);
  j["propagation"] = {{"horizon", scenario.propagation.horizon},
                      {"rel_tol", scenario.propagation.rel_tol},
                      {"abs_tol", scenario.propagation.abs_tol},
                      {"phase_stripping", scenario.propagation.phase_stripping},
                      {"max_steps", scenario.propagation.max_steps},
                      {"threads", scenario.propagation.threads}};
  j["spectrum"] = {{"u_min", scenario.spectrum.u_min},
                   {"u_max", scenario.spectrum.u_max},
                   {"num_points", scenario.spectrum.num_points}};
  Json probes = Json::array();
  for (const auto& [from, to] : scenario.convergence.probes) probes.push_back({from, to});
  j["convergence"] = {{"cutoffs", scenario.convergence.cutoffs}, {"probes", std::move(probes)}};
  j["output"] = {{"path", scenario.output.path},
                 {"format", scenario.output.format == Format::Json ? "json" : "csv"}};
  j["extrapolate"] = scenario.extrapolate;
  j["horizons"] = scenario.horizons;
  j["compare_states"] = scenario.compare_states;
  j["include_timings"] = scenario.include_timings;
  return j;
}

Scenario scenario_from_json(const Json& j) {
  try {
    require(j.at("schema_version").get<int>() == 1, errc::validation,
            "scenario: unsupported schema_version");
    Scenario scenario;
    scenario.model = model_spec_from_json(j.at("model"));
    for (const auto& t : j.at("tasks")) scenario.tasks.push_back(task_from_string(t));
    scenario.seed = j.value("seed", 0ULL);
    if (j.contains("propagation")) {
      const Json& p = j["propagation"];
      scenario.propagation.horizon = p.value("horizon", scenario.propagation.horizon);
      scenario.propagation.rel_tol = p.value("rel_tol", scenario.propagation.rel_tol);
      scenario.propagation.abs_tol = p.value("abs_tol", scenario.propagation.abs_tol);
      scenario.propagation.phase_stripping =
          p.value("phase_stripping", scenario.propagation.phase_stripping);
      scenario.propagation.max_steps = p.value("max_steps", scenario.propagation.max_steps);
      scenario.propagation.threads = p.value("threads", scenario.propagation.threads);
    }
    if (j.contains("spectrum")) {
      const Json& s = j["spectrum"];
      scenario.spectrum.u_min = s.value("u_min", scenario.spectrum.u_min);
      scenario.spectrum.u_max = s.value("u_max", scenario.spectrum.u_max);
      scenario.spectrum.num_points = s.value("num_points", scenario.spectrum.num_points);
    }
    if (j.contains("convergence")) {
      const Json& c = j["convergence"];
      if (c.contains("cutoffs"))
        for (const auto& value : c["cutoffs"]) scenario.convergence.cutoffs.push_back(value);
      if (c.contains("probes"))
        for (const auto& probe : c["probes"])
          scenario.convergence.probes.emplace_back(probe.at(0).get<int>(),
                                                   probe.at(1).get<int>());
    }
    if (j.contains("output")) {
      scenario.output.path = j["output"].value("path", std::string());
      const std::string format = j["output"].value("format", "json");
      if (format == "json")
        scenario.output.format = Format::Json;
      else if (format == "csv")
        scenario.output.format = Format::Csv;
      else
        fail(errc::unsupported_format, "scenario: unsupported output format '" + format + "'");
    }
    scenario.extrapolate = j.value("extrapolate", false);
    if (j.contains("horizons"))
      for (const auto& h : j["horizons"]) scenario.horizons.push_back(h);
    scenario.compare_states = j.value("compare_states", scenario.compare_states);
    scenario.include_timings = j.value("include_timings", false);
    return scenario;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::validation, std::string("scenario json: ") + e.what());
  }
}

std::vector<double> verification_u_samples(std::uint64_t seed, int count, double half_width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  std::vector<double> samples(static_cast<size_t>(count));
  for (auto& u : samples) u = dist(rng);
  return samples;
}

int exit_code_for(errc code) {
  switch (code) {
    case errc::io:
      return 4;
    case errc::step_limit_exceeded:
    case errc::tolerance_unreachable:
    case errc::non_convergent_tail:
    case errc::root_bracket_failure:
    case errc::not_a_commuting_partner:
    case errc::numerical:
      return 3;
    default:
      return 2;
  }
}

}  // namespace mlz::harness
