#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "mlz/commutant.hpp"
#include "mlz/models.hpp"
#include "mlz/propagator.hpp"

namespace mlz::harness {

using Json = nlohmann::ordered_json;

enum class TaskKind { VerifyCommutant, Spectrum, Propagate, CompareClosedForm, ConvergenceStudy };

std::string to_string(TaskKind task);
TaskKind task_from_string(const std::string& name);

enum class Format { Json, Csv };

struct SpectrumConfig {
  double u_min = -3.0;
  double u_max = 3.0;
  int num_points = 61;
};

struct ConvergenceConfig {
  std::vector<int> cutoffs;
  std::vector<std::pair<int, int>> probes;
};

struct OutputConfig {
  std::string path;  // empty = stdout
  Format format = Format::Json;
};

struct Scenario {
  models::ModelSpec model;
  std::vector<TaskKind> tasks;
  propagator::PropagationConfig propagation;
  SpectrumConfig spectrum;
  ConvergenceConfig convergence;
  OutputConfig output;
  std::uint64_t seed = 0;
  bool extrapolate = false;
  std::vector<double> horizons;   // used when extrapolate is set
  int compare_states = 5;         // low states probed by CompareClosedForm
  bool include_timings = false;   // timings break byte-identical reports; opt in

  void validate() const;
};

/// Structured result document. Construction refuses non-finite numbers, so a
/// report that exists can always be emitted.
class ScenarioReport {
 public:
  static ScenarioReport create(Json doc);
  const Json& doc() const;

 private:
  explicit ScenarioReport(Json doc);
  std::shared_ptr<Json> doc_;
};

ScenarioReport run_scenario(const Scenario& scenario);

std::string emit_json(const ScenarioReport& report);

/// One CSV table per executed task: (table name, content). Header row, '.'
/// decimal separator, deterministic row order.
std::vector<std::pair<std::string, std::string>> emit_csv(const ScenarioReport& report);

/// Write per the output config: JSON to path (or stdout), or one CSV file per
/// task named <stem>_<task>.csv.
void write_report(const ScenarioReport& report, const OutputConfig& output);

// JSON codecs for the public data types.
Json model_spec_to_json(const models::ModelSpec& spec);
models::ModelSpec model_spec_from_json(const Json& j);
Json pencil_to_json(const MatrixPencil& pencil);
MatrixPencil pencil_from_json(const Json& j);
Json family_to_json(const commutant::CommutingFamily& family);
Json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j);

/// Deterministic u-samples for verification sweeps (seeded).
std::vector<double> verification_u_samples(std::uint64_t seed, int count = 20,
                                           double half_width = 5.0);

int exit_code_for(errc code);

}  // namespace mlz::harness
