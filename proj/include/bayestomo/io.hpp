#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "bayestomo/bayes_engine.hpp"
#include "bayestomo/beta_bernoulli.hpp"
#include "bayestomo/priors.hpp"
#include "bayestomo/prob_axioms.hpp"
#include "bayestomo/simulation.hpp"
#include "json.hpp"

namespace bayestomo::io {

using Json = nlohmann::json;

// Documents: {"outcomes": [...], "prob": {...}} and {"max_len": N, "prob": {...}}.
FiniteModel finite_model_from_json(const Json& j);
Json to_json(const FiniteModel& model);
StringAssignment string_assignment_from_json(const Json& j);
Json to_json(const StringAssignment& assign);

// {"dim": n, "re": [[...]], "im": [[...]]} or, for qubits, {"bloch": [x, y, z]}.
DensityMatrix density_matrix_from_json(const Json& j);
Json to_json(const DensityMatrix& rho);
Json to_json(const BlochVector& v);

// {"kind": "uniform"}, {"kind": "beta", "a": .., "b": ..} or
// {"kind": "tabulated", "h": [...], "density": [...]}.
MixingDensity mixing_density_from_json(const Json& j);
Json to_json(const MixingDensity& d);
/// "uniform", "beta:A,B", or a path to a .json document or an h,density CSV.
MixingDensity parse_mixing_density(std::string_view text);
void write_density_csv(std::ostream& os, const MixingDensity& tabulated);
MixingDensity read_density_csv(std::istream& is);

// {"kind": "bloch-uniform" | "feynman" | "technician"},
// {"kind": "purity-biased", "bias": {"family": "power", "kappa": 1.0}},
// {"kind": "discrete", "hypotheses": [{"state": {...}, "weight": w}, ...]},
// {"kind": "tabulated", "grid_csv": PATH, "resolution": m}.
// Relative grid_csv paths resolve against `base_dir`.
PriorSpec prior_spec_from_json(const Json& j, const std::filesystem::path& base_dir = {});
BiasFunction bias_from_json(const Json& j);
Json to_json(const BiasFunction& bias);

// Grid CSV: x,y,z,density with density relative to dV.
void write_grid_csv(std::ostream& os, const BlochGrid& grid);
BlochGrid read_grid_csv(std::istream& is, int resolution);

// Records: one "ax,ay,az,outcome" line per measurement; a header line is
// optional on input and always written on output.
MeasurementRecord read_record_csv(std::istream& is);
void write_record_csv(std::ostream& os, const MeasurementRecord& record);

// {"preparation": {...}, "axis_schedule": "round-robin" | "random" |
//  {"fixed": [ax, ay, az]}, "n_trials": N, "seed": S}
ExperimentPlan experiment_plan_from_json(const Json& j);

Json to_json(const PosteriorSummary& summary);
Json to_json(const ExchangeabilityReport& report);
Json to_json(const LemmaReport& report);
Json to_json(const EmpiricalBloch& empirical);
Json to_json(const ScenarioReport& report);

/// x,y,z,weight rows for qubit samples.
void write_samples_csv(std::ostream& os, const std::vector<WeightedState>& samples);

/// Fixed 17-significant-digit formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace bayestomo::io
