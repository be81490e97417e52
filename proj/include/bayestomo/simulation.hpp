#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bayestomo/bayes_engine.hpp"
#include "bayestomo/quantum_state.hpp"

namespace bayestomo {

/// How the source prepares the qubit on each trial.
struct Preparation {
  /// The same state every trial.
  struct Fixed {
    DensityMatrix state;
  };
  /// A fresh draw from (state, probability) components on every trial.
  struct Mixture {
    std::vector<std::pair<DensityMatrix, double>> components;
  };
  /// One candidate chosen uniformly at the start and then used every trial.
  struct FixedButUnknown {
    std::vector<DensityMatrix> candidates;
  };
  using Kind = std::variant<Fixed, Mixture, FixedButUnknown>;

  Kind kind;

  static Preparation fixed(DensityMatrix state) { return {Fixed{std::move(state)}}; }
  /// Probabilities must be nonnegative and sum to one within 1e-12.
  static Preparation mixture(std::vector<std::pair<DensityMatrix, double>> components);
  static Preparation fixed_but_unknown(std::vector<DensityMatrix> candidates);
};

struct AxisSchedule {
  struct Fixed {
    MeasurementAxis axis;
  };
  /// x, y, z, x, y, z, ...
  struct RoundRobin {};
  /// Uniform choice among x, y, z on each trial.
  struct Random {};
  using Kind = std::variant<Fixed, RoundRobin, Random>;

  Kind kind = RoundRobin{};
};

struct ExperimentPlan {
  Preparation preparation;
  AxisSchedule schedule;
  std::size_t n_trials = 1;
  std::uint64_t seed = 0;
};

/// Simulated record; identical plans give identical records. Each source of
/// randomness draws from its own stream derived from the seed.
MeasurementRecord run_experiment(const ExperimentPlan& plan);

/// Index of the candidate a fixed-but-unknown preparation settles on.
std::optional<std::size_t> realized_choice(const ExperimentPlan& plan);

struct AxisEstimate {
  std::uint64_t n_plus = 0;
  std::uint64_t n_minus = 0;
  /// (N+ - N-) / (N+ + N-); empty when the axis was never measured.
  std::optional<double> value;
};

/// x_exp, y_exp, z_exp. Measurements along other axes are ignored; an axis
/// along -e_i counts towards e_i with its outcome flipped.
struct EmpiricalBloch {
  std::array<AxisEstimate, 3> axes;
};

EmpiricalBloch empirical_bloch(const MeasurementRecord& record);

enum class Scenario { mixed_air, coin_flip_technician, fixed_technician };

Scenario parse_scenario(std::string_view name);
std::string to_string(Scenario s);

struct ScenarioOptions {
  int grid_resolution = BlochGrid::kDefaultResolution;
};

struct ScenarioReport {
  Scenario scenario;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
  std::string prior;
  /// Density matrix the source produces on average.
  DensityMatrix expected_state = DensityMatrix::maximally_mixed(2);
  MeasurementRecord record;
  EmpiricalBloch empirical;
  PosteriorSummary summary;
  /// fixed-technician only.
  std::optional<std::size_t> true_hypothesis;
  std::vector<DensityMatrix> hypotheses;
  std::vector<std::vector<double>> trajectory;
};

ExperimentPlan scenario_plan(Scenario s, std::size_t n_trials, std::uint64_t seed);

/// Runs a scenario end to end: bloch-uniform grid posterior for mixed-air
/// and coin-flip-technician, exact two-hypothesis posterior with its
/// per-trial trajectory for fixed-technician.
ScenarioReport scenario_suite(Scenario s, std::size_t n_trials, std::uint64_t seed,
                              const ScenarioOptions& options = {});
ScenarioReport scenario_suite(std::string_view name, std::size_t n_trials,
                              std::uint64_t seed, const ScenarioOptions& options = {});

}  // namespace bayestomo
