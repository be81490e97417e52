#include "bayestomo/simulation.hpp"

#include <cmath>
#include <random>

#include "bayestomo/errors.hpp"

namespace bayestomo {

namespace {

enum Stream : std::uint64_t { kOutcomes = 0, kAxes = 1, kPreparation = 2 };

Rng stream(std::uint64_t seed, Stream id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return Rng(seq);
}

BlochVector qubit(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw DomainError("preparations must be qubit states");
  return density_to_bloch(rho);
}

std::size_t choose_candidate(const Preparation::FixedButUnknown& f, std::uint64_t seed) {
  Rng rng = stream(seed, kPreparation);
  std::uniform_int_distribution<std::size_t> pick(0, f.candidates.size() - 1);
  return pick(rng);
}

}  // namespace

Preparation Preparation::mixture(std::vector<std::pair<DensityMatrix, double>> components) {
  if (components.empty()) throw DomainError("mixture needs components");
  double total = 0.0;
  for (const auto& [rho, p] : components) {
    if (!(p >= 0.0)) throw DomainError("mixture probabilities must be nonnegative");
    qubit(rho);
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture probabilities must sum to 1");
  return {Mixture{std::move(components)}};
}

Preparation Preparation::fixed_but_unknown(std::vector<DensityMatrix> candidates) {
  if (candidates.empty()) throw DomainError("fixed-but-unknown needs candidates");
  for (const auto& c : candidates) qubit(c);
  return {FixedButUnknown{std::move(candidates)}};
}

std::optional<std::size_t> realized_choice(const ExperimentPlan& plan) {
  if (const auto* f = std::get_if<Preparation::FixedButUnknown>(&plan.preparation.kind)) {
    return choose_candidate(*f, plan.seed);
  }
  return std::nullopt;
}

MeasurementRecord run_experiment(const ExperimentPlan& plan) {
  if (plan.n_trials < 1) throw DomainError("experiments need at least one trial");
  Rng outcomes = stream(plan.seed, kOutcomes);
  Rng axes = stream(plan.seed, kAxes);
  Rng prep = stream(plan.seed, kPreparation);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_axis(0, 2);
  const std::array<MeasurementAxis, 3> xyz{MeasurementAxis::x(), MeasurementAxis::y(),
                                           MeasurementAxis::z()};

  // Per-trial state source.
  std::vector<BlochVector> states;
  std::discrete_distribution<std::size_t> mixture_pick;
  bool per_trial = false;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Preparation::Fixed>) {
          states.push_back(qubit(p.state));
        } else if constexpr (std::is_same_v<T, Preparation::Mixture>) {
          std::vector<double> w;
          for (const auto& [rho, prob] : p.components) {
            states.push_back(qubit(rho));
            w.push_back(prob);
          }
          mixture_pick = std::discrete_distribution<std::size_t>(w.begin(), w.end());
          per_trial = true;
        } else {
          states.push_back(qubit(p.candidates[choose_candidate(p, plan.seed)]));
        }
      },
      plan.preparation.kind);

  MeasurementRecord record;
  record.entries().reserve(plan.n_trials);
  for (std::size_t t = 0; t < plan.n_trials; ++t) {
    const BlochVector& state = per_trial ? states[mixture_pick(prep)] : states.front();
    const MeasurementAxis axis = std::visit(
        [&](const auto& s) -> MeasurementAxis {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, AxisSchedule::Fixed>) {
            return s.axis;
          } else if constexpr (std::is_same_v<T, AxisSchedule::RoundRobin>) {
            return xyz[t % 3];
          } else {
            return xyz[static_cast<std::size_t>(pick_axis(axes))];
          }
        },
        plan.schedule.kind);
    const double p_plus = born_prob(state, axis, +1);
    record.push(axis, unit(outcomes) < p_plus ? +1 : -1);
  }
  return record;
}

EmpiricalBloch empirical_bloch(const MeasurementRecord& record) {
  EmpiricalBloch out;
  bool any = false;
  for (const auto& m : record) {
    const auto& a = m.axis.vector();
    for (int i = 0; i < 3; ++i) {
      const double c = a[i];
      if (std::abs(std::abs(c) - 1.0) > 1e-12) continue;
      const int sign = (c > 0 ? 1 : -1) * m.outcome;
      (sign > 0 ? out.axes[i].n_plus : out.axes[i].n_minus) += 1;
      any = true;
    }
  }
  if (!any) throw DomainError("record has no measurements along x, y or z");
  for (auto& ax : out.axes) {
    const auto n = ax.n_plus + ax.n_minus;
    if (n > 0) {
      ax.value = (static_cast<double>(ax.n_plus) - static_cast<double>(ax.n_minus)) /
                 static_cast<double>(n);
    }
  }
  return out;
}

Scenario parse_scenario(std::string_view name) {
  if (name == "mixed-air") return Scenario::mixed_air;
  if (name == "coin-flip-technician") return Scenario::coin_flip_technician;
  if (name == "fixed-technician") return Scenario::fixed_technician;
  throw MalformedInput("unknown scenario '" + std::string(name) + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::mixed_air:
      return "mixed-air";
    case Scenario::coin_flip_technician:
      return "coin-flip-technician";
    case Scenario::fixed_technician:
      return "fixed-technician";
  }
  return "unknown";
}

ExperimentPlan scenario_plan(Scenario s, std::size_t n_trials, std::uint64_t seed) {
  const DensityMatrix up_z = bloch_to_density(BlochVector(0, 0, 1));
  const DensityMatrix up_x = bloch_to_density(BlochVector(1, 0, 0));
  ExperimentPlan plan{Preparation::fixed(DensityMatrix::maximally_mixed(2)),
                      AxisSchedule{AxisSchedule::RoundRobin{}}, n_trials, seed};
  switch (s) {
    case Scenario::mixed_air:
      break;
    case Scenario::coin_flip_technician:
      plan.preparation = Preparation::mixture({{up_z, 0.5}, {up_x, 0.5}});
      break;
    case Scenario::fixed_technician:
      plan.preparation = Preparation::fixed_but_unknown({up_z, up_x});
      break;
  }
  return plan;
}

ScenarioReport scenario_suite(Scenario s, std::size_t n_trials, std::uint64_t seed,
                              const ScenarioOptions& options) {
  const ExperimentPlan plan = scenario_plan(s, n_trials, seed);
  ScenarioReport rep;
  rep.scenario = s;
  rep.n_trials = n_trials;
  rep.seed = seed;
  rep.record = run_experiment(plan);
  rep.empirical = empirical_bloch(rep.record);

  if (s == Scenario::fixed_technician) {
    const PriorSpec prior = technician_prior();
    const DiscretePosterior start = discrete_prior(prior);
    rep.prior = prior.name();
    rep.hypotheses = start.hypotheses;
    rep.true_hypothesis = realized_choice(plan);
    rep.trajectory = discrete_trajectory(start, rep.record);
    rep.summary = summarize(update_discrete(start, rep.record));
    rep.expected_state = bloch_to_density(BlochVector(0.5, 0.0, 0.5));
  } else {
    const PriorSpec prior = PriorSpec::bloch_uniform();
    rep.prior = prior.name();
    const BlochGrid post =
        update_grid(make_prior_grid(prior, options.grid_resolution), rep.record);
    rep.summary = summarize(post);
    if (s == Scenario::coin_flip_technician) {
      rep.expected_state = bloch_to_density(BlochVector(0.5, 0.0, 0.5));
    }
  }
  return rep;
}

ScenarioReport scenario_suite(std::string_view name, std::size_t n_trials,
                              std::uint64_t seed, const ScenarioOptions& options) {
  return scenario_suite(parse_scenario(name), n_trials, seed, options);
}

}  // namespace bayestomo
