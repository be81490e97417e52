#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bayestomo/bloch_grid.hpp"
#include "bayestomo/priors.hpp"
#include "bayestomo/quantum_state.hpp"

namespace bayestomo {

/// Sufficient statistics of a record: +1/-1 counts per distinct axis, in a
/// canonical axis order. Likelihoods computed from a tally do not depend on
/// the order of the record.
struct AxisTally {
  MeasurementAxis axis;
  std::uint64_t n_plus = 0;
  std::uint64_t n_minus = 0;
};

std::vector<AxisTally> tally(const MeasurementRecord& record);

/// log P(record | state), or nullopt when some observed outcome has Born
/// probability zero (the hypothesis is excluded).
std::optional<double> log_likelihood(const BlochVector& state,
                                     std::span<const AxisTally> tallies);
std::optional<double> log_likelihood(const BlochVector& state,
                                     const MeasurementRecord& record);
std::optional<double> log_likelihood(const DensityMatrix& rho,
                                     const MeasurementRecord& record);

struct Particle {
  DensityMatrix state;
  /// Unnormalized log weight; nullopt marks an excluded particle.
  std::optional<double> log_weight;
};

/// Importance-weighted sample from a posterior over density matrices.
struct PosteriorEnsemble {
  std::vector<Particle> particles;
  /// Running log of (sum of current weights / sum of prior weights).
  double log_evidence = 0.0;

  Eigen::VectorXd normalized_weights() const;
  /// 1 / sum(w_i^2) over normalized weights.
  double effective_sample_size() const;
  /// True when the ESS drops below max(10, 1% of the particle count).
  bool low_ess() const;
};

inline constexpr std::size_t kMinParticles = 100;

/// Draws n_particles from the prior (discrete priors are enumerated exactly
/// instead) and weights them by the likelihood of the record.
PosteriorEnsemble update(const PriorSpec& prior, const MeasurementRecord& record,
                         std::size_t n_particles, std::uint64_t seed, int dim = 2);
/// Reweights an existing ensemble by further data.
PosteriorEnsemble update(PosteriorEnsemble ensemble, const MeasurementRecord& record);

/// Prior grid for a qubit prior (discrete priors are rejected).
BlochGrid make_prior_grid(const PriorSpec& prior,
                          int resolution = BlochGrid::kDefaultResolution);
/// Deterministic grid posterior; the returned grid accumulates log evidence.
BlochGrid update_grid(const BlochGrid& prior, const MeasurementRecord& record);

/// Exact posterior over a finite hypothesis set.
struct DiscretePosterior {
  std::vector<DensityMatrix> hypotheses;
  std::vector<double> probs;
  double log_evidence = 0.0;
};

DiscretePosterior discrete_prior(const PriorSpec& prior);
DiscretePosterior update_discrete(const DiscretePosterior& prior,
                                  const MeasurementRecord& record);
/// probs after each trial: row t holds the posterior after the first t + 1
/// measurements.
std::vector<std::vector<double>> discrete_trajectory(const DiscretePosterior& prior,
                                                     const MeasurementRecord& record);

struct CredibleInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct CoordinateSummary {
  double mean = 0.0;
  CredibleInterval one_sigma;  // central 68.3 %
  CredibleInterval two_sigma;  // central 95.4 %
};

struct PosteriorSummary {
  DensityMatrix mean_state = DensityMatrix::maximally_mixed(2);
  DensityMatrix map_state = DensityMatrix::maximally_mixed(2);
  /// Qubit-only fields.
  std::optional<BlochVector> mean_bloch;
  std::optional<BlochVector> map_bloch;
  std::optional<std::array<CoordinateSummary, 3>> credible;
  double log_evidence = 0.0;
  double ess = 0.0;
  bool low_ess_warning = false;
};

PosteriorSummary summarize(const PosteriorEnsemble& post);
PosteriorSummary summarize(const BlochGrid& post);
PosteriorSummary summarize(const DiscretePosterior& post);

/// log(prior density at the mode / mean prior density), both relative to the
/// prior's base measure. -inf when the prior vanishes at the mode; strongly
/// negative values flag a prior biased against the data.
double bias_report(const PriorSpec& prior, const BlochVector& posterior_mode);

}  // namespace bayestomo
