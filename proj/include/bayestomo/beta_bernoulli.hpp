#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "bayestomo/prob_axioms.hpp"

namespace bayestomo {

/// Outcome counts of a binary experiment: n_a occurrences of A, n_b of B.
struct BinaryCounts {
  std::uint64_t n_a = 0;
  std::uint64_t n_b = 0;

  std::uint64_t total() const { return n_a + n_b; }

  /// Parses "N_A,N_B".
  static BinaryCounts parse(std::string_view text);
  /// Counts the A's and B's of an outcome string such as "AAB".
  static BinaryCounts from_string(std::string_view outcomes);

  friend bool operator==(const BinaryCounts&, const BinaryCounts&) = default;
};

/// Density p(h) on [0, 1] for the unknown probability h of outcome A.
class MixingDensity {
 public:
  enum class Kind { uniform, beta, tabulated };

  static MixingDensity uniform();
  /// Beta(a, b) density; a, b > 0.
  static MixingDensity beta(double a, double b);
  /// Piecewise-linear density through (h_i, p_i); h must be strictly
  /// increasing inside [0, 1]. The trapezoid integral must equal one within
  /// kNormalizationTol, otherwise DomainError.
  static MixingDensity tabulated(Eigen::VectorXd h, Eigen::VectorXd density);
  /// As tabulated(), rescaling the values to unit trapezoid integral first.
  static MixingDensity normalized(Eigen::VectorXd h, Eigen::VectorXd density);

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const Eigen::VectorXd& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }

  double operator()(double h) const;
  double log_density(double h) const;
  std::string describe() const;

  static constexpr double kNormalizationTol = 1e-9;

 private:
  MixingDensity() = default;

  Kind kind_ = Kind::uniform;
  double a_ = 1.0;
  double b_ = 1.0;
  double log_beta_ = 0.0;  // log B(a, b)
  Eigen::VectorXd grid_;
  Eigen::VectorXd values_;
};

/// h^n_a (1-h)^n_b, evaluated in log space.
double likelihood(const BinaryCounts& counts, double h);
double log_likelihood(const BinaryCounts& counts, double h);

/// log P(D) = log of the integral of h^n_a (1-h)^n_b p(h) dh. Uses the Beta
/// function for uniform and beta priors and log_evidence_quadrature()
/// otherwise. Throws ImpossibleData when the evidence is exactly zero.
double log_evidence(const BinaryCounts& counts, const MixingDensity& prior);
/// exp(log_evidence); underflows to zero for long records.
double evidence(const BinaryCounts& counts, const MixingDensity& prior);
/// Adaptive Gauss-Kronrod evaluation of the evidence integral for any prior.
double log_evidence_quadrature(const BinaryCounts& counts,
                               const MixingDensity& prior);

inline constexpr std::size_t kDefaultPosteriorGrid = 4096;

/// Posterior density tabulated on `grid_points` uniform points of [0, 1],
/// normalized to unit trapezoid integral.
MixingDensity posterior_density(const BinaryCounts& counts,
                                const MixingDensity& prior,
                                std::size_t grid_points = kDefaultPosteriorGrid);
/// Same, on a caller-supplied increasing grid.
MixingDensity posterior_density(const BinaryCounts& counts,
                                const MixingDensity& prior,
                                std::span<const double> grid);

/// Relative Richardson estimate of the trapezoid error of a tabulated
/// density (full grid vs. every other point).
double richardson_error(const MixingDensity& tabulated);

inline constexpr double kOneSigmaMass = 0.682689492137085897;
inline constexpr double kTwoSigmaMass = 0.954499736103641586;

struct PeakWidth {
  double mode = 0.0;
  /// Half-width of the central interval holding kOneSigmaMass.
  double width = 0.0;
};

/// Mode and central credible half-width of a tabulated density. The mode is
/// the first grid argmax (ties go to smaller h) refined by a parabola through
/// its neighbours.
PeakWidth peak_width(const MixingDensity& tabulated,
                     double mass = kOneSigmaMass);
PeakWidth posterior_peak_width(const BinaryCounts& counts,
                               const MixingDensity& prior,
                               std::size_t grid_points = kDefaultPosteriorGrid);

/// Quantile of a tabulated density, inverting its piecewise-quadratic CDF.
double quantile(const MixingDensity& tabulated, double q);

/// de Finetti representation: probability of an outcome string over {A, B}.
double de_finetti_string_prob(const MixingDensity& prior,
                              std::string_view outcomes);

/// Every string of length 1..max_len assigned via de_finetti_string_prob().
StringAssignment de_finetti_assignment(const MixingDensity& prior,
                                       int max_len);

}  // namespace bayestomo
