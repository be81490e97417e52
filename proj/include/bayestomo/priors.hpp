#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bayestomo/bloch_grid.hpp"
#include "bayestomo/quantum_state.hpp"

namespace bayestomo {

using Rng = std::mt19937_64;

/// SU(2) coordinates U = exp(i a1 s3) exp(i a2 s2) exp(i a3 s3) with
/// a1, a3 in [0, pi] and a2 in [0, pi / 2].
struct EulerAngles {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
};

Eigen::Matrix2cd su2_from_euler(const EulerAngles& angles);

struct HaarSu2Sample {
  EulerAngles angles;
  Eigen::Matrix2cd unitary;
};

/// Haar-distributed SU(2) element: a1, a3 uniform and a2 with density
/// sin(2 a2) on [0, pi / 2], drawn as a2 = asin(sqrt(u)).
HaarSu2Sample sample_haar_su2(Rng& rng);

/// Haar-distributed SU(n): QR of a complex Ginibre matrix with the phases of
/// diag(R) moved into Q, then divided by an n-th root of det Q.
ComplexMatrix<double> sample_haar_sun(int n, Rng& rng);

/// Eigenvalues p_1..p_n on the probability simplex.
struct EigenSpectrum {
  Eigen::VectorXd p;
  bool sorted = false;
};

/// Flat-Dirichlet draw (the Feynman measure) via normalized exponentials;
/// sorted descending when requested.
EigenSpectrum sample_feynman(int n, Rng& rng, bool sorted = false);

/// Purity bias p(Tr rho^2) for purity-biased priors. Written in terms of the
/// normalized purity s = (n Tr rho^2 - 1) / (n - 1), which is r^2 for qubits
/// and runs over [0, 1] for every n:
///   constant -> 1,  linear -> 3 s,  power(kappa) -> s^kappa.
class BiasFunction {
 public:
  enum class Family { constant, linear, power };

  static BiasFunction constant() { return BiasFunction(Family::constant, 0.0); }
  static BiasFunction linear() { return BiasFunction(Family::linear, 1.0); }
  static BiasFunction power(double kappa);

  Family family() const { return family_; }
  double kappa() const { return kappa_; }
  double operator()(double purity, int dim) const;
  /// Mean of the bias over the qubit Feynman measure (r uniform on [0, 1]).
  double qubit_feynman_mean() const;
  std::string name() const;

 private:
  BiasFunction(Family f, double kappa) : family_(f), kappa_(kappa) {}

  Family family_;
  double kappa_;
};

double normalized_purity(double purity, int dim);

/// Prior over density matrices.
struct PriorSpec {
  struct BlochUniform {};
  struct Feynman {};
  struct PurityBiased {
    BiasFunction bias = BiasFunction::constant();
  };
  struct Discrete {
    std::vector<std::pair<DensityMatrix, double>> hypotheses;
  };
  struct Tabulated {
    std::shared_ptr<const BlochGrid> grid;
  };
  using Kind = std::variant<BlochUniform, Feynman, PurityBiased, Discrete, Tabulated>;

  Kind kind;

  static PriorSpec bloch_uniform() { return {BlochUniform{}}; }
  static PriorSpec feynman() { return {Feynman{}}; }
  static PriorSpec purity_biased(BiasFunction bias) { return {PurityBiased{bias}}; }
  /// Weights must be nonnegative and sum to one within 1e-12.
  static PriorSpec discrete(std::vector<std::pair<DensityMatrix, double>> hypotheses);
  static PriorSpec tabulated(BlochGrid grid);

  std::string name() const;
  /// Throws DomainError if the prior cannot describe states of this dimension.
  void check_dimension(int dim) const;
};

/// The two pure states of the technician scenarios, sigma_z = +1 and
/// sigma_x = +1, with prior weight one half each.
PriorSpec technician_prior();

struct WeightedState {
  DensityMatrix state;
  double weight = 1.0;
};

/// One draw from the prior. Purity-biased priors return a Feynman draw whose
/// weight is the bias (self-normalized by the consumer); all others weight 1.
WeightedState sample_prior(const PriorSpec& spec, int dim, Rng& rng);
std::vector<WeightedState> sample_prior(const PriorSpec& spec, int dim,
                                        std::size_t count, std::uint64_t seed);

/// 3 (2 Tr rho^2 - 1) = 3 r^2: the density of dV relative to dU dF on qubits.
double dv_df_weight(const DensityMatrix& rho);

/// Density of a qubit prior relative to dV at a Bloch point. Not defined
/// for discrete priors.
double qubit_density_dv(const PriorSpec& spec, const Eigen::Vector3d& bloch);

/// Prior density at a point relative to the prior's own base measure (dV for
/// bloch-uniform and tabulated priors, dU dF otherwise), divided by its mean
/// over that measure.
double relative_prior_density(const PriorSpec& spec, const BlochVector& point);

}  // namespace bayestomo
