#include "bayestomo/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bayestomo/errors.hpp"

namespace bayestomo {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::complex<double> expi(double phase) { return std::polar(1.0, phase); }

}  // namespace

Eigen::Matrix2cd su2_from_euler(const EulerAngles& e) {
  Eigen::Matrix2cd z1 = Eigen::Matrix2cd::Zero();
  z1(0, 0) = expi(e.alpha1);
  z1(1, 1) = expi(-e.alpha1);
  Eigen::Matrix2cd z3 = Eigen::Matrix2cd::Zero();
  z3(0, 0) = expi(e.alpha3);
  z3(1, 1) = expi(-e.alpha3);
  // exp(i a s2) = cos(a) I + i sin(a) s2
  const double c = std::cos(e.alpha2), s = std::sin(e.alpha2);
  Eigen::Matrix2cd y;
  y << c, s, -s, c;
  return z1 * y * z3;
}

HaarSu2Sample sample_haar_su2(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  HaarSu2Sample out;
  out.angles.alpha1 = kPi * unit(rng);
  out.angles.alpha2 = std::asin(std::sqrt(unit(rng)));
  out.angles.alpha3 = kPi * unit(rng);
  out.unitary = su2_from_euler(out.angles);
  return out;
}

ComplexMatrix<double> sample_haar_sun(int n, Rng& rng) {
  if (n < 2) throw DomainError("SU(n) sampling needs n >= 2");
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  ComplexMatrix<double> z(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) z(i, j) = {gauss(rng), gauss(rng)};
  }
  Eigen::HouseholderQR<ComplexMatrix<double>> qr(z);
  ComplexMatrix<double> q = qr.householderQ();
  const ComplexMatrix<double>& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  const double phase = std::arg(q.determinant());
  q *= expi(-phase / n);
  return q;
}

EigenSpectrum sample_feynman(int n, Rng& rng, bool sorted) {
  if (n < 2) throw DomainError("spectra need n >= 2");
  std::exponential_distribution<double> expo(1.0);
  EigenSpectrum out;
  out.p.resize(n);
  for (int i = 0; i < n; ++i) out.p[i] = expo(rng);
  out.p /= out.p.sum();
  if (sorted) {
    std::sort(out.p.data(), out.p.data() + n, std::greater<>());
    out.sorted = true;
  }
  return out;
}

BiasFunction BiasFunction::power(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw DomainError("power bias needs a finite kappa >= 0");
  }
  return BiasFunction(Family::power, kappa);
}

double normalized_purity(double purity, int dim) {
  const double n = dim;
  return std::clamp((n * purity - 1.0) / (n - 1.0), 0.0, 1.0);
}

double BiasFunction::operator()(double purity, int dim) const {
  const double s = normalized_purity(purity, dim);
  switch (family_) {
    case Family::constant:
      return 1.0;
    case Family::linear:
      return 3.0 * s;
    case Family::power:
      return std::pow(s, kappa_);
  }
  return 1.0;
}

double BiasFunction::qubit_feynman_mean() const {
  switch (family_) {
    case Family::constant:
    case Family::linear:
      return 1.0;
    case Family::power:
      return 1.0 / (2.0 * kappa_ + 1.0);
  }
  return 1.0;
}

std::string BiasFunction::name() const {
  switch (family_) {
    case Family::constant:
      return "constant";
    case Family::linear:
      return "linear";
    case Family::power: {
      std::ostringstream os;
      os.precision(17);
      os << "power(kappa=" << kappa_ << ")";
      return os.str();
    }
  }
  return "unknown";
}

PriorSpec PriorSpec::discrete(
    std::vector<std::pair<DensityMatrix, double>> hypotheses) {
  if (hypotheses.empty()) throw DomainError("discrete prior needs hypotheses");
  double total = 0.0;
  const auto dim = hypotheses.front().first.dim();
  for (const auto& [rho, w] : hypotheses) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("discrete prior weights must be nonnegative");
    }
    if (rho.dim() != dim) throw DomainError("discrete hypotheses differ in dimension");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("discrete prior weights must sum to 1");
  }
  return {Discrete{std::move(hypotheses)}};
}

PriorSpec PriorSpec::tabulated(BlochGrid grid) {
  return {Tabulated{std::make_shared<const BlochGrid>(std::move(grid))}};
}

std::string PriorSpec::name() const {
  return std::visit(
      overloaded{[](const BlochUniform&) { return std::string("bloch-uniform"); },
                 [](const Feynman&) { return std::string("feynman"); },
                 [](const PurityBiased& p) { return "purity-biased:" + p.bias.name(); },
                 [](const Discrete& d) {
                   return "discrete(" + std::to_string(d.hypotheses.size()) + ")";
                 },
                 [](const Tabulated&) { return std::string("tabulated"); }},
      kind);
}

void PriorSpec::check_dimension(int dim) const {
  if (dim < 2) throw DomainError("dimension must be >= 2");
  const bool qubit_only = std::holds_alternative<BlochUniform>(kind) ||
                          std::holds_alternative<Tabulated>(kind);
  if (qubit_only && dim != 2) {
    throw DomainError(name() + " prior is defined for dim = 2 only");
  }
  if (const auto* d = std::get_if<Discrete>(&kind)) {
    if (d->hypotheses.front().first.dim() != dim) {
      throw DomainError("discrete hypotheses have a different dimension");
    }
  }
}

PriorSpec technician_prior() {
  return PriorSpec::discrete({{bloch_to_density(BlochVector(0, 0, 1)), 0.5},
                              {bloch_to_density(BlochVector(1, 0, 0)), 0.5}});
}

namespace {

DensityMatrix sample_feynman_state(int dim, Rng& rng) {
  const ComplexMatrix<double> u = sample_haar_sun(dim, rng);
  const EigenSpectrum spec = sample_feynman(dim, rng);
  // rho = U^-1 diag(p) U
  const ComplexMatrix<double> d = spec.p.cast<std::complex<double>>().asDiagonal();
  return DensityMatrix(u.adjoint() * d * u);
}

Eigen::Vector3d uniform_in_ball(Rng& rng) {
  std::uniform_real_distribution<double> cube(-1.0, 1.0);
  for (;;) {
    Eigen::Vector3d v(cube(rng), cube(rng), cube(rng));
    if (v.squaredNorm() <= 1.0) return v;
  }
}

}  // namespace

WeightedState sample_prior(const PriorSpec& spec, int dim, Rng& rng) {
  spec.check_dimension(dim);
  return std::visit(
      overloaded{
          [&](const PriorSpec::BlochUniform&) {
            return WeightedState{bloch_to_density(BlochVector(uniform_in_ball(rng))), 1.0};
          },
          [&](const PriorSpec::Feynman&) {
            return WeightedState{sample_feynman_state(dim, rng), 1.0};
          },
          [&](const PriorSpec::PurityBiased& p) {
            DensityMatrix rho = sample_feynman_state(dim, rng);
            const double w = p.bias(purity(rho), dim);
            return WeightedState{std::move(rho), w};
          },
          [&](const PriorSpec::Discrete& d) {
            std::vector<double> w;
            w.reserve(d.hypotheses.size());
            for (const auto& h : d.hypotheses) w.push_back(h.second);
            std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
            return WeightedState{d.hypotheses[pick(rng)].first, 1.0};
          },
          [&](const PriorSpec::Tabulated& t) {
            const BlochGrid& g = *t.grid;
            const Eigen::VectorXd m = g.masses();
            std::discrete_distribution<Eigen::Index> pick(m.data(), m.data() + m.size());
            std::uniform_real_distribution<double> jitter(-0.5, 0.5);
            const Eigen::Index cell = pick(rng);
            const Eigen::Vector3d centre = g.centers().col(cell);
            for (int attempt = 0; attempt < 16; ++attempt) {
              const Eigen::Vector3d p =
                  centre + g.spacing() * Eigen::Vector3d(jitter(rng), jitter(rng), jitter(rng));
              if (p.norm() <= 1.0) return WeightedState{bloch_to_density(BlochVector(p)), 1.0};
            }
            return WeightedState{bloch_to_density(BlochVector(centre)), 1.0};
          }},
      spec.kind);
}

std::vector<WeightedState> sample_prior(const PriorSpec& spec, int dim,
                                        std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<WeightedState> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_prior(spec, dim, rng));
  return out;
}

double dv_df_weight(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw DomainError("dV/dF relation holds for qubits");
  return 3.0 * (2.0 * purity(rho) - 1.0);
}

double qubit_density_dv(const PriorSpec& spec, const Eigen::Vector3d& bloch) {
  const double r2 = bloch.squaredNorm();
  if (r2 > 1.0 + 1e-12) return 0.0;
  return std::visit(
      overloaded{
          [](const PriorSpec::BlochUniform&) { return 1.0; },
          // dF = dr and dV = 3 r^2 dr after integrating out U.
          [&](const PriorSpec::Feynman&) { return 1.0 / (3.0 * r2); },
          [&](const PriorSpec::PurityBiased& p) {
            // 3 s / (3 r^2) with s = r^2, including the r = 0 limit.
            if (p.bias.family() == BiasFunction::Family::linear) return 1.0;
            const double bias = p.bias(0.5 * (1.0 + r2), 2);
            if (bias == 0.0) return 0.0;
            return bias / (3.0 * r2) / p.bias.qubit_feynman_mean();
          },
          [](const PriorSpec::Discrete&) -> double {
            throw NotApplicable("discrete priors have no density");
          },
          [&](const PriorSpec::Tabulated& t) {
            const Eigen::Index cell = t.grid->locate(bloch);
            return cell < 0 ? 0.0 : t.grid->density_dv(cell);
          }},
      spec.kind);
}

double relative_prior_density(const PriorSpec& spec, const BlochVector& point) {
  if (!point.is_state()) throw DomainError("not a state: Bloch radius exceeds 1");
  return std::visit(
      overloaded{
          [](const PriorSpec::BlochUniform&) { return 1.0; },
          [](const PriorSpec::Feynman&) { return 1.0; },
          [&](const PriorSpec::PurityBiased& p) {
            const double t = 0.5 * (1.0 + point.v.squaredNorm());
            return p.bias(t, 2) / p.bias.qubit_feynman_mean();
          },
          [](const PriorSpec::Discrete&) -> double {
            throw NotApplicable("bias report is not defined for discrete priors");
          },
          [&](const PriorSpec::Tabulated& t) {
            const Eigen::Index cell = t.grid->locate(point.v);
            return cell < 0 ? 0.0 : t.grid->density_dv(cell);
          }},
      spec.kind);
}

}  // namespace bayestomo
