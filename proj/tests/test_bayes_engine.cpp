#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "bayestomo/bayes_engine.hpp"
#include "bayestomo/beta_bernoulli.hpp"
#include "bayestomo/errors.hpp"
#include "bayestomo/simulation.hpp"

using namespace bayestomo;
using Eigen::Vector3d;

namespace {

MeasurementRecord z_record(int plus, int minus) {
  MeasurementRecord r;
  for (int i = 0; i < plus; ++i) r.push(MeasurementAxis::z(), 1);
  for (int i = 0; i < minus; ++i) r.push(MeasurementAxis::z(), -1);
  return r;
}

MeasurementRecord random_record(std::size_t n, std::uint64_t seed, BlochVector truth) {
  ExperimentPlan plan{Preparation::fixed(bloch_to_density(truth)), {AxisSchedule::Random{}}, n, seed};
  return run_experiment(plan);
}

const DensityMatrix kUpZ = bloch_to_density(BlochVector(0, 0, 1));
const DensityMatrix kUpX = bloch_to_density(BlochVector(1, 0, 0));

}  // namespace

TEST_CASE("log_likelihood examples") {
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
  CHECK(*log_likelihood(mixed, MeasurementRecord{}) == 0.0);
  const MeasurementRecord r = random_record(37, 1, BlochVector(0.3, 0.2, 0.1));
  CHECK(*log_likelihood(mixed, r) == doctest::Approx(37 * std::log(0.5)).epsilon(1e-14));
  CHECK(*log_likelihood(BlochVector(0, 0, 0.5), z_record(3, 1)) ==
        doctest::Approx(3 * std::log(0.75) + std::log(0.25)).epsilon(1e-14));
  CHECK_FALSE(log_likelihood(kUpZ, z_record(3, 1)).has_value());
  CHECK(*log_likelihood(kUpZ, z_record(3, 0)) == 0.0);
}

TEST_CASE("log_likelihood matches the three-axis product") {
  const BlochVector v(0.2, -0.4, 0.5);
  const MeasurementRecord r = run_experiment(
      {Preparation::fixed(bloch_to_density(v)), {AxisSchedule::RoundRobin{}}, 300, 2});
  const EmpiricalBloch e = empirical_bloch(r);
  double expect = 0.0;
  for (int i = 0; i < 3; ++i) {
    expect += e.axes[i].n_plus * std::log(0.5 * (1 + v.v[i])) + e.axes[i].n_minus * std::log(0.5 * (1 - v.v[i]));
  }
  CHECK(*log_likelihood(v, r) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("tally is order independent") {
  MeasurementRecord r = random_record(200, 3, BlochVector(0.1, 0.5, -0.3));
  std::mt19937_64 rng(4);
  MeasurementRecord s = r;
  std::shuffle(s.entries().begin(), s.entries().end(), rng);
  const BlochVector v(0.3, 0.3, 0.3);
  CHECK(*log_likelihood(v, r) == *log_likelihood(v, s));
}

TEST_CASE("ensemble: empty record") {
  const PosteriorEnsemble e = update(PriorSpec::feynman(), MeasurementRecord{}, 500, 1);
  CHECK(e.particles.size() == 500);
  CHECK(e.log_evidence == 0.0);
  CHECK(e.effective_sample_size() == doctest::Approx(500.0));
  const PosteriorEnsemble f = update(e, MeasurementRecord{});
  CHECK(f.log_evidence == 0.0);
  CHECK_THROWS_AS(update(PriorSpec::feynman(), MeasurementRecord{}, 50, 1), DomainError);
}

TEST_CASE("ensemble weights are normalized and ESS is sane") {
  const MeasurementRecord r = random_record(100, 5, BlochVector(0.4, 0, 0.4));
  const PosteriorEnsemble e = update(PriorSpec::bloch_uniform(), r, 2000, 6);
  const Eigen::VectorXd w = e.normalized_weights();
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(e.effective_sample_size() >= 1.0);
  CHECK(e.effective_sample_size() <= 2000.0);
}

TEST_CASE("ensemble: discrete technician prior after 50 z-axis +1") {
  const PosteriorEnsemble e = update(technician_prior(), z_record(50, 0), 100, 7);
  const PosteriorSummary s = summarize(e);
  const double oracle = 1.0 / (1.0 + std::pow(0.5, 50));
  CHECK(s.mean_bloch->z() == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(s.mean_bloch->z() - 1.0) <= 1e-10);
  // evidence: 0.5 * 1 + 0.5 * 2^-50
  CHECK(e.log_evidence == doctest::Approx(std::log(0.5 + 0.5 * std::pow(0.5, 50))).epsilon(1e-12));
}

TEST_CASE("ensemble concentrates: bloch-uniform, z-axis 750 of 1000") {
  const PosteriorEnsemble e = update(PriorSpec::bloch_uniform(), z_record(750, 250), 20000, 8);
  CHECK(std::abs(summarize(e).mean_bloch->z() - 0.5) <= 0.05);
}

TEST_CASE("ensemble: batch equals sequential") {
  const MeasurementRecord r = random_record(120, 9, BlochVector(0.2, 0.1, 0.6));
  const PosteriorEnsemble batch = update(PriorSpec::feynman(), r, 1000, 10);
  PosteriorEnsemble seq = update(PriorSpec::feynman(), r.prefix(40), 1000, 10);
  seq = update(seq, r.suffix(40).prefix(50));
  seq = update(seq, r.suffix(90));
  const Eigen::VectorXd a = batch.normalized_weights(), b = seq.normalized_weights();
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(seq.log_evidence == doctest::Approx(batch.log_evidence).epsilon(1e-12));
}

TEST_CASE("ensemble: permuted record gives bitwise identical output") {
  MeasurementRecord r = random_record(150, 11, BlochVector(-0.3, 0.2, 0.4));
  MeasurementRecord s = r;
  std::mt19937_64 rng(12);
  std::shuffle(s.entries().begin(), s.entries().end(), rng);
  const PosteriorEnsemble a = update(PriorSpec::purity_biased(BiasFunction::power(1)), r, 500, 13);
  const PosteriorEnsemble b = update(PriorSpec::purity_biased(BiasFunction::power(1)), s, 500, 13);
  CHECK(a.log_evidence == b.log_evidence);
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    CHECK(a.particles[i].log_weight == b.particles[i].log_weight);
  }
  const BlochGrid ga = update_grid(BlochGrid::uniform(31), r), gb = update_grid(BlochGrid::uniform(31), s);
  CHECK(ga.log_mass() == gb.log_mass());
  CHECK(ga.log_evidence() == gb.log_evidence());
}

TEST_CASE("ensemble: data impossible under the prior") {
  const auto only_up = PriorSpec::discrete({{kUpZ, 1.0}});
  CHECK_THROWS_AS(update(only_up, z_record(0, 1), 100, 1), ImpossibleData);
  CHECK_THROWS_AS(update_discrete(discrete_prior(only_up), z_record(0, 1)), ImpossibleData);
}

TEST_CASE("ensemble for n > 2 without data") {
  const PosteriorEnsemble e = update(PriorSpec::feynman(), MeasurementRecord{}, 400, 14, 3);
  const PosteriorSummary s = summarize(e);
  CHECK(s.mean_state.dim() == 3);
  CHECK_FALSE(s.mean_bloch.has_value());
  CHECK_THROWS_AS(update(PriorSpec::feynman(), z_record(1, 0), 400, 14, 3), DomainError);
}

TEST_CASE("grid: uniform prior and no data") {
  const BlochGrid g = update_grid(BlochGrid::uniform(41), MeasurementRecord{});
  CHECK(g.masses().sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.masses().maxCoeff() == doctest::Approx(g.masses().minCoeff()).epsilon(1e-12));
  CHECK(g.log_evidence() == 0.0);
}

TEST_CASE("grid: z-marginal peaks at z_exp") {
  const BlochGrid g = update_grid(BlochGrid::uniform(), z_record(70, 30));
  const Eigen::VectorXd m = g.marginal(2);
  Eigen::Index k;
  m.maxCoeff(&k);
  CHECK(std::abs(g.node(static_cast<int>(k)) - 0.4) <= 0.02 + 1e-12);
  CHECK(g.masses().sum() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("grid: balanced counts concentrate at the origin") {
  MeasurementRecord r;
  for (const auto& a : {MeasurementAxis::x(), MeasurementAxis::y(), MeasurementAxis::z()}) {
    for (int i = 0; i < 2000; ++i) r.push(a, i % 2 ? 1 : -1);
  }
  const PosteriorSummary s = summarize(update_grid(BlochGrid::uniform(), r));
  CHECK(s.mean_bloch->r() <= 1e-9);
  CHECK(s.map_bloch->r() <= 1e-12);
  CHECK((s.mean_state.matrix() - DensityMatrix::maximally_mixed(2).matrix()).norm() <= 1e-9);
  CHECK((*s.credible)[0].two_sigma.hi <= 0.1);
}

TEST_CASE("grid: evidence decomposition") {
  const MeasurementRecord r = random_record(300, 15, BlochVector(0.5, -0.2, 0.3));
  const BlochGrid prior = BlochGrid::uniform(51);
  const BlochGrid all = update_grid(prior, r);
  const BlochGrid first = update_grid(prior, r.prefix(120));
  const BlochGrid second = update_grid(first, r.suffix(120));
  CHECK(std::abs(second.log_evidence() - all.log_evidence()) <= 1e-9);
  // independent oracle: brute-force log sum over cells
  double top = -1e300;
  std::vector<double> terms;
  for (Eigen::Index c = 0; c < prior.size(); ++c) {
    const auto ll = log_likelihood(BlochVector(Vector3d(prior.centers().col(c))), r);
    if (!ll) continue;
    terms.push_back(prior.log_mass()[c] + *ll);
    top = std::max(top, terms.back());
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  CHECK(all.log_evidence() == doctest::Approx(top + std::log(acc)).epsilon(1e-12));
}

TEST_CASE("grid: impossible data") {
  auto spike = BlochGrid::from_density(21, [](const Vector3d& v) { return v.z() > 0.95 ? 1.0 : 0.0; });
  CHECK_NOTHROW(update_grid(spike, z_record(5, 0)));
  MeasurementRecord r;
  r.push(MeasurementAxis::z(), -1);
  // only the north pole carries mass, and it never yields -1 along z
  auto pole = BlochGrid::from_density(21, [](const Vector3d& v) { return v.z() > 0.999 ? 1.0 : 0.0; });
  CHECK_THROWS_AS(update_grid(pole, r), ImpossibleData);
}

TEST_CASE("grid: unitary equivariance") {
  const MeasurementRecord r = random_record(60, 16, BlochVector(0.3, 0.1, 0.5));
  // rotation by 90 degrees about z maps the lattice onto itself
  Eigen::Matrix3d rot;
  rot << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  MeasurementRecord rr;
  for (const auto& m : r) rr.push(MeasurementAxis::normalized(rot * m.axis.vector()), m.outcome);
  const BlochGrid g = update_grid(BlochGrid::uniform(41), r);
  const BlochGrid h = update_grid(BlochGrid::uniform(41), rr);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < g.size(); ++c) {
    const Eigen::Index d = h.locate(rot * g.centers().col(c));
    REQUIRE(d >= 0);
    worst = std::max(worst, std::abs(g.density_dv(c) - h.density_dv(d)));
  }
  CHECK(worst <= 1e-3);

  // a generic rotation, compared at the posterior mean
  const Eigen::AngleAxisd aa(0.7, Vector3d(1, 2, 2).normalized());
  MeasurementRecord rg;
  for (const auto& m : r) rg.push(MeasurementAxis::normalized(aa * m.axis.vector()), m.outcome);
  const auto s1 = summarize(update_grid(BlochGrid::uniform(), r));
  const auto s2 = summarize(update_grid(BlochGrid::uniform(), rg));
  CHECK((aa * s1.mean_bloch->v - s2.mean_bloch->v).norm() <= 1e-2);
}

TEST_CASE("grid vs classical posterior on a z-only record") {
  const BlochGrid prior = BlochGrid::uniform();
  const BlochGrid post = update_grid(prior, z_record(70, 30));
  const int m = prior.resolution();
  Eigen::VectorXd h(m), p0(m);
  const Eigen::VectorXd pm = prior.marginal(2);
  for (int i = 0; i < m; ++i) {
    h[i] = 0.5 * (1 + prior.node(i));
    p0[i] = pm[i];
  }
  const auto classical = posterior_density({70, 30}, MixingDensity::normalized(h, p0),
                                           std::span<const double>(h.data(), m));
  const Eigen::VectorXd qm = post.marginal(2);
  const auto quantum = MixingDensity::normalized(h, qm);
  CHECK((classical.values() - quantum.values()).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("discrete posterior and trajectory") {
  const DiscretePosterior prior = discrete_prior(technician_prior());
  MeasurementRecord r;
  for (int i = 0; i < 10; ++i) r.push(MeasurementAxis::z(), 1);
  const auto traj = discrete_trajectory(prior, r);
  REQUIRE(traj.size() == 10);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    // the sigma_x odds halve with every sigma_z = +1 outcome
    const double odds = traj[t][1] / traj[t][0];
    CHECK(odds == doctest::Approx(std::pow(0.5, double(t + 1))).epsilon(1e-13));
  }
  const DiscretePosterior post = update_discrete(prior, r);
  CHECK(post.probs[0] == traj.back()[0]);
  const PosteriorSummary s = summarize(update_discrete(prior, z_record(1, 0).prefix(0)));
  CHECK(s.mean_bloch->x() == doctest::Approx(0.5));
  // x-axis -1 excludes the sigma_x hypothesis
  MeasurementRecord xm;
  xm.push(MeasurementAxis::x(), -1);
  const PosteriorSummary one = summarize(update_discrete(prior, xm));
  CHECK(one.mean_bloch->z() == doctest::Approx(1.0));
  CHECK((one.mean_state.matrix() - kUpZ.matrix()).norm() <= 1e-15);
}

TEST_CASE("posterior mean is a valid state") {
  const MeasurementRecord r = random_record(80, 17, BlochVector(0.0, 0.7, 0.7));
  const auto s = summarize(update(PriorSpec::feynman(), r, 3000, 18));
  CHECK(s.mean_state.eigenvalues().minCoeff() >= 0.0);
  CHECK(s.mean_bloch->r() <= 1.0);
  CHECK((*s.credible)[1].one_sigma.lo <= s.mean_bloch->y());
  CHECK((*s.credible)[1].one_sigma.hi >= s.mean_bloch->y());
}

TEST_CASE("bias_report") {
  CHECK(bias_report(PriorSpec::bloch_uniform(), BlochVector(0.3, 0.2, 0.1)) == 0.0);
  CHECK(bias_report(PriorSpec::purity_biased(BiasFunction::power(2)), BlochVector()) ==
        -std::numeric_limits<double>::infinity());
  CHECK(bias_report(PriorSpec::purity_biased(BiasFunction::linear()), BlochVector(0, 0, 1)) ==
        doctest::Approx(std::log(3.0)));
  CHECK_THROWS_AS(bias_report(technician_prior(), BlochVector()), NotApplicable);
}

TEST_CASE("results do not depend on the worker count") {
  const MeasurementRecord r = random_record(90, 19, BlochVector(0.1, 0.4, -0.2));
  setenv("BAYESTOMO_THREADS", "1", 1);
  const BlochGrid g1 = update_grid(BlochGrid::uniform(), r);
  const PosteriorEnsemble e1 = update(PriorSpec::feynman(), r, 20000, 20);
  setenv("BAYESTOMO_THREADS", "7", 1);
  const BlochGrid g7 = update_grid(BlochGrid::uniform(), r);
  const PosteriorEnsemble e7 = update(PriorSpec::feynman(), r, 20000, 20);
  unsetenv("BAYESTOMO_THREADS");
  CHECK(g1.log_mass() == g7.log_mass());
  CHECK(g1.log_evidence() == g7.log_evidence());
  CHECK(e1.log_evidence == e7.log_evidence);
  CHECK(e1.normalized_weights() == e7.normalized_weights());
}

TEST_CASE("long records keep weights normalized") {
  const auto plan = scenario_plan(Scenario::coin_flip_technician, 30000, 21);
  const MeasurementRecord r = run_experiment(plan);
  const PosteriorEnsemble e = update(PriorSpec::purity_biased(BiasFunction::power(2)), r, 2000, 22);
  CHECK(e.normalized_weights().sum() == doctest::Approx(1.0).epsilon(1e-13));
  const PosteriorSummary s = summarize(e);
  CHECK(s.mean_state.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-14));
  const BlochGrid g = update_grid(BlochGrid::uniform(41), r);
  CHECK(g.masses().sum() == doctest::Approx(1.0).epsilon(1e-13));
}
