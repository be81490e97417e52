#include "bayestomo/bayes_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "bayestomo/beta_bernoulli.hpp"
#include "bayestomo/errors.hpp"
#include "bayestomo/parallel.hpp"

namespace bayestomo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double top = kNegInf;
  for (double x : v) top = std::max(top, x);
  if (top == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) {
    if (x != kNegInf) s += std::exp(x - top);
  }
  return top + std::log(s);
}

// exp(v - top) / sum. Dividing by the sum directly, rather than subtracting
// log_sum_exp, keeps the result summing to one when |top| is large.
std::vector<double> normalized_exp(std::span<const double> v) {
  double top = kNegInf;
  for (double x : v) top = std::max(top, x);
  std::vector<double> w(v.size(), 0.0);
  if (top == kNegInf) return w;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != kNegInf) s += w[i] = std::exp(v[i] - top);
  }
  for (double& x : w) x /= s;
  return w;
}

std::vector<double> log_weights(const PosteriorEnsemble& e) {
  std::vector<double> out;
  out.reserve(e.particles.size());
  for (const auto& p : e.particles) out.push_back(p.log_weight.value_or(kNegInf));
  return out;
}

// Smallest value whose cumulative weight reaches q of the total.
double weighted_quantile(const std::vector<std::pair<double, double>>& sorted,
                         double total, double q) {
  double cum = 0.0;
  for (const auto& [x, w] : sorted) {
    cum += w;
    if (cum >= q * total) return x;
  }
  return sorted.back().first;
}

CoordinateSummary summarize_weighted(std::vector<std::pair<double, double>> vw) {
  std::sort(vw.begin(), vw.end());
  double total = 0.0, mean = 0.0;
  for (const auto& [x, w] : vw) {
    total += w;
    mean += w * x;
  }
  CoordinateSummary s;
  s.mean = mean / total;
  s.one_sigma = {weighted_quantile(vw, total, 0.5 - 0.5 * kOneSigmaMass),
                 weighted_quantile(vw, total, 0.5 + 0.5 * kOneSigmaMass)};
  s.two_sigma = {weighted_quantile(vw, total, 0.5 - 0.5 * kTwoSigmaMass),
                 weighted_quantile(vw, total, 0.5 + 0.5 * kTwoSigmaMass)};
  return s;
}

std::array<CoordinateSummary, 3> summarize_points(
    const std::vector<BlochVector>& points, const Eigen::VectorXd& w) {
  std::array<CoordinateSummary, 3> out;
  for (int a = 0; a < 3; ++a) {
    std::vector<std::pair<double, double>> vw;
    vw.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (w[static_cast<Eigen::Index>(i)] > 0.0) {
        vw.emplace_back(points[i].v[a], w[static_cast<Eigen::Index>(i)]);
      }
    }
    out[a] = summarize_weighted(std::move(vw));
  }
  return out;
}

// Quantile of node masses read as a histogram with bins of width h centred
// on the nodes.
double histogram_quantile(const Eigen::VectorXd& mass, double first_node,
                          double h, double q) {
  const double total = mass.sum();
  double cum = 0.0;
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    if (cum + mass[i] >= q * total && mass[i] > 0.0) {
      const double frac = (q * total - cum) / mass[i];
      const double x = first_node + h * (static_cast<double>(i) - 0.5 + frac);
      return std::clamp(x, -1.0, 1.0);
    }
    cum += mass[i];
  }
  return 1.0;
}

}  // namespace

std::vector<AxisTally> tally(const MeasurementRecord& record) {
  std::map<std::array<double, 3>, std::pair<std::uint64_t, std::uint64_t>> counts;
  for (const auto& m : record) {
    const auto& a = m.axis.vector();
    auto& c = counts[{a.x(), a.y(), a.z()}];
    (m.outcome > 0 ? c.first : c.second) += 1;
  }
  std::vector<AxisTally> out;
  out.reserve(counts.size());
  for (const auto& [a, c] : counts) {
    out.push_back({MeasurementAxis(a[0], a[1], a[2]), c.first, c.second});
  }
  return out;
}

std::optional<double> log_likelihood(const BlochVector& state,
                                     std::span<const AxisTally> tallies) {
  double ll = 0.0;
  for (const auto& t : tallies) {
    const double plus = born_prob(state, t.axis, +1);
    const double minus = born_prob(state, t.axis, -1);
    if ((t.n_plus > 0 && plus == 0.0) || (t.n_minus > 0 && minus == 0.0)) {
      return std::nullopt;
    }
    if (t.n_plus > 0) ll += static_cast<double>(t.n_plus) * std::log(plus);
    if (t.n_minus > 0) ll += static_cast<double>(t.n_minus) * std::log(minus);
  }
  return ll;
}

std::optional<double> log_likelihood(const BlochVector& state,
                                     const MeasurementRecord& record) {
  const auto t = tally(record);
  return log_likelihood(state, t);
}

std::optional<double> log_likelihood(const DensityMatrix& rho,
                                     const MeasurementRecord& record) {
  return log_likelihood(density_to_bloch(rho), record);
}

Eigen::VectorXd PosteriorEnsemble::normalized_weights() const {
  const auto w = normalized_exp(log_weights(*this));
  return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

double PosteriorEnsemble::effective_sample_size() const {
  const Eigen::VectorXd w = normalized_weights();
  return 1.0 / w.squaredNorm();
}

bool PosteriorEnsemble::low_ess() const {
  const double floor = std::max(10.0, 0.01 * static_cast<double>(particles.size()));
  return effective_sample_size() < floor;
}

PosteriorEnsemble update(PosteriorEnsemble ensemble, const MeasurementRecord& record) {
  const double before = log_sum_exp(log_weights(ensemble));
  if (before == kNegInf) throw ImpossibleData("ensemble carries no weight");
  if (record.empty()) return ensemble;

  const auto tallies = tally(record);
  auto& ps = ensemble.particles;
  for (const auto& p : ps) {
    if (p.state.dim() != 2) {
      throw DomainError("spin measurement records apply to qubit ensembles");
    }
  }
  parallel_for(ps.size(), [&](std::size_t i) {
    if (!ps[i].log_weight) return;
    const auto ll = log_likelihood(density_to_bloch(ps[i].state), tallies);
    if (ll) {
      *ps[i].log_weight += *ll;
    } else {
      ps[i].log_weight.reset();
    }
  });
  const double after = log_sum_exp(log_weights(ensemble));
  if (after == kNegInf) {
    throw ImpossibleData("data impossible under prior support");
  }
  ensemble.log_evidence += after - before;
  return ensemble;
}

PosteriorEnsemble update(const PriorSpec& prior, const MeasurementRecord& record,
                         std::size_t n_particles, std::uint64_t seed, int dim) {
  prior.check_dimension(dim);
  PosteriorEnsemble ens;
  auto weight_to_log = [](double w) -> std::optional<double> {
    if (w > 0.0) return std::log(w);
    return std::nullopt;
  };
  if (const auto* d = std::get_if<PriorSpec::Discrete>(&prior.kind)) {
    for (const auto& [rho, w] : d->hypotheses) {
      ens.particles.push_back({rho, weight_to_log(w)});
    }
  } else {
    if (n_particles < kMinParticles) {
      throw DomainError("ensembles need at least 100 particles");
    }
    for (auto& ws : sample_prior(prior, dim, n_particles, seed)) {
      ens.particles.push_back({std::move(ws.state), weight_to_log(ws.weight)});
    }
  }
  return update(std::move(ens), record);
}

BlochGrid make_prior_grid(const PriorSpec& prior, int resolution) {
  if (std::holds_alternative<PriorSpec::Discrete>(prior.kind)) {
    throw NotApplicable("discrete priors have no grid representation");
  }
  if (std::holds_alternative<PriorSpec::BlochUniform>(prior.kind)) {
    return BlochGrid::uniform(resolution);
  }
  if (const auto* t = std::get_if<PriorSpec::Tabulated>(&prior.kind)) {
    if (t->grid->resolution() == resolution) return *t->grid;
  }
  return BlochGrid::from_density(
      resolution, [&](const Eigen::Vector3d& p) { return qubit_density_dv(prior, p); });
}

BlochGrid update_grid(const BlochGrid& prior, const MeasurementRecord& record) {
  if (record.empty()) return prior;
  const auto tallies = tally(record);
  Eigen::VectorXd factor(prior.size());
  const auto& centres = prior.centers();
  parallel_for(static_cast<std::size_t>(prior.size()), [&](std::size_t i) {
    const auto c = static_cast<Eigen::Index>(i);
    const auto ll = log_likelihood(BlochVector(Eigen::Vector3d(centres.col(c))), tallies);
    factor[c] = ll.value_or(kNegInf);
  });
  return prior.reweighted(factor);
}

DiscretePosterior discrete_prior(const PriorSpec& prior) {
  const auto* d = std::get_if<PriorSpec::Discrete>(&prior.kind);
  if (!d) throw NotApplicable("expected a discrete prior");
  DiscretePosterior out;
  for (const auto& [rho, w] : d->hypotheses) {
    out.hypotheses.push_back(rho);
    out.probs.push_back(w);
  }
  return out;
}

DiscretePosterior update_discrete(const DiscretePosterior& prior,
                                  const MeasurementRecord& record) {
  const auto tallies = tally(record);
  std::vector<double> lp(prior.probs.size());
  for (std::size_t i = 0; i < lp.size(); ++i) {
    const auto ll = log_likelihood(density_to_bloch(prior.hypotheses[i]), tallies);
    lp[i] = (prior.probs[i] > 0.0 && ll) ? std::log(prior.probs[i]) + *ll : kNegInf;
  }
  const double total = log_sum_exp(lp);
  if (total == kNegInf) throw ImpossibleData("data impossible under every hypothesis");
  DiscretePosterior out = prior;
  out.probs = normalized_exp(lp);
  out.log_evidence = prior.log_evidence + total;
  return out;
}

std::vector<std::vector<double>> discrete_trajectory(const DiscretePosterior& prior,
                                                     const MeasurementRecord& record) {
  const std::size_t k = prior.hypotheses.size();
  std::vector<BlochVector> states;
  std::vector<double> lp(k);
  for (std::size_t i = 0; i < k; ++i) {
    states.push_back(density_to_bloch(prior.hypotheses[i]));
    lp[i] = prior.probs[i] > 0.0 ? std::log(prior.probs[i]) : kNegInf;
  }
  std::vector<std::vector<double>> out;
  out.reserve(record.size());
  for (const auto& m : record) {
    for (std::size_t i = 0; i < k; ++i) {
      if (lp[i] == kNegInf) continue;
      const double p = born_prob(states[i], m.axis, m.outcome);
      lp[i] = p > 0.0 ? lp[i] + std::log(p) : kNegInf;
    }
    if (log_sum_exp(lp) == kNegInf) throw ImpossibleData("data impossible under every hypothesis");
    out.push_back(normalized_exp(lp));
  }
  return out;
}

namespace {

PosteriorSummary summarize_states(const std::vector<DensityMatrix>& states,
                                  const Eigen::VectorXd& w) {
  const Eigen::Index dim = states.front().dim();
  ComplexMatrix<double> mean = ComplexMatrix<double>::Zero(dim, dim);
  Eigen::Index best = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) mean += w[i] * states[static_cast<std::size_t>(i)].matrix();
    if (w[i] > w[best]) best = i;
  }
  PosteriorSummary s;
  // the weights sum to one only up to rounding
  s.mean_state = DensityMatrix(mean / mean.trace().real());
  s.map_state = states[static_cast<std::size_t>(best)];
  s.ess = 1.0 / w.squaredNorm();
  if (dim == 2) {
    std::vector<BlochVector> pts;
    pts.reserve(states.size());
    for (const auto& rho : states) pts.push_back(density_to_bloch(rho));
    s.mean_bloch = density_to_bloch(s.mean_state);
    s.map_bloch = pts[static_cast<std::size_t>(best)];
    s.credible = summarize_points(pts, w);
  }
  return s;
}

}  // namespace

PosteriorSummary summarize(const PosteriorEnsemble& post) {
  if (post.particles.empty()) throw DomainError("empty ensemble");
  std::vector<DensityMatrix> states;
  states.reserve(post.particles.size());
  for (const auto& p : post.particles) states.push_back(p.state);
  PosteriorSummary s = summarize_states(states, post.normalized_weights());
  s.log_evidence = post.log_evidence;
  s.low_ess_warning = post.low_ess();
  return s;
}

PosteriorSummary summarize(const DiscretePosterior& post) {
  if (post.hypotheses.empty()) throw DomainError("empty hypothesis set");
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(
      post.probs.data(), static_cast<Eigen::Index>(post.probs.size()));
  PosteriorSummary s = summarize_states(post.hypotheses, w);
  s.log_evidence = post.log_evidence;
  return s;
}

PosteriorSummary summarize(const BlochGrid& post) {
  const Eigen::VectorXd m = post.masses();
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.size(); ++c) {
    if (m[c] > m[best]) best = c;
  }
  const Eigen::Vector3d mean = post.centers() * m;
  PosteriorSummary s;
  s.mean_bloch = BlochVector(mean);
  s.map_bloch = BlochVector(Eigen::Vector3d(post.centers().col(best)));
  s.mean_state = bloch_to_density(*s.mean_bloch);
  s.map_state = bloch_to_density(*s.map_bloch);
  std::array<CoordinateSummary, 3> cred;
  for (int a = 0; a < 3; ++a) {
    const Eigen::VectorXd marg = post.marginal(a);
    const double h = post.spacing();
    cred[a].mean = mean[a];
    cred[a].one_sigma = {histogram_quantile(marg, -1.0, h, 0.5 - 0.5 * kOneSigmaMass),
                         histogram_quantile(marg, -1.0, h, 0.5 + 0.5 * kOneSigmaMass)};
    cred[a].two_sigma = {histogram_quantile(marg, -1.0, h, 0.5 - 0.5 * kTwoSigmaMass),
                         histogram_quantile(marg, -1.0, h, 0.5 + 0.5 * kTwoSigmaMass)};
  }
  s.credible = cred;
  s.log_evidence = post.log_evidence();
  s.ess = 1.0 / m.squaredNorm();
  return s;
}

double bias_report(const PriorSpec& prior, const BlochVector& posterior_mode) {
  const double d = relative_prior_density(prior, posterior_mode);
  return d > 0.0 ? std::log(d) : kNegInf;
}

}  // namespace bayestomo
