#include "bayestomo/beta_bernoulli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "bayestomo/errors.hpp"
#include "bayestomo/quadrature.hpp"

namespace bayestomo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// n * log(x) with the convention 0 * log(0) = 0.
double xlogy(double n, double x) {
  if (n == 0.0) return 0.0;
  return n * std::log(x);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    s += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  }
  return s;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_probability(double h) {
  if (!(h >= 0.0 && h <= 1.0)) {
    throw DomainError("h must lie in [0, 1]");
  }
}

}  // namespace

BinaryCounts BinaryCounts::parse(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw MalformedInput("counts must be given as N_A,N_B");
  }
  auto parse_one = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw MalformedInput("invalid count '" + std::string(s) + "'");
    }
    return v;
  };
  return {parse_one(text.substr(0, comma)), parse_one(text.substr(comma + 1))};
}

BinaryCounts BinaryCounts::from_string(std::string_view outcomes) {
  BinaryCounts c;
  for (char ch : outcomes) {
    if (ch == 'A') {
      ++c.n_a;
    } else if (ch == 'B') {
      ++c.n_b;
    } else {
      throw MalformedInput("outcome strings use only 'A' and 'B'");
    }
  }
  return c;
}

MixingDensity MixingDensity::uniform() { return beta(1.0, 1.0); }

MixingDensity MixingDensity::beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("beta parameters must be positive and finite");
  }
  MixingDensity d;
  d.kind_ = (a == 1.0 && b == 1.0) ? Kind::uniform : Kind::beta;
  d.a_ = a;
  d.b_ = b;
  d.log_beta_ = log_beta_fn(a, b);
  return d;
}

MixingDensity MixingDensity::tabulated(Eigen::VectorXd h,
                                       Eigen::VectorXd density) {
  if (h.size() < 2 || h.size() != density.size()) {
    throw MalformedInput("tabulated density needs >= 2 matching (h, p) pairs");
  }
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(h[i] >= 0.0 && h[i] <= 1.0)) {
      throw DomainError("tabulated grid must lie in [0, 1]");
    }
    if (i > 0 && !(h[i] > h[i - 1])) {
      throw MalformedInput("tabulated grid must be strictly increasing");
    }
    if (!(density[i] >= 0.0) || !std::isfinite(density[i])) {
      throw DomainError("tabulated density must be finite and nonnegative");
    }
  }
  const double mass = trapezoid(as_span(h), as_span(density));
  if (std::abs(mass - 1.0) > kNormalizationTol) {
    std::ostringstream os;
    os.precision(17);
    os << "tabulated density integrates to " << mass << ", not 1";
    throw DomainError(os.str());
  }
  MixingDensity d;
  d.kind_ = Kind::tabulated;
  d.grid_ = std::move(h);
  d.values_ = std::move(density);
  return d;
}

MixingDensity MixingDensity::normalized(Eigen::VectorXd h,
                                        Eigen::VectorXd density) {
  if (h.size() != density.size()) {
    throw MalformedInput("tabulated density needs matching (h, p) pairs");
  }
  const double mass = trapezoid(as_span(h), as_span(density));
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw DomainError("tabulated density has no mass");
  }
  density /= mass;
  return tabulated(std::move(h), std::move(density));
}

double MixingDensity::operator()(double h) const {
  if (kind_ != Kind::tabulated) {
    if (h < 0.0 || h > 1.0) return 0.0;
    return std::exp(log_density(h));
  }
  if (h < grid_[0] || h > grid_[grid_.size() - 1]) return 0.0;
  const double* begin = grid_.data();
  const double* end = begin + grid_.size();
  auto it = std::upper_bound(begin, end, h);
  if (it == end) return values_[grid_.size() - 1];
  const auto i = static_cast<Eigen::Index>(it - begin) - 1;
  const double t = (h - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

double MixingDensity::log_density(double h) const {
  if (kind_ == Kind::tabulated) {
    const double p = (*this)(h);
    return p > 0.0 ? std::log(p) : kNegInf;
  }
  if (h < 0.0 || h > 1.0) return kNegInf;
  return xlogy(a_ - 1.0, h) + xlogy(b_ - 1.0, 1.0 - h) - log_beta_;
}

std::string MixingDensity::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::uniform:
      return "uniform";
    case Kind::beta:
      os << "beta:" << a_ << "," << b_;
      return os.str();
    case Kind::tabulated:
      os << "tabulated(" << grid_.size() << " points)";
      return os.str();
  }
  return "unknown";
}

double log_likelihood(const BinaryCounts& counts, double h) {
  check_probability(h);
  return xlogy(static_cast<double>(counts.n_a), h) +
         xlogy(static_cast<double>(counts.n_b), 1.0 - h);
}

double likelihood(const BinaryCounts& counts, double h) {
  return std::exp(log_likelihood(counts, h));
}

double log_evidence_quadrature(const BinaryCounts& counts,
                               const MixingDensity& prior) {
  const double n = static_cast<double>(counts.total());
  const double peak = n > 0.0 ? static_cast<double>(counts.n_a) / n : 0.5;
  const double sigma =
      n > 0.0 ? std::sqrt(peak * (1.0 - peak) / n) + 1.0 / n : 1.0;

  // Pieces of [0, 1] on which the prior is smooth.
  std::vector<double> breaks{0.0, 1.0};
  if (prior.kind() == MixingDensity::Kind::tabulated) {
    const auto& g = prior.grid();
    breaks.assign(g.data(), g.data() + g.size());
  }
  for (double k : {0.0, -20.0, -5.0, 5.0, 20.0}) {
    const double x = peak + k * sigma;
    if (x > breaks.front() && x < breaks.back()) breaks.push_back(x);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // Scale by the largest likelihood on the prior's support so the integrand
  // is O(1) somewhere it matters. The likelihood is unimodal about `peak`.
  double log_scale = kNegInf;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (prior(a) <= 0.0 && prior(b) <= 0.0 && prior(0.5 * (a + b)) <= 0.0) {
      continue;
    }
    log_scale = std::max(log_scale,
                         log_likelihood(counts, std::clamp(peak, a, b)));
  }
  if (log_scale == kNegInf) {
    throw ImpossibleData("prior support is disjoint from the likelihood");
  }

  auto integrand = [&](double h) {
    const double p = prior(h);
    if (p <= 0.0) return 0.0;
    return std::exp(log_likelihood(counts, h) - log_scale) * p;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += quadrature::integrate(integrand, breaks[i], breaks[i + 1], 1e-13)
                 .value;
  }
  if (!(total > 0.0)) {
    throw ImpossibleData("evidence is zero: data impossible under the prior");
  }
  return log_scale + std::log(total);
}

double log_evidence(const BinaryCounts& counts, const MixingDensity& prior) {
  if (prior.kind() == MixingDensity::Kind::tabulated) {
    return log_evidence_quadrature(counts, prior);
  }
  const double a = prior.a() + static_cast<double>(counts.n_a);
  const double b = prior.b() + static_cast<double>(counts.n_b);
  return log_beta_fn(a, b) - log_beta_fn(prior.a(), prior.b());
}

double evidence(const BinaryCounts& counts, const MixingDensity& prior) {
  return std::exp(log_evidence(counts, prior));
}

MixingDensity posterior_density(const BinaryCounts& counts,
                                const MixingDensity& prior,
                                std::span<const double> grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd h(n), logp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h[i] = grid[i];
    const double lp = prior.log_density(h[i]);
    logp[i] = lp == kNegInf ? kNegInf : lp + log_likelihood(counts, h[i]);
  }
  const double top = logp.maxCoeff();
  if (top == kNegInf || std::isnan(top)) {
    throw ImpossibleData("posterior has no mass on the grid");
  }
  Eigen::VectorXd density = (logp.array() - top).exp().matrix();
  return MixingDensity::normalized(std::move(h), std::move(density));
}

MixingDensity posterior_density(const BinaryCounts& counts,
                                const MixingDensity& prior,
                                std::size_t grid_points) {
  if (grid_points < 3) throw MalformedInput("posterior grid needs >= 3 points");
  std::vector<double> grid(grid_points);
  const double step = 1.0 / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = static_cast<double>(i) * step;
  }
  grid.back() = 1.0;
  return posterior_density(counts, prior, std::span<const double>(grid));
}

double richardson_error(const MixingDensity& tabulated) {
  const auto& x = tabulated.grid();
  const auto& y = tabulated.values();
  const Eigen::Index n = x.size();
  if (n < 3) return 0.0;
  // Every other point; a trailing odd interval is shared by both sums.
  const Eigen::Index last = (n - 1) % 2 == 0 ? n - 1 : n - 2;
  double fine = 0.0, coarse = 0.0;
  for (Eigen::Index i = 0; i < last; ++i) {
    fine += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  }
  for (Eigen::Index i = 0; i + 2 <= last; i += 2) {
    coarse += 0.5 * (y[i] + y[i + 2]) * (x[i + 2] - x[i]);
  }
  const double tail = trapezoid(as_span(x).subspan(last), as_span(y).subspan(last));
  return std::abs(fine - coarse) / 3.0 / (fine + tail);
}

double quantile(const MixingDensity& tabulated, double q) {
  if (tabulated.kind() != MixingDensity::Kind::tabulated) {
    throw NotApplicable("quantile() expects a tabulated density");
  }
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level outside [0, 1]");
  const auto& x = tabulated.grid();
  const auto& y = tabulated.values();
  const Eigen::Index n = x.size();
  std::vector<double> mass(static_cast<std::size_t>(n - 1));
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    mass[i] = 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    total += mass[i];
  }
  double remaining = q * total;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (remaining > mass[i] && i + 2 < n) {
      remaining -= mass[i];
      continue;
    }
    const double dx = x[i + 1] - x[i];
    const double f0 = y[i];
    const double slope = (y[i + 1] - y[i]) / dx;
    const double r = std::min(remaining, mass[i]);
    const double disc = std::max(f0 * f0 + 2.0 * slope * r, 0.0);
    const double denom = f0 + std::sqrt(disc);
    const double t = denom > 0.0 ? 2.0 * r / denom : 0.0;
    return x[i] + std::clamp(t, 0.0, dx);
  }
  return x[n - 1];
}

PeakWidth peak_width(const MixingDensity& tabulated, double mass) {
  if (tabulated.kind() != MixingDensity::Kind::tabulated) {
    throw NotApplicable("peak_width() expects a tabulated density");
  }
  const auto& x = tabulated.grid();
  const auto& y = tabulated.values();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < y.size(); ++i) {
    if (y[i] > y[best]) best = i;
  }
  PeakWidth out;
  out.mode = x[best];
  if (best > 0 && best + 1 < y.size()) {
    const double x0 = x[best - 1], x1 = x[best], x2 = x[best + 1];
    const double y0 = y[best - 1], y1 = y[best], y2 = y[best + 1];
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) -
                       (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den != 0.0) {
      out.mode = std::clamp(x1 - 0.5 * num / den, x0, x2);
    }
  }
  const double lo = quantile(tabulated, 0.5 - 0.5 * mass);
  const double hi = quantile(tabulated, 0.5 + 0.5 * mass);
  out.width = 0.5 * (hi - lo);
  return out;
}

PeakWidth posterior_peak_width(const BinaryCounts& counts,
                               const MixingDensity& prior,
                               std::size_t grid_points) {
  if (counts.total() == 0) {
    throw DomainError("peak and width need at least one trial");
  }
  return peak_width(posterior_density(counts, prior, grid_points));
}

double de_finetti_string_prob(const MixingDensity& prior,
                              std::string_view outcomes) {
  return std::exp(log_evidence(BinaryCounts::from_string(outcomes), prior));
}

StringAssignment de_finetti_assignment(const MixingDensity& prior,
                                       int max_len) {
  if (max_len < 1) throw MalformedInput("max_len must be >= 1");
  StringAssignment out;
  out.max_len = max_len;
  for (int len = 1; len <= max_len; ++len) {
    for (auto& s : binary_strings(len)) {
      const double p = de_finetti_string_prob(prior, s);
      out.prob.emplace(std::move(s), p);
    }
  }
  return out;
}

}  // namespace bayestomo
