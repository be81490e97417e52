#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "bayestomo/beta_bernoulli.hpp"
#include "bayestomo/errors.hpp"
#include "bayestomo/quadrature.hpp"

using namespace bayestomo;

namespace {

// Independent oracle: Beta(a, b) log density via lgamma.
double beta_log_pdf(double h, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1) * std::log(h) +
         (b - 1) * std::log1p(-h);
}

double log_factorial(double n) { return std::lgamma(n + 1.0); }

// Max relative error of a tabulated posterior against Beta(a, b), over the
// points where the analytic density is a normal double.
double max_rel_error(const MixingDensity& post, double a, double b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < post.grid().size(); ++i) {
    const double h = post.grid()[i];
    if (h <= 0.0 || h >= 1.0) continue;
    const double lp = beta_log_pdf(h, a, b);
    if (lp < -690.0) continue;
    worst = std::max(worst, std::abs(post.values()[i] / std::exp(lp) - 1.0));
  }
  return worst;
}

}  // namespace

TEST_CASE("BinaryCounts parsing") {
  CHECK(BinaryCounts::parse("70,30") == BinaryCounts{70, 30});
  CHECK(BinaryCounts::parse(" 1 , 2 ") == BinaryCounts{1, 2});
  CHECK(BinaryCounts::from_string("AAB") == BinaryCounts{2, 1});
  CHECK_THROWS_AS(BinaryCounts::parse("70"), MalformedInput);
  CHECK_THROWS_AS(BinaryCounts::parse("-1,3"), MalformedInput);
  CHECK_THROWS_AS(BinaryCounts::from_string("ABC"), MalformedInput);
}

TEST_CASE("likelihood") {
  CHECK(likelihood({0, 0}, 0.37) == 1.0);
  CHECK(likelihood({1, 1}, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(likelihood({3, 2}, 0.4) == doctest::Approx(0.02304).epsilon(1e-14));
  CHECK(likelihood({0, 3}, 1.0) == 0.0);
  CHECK(likelihood({0, 0}, 0.0) == 1.0);
  CHECK_THROWS_AS(likelihood({1, 1}, 1.5), DomainError);
  CHECK_THROWS_AS(likelihood({1, 1}, -0.1), DomainError);
  // no underflow in log space
  CHECK(log_likelihood({5000, 5000}, 0.5) == doctest::Approx(10000 * std::log(0.5)));
}

TEST_CASE("evidence closed forms") {
  const auto u = MixingDensity::uniform();
  CHECK(evidence({0, 0}, u) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(evidence({1, 0}, u) == doctest::Approx(0.5).epsilon(1e-15));
  for (auto [na, nb] : {std::pair{3, 4}, {10, 0}, {70, 30}, {0, 1}}) {
    const double oracle = log_factorial(na) + log_factorial(nb) - log_factorial(na + nb + 1);
    CHECK(log_evidence({std::uint64_t(na), std::uint64_t(nb)}, u) ==
          doctest::Approx(oracle).epsilon(1e-13));
  }
}

TEST_CASE("quadrature evidence agrees with the Beta function") {
  std::mt19937_64 rng(5);
  const MixingDensity priors[] = {MixingDensity::uniform(), MixingDensity::beta(2, 5),
                                  MixingDensity::beta(0.5, 0.5), MixingDensity::beta(30, 3)};
  for (const auto& p : priors) {
    for (int t = 0; t < 15; ++t) {
      const std::uint64_t n = std::uniform_int_distribution<std::uint64_t>(0, 5000)(rng);
      const std::uint64_t na = std::uniform_int_distribution<std::uint64_t>(0, n)(rng);
      const BinaryCounts c{na, n - na};
      const double closed = evidence(c, p);
      const double quad = std::exp(log_evidence_quadrature(c, p));
      if (closed > 0) {
        CHECK(std::abs(quad / closed - 1.0) <= 1e-8);
      }
      CHECK(std::abs(log_evidence_quadrature(c, p) - log_evidence(c, p)) <= 1e-8);
    }
  }
}

TEST_CASE("evidence for a tabulated prior") {
  // Triangle density 2h on [0, 1]: evidence of (1, 0) is 2/3.
  Eigen::VectorXd h(3), p(3);
  h << 0.0, 0.5, 1.0;
  p << 0.0, 1.0, 2.0;
  const auto tri = MixingDensity::tabulated(h, p);
  CHECK(evidence({1, 0}, tri) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(evidence({0, 1}, tri) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("zero evidence is impossible data") {
  Eigen::VectorXd h(4), p(4);
  h << 0.0, 0.25, 0.5, 1.0;
  p << 4.0, 4.0, 0.0, 0.0;  // support [0, 0.5)
  auto left = MixingDensity::normalized(h, p);
  CHECK_NOTHROW(log_evidence({3, 0}, left));
  // a prior supported at h = 0 only cannot explain an A
  Eigen::VectorXd h2(3), p2(3);
  h2 << 0.0, 1e-9, 1.0;
  p2 << 2e9, 0.0, 0.0;
  const auto spike = MixingDensity::normalized(h2, p2);
  CHECK_THROWS_AS(posterior_density({1, 0}, spike, 3), ImpossibleData);
}

TEST_CASE("tabulated density validation") {
  Eigen::VectorXd h(2), p(2);
  h << 0.0, 1.0;
  p << 1.0, 1.5;
  CHECK_THROWS_AS(MixingDensity::tabulated(h, p), DomainError);
  p << 1.0, -1.0;
  CHECK_THROWS(MixingDensity::normalized(h, p));
  CHECK_THROWS_AS(MixingDensity::beta(0.0, 1.0), DomainError);
}

TEST_CASE("posterior_density examples") {
  const auto u = MixingDensity::uniform();
  const auto flat = posterior_density({0, 0}, u);
  CHECK(flat.values().minCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.values().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.grid().size() == 4096);

  CHECK(max_rel_error(posterior_density({7, 3}, u), 8, 4) <= 1e-6);
  CHECK(max_rel_error(posterior_density({1, 0}, MixingDensity::beta(2, 2)), 3, 2) <= 1e-6);
  CHECK(max_rel_error(posterior_density({700, 300}, u), 701, 301) <= 1e-6);
}

TEST_CASE("posterior integrates to one") {
  for (auto c : {BinaryCounts{0, 0}, BinaryCounts{3, 9}, BinaryCounts{500, 20}}) {
    const auto post = posterior_density(c, MixingDensity::beta(2, 5));
    const auto& x = post.grid();
    const auto& y = post.values();
    double total = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) total += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(richardson_error(post) < 1e-6);
  }
}

TEST_CASE("peak and width") {
  const auto u = MixingDensity::uniform();
  const PeakWidth p = posterior_peak_width({70, 30}, u);
  CHECK(std::abs(p.mode - 0.7) <= 0.01);

  const double w100 = posterior_peak_width({100, 0}, u).width;
  const double w200 = posterior_peak_width({200, 0}, u).width;
  CHECK(posterior_peak_width({100, 0}, u).mode == doctest::Approx(1.0));
  CHECK(std::abs(w200 / w100 - 0.5) <= 0.05);

  const double b100 = posterior_peak_width({50, 50}, u).width;
  const double b400 = posterior_peak_width({200, 200}, u).width;
  CHECK(std::abs(b400 / b100 - 0.5) <= 0.05);

  // Gaussian limit: half-width near sqrt(h(1-h)/N)
  CHECK(b400 == doctest::Approx(std::sqrt(0.25 / 400)).epsilon(0.02));
}

TEST_CASE("mode tie-break goes to smaller h") {
  Eigen::VectorXd h(5), p(5);
  h << 0.0, 0.25, 0.5, 0.75, 1.0;
  p << 0.0, 2.0, 0.0, 2.0, 0.0;
  const auto twin = MixingDensity::normalized(h, p);
  CHECK(peak_width(twin).mode == doctest::Approx(0.25));
}

TEST_CASE("quantile inverts the tabulated CDF") {
  const auto post = posterior_density({0, 0}, MixingDensity::uniform(), 11);
  CHECK(quantile(post, 0.0) == doctest::Approx(0.0));
  CHECK(quantile(post, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(quantile(post, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(quantile(post, 1.2), DomainError);
  CHECK_THROWS_AS(quantile(MixingDensity::uniform(), 0.5), NotApplicable);
}

TEST_CASE("de Finetti string probabilities") {
  const auto u = MixingDensity::uniform();
  CHECK(de_finetti_string_prob(u, "A") == doctest::Approx(0.5).epsilon(1e-14));
  const double aab = de_finetti_string_prob(u, "AAB");
  CHECK(de_finetti_string_prob(u, "ABA") == aab);
  CHECK(de_finetti_string_prob(u, "BAA") == aab);
  CHECK(aab == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(std::abs(de_finetti_string_prob(MixingDensity::beta(1e4, 1e4), "AA") - 0.25) <= 1e-3);
}

TEST_CASE("evidence chain rule on strings") {
  std::mt19937_64 rng(9);
  for (const auto& p : {MixingDensity::uniform(), MixingDensity::beta(2, 5), MixingDensity::beta(0.7, 3)}) {
    for (int t = 0; t < 20; ++t) {
      const std::uint64_t na = rng() % 40, nb = rng() % 40;
      const double e = evidence({na, nb}, p);
      const double split = evidence({na + 1, nb}, p) + evidence({na, nb + 1}, p);
      CHECK(split == doctest::Approx(e).epsilon(1e-12));
    }
  }
}

TEST_CASE("posterior is order invariant") {
  std::string s = "AAABBABABAAAABBBAAAA";
  std::mt19937_64 rng(1);
  const auto a = posterior_density(BinaryCounts::from_string(s), MixingDensity::beta(2, 5));
  std::shuffle(s.begin(), s.end(), rng);
  const auto b = posterior_density(BinaryCounts::from_string(s), MixingDensity::beta(2, 5));
  CHECK(a.values() == b.values());
  CHECK(a.grid() == b.grid());
}

TEST_CASE("posterior mode converges for synthetic data") {
  // |mode - h*| <= 3 width in at least 99 % of seeded runs at N = 1000
  const double truth = 0.3;
  int hits = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    std::mt19937_64 rng(1000 + r);
    std::binomial_distribution<std::uint64_t> bin(1000, truth);
    const std::uint64_t na = bin(rng);
    const PeakWidth pw = posterior_peak_width({na, 1000 - na}, MixingDensity::uniform());
    if (std::abs(pw.mode - truth) <= 3 * pw.width) ++hits;
  }
  CHECK(hits >= 198);
}

TEST_CASE("adaptive quadrature") {
  const auto r = quadrature::integrate([](double x) { return std::exp(-x * x); }, -5.0, 5.0);
  CHECK(r.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
  const auto s = quadrature::integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0);
  CHECK(s.value == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}
