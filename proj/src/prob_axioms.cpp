#include "bayestomo/prob_axioms.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bayestomo/errors.hpp"

namespace bayestomo {

Event FiniteModel::complement(const Event& event) const {
  Event out;
  for (const auto& atom : outcomes) {
    if (!event.contains(atom)) out.insert(atom);
  }
  return out;
}

bool FiniteModel::is_valid(double tol) const {
  double total = 0.0;
  for (const auto& atom : outcomes) {
    auto it = prob.find(atom);
    if (it == prob.end() || it->second < 0.0) return false;
    total += it->second;
  }
  return std::abs(total - 1.0) <= tol;
}

double event_prob(const FiniteModel& model, const Event& event) {
  double p = 0.0;
  for (const auto& atom : event) {
    auto it = model.prob.find(atom);
    if (it == model.prob.end()) {
      throw MalformedInput("malformed event: unknown atom '" + atom + "'");
    }
    p += it->second;
  }
  return p;
}

double conditional_prob(const FiniteModel& model, const Event& s2,
                        const Event& s1) {
  const double p1 = event_prob(model, s1);
  if (p1 <= 0.0) throw ConditioningOnFalse();
  Event both;
  std::set_intersection(s1.begin(), s1.end(), s2.begin(), s2.end(),
                        std::inserter(both, both.end()));
  // s2 must still be well formed even when the intersection drops atoms.
  event_prob(model, s2);
  return event_prob(model, both) / p1;
}

bool independence_test(const FiniteModel& model, const Event& s1,
                       const Event& s2, double tol) {
  Event both;
  std::set_intersection(s1.begin(), s1.end(), s2.begin(), s2.end(),
                        std::inserter(both, both.end()));
  const double joint = event_prob(model, both);
  return std::abs(joint - event_prob(model, s1) * event_prob(model, s2)) <=
         tol;
}

double LemmaReport::max_violation() const {
  return std::max({axiom1, axiom2, axiom3, lemma1, lemma2, lemma3, lemma4});
}

namespace {

std::vector<double> atom_probs(const FiniteModel& model) {
  std::vector<double> p;
  p.reserve(model.outcomes.size());
  for (const auto& atom : model.outcomes) {
    auto it = model.prob.find(atom);
    if (it == model.prob.end()) {
      throw MalformedInput("model has no probability for atom '" + atom + "'");
    }
    p.push_back(it->second);
  }
  return p;
}

// Events over an atom list as membership masks; sums are accumulated in atom
// order so that P(S) is the same number wherever it appears.
double mask_prob(const std::vector<double>& p, const std::vector<char>& mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mask[i]) s += p[i];
  }
  return s;
}

void accumulate_pair(LemmaReport& r, double p1, double p2, double p_and,
                     double p_or, bool disjoint) {
  r.lemma4 = std::max(r.lemma4, std::abs(p_and - (p1 + p2 - p_or)));
  if (disjoint) r.axiom3 = std::max(r.axiom3, std::abs(p_or - (p1 + p2)));
  ++r.pairs_checked;
}

}  // namespace

LemmaReport check_lemmas(const FiniteModel& model) {
  const std::vector<double> p = atom_probs(model);
  const std::size_t n = p.size();
  LemmaReport r;

  double total = 0.0;
  double min_atom = 0.0;
  for (double v : p) {
    total += v;
    min_atom = std::min(min_atom, v);
  }
  r.axiom1 = -min_atom;
  r.axiom2 = std::abs(total - 1.0);
  r.lemma3 = 0.0;  // the empty event sums no atoms

  auto single_event = [&](double ps, double pnot) {
    r.lemma1 = std::max(r.lemma1, std::abs(pnot - (1.0 - ps)));
    r.lemma2 = std::max(r.lemma2, std::max(ps - 1.0, 0.0));
  };

  if (n <= kExhaustiveAtoms) {
    const std::uint32_t count = 1u << n;
    const std::uint32_t full = count - 1;
    std::vector<double> pe(count);
    for (std::uint32_t m = 0; m < count; ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (m & (1u << i)) s += p[i];
      }
      pe[m] = s;
    }
    r.lemma3 = std::abs(pe[0]);
    for (std::uint32_t a = 0; a < count; ++a) {
      single_event(pe[a], pe[full & ~a]);
      for (std::uint32_t b = 0; b < count; ++b) {
        accumulate_pair(r, pe[a], pe[b], pe[a & b], pe[a | b], (a & b) == 0);
      }
    }
    return r;
  }

  std::mt19937_64 rng(0x5eedULL);
  std::bernoulli_distribution coin(0.5);
  std::vector<char> m1(n), m2(n), m_and(n), m_or(n), m_not(n);
  for (std::size_t k = 0; k < kSampledPairs; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      m1[i] = coin(rng);
      m2[i] = coin(rng);
      m_and[i] = m1[i] && m2[i];
      m_or[i] = m1[i] || m2[i];
      m_not[i] = !m1[i];
    }
    const double p1 = mask_prob(p, m1);
    single_event(p1, mask_prob(p, m_not));
    const bool disjoint =
        std::none_of(m_and.begin(), m_and.end(), [](char c) { return c; });
    accumulate_pair(r, p1, mask_prob(p, m2), mask_prob(p, m_and),
                    mask_prob(p, m_or), disjoint);
  }
  return r;
}

std::vector<std::string> binary_strings(int len) {
  std::vector<std::string> out;
  if (len < 0) return out;
  const std::size_t count = std::size_t{1} << len;
  out.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    std::string s(static_cast<std::size_t>(len), 'A');
    for (int i = 0; i < len; ++i) {
      if (m & (std::size_t{1} << (len - 1 - i))) s[i] = 'B';
    }
    out.push_back(std::move(s));
  }
  return out;
}

ExchangeabilityReport check_exchangeable(const StringAssignment& assign,
                                         double tol) {
  if (assign.max_len < 1) throw MalformedInput("max_len must be >= 1");
  auto lookup = [&](const std::string& s) {
    auto it = assign.prob.find(s);
    if (it == assign.prob.end()) {
      throw MalformedInput("assignment is missing string '" + s + "'");
    }
    return it->second;
  };

  ExchangeabilityReport r;
  for (int len = 1; len <= assign.max_len; ++len) {
    std::vector<double> lo(len + 1, INFINITY), hi(len + 1, -INFINITY);
    double total = 0.0;
    for (const auto& s : binary_strings(len)) {
      const double p = lookup(s);
      total += p;
      const auto n_b = std::count(s.begin(), s.end(), 'B');
      lo[n_b] = std::min(lo[n_b], p);
      hi[n_b] = std::max(hi[n_b], p);
      if (len < assign.max_len) {
        r.consistency_violation =
            std::max(r.consistency_violation,
                     std::abs(p - lookup(s + 'A') - lookup(s + 'B')));
      }
    }
    for (int k = 0; k <= len; ++k) {
      r.symmetry_violation = std::max(r.symmetry_violation, hi[k] - lo[k]);
    }
    r.normalization_violation =
        std::max(r.normalization_violation, std::abs(total - 1.0));
  }
  r.exchangeable = r.symmetry_violation <= tol &&
                   r.consistency_violation <= tol &&
                   r.normalization_violation <= tol;
  return r;
}

}  // namespace bayestomo
