#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace bayestomo {

/// An event is a set of atomic outcome labels; Boolean connectives are set
/// operations (or = union, and = intersection, not = complement).
using Event = std::set<std::string>;

/// Finite probability model over an explicit list of atoms. Construction does
/// not enforce the axioms so that invalid models can be diagnosed with
/// check_lemmas().
struct FiniteModel {
  std::vector<std::string> outcomes;
  std::map<std::string, double> prob;

  Event omega() const { return Event(outcomes.begin(), outcomes.end()); }
  Event complement(const Event& event) const;
  /// Nonnegative atoms summing to one within `tol`.
  bool is_valid(double tol = 1e-12) const;
};

double event_prob(const FiniteModel& model, const Event& event);

/// P(s2 | s1) = P(s1 and s2) / P(s1). Throws ConditioningOnFalse if P(s1) == 0.
double conditional_prob(const FiniteModel& model, const Event& s2,
                        const Event& s1);

bool independence_test(const FiniteModel& model, const Event& s1,
                       const Event& s2, double tol);

/// Maximum absolute violation of each axiom/lemma over the enumerated event
/// pairs. All fields are zero (up to rounding) for a valid model.
struct LemmaReport {
  double axiom1 = 0.0;  // negativity of the smallest atom
  double axiom2 = 0.0;  // |P(omega) - 1|
  double axiom3 = 0.0;  // additivity over disjoint pairs
  double lemma1 = 0.0;  // |P(not S) - (1 - P(S))|
  double lemma2 = 0.0;  // max(P(S) - 1, 0)
  double lemma3 = 0.0;  // |P(empty)|
  double lemma4 = 0.0;  // |P(S1 and S2) - P(S1) - P(S2) + P(S1 or S2)|
  std::uint64_t pairs_checked = 0;

  double max_violation() const;
  bool holds(double tol = 1e-12) const { return max_violation() <= tol; }
};

/// Enumerates every event pair for models with at most kExhaustiveAtoms atoms,
/// otherwise checks kSampledPairs random pairs drawn with a fixed seed.
LemmaReport check_lemmas(const FiniteModel& model);

inline constexpr std::size_t kExhaustiveAtoms = 12;
inline constexpr std::size_t kSampledPairs = 10'000;

/// Probabilities for every outcome string over {A, B} up to max_len.
struct StringAssignment {
  int max_len = 1;
  std::map<std::string, double> prob;
};

struct ExchangeabilityReport {
  double symmetry_violation = 0.0;       // spread within each (N_A, N_B) class
  double consistency_violation = 0.0;    // |P(S) - P(SA) - P(SB)|
  double normalization_violation = 0.0;  // |sum over length-N strings - 1|
  bool exchangeable = false;
};

inline constexpr double kExchangeabilityTol = 1e-9;

/// Throws MalformedInput if any string of length <= max_len is missing.
ExchangeabilityReport check_exchangeable(const StringAssignment& assign,
                                         double tol = kExchangeabilityTol);

/// All 2^len strings over {A, B} in lexicographic order.
std::vector<std::string> binary_strings(int len);

}  // namespace bayestomo
