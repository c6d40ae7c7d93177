#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persuade/model.hpp"

namespace persuade {

// Element of the partition-matroid ground set: a (receiver, signal) pair.
// Independent sets carry at most one element per receiver; the bases carry
// exactly one and are in bijection with signal profiles.
struct GroundElement {
  int receiver;
  Signal signal;

  auto operator<=>(const GroundElement&) const = default;
};

// A basis of the partition matroid, i.e. a signal profile.
using Basis = SignalProfile;

// Query for the approximate separation oracle: maximize
//   sum_{k in K} lambda_k f_theta(R^k_s) + sum_r w_{r, s_r}
// over signal profiles s.
struct SepQuery {
  int theta = 0;
  std::vector<TypeProfile> profiles;         // K, explicit list
  std::vector<double> lambda;                // per profile, >= 0
  std::vector<std::vector<double>> weights;  // [r][signal], weights[r][0] == 0
  double eps = 0.0;                          // allowed additive error

  // Throws InvariantViolationError on dimension or sign violations.
  void validate(const Instance& inst) const;
};

struct SepResult {
  enum class Kind { kExact, kGreedy };

  SignalProfile profile;
  double value = 0.0;
  Kind kind = Kind::kExact;
};

// f^lambda_theta(I) + l^w(I) for a full signal profile.
double composite_value(const Instance& inst, const SepQuery& q, const SignalProfile& s);

// Same for a partial independent set; receivers without an element contribute
// as if receiving the empty signal. Two elements for one receiver raise
// InvariantViolationError.
double composite_value(const Instance& inst, const SepQuery& q,
                       std::span<const GroundElement> elements);

// Brute-force argmax over all bases, ties broken by ascending lexicographic
// profile order. Guarded: prod_r 2^{m_r} must not exceed kExactSepGuard.
// The default entry point runs the enumeration with OpenMP when available;
// the _serial variant is the reference implementation kept for testing and
// returns bit-identical results.
inline constexpr std::uint64_t kExactSepGuard = 1000000;
SepResult exact_sep_oracle(const Instance& inst, const SepQuery& q);
SepResult exact_sep_oracle_serial(const Instance& inst, const SepQuery& q);

// Distorted-greedy pass over receivers: at step t the pending (receiver,
// signal) pairs are scored by (1 - 1/n)^{n-1-t} * marginal f gain plus the
// raw linear weight, and the best pair is fixed. Deterministic: ties prefer
// the lowest receiver index, then the lowest signal bitmask.
SepResult greedy_sep_oracle(const Instance& inst, const SepQuery& q);

struct SubmodularityCounterexample {
  std::vector<GroundElement> smaller;  // I
  std::vector<GroundElement> larger;   // I' (superset of I)
  GroundElement added;                 // (r, s) outside I'
  double marginal_small = 0.0;
  double marginal_large = 0.0;
};

// Samples random I subseteq I' subseteq ground set and an element outside I',
// and checks the diminishing-marginals inequality of the composite objective.
// Returns the first counterexample found, or nullopt.
std::optional<SubmodularityCounterexample> check_submodular_composite(
    const Instance& inst, const SepQuery& q, int trials, std::uint64_t seed);

}  // namespace persuade
