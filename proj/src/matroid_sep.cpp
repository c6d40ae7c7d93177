#include "persuade/matroid_sep.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace persuade {

namespace {

// Advances a signal profile in ascending lexicographic order (receiver 0 most
// significant, so the last receiver's signal is the fastest-moving digit).
void advance_profile(const Instance& inst, SignalProfile& s) {
  for (int r = inst.receiver_count() - 1; r >= 0; --r) {
    const Signal limit = Signal{1} << inst.type_count(r);
    if (++s.signal[r] < limit) return;
    s.signal[r] = 0;
  }
}

double plain_value(const Instance& inst, const SepQuery& q, const SignalProfile& s) {
  const SetFunction& f = inst.sender_fn[q.theta];
  double total = 0.0;
  for (std::size_t i = 0; i < q.profiles.size(); ++i) {
    total += q.lambda[i] * f.value(activated_set(s, q.profiles[i]));
  }
  for (int r = 0; r < inst.receiver_count(); ++r) {
    total += q.weights[r][s.signal[r]];
  }
  return total;
}

struct BestProfile {
  double value = -std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;

  void consider(double v, std::uint64_t i) {
    if (v > value || (v == value && i < index)) {
      value = v;
      index = i;
    }
  }
  void merge(const BestProfile& other) { consider(other.value, other.index); }
};

BestProfile scan_range(const Instance& inst, const SepQuery& q, std::uint64_t begin,
                       std::uint64_t end) {
  BestProfile best;
  SignalProfile s = signal_profile_from_index(inst, begin);
  for (std::uint64_t i = begin; i < end; ++i) {
    best.consider(plain_value(inst, q, s), i);
    advance_profile(inst, s);
  }
  return best;
}

}  // namespace

void SepQuery::validate(const Instance& inst) const {
  if (theta < 0 || theta >= inst.state_count()) {
    throw InvariantViolationError("separation query: state index out of range");
  }
  if (profiles.size() != lambda.size()) {
    throw InvariantViolationError("separation query: |lambda| != |K|");
  }
  for (double l : lambda) {
    if (!(l >= 0.0)) throw InvariantViolationError("separation query: lambda < 0");
  }
  for (const TypeProfile& k : profiles) {
    if (static_cast<int>(k.type.size()) != inst.receiver_count()) {
      throw InvariantViolationError("separation query: profile dimension mismatch");
    }
    for (int r = 0; r < inst.receiver_count(); ++r) {
      if (k.type[r] < 0 || k.type[r] >= inst.type_count(r)) {
        throw InvariantViolationError("separation query: type index out of range");
      }
    }
  }
  if (static_cast<int>(weights.size()) != inst.receiver_count()) {
    throw InvariantViolationError("separation query: weight table dimension mismatch");
  }
  for (int r = 0; r < inst.receiver_count(); ++r) {
    if (weights[r].size() != (std::size_t{1} << inst.type_count(r))) {
      throw InvariantViolationError("separation query: weight row must cover 2^{m_r} signals");
    }
    if (weights[r][0] != 0.0) {
      throw InvariantViolationError("separation query: w_{r,empty} must be 0");
    }
  }
}

double composite_value(const Instance& inst, const SepQuery& q, const SignalProfile& s) {
  if (static_cast<int>(s.signal.size()) != inst.receiver_count()) {
    throw InvariantViolationError("composite_value: profile dimension mismatch");
  }
  return plain_value(inst, q, s);
}

double composite_value(const Instance& inst, const SepQuery& q,
                       std::span<const GroundElement> elements) {
  SignalProfile s;
  s.signal.assign(inst.receiver_count(), 0);
  std::vector<bool> seen(inst.receiver_count(), false);
  for (const GroundElement& e : elements) {
    if (e.receiver < 0 || e.receiver >= inst.receiver_count()) {
      throw InvariantViolationError("composite_value: receiver index out of range");
    }
    if (seen[e.receiver]) {
      throw InvariantViolationError("composite_value: independence violation");
    }
    seen[e.receiver] = true;
    s.signal[e.receiver] = e.signal;
  }
  return plain_value(inst, q, s);
}

SepResult exact_sep_oracle_serial(const Instance& inst, const SepQuery& q) {
  q.validate(inst);
  const std::uint64_t total = inst.signal_profile_count();
  if (total > kExactSepGuard) {
    throw OracleScaleError("exact separation oracle: profile space too large");
  }
  const BestProfile best = scan_range(inst, q, 0, total);
  return {signal_profile_from_index(inst, best.index), best.value, SepResult::Kind::kExact};
}

SepResult exact_sep_oracle(const Instance& inst, const SepQuery& q) {
  q.validate(inst);
  const std::uint64_t total = inst.signal_profile_count();
  if (total > kExactSepGuard) {
    throw OracleScaleError("exact separation oracle: profile space too large");
  }

  BestProfile best;
#ifdef _OPENMP
  if (total >= 4096 && omp_get_max_threads() > 1) {
    #pragma omp parallel
    {
      const int threads = omp_get_num_threads();
      const int tid = omp_get_thread_num();
      const std::uint64_t chunk = (total + threads - 1) / threads;
      const std::uint64_t begin = std::min<std::uint64_t>(total, chunk * tid);
      const std::uint64_t end = std::min<std::uint64_t>(total, begin + chunk);
      const BestProfile local = scan_range(inst, q, begin, end);
      #pragma omp critical
      best.merge(local);
    }
  } else {
    best = scan_range(inst, q, 0, total);
  }
#else
  best = scan_range(inst, q, 0, total);
#endif
  return {signal_profile_from_index(inst, best.index), best.value, SepResult::Kind::kExact};
}

SepResult greedy_sep_oracle(const Instance& inst, const SepQuery& q) {
  q.validate(inst);
  const int n = inst.receiver_count();
  const SetFunction& f = inst.sender_fn[q.theta];

  SignalProfile chosen;
  chosen.signal.assign(n, 0);
  std::vector<bool> assigned(n, false);

  // Activated receiver set so far, per query profile.
  std::vector<ReceiverSet> active(q.profiles.size(), 0);

  for (int step = 0; step < n; ++step) {
    const double discount =
        n == 1 ? 1.0 : std::pow(1.0 - 1.0 / n, static_cast<double>(n - 1 - step));

    int best_r = -1;
    Signal best_s = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < n; ++r) {
      if (assigned[r]) continue;
      const Signal limit = Signal{1} << inst.type_count(r);
      for (Signal s = 0; s < limit; ++s) {
        double marginal = 0.0;
        for (std::size_t i = 0; i < q.profiles.size(); ++i) {
          if ((s >> q.profiles[i].type[r]) & 1u) {
            const ReceiverSet grown = active[i] | (ReceiverSet{1} << r);
            marginal += q.lambda[i] * (f.value(grown) - f.value(active[i]));
          }
        }
        const double score = discount * marginal + q.weights[r][s];
        if (score > best_score) {
          best_score = score;
          best_r = r;
          best_s = s;
        }
      }
    }

    assigned[best_r] = true;
    chosen.signal[best_r] = best_s;
    for (std::size_t i = 0; i < q.profiles.size(); ++i) {
      if ((best_s >> q.profiles[i].type[best_r]) & 1u) {
        active[i] |= ReceiverSet{1} << best_r;
      }
    }
  }

  return {chosen, plain_value(inst, q, chosen), SepResult::Kind::kGreedy};
}

namespace {

double extension_value(const Instance& inst, const SepQuery& q,
                       const std::vector<GroundElement>& elements) {
  const SetFunction& f = inst.sender_fn[q.theta];
  double total = 0.0;
  for (std::size_t i = 0; i < q.profiles.size(); ++i) {
    ReceiverSet mask = 0;
    for (const GroundElement& e : elements) {
      if ((e.signal >> q.profiles[i].type[e.receiver]) & 1u) {
        mask |= ReceiverSet{1} << e.receiver;
      }
    }
    total += q.lambda[i] * f.value(mask);
  }
  for (const GroundElement& e : elements) total += q.weights[e.receiver][e.signal];
  return total;
}

}  // namespace

std::optional<SubmodularityCounterexample> check_submodular_composite(
    const Instance& inst, const SepQuery& q, int trials, std::uint64_t seed) {
  q.validate(inst);

  std::vector<GroundElement> ground;
  for (int r = 0; r < inst.receiver_count(); ++r) {
    const Signal limit = Signal{1} << inst.type_count(r);
    for (Signal s = 0; s < limit; ++s) ground.push_back({r, s});
  }

  SplitMix64 rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<GroundElement> larger;
    std::vector<GroundElement> outside;
    for (const GroundElement& e : ground) {
      if (rng.next_u64() & 1u) {
        larger.push_back(e);
      } else {
        outside.push_back(e);
      }
    }
    if (outside.empty()) continue;
    const GroundElement added = outside[rng.below(outside.size())];

    std::vector<GroundElement> smaller;
    for (const GroundElement& e : larger) {
      if (rng.next_u64() & 1u) smaller.push_back(e);
    }

    const double base_small = extension_value(inst, q, smaller);
    const double base_large = extension_value(inst, q, larger);
    std::vector<GroundElement> small_plus = smaller;
    small_plus.push_back(added);
    std::vector<GroundElement> large_plus = larger;
    large_plus.push_back(added);

    const double marginal_small = extension_value(inst, q, small_plus) - base_small;
    const double marginal_large = extension_value(inst, q, large_plus) - base_large;
    if (marginal_small < marginal_large - tol::kAffine) {
      return SubmodularityCounterexample{smaller, larger, added, marginal_small,
                                         marginal_large};
    }
  }
  return std::nullopt;
}

}  // namespace persuade
