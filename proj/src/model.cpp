#include "persuade/model.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace persuade {

namespace {

std::uint64_t saturating_product(const Instance& inst, bool signal_space) {
  const std::uint64_t cap = std::uint64_t{1} << 62;
  std::uint64_t total = 1;
  for (int r = 0; r < inst.receiver_count(); ++r) {
    const std::uint64_t factor = signal_space
                                     ? (std::uint64_t{1} << inst.type_count(r))
                                     : static_cast<std::uint64_t>(inst.type_count(r));
    if (factor != 0 && total > cap / factor) return cap;
    total *= factor;
  }
  return total;
}

}  // namespace

std::string to_string(const TypeProfile& k) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < k.type.size(); ++i) {
    if (i > 0) out << ",";
    out << k.type[i];
  }
  out << ")";
  return out.str();
}

std::string to_string(const SignalProfile& s) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < s.signal.size(); ++i) {
    if (i > 0) out << ",";
    out << "0x" << std::hex << s.signal[i] << std::dec;
  }
  out << ")";
  return out.str();
}

std::uint64_t Instance::type_profile_count() const {
  return saturating_product(*this, /*signal_space=*/false);
}

std::uint64_t Instance::signal_profile_count() const {
  return saturating_product(*this, /*signal_space=*/true);
}

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> violations;
  const int n = inst.receiver_count();
  const int d = inst.state_count();

  if (n == 0) violations.push_back("instance has no receivers");
  if (d == 0) violations.push_back("instance has no states");
  for (int r = 0; r < n; ++r) {
    if (inst.type_count(r) < 1) {
      violations.push_back("receiver " + std::to_string(r) + " has no types");
    }
    if (inst.type_count(r) > 20) {
      violations.push_back("receiver " + std::to_string(r) + " has more than 20 types");
    }
  }

  if (static_cast<int>(inst.prior.size()) != d) {
    violations.push_back("prior length != number of states");
  } else {
    double sum = 0.0;
    for (int t = 0; t < d; ++t) {
      if (!(inst.prior[t] > 0.0)) {
        violations.push_back("prior[" + std::to_string(t) + "] is not strictly positive");
      }
      sum += inst.prior[t];
    }
    if (std::abs(sum - 1.0) > tol::kPriorSum) {
      violations.push_back("prior sum != 1");
    }
  }

  if (static_cast<int>(inst.utility_diff.size()) != n) {
    violations.push_back("utility_diff has wrong receiver dimension");
  } else {
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(inst.utility_diff[r].size()) != inst.type_count(r)) {
        violations.push_back("utility_diff[" + std::to_string(r) + "] has wrong type dimension");
        continue;
      }
      for (int k = 0; k < inst.type_count(r); ++k) {
        if (static_cast<int>(inst.utility_diff[r][k].size()) != d) {
          violations.push_back("utility_diff[" + std::to_string(r) + "][" +
                               std::to_string(k) + "] has wrong state dimension");
          continue;
        }
        for (int t = 0; t < d; ++t) {
          const double u = inst.utility_diff[r][k][t];
          if (!std::isfinite(u) || u < -2.0 || u > 2.0) {
            violations.push_back("utility_diff[" + std::to_string(r) + "][" +
                                 std::to_string(k) + "][" + std::to_string(t) +
                                 "] outside [-2, 2]");
          }
        }
      }
    }
  }

  if (static_cast<int>(inst.sender_fn.size()) != d) {
    violations.push_back("sender_functions must have one entry per state");
    return violations;
  }

  for (int t = 0; t < d; ++t) {
    const SetFunction& f = inst.sender_fn[t];
    if (f.receiver_count() != n) {
      violations.push_back("sender_functions[" + std::to_string(t) +
                           "] receiver count mismatch");
      continue;
    }
    if (n > 16 && f.kind() == SetFunction::Kind::kTable) {
      violations.push_back("table sender function with n > 16");
      continue;
    }

    const std::string tag = "sender_functions[" + std::to_string(t) + "]";
    if (std::abs(f.value(0)) > tol::kAffine) {
      violations.push_back(tag + ": f(empty set) != 0");
    }

    auto check_range = [&](ReceiverSet mask) {
      const double v = f.value(mask);
      if (!std::isfinite(v) || v < -tol::kAffine || v > 1.0 + tol::kAffine) {
        violations.push_back(tag + ": value outside [0, 1]");
        return false;
      }
      return true;
    };
    auto check_monotone_step = [&](ReceiverSet mask, int add) {
      const ReceiverSet grown = mask | (ReceiverSet{1} << add);
      if (f.value(grown) < f.value(mask) - tol::kAffine) {
        violations.push_back(tag + ": monotonicity violated");
        return false;
      }
      return true;
    };

    if (n <= 12) {
      const ReceiverSet full = static_cast<ReceiverSet>((std::uint64_t{1} << n) - 1);
      bool ok = true;
      for (ReceiverSet mask = 0; ok && mask <= full; ++mask) {
        ok = check_range(mask);
        for (int r = 0; ok && r < n; ++r) {
          if (mask & (ReceiverSet{1} << r)) continue;
          ok = check_monotone_step(mask, r);
        }
        if (mask == full) break;
      }
    } else {
      // Sampled chains: grow random subsets one receiver at a time.
      SplitMix64 rng(0x5e7fULL + static_cast<std::uint64_t>(t));
      for (int chain = 0; chain < 64; ++chain) {
        ReceiverSet mask = 0;
        bool ok = check_range(mask);
        std::vector<int> order(n);
        for (int r = 0; r < n; ++r) order[r] = r;
        for (int i = n - 1; i > 0; --i) {
          std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
        }
        for (int i = 0; ok && i < n; ++i) {
          ok = check_monotone_step(mask, order[i]);
          mask |= ReceiverSet{1} << order[i];
          ok = ok && check_range(mask);
        }
        if (!ok) break;
      }
    }

    if (f.kind() == SetFunction::Kind::kCoverage) {
      double wsum = 0.0;
      for (double w : f.coverage_weights()) {
        if (w < 0.0) violations.push_back(tag + ": negative coverage weight");
        wsum += w;
      }
      if (wsum > 1.0 + tol::kAffine) {
        violations.push_back(tag + ": coverage weights sum above 1");
      }
    }
    if (f.kind() == SetFunction::Kind::kConcaveCardinality) {
      const auto& g = f.cardinality_values();
      for (std::size_t i = 2; i < g.size(); ++i) {
        if (g[i] - g[i - 1] > g[i - 1] - g[i - 2] + tol::kAffine) {
          violations.push_back(tag + ": cardinality increments not concave");
          break;
        }
      }
    }
  }

  return violations;
}

ReceiverSet activated_set(const SignalProfile& s, const TypeProfile& k) {
  ReceiverSet out = 0;
  for (std::size_t r = 0; r < s.signal.size(); ++r) {
    if ((s.signal[r] >> k.type[r]) & 1u) out |= ReceiverSet{1} << r;
  }
  return out;
}

void SignalingScheme::add(int theta, const SignalProfile& s, double p) {
  support_[theta][s] += p;
}

std::vector<std::string> SignalingScheme::validate(const Instance& inst) const {
  std::vector<std::string> violations;
  if (state_count() != inst.state_count()) {
    violations.push_back("scheme state count mismatch");
    return violations;
  }
  for (int t = 0; t < state_count(); ++t) {
    double mass = 0.0;
    for (const auto& [profile, p] : support_[t]) {
      if (p < -tol::kSchemeMass) {
        violations.push_back("negative probability in state " + std::to_string(t));
      }
      if (static_cast<int>(profile.signal.size()) != inst.receiver_count()) {
        violations.push_back("profile dimension mismatch in state " + std::to_string(t));
        continue;
      }
      for (int r = 0; r < inst.receiver_count(); ++r) {
        if (profile.signal[r] >> inst.type_count(r)) {
          violations.push_back("signal bitmask wider than m_r in state " + std::to_string(t));
        }
      }
      mass += p;
    }
    if (std::abs(mass - 1.0) > tol::kSchemeMass) {
      violations.push_back("probability mass != 1 in state " + std::to_string(t));
    }
  }
  return violations;
}

SignalingScheme SignalingScheme::always_empty(const Instance& inst) {
  SignalingScheme phi(inst.state_count());
  SignalProfile empty;
  empty.signal.assign(inst.receiver_count(), 0);
  for (int t = 0; t < inst.state_count(); ++t) phi.add(t, empty, 1.0);
  return phi;
}

double sender_utility(const Instance& inst, const SignalingScheme& phi,
                      const TypeProfile& k) {
  double total = 0.0;
  for (int t = 0; t < inst.state_count(); ++t) {
    double inner = 0.0;
    for (const auto& [profile, p] : phi.state_support(t)) {
      inner += p * inst.sender_fn[t].value(activated_set(profile, k));
    }
    total += inst.prior[t] * inner;
  }
  return total;
}

std::map<ResidualKey, double> persuasiveness_residuals(const Instance& inst,
                                                       const SignalingScheme& phi) {
  std::map<ResidualKey, double> residuals;
  for (int t = 0; t < inst.state_count(); ++t) {
    for (const auto& [profile, p] : phi.state_support(t)) {
      for (int r = 0; r < inst.receiver_count(); ++r) {
        const Signal s = profile.signal[r];
        Signal bits = s;
        while (bits != 0) {
          const int k = std::countr_zero(bits);
          bits &= bits - 1;
          residuals[{r, s, k}] += inst.prior[t] * p * inst.utility(r, k, t);
        }
      }
    }
  }
  return residuals;
}

bool is_persuasive(const Instance& inst, const SignalingScheme& phi, double tolerance) {
  for (const auto& [key, value] : persuasiveness_residuals(inst, phi)) {
    if (value < -tolerance) return false;
  }
  return true;
}

std::vector<TypeProfile> all_type_profiles(const Instance& inst) {
  const std::uint64_t total = inst.type_profile_count();
  std::vector<TypeProfile> out;
  out.reserve(total);
  TypeProfile current;
  current.type.assign(inst.receiver_count(), 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    out.push_back(current);
    for (int r = inst.receiver_count() - 1; r >= 0; --r) {
      if (++current.type[r] < inst.type_count(r)) break;
      current.type[r] = 0;
    }
  }
  return out;
}

SignalProfile signal_profile_from_index(const Instance& inst, std::uint64_t index) {
  SignalProfile s;
  s.signal.assign(inst.receiver_count(), 0);
  for (int r = inst.receiver_count() - 1; r >= 0; --r) {
    const std::uint64_t base = std::uint64_t{1} << inst.type_count(r);
    s.signal[r] = static_cast<Signal>(index % base);
    index /= base;
  }
  return s;
}

std::uint64_t signal_profile_index(const Instance& inst, const SignalProfile& s) {
  std::uint64_t index = 0;
  for (int r = 0; r < inst.receiver_count(); ++r) {
    index = (index << inst.type_count(r)) + s.signal[r];
  }
  return index;
}

}  // namespace persuade
