#pragma once

#include <map>
#include <string>
#include <vector>

#include "persuade/set_function.hpp"
#include "persuade/types.hpp"

namespace persuade {

struct Receiver {
  std::vector<std::string> types;  // names; m_r = types.size()

  int type_count() const { return static_cast<int>(types.size()); }
};

// A persuasion problem instance. Immutable after validation: every operation
// in the library takes instances by const reference and never mutates them,
// so they are safe to share across concurrent workers.
struct Instance {
  std::vector<Receiver> receivers;
  std::vector<std::string> states;
  std::vector<double> prior;                                   // length d, > 0, sums to 1
  std::vector<std::vector<std::vector<double>>> utility_diff;  // [r][k][theta], u(a1)-u(a0)
  std::vector<SetFunction> sender_fn;                          // one per state

  int receiver_count() const { return static_cast<int>(receivers.size()); }
  int state_count() const { return static_cast<int>(states.size()); }
  int type_count(int r) const { return receivers[r].type_count(); }

  // Number of type profiles, prod_r m_r (saturating at 2^62).
  std::uint64_t type_profile_count() const;
  // Number of signal profiles, prod_r 2^{m_r} (saturating at 2^62).
  std::uint64_t signal_profile_count() const;

  double utility(int r, int k, int theta) const { return utility_diff[r][k][theta]; }
};

// Checks every instance invariant and returns all violations (empty == ok).
// Monotonicity of each sender function is checked exhaustively for n <= 12
// and by sampled chains otherwise.
std::vector<std::string> validate_instance(const Instance& inst);

// R^k_s: receivers whose realized type is inside their received signal.
ReceiverSet activated_set(const SignalProfile& s, const TypeProfile& k);

// f(R) for a receiver subset; thin named wrapper over SetFunction::value.
inline double eval_set_function(const SetFunction& f, ReceiverSet r) { return f.value(r); }

// Sparse signaling scheme: for each state, a distribution over signal
// profiles stored as an ordered map (ascending lexicographic profile order,
// which fixes iteration order everywhere downstream).
class SignalingScheme {
 public:
  SignalingScheme() = default;
  explicit SignalingScheme(int state_count) : support_(state_count) {}

  // Accumulates probability mass; entries below kDropMass are dropped on
  // normalize_check().
  void add(int theta, const SignalProfile& s, double p);

  int state_count() const { return static_cast<int>(support_.size()); }
  const std::map<SignalProfile, double>& state_support(int theta) const {
    return support_[theta];
  }

  // Validates per-state mass within tol::kSchemeMass and dimensions against
  // the instance; returns all violations.
  std::vector<std::string> validate(const Instance& inst) const;

  // Scheme sending the all-empty-signal profile in every state. Vacuously
  // persuasive.
  static SignalingScheme always_empty(const Instance& inst);

  static constexpr double kDropMass = 1e-15;

 private:
  std::vector<std::map<SignalProfile, double>> support_;
};

// f(phi, k) = sum_theta mu_theta sum_s phi_theta(s) f_theta(R^k_s).
double sender_utility(const Instance& inst, const SignalingScheme& phi,
                      const TypeProfile& k);

struct ResidualKey {
  int receiver;
  Signal signal;
  int type;

  auto operator<=>(const ResidualKey&) const = default;
};

// For every receiver r, signal s in the union of phi's supports restricted
// to r, and type k in s: the persuasiveness residual
//   sum_theta mu_theta sum_{profiles with s_r = s} phi_theta(profile) u^{r,k}_theta.
// phi is persuasive iff all residuals >= -tolerance.
std::map<ResidualKey, double> persuasiveness_residuals(const Instance& inst,
                                                       const SignalingScheme& phi);

bool is_persuasive(const Instance& inst, const SignalingScheme& phi,
                   double tolerance = tol::kPersuasive);

// Enumeration helpers. Profiles are visited in ascending lexicographic order
// (receiver 0 most significant).
std::vector<TypeProfile> all_type_profiles(const Instance& inst);
SignalProfile signal_profile_from_index(const Instance& inst, std::uint64_t index);
std::uint64_t signal_profile_index(const Instance& inst, const SignalProfile& s);

}  // namespace persuade
