#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace persuade {

// A signal for one receiver: bitmask over that receiver's types. Bit k set
// means "play a1 if your type is k". The empty signal is 0.
using Signal = std::uint32_t;

// Subset of receivers, bitmask with bit r for receiver r.
using ReceiverSet = std::uint32_t;

// One realized type per receiver.
struct TypeProfile {
  std::vector<int> type;

  auto operator<=>(const TypeProfile&) const = default;
  bool operator==(const TypeProfile&) const = default;
};

// One signal per receiver. Ordering is lexicographic with receiver 0 most
// significant; this is the tie-breaking order used everywhere downstream.
struct SignalProfile {
  std::vector<Signal> signal;

  auto operator<=>(const SignalProfile&) const = default;
  bool operator==(const SignalProfile&) const = default;
};

std::string to_string(const TypeProfile& k);
std::string to_string(const SignalProfile& s);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance or file content violates a structural contract.
class MalformedInstanceError : public Error {
 public:
  using Error::Error;
};

// A brute-force guard was exceeded; the caller must fall back to an
// approximate routine.
class OracleScaleError : public Error {
 public:
  using Error::Error;
};

// A numeric routine lost its invariants (cycling, indefiniteness, ...).
class NumericalFailureError : public Error {
 public:
  using Error::Error;
};

// An internal contract that should hold by construction was violated.
class InvariantViolationError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Named tolerances. All floating-point comparisons in the library go through
// one of these constants.
// ---------------------------------------------------------------------------

namespace tol {
inline constexpr double kPriorSum = 1e-12;        // |sum(prior) - 1|
inline constexpr double kSchemeMass = 1e-9;       // per-state probability mass
inline constexpr double kPersuasive = 1e-7;       // residual >= -kPersuasive
inline constexpr double kResidualCheck = 1e-6;    // acceptance-level residuals
inline constexpr double kLpFeas = 1e-8;           // simplex feasibility
inline constexpr double kLpPivot = 1e-9;          // simplex pivot threshold
inline constexpr double kQpGap = 1e-7;            // conditional-gradient gap
inline constexpr double kEllipsoidFeas = 1e-7;    // volume threshold radius
inline constexpr double kCutMargin = 1e-9;        // strict violation margin
inline constexpr double kAffine = 1e-12;          // exact-affine identities
}  // namespace tol

// ---------------------------------------------------------------------------
// SplitMix64: deterministic, platform-independent RNG used by generators and
// test suites. Not crypto; stability across runs is the point.
// ---------------------------------------------------------------------------

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace persuade
