#pragma once

#include <optional>
#include <vector>

#include "persuade/convex_solver.hpp"
#include "persuade/ellipsoid.hpp"
#include "persuade/matroid_sep.hpp"
#include "persuade/model.hpp"

namespace persuade {

// Sparse point in reward space: explicit values on a duplicate-free support
// of type profiles, exactly zero everywhere else.
class RewardVector {
 public:
  RewardVector() = default;
  RewardVector(std::vector<TypeProfile> support, std::vector<double> values);

  double value(const TypeProfile& k) const;
  // Inserts k into the support if absent.
  void set(const TypeProfile& k, double v);

  const std::vector<TypeProfile>& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  bool contains(const TypeProfile& k) const { return index_.count(k) > 0; }

  // Keeps only the coordinates whose profile is in e (tau_E).
  RewardVector restricted_to(const std::vector<TypeProfile>& e) const;

  // ||a - b||^2 over the union of supports.
  static double squared_distance(const RewardVector& a, const RewardVector& b);

 private:
  std::vector<TypeProfile> support_;
  std::vector<double> values_;
  std::map<TypeProfile, int> index_;
};

enum class OracleKind { kExact, kGreedy };

SepResult run_sep_oracle(const Instance& inst, const SepQuery& q, OracleKind kind);

// Flat layout of the dual vectors handed to the ellipsoid: [d | z | nu].
// z has one coordinate per (receiver, nonempty signal, type in signal).
class DualLayout {
 public:
  struct ZVar {
    int receiver;
    Signal signal;
    int type;
  };

  DualLayout(const Instance& inst, int nu_count);

  int dimension() const { return d_count_ + z_count_ + nu_count_; }
  int d_count() const { return d_count_; }
  int z_count() const { return z_count_; }
  int nu_count() const { return nu_count_; }

  int d_index(int theta) const { return theta; }
  int z_index(int r, Signal s, int k) const;
  int nu_index(int i) const { return d_count_ + z_count_ + i; }

  const std::vector<ZVar>& z_vars() const { return z_vars_; }

 private:
  int d_count_ = 0;
  int z_count_ = 0;
  int nu_count_ = 0;
  std::vector<ZVar> z_vars_;
  std::vector<std::vector<int>> z_base_;  // [r][signal] -> base index into z block
};

// Offline dual variables (d, z) of the dual of the full signaling LP, with
// the sign flip that makes z >= 0.
struct OfflineDualPoint {
  Eigen::VectorXd d;  // per state
  Eigen::VectorXd z;  // per DualLayout::z_vars()
};

// Projection dual adds nu (one multiplier per profile in K). The stationarity
// relation x_k = y_k - nu_k / 2 eliminates the primal x block.
struct ProjectionDualPoint {
  Eigen::VectorXd d;
  Eigen::VectorXd z;
  Eigen::VectorXd nu;
};

// Identity of a dual constraint, used to tag ellipsoid cuts so the cut lists
// H / H_Unf can be replayed and turned back into primal variables.
struct ConstraintTag {
  enum class Kind { kProfile, kObjective, kBound };

  Kind kind = Kind::kBound;
  int theta = -1;
  SignalProfile profile;  // meaningful for kProfile

  auto operator<=>(const ConstraintTag&) const = default;
};

struct FeasibilityOutcome {
  bool feasible = false;
  Eigen::VectorXd witness;           // accepted dual point when feasible
  std::vector<ConstraintTag> cuts;   // ordered violated constraints otherwise
};

// Appendix-C separation oracle for the offline dual feasibility problem.
// Applies, in order: d lower bounds via the (theta, empty) constraints, the
// explicit objective constraint sum(d) <= gamma_bar, z sign cuts, oversized
// weights, the weight clamp at -|R|, and finally one Definition-3 oracle
// query per state.
class OfflineSeparator {
 public:
  OfflineSeparator(const Instance& inst, std::vector<TypeProfile> profiles,
                   std::vector<double> lambda, OracleKind oracle, double delta);

  SeparationResponse separate(const Eigen::VectorXd& center, double gamma_bar);

  const DualLayout& layout() const { return layout_; }
  const std::vector<ConstraintTag>& tags() const { return tags_; }
  void clear_tags() { tags_.clear(); }

  OfflineDualPoint unpack(const Eigen::VectorXd& center) const;

 private:
  SeparationResponse emit(Eigen::VectorXd normal, double offset, ConstraintTag tag);
  SeparationResponse profile_cut(int theta, const SignalProfile& s);

  const Instance& inst_;
  std::vector<TypeProfile> profiles_;
  std::vector<double> lambda_;
  OracleKind oracle_;
  double delta_;
  DualLayout layout_;
  std::vector<ConstraintTag> tags_;
};

// Appendix-D separation oracle for the projection dual. Carries an explicit
// constraint set (the accumulated H_Unf) that is checked before anything
// else; then the concave objective constraint, d bounds, nu bounds, z sign
// cuts, weight handling and the per-state oracle queries.
class ProjectionSeparator {
 public:
  ProjectionSeparator(const Instance& inst, std::vector<TypeProfile> profiles,
                      std::vector<double> y_values, OracleKind oracle, double delta);

  SeparationResponse separate(const Eigen::VectorXd& center, double gamma);

  // Adds (theta, profile) to the explicit set; duplicates are ignored.
  void add_explicit(int theta, const SignalProfile& s);
  const std::vector<ConstraintTag>& explicit_set() const { return explicit_tags_; }

  const DualLayout& layout() const { return layout_; }
  const std::vector<ConstraintTag>& tags() const { return tags_; }
  void clear_tags() { tags_.clear(); }

  ProjectionDualPoint unpack(const Eigen::VectorXd& center) const;
  double nu_upper_bound() const { return nu_upper_; }
  double d_upper_bound() const { return d_upper_; }

 private:
  SeparationResponse emit(Eigen::VectorXd normal, double offset, ConstraintTag tag);
  // Exact linear constraint for (theta, s); returns the cut normal/offset.
  void profile_constraint(int theta, const SignalProfile& s, Eigen::VectorXd* normal,
                          double* offset) const;
  SeparationResponse profile_cut(int theta, const SignalProfile& s);

  const Instance& inst_;
  std::vector<TypeProfile> profiles_;
  std::vector<double> y_;
  OracleKind oracle_;
  double delta_;
  double d_upper_ = 0.0;
  double nu_upper_ = 0.0;
  double w_lower_ = 0.0;
  DualLayout layout_;
  std::vector<ConstraintTag> tags_;
  std::vector<ConstraintTag> explicit_tags_;
  std::vector<Eigen::VectorXd> explicit_normals_;
  std::vector<double> explicit_offsets_;
};

// Free-function forms of the two case analyses (one emitted cut at most);
// the pipelines use the separator classes directly.
SeparationResponse offline_sep_case_analysis(const Instance& inst,
                                             const std::vector<TypeProfile>& profiles,
                                             const std::vector<double>& lambda,
                                             const OfflineDualPoint& point, double gamma_bar,
                                             OracleKind oracle, double delta,
                                             ConstraintTag* emitted = nullptr);
SeparationResponse projection_sep_case_analysis(
    const Instance& inst, const std::vector<TypeProfile>& profiles,
    const std::vector<double>& y_values, const ProjectionDualPoint& point, double gamma,
    const std::vector<ConstraintTag>& explicit_set, OracleKind oracle, double delta,
    ConstraintTag* emitted = nullptr);

struct OfflineResult {
  SignalingScheme scheme;
  double value = 0.0;      // Apx (or OPT for the exact variant)
  double gamma_star = 0.0; // accepted bisection level (approximate variant)
  int probes = 0;
};

// Globally optimal persuasive scheme via the full signaling LP. Guarded:
// prod_r 2^{m_r} <= kOfflineEnumGuard.
inline constexpr std::uint64_t kOfflineEnumGuard = 10000;
OfflineResult exact_offline_solve(const Instance& inst,
                                  const std::vector<TypeProfile>& profiles,
                                  const std::vector<double>& lambda);

// Bisection over the dual objective with ellipsoid feasibility probes and
// restricted-LP recovery. Returns a persuasive scheme with value at least
// alpha * OPT - eps for the supplied oracle's factor alpha.
OfflineResult offline_solve(const Instance& inst, const std::vector<TypeProfile>& profiles,
                            const std::vector<double>& lambda, double eps,
                            OracleKind oracle);

struct ProjectionResult {
  RewardVector x;
  SignalingScheme scheme;
  double gamma_star = 0.0;
  int probes = 0;
  bool qp_gap_satisfied = true;
};

// Approximate projection oracle (Definition 1): returns x in X_K and a
// persuasive scheme phi with x_k <= f(phi, k) such that
//   ||x' - x||^2 <= ||x' - y||^2 + eps   for every x' in alpha X_K.
ProjectionResult approx_projection(const Instance& inst,
                                   const std::vector<TypeProfile>& profiles,
                                   const RewardVector& y, double eps, OracleKind oracle);

// Exact Euclidean projection of y onto X_K via the full quadratic program;
// same enumeration guard as exact_offline_solve.
RewardVector exact_projection(const Instance& inst, const std::vector<TypeProfile>& profiles,
                              const RewardVector& y);

}  // namespace persuade
