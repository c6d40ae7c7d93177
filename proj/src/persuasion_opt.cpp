#include "persuade/persuasion_opt.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace persuade {

// ---------------------------------------------------------------------------
// RewardVector
// ---------------------------------------------------------------------------

RewardVector::RewardVector(std::vector<TypeProfile> support, std::vector<double> values)
    : support_(std::move(support)), values_(std::move(values)) {
  if (support_.size() != values_.size()) {
    throw InvariantViolationError("reward vector: support/value size mismatch");
  }
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!index_.emplace(support_[i], static_cast<int>(i)).second) {
      throw InvariantViolationError("reward vector: duplicate support entry");
    }
  }
}

double RewardVector::value(const TypeProfile& k) const {
  const auto it = index_.find(k);
  return it == index_.end() ? 0.0 : values_[it->second];
}

void RewardVector::set(const TypeProfile& k, double v) {
  const auto it = index_.find(k);
  if (it == index_.end()) {
    index_.emplace(k, static_cast<int>(support_.size()));
    support_.push_back(k);
    values_.push_back(v);
  } else {
    values_[it->second] = v;
  }
}

RewardVector RewardVector::restricted_to(const std::vector<TypeProfile>& e) const {
  RewardVector out;
  for (const TypeProfile& k : e) {
    const auto it = index_.find(k);
    if (it != index_.end() && !out.contains(k)) out.set(k, values_[it->second]);
  }
  return out;
}

double RewardVector::squared_distance(const RewardVector& a, const RewardVector& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.support_.size(); ++i) {
    const double diff = a.values_[i] - b.value(a.support_[i]);
    total += diff * diff;
  }
  for (std::size_t i = 0; i < b.support_.size(); ++i) {
    if (!a.contains(b.support_[i])) total += b.values_[i] * b.values_[i];
  }
  return total;
}

SepResult run_sep_oracle(const Instance& inst, const SepQuery& q, OracleKind kind) {
  return kind == OracleKind::kExact ? exact_sep_oracle(inst, q) : greedy_sep_oracle(inst, q);
}

// ---------------------------------------------------------------------------
// DualLayout
// ---------------------------------------------------------------------------

DualLayout::DualLayout(const Instance& inst, int nu_count)
    : d_count_(inst.state_count()), nu_count_(nu_count) {
  z_base_.resize(inst.receiver_count());
  for (int r = 0; r < inst.receiver_count(); ++r) {
    const Signal limit = Signal{1} << inst.type_count(r);
    z_base_[r].assign(limit, -1);
    for (Signal s = 1; s < limit; ++s) {
      z_base_[r][s] = z_count_;
      for (int k = 0; k < inst.type_count(r); ++k) {
        if ((s >> k) & 1u) {
          z_vars_.push_back({r, s, k});
          ++z_count_;
        }
      }
    }
  }
}

int DualLayout::z_index(int r, Signal s, int k) const {
  int idx = z_base_[r][s];
  for (int t = 0; t < k; ++t) {
    if ((s >> t) & 1u) ++idx;
  }
  return d_count_ + idx;
}

namespace {

// w^theta_{r,s} = mu_theta * sum_{k in s} u^{r,k}_theta * z_{r,s,k}, for every
// state; rows laid out exactly like SepQuery::weights.
std::vector<std::vector<std::vector<double>>> dual_weights(const Instance& inst,
                                                           const DualLayout& layout,
                                                           const Eigen::VectorXd& center) {
  std::vector<std::vector<std::vector<double>>> w(inst.state_count());
  for (int t = 0; t < inst.state_count(); ++t) {
    w[t].resize(inst.receiver_count());
    for (int r = 0; r < inst.receiver_count(); ++r) {
      w[t][r].assign(std::size_t{1} << inst.type_count(r), 0.0);
    }
  }
  for (int i = 0; i < layout.z_count(); ++i) {
    const DualLayout::ZVar& zv = layout.z_vars()[i];
    const double z = center[layout.d_count() + i];
    for (int t = 0; t < inst.state_count(); ++t) {
      w[t][zv.receiver][zv.signal] += inst.prior[t] * inst.utility(zv.receiver, zv.type, t) * z;
    }
  }
  return w;
}

std::vector<std::vector<double>> clamp_weights(const std::vector<std::vector<double>>& w,
                                               double lower) {
  std::vector<std::vector<double>> out = w;
  for (auto& row : out) {
    for (double& v : row) v = std::max(v, lower);
  }
  return out;
}

SignalProfile extend_signal(const Instance& inst, int receiver, Signal s) {
  SignalProfile profile;
  profile.signal.assign(inst.receiver_count(), 0);
  profile.signal[receiver] = s;
  return profile;
}

}  // namespace

// ---------------------------------------------------------------------------
// OfflineSeparator
// ---------------------------------------------------------------------------

OfflineSeparator::OfflineSeparator(const Instance& inst, std::vector<TypeProfile> profiles,
                                   std::vector<double> lambda, OracleKind oracle,
                                   double delta)
    : inst_(inst),
      profiles_(std::move(profiles)),
      lambda_(std::move(lambda)),
      oracle_(oracle),
      delta_(delta),
      layout_(inst, 0) {
  if (profiles_.size() != lambda_.size()) {
    throw InvariantViolationError("offline separator: |lambda| != |K|");
  }
}

OfflineDualPoint OfflineSeparator::unpack(const Eigen::VectorXd& center) const {
  OfflineDualPoint point;
  point.d = center.head(layout_.d_count());
  point.z = center.segment(layout_.d_count(), layout_.z_count());
  return point;
}

SeparationResponse OfflineSeparator::emit(Eigen::VectorXd normal, double offset,
                                          ConstraintTag tag) {
  const std::uint64_t label = tags_.size();
  tags_.push_back(std::move(tag));
  return SeparationResponse::cut(std::move(normal), offset, label);
}

SeparationResponse OfflineSeparator::profile_cut(int theta, const SignalProfile& s) {
  // Constraint (theta, s):  d_theta >= mu sum_k lambda_k f(R^k_s) + sum_r w_{r,s_r}.
  Eigen::VectorXd normal = Eigen::VectorXd::Zero(layout_.dimension());
  normal[layout_.d_index(theta)] = -1.0;
  double fpart = 0.0;
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    fpart += lambda_[i] * inst_.sender_fn[theta].value(activated_set(s, profiles_[i]));
  }
  for (int r = 0; r < inst_.receiver_count(); ++r) {
    const Signal sr = s.signal[r];
    for (int k = 0; k < inst_.type_count(r); ++k) {
      if ((sr >> k) & 1u) {
        normal[layout_.z_index(r, sr, k)] += inst_.prior[theta] * inst_.utility(r, k, theta);
      }
    }
  }
  const double offset = -inst_.prior[theta] * fpart;
  return emit(std::move(normal), offset, {ConstraintTag::Kind::kProfile, theta, s});
}

SeparationResponse OfflineSeparator::separate(const Eigen::VectorXd& center,
                                              double gamma_bar) {
  const int d = inst_.state_count();
  const int p = layout_.dimension();

  // d_theta >= 0, i.e. the (theta, empty-profile) constraints.
  for (int t = 0; t < d; ++t) {
    if (center[layout_.d_index(t)] < -tol::kAffine) {
      SignalProfile empty;
      empty.signal.assign(inst_.receiver_count(), 0);
      return profile_cut(t, empty);
    }
  }

  // First constraint of the feasibility problem: sum_theta d_theta <= gamma_bar.
  double d_sum = 0.0;
  for (int t = 0; t < d; ++t) d_sum += center[layout_.d_index(t)];
  if (d_sum > gamma_bar + tol::kCutMargin) {
    Eigen::VectorXd normal = Eigen::VectorXd::Zero(p);
    for (int t = 0; t < d; ++t) normal[layout_.d_index(t)] = 1.0;
    return emit(std::move(normal), gamma_bar, {ConstraintTag::Kind::kBound, -1, {}});
  }

  // z >= 0 (polynomially many, checked directly).
  for (int i = 0; i < layout_.z_count(); ++i) {
    if (center[layout_.d_count() + i] < -tol::kAffine) {
      Eigen::VectorXd normal = Eigen::VectorXd::Zero(p);
      normal[layout_.d_count() + i] = -1.0;
      return emit(std::move(normal), 0.0, {ConstraintTag::Kind::kBound, -1, {}});
    }
  }

  const auto weights = dual_weights(inst_, layout_, center);

  // Oversized positive weights: the constraint on (theta, s extended by empty
  // signals) is violated outright because d_theta <= 1 here.
  for (int t = 0; t < d; ++t) {
    for (int r = 0; r < inst_.receiver_count(); ++r) {
      for (Signal s = 1; s < Signal(weights[t][r].size()); ++s) {
        if (weights[t][r][s] > 1.0 + tol::kCutMargin) {
          return profile_cut(t, extend_signal(inst_, r, s));
        }
      }
    }
  }

  // Very negative weights only make constraints slacker; clamp them so the
  // oracle runs on bounded inputs.
  const double clamp_at = -static_cast<double>(inst_.receiver_count());
  for (int t = 0; t < d; ++t) {
    const auto clamped = clamp_weights(weights[t], clamp_at);
    SepQuery q;
    q.theta = t;
    q.profiles = profiles_;
    q.lambda.resize(lambda_.size());
    for (std::size_t i = 0; i < lambda_.size(); ++i) q.lambda[i] = inst_.prior[t] * lambda_[i];
    q.weights = clamped;
    q.eps = delta_;
    const SepResult res = run_sep_oracle(inst_, q, oracle_);

    // Violation check against the true (unclamped) constraint.
    double rhs = 0.0;
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
      rhs += lambda_[i] *
             inst_.sender_fn[t].value(activated_set(res.profile, profiles_[i]));
    }
    rhs *= inst_.prior[t];
    for (int r = 0; r < inst_.receiver_count(); ++r) {
      rhs += weights[t][r][res.profile.signal[r]];
    }
    if (rhs > center[layout_.d_index(t)] + tol::kCutMargin) {
      return profile_cut(t, res.profile);
    }
  }

  return SeparationResponse::feasible();
}

SeparationResponse offline_sep_case_analysis(const Instance& inst,
                                             const std::vector<TypeProfile>& profiles,
                                             const std::vector<double>& lambda,
                                             const OfflineDualPoint& point, double gamma_bar,
                                             OracleKind oracle, double delta,
                                             ConstraintTag* emitted) {
  OfflineSeparator sep(inst, profiles, lambda, oracle, delta);
  Eigen::VectorXd center(sep.layout().dimension());
  center << point.d, point.z;
  const SeparationResponse response = sep.separate(center, gamma_bar);
  if (emitted != nullptr && !response.is_feasible) {
    *emitted = sep.tags().at(response.violated.label);
  }
  return response;
}

// ---------------------------------------------------------------------------
// ProjectionSeparator
// ---------------------------------------------------------------------------

ProjectionSeparator::ProjectionSeparator(const Instance& inst,
                                         std::vector<TypeProfile> profiles,
                                         std::vector<double> y_values, OracleKind oracle,
                                         double delta)
    : inst_(inst),
      profiles_(std::move(profiles)),
      y_(std::move(y_values)),
      oracle_(oracle),
      delta_(delta),
      layout_(inst, static_cast<int>(profiles_.size())) {
  if (profiles_.size() != y_.size()) {
    throw InvariantViolationError("projection separator: |y| != |K|");
  }
  const double k = static_cast<double>(profiles_.size());
  d_upper_ = 4.0 * k;
  nu_upper_ = k + 10.0;
  w_lower_ = -4.0 * k * inst_.receiver_count() - 10.0;
}

ProjectionDualPoint ProjectionSeparator::unpack(const Eigen::VectorXd& center) const {
  ProjectionDualPoint point;
  point.d = center.head(layout_.d_count());
  point.z = center.segment(layout_.d_count(), layout_.z_count());
  point.nu = center.tail(layout_.nu_count());
  return point;
}

SeparationResponse ProjectionSeparator::emit(Eigen::VectorXd normal, double offset,
                                             ConstraintTag tag) {
  const std::uint64_t label = tags_.size();
  tags_.push_back(std::move(tag));
  return SeparationResponse::cut(std::move(normal), offset, label);
}

void ProjectionSeparator::profile_constraint(int theta, const SignalProfile& s,
                                             Eigen::VectorXd* normal, double* offset) const {
  // d_theta >= mu_theta sum_k nu_k f(R^k_s) + sum_r w_{r,s_r}, written as
  // normal . x <= 0 over [d | z | nu].
  *normal = Eigen::VectorXd::Zero(layout_.dimension());
  (*normal)[layout_.d_index(theta)] = -1.0;
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    const double f = inst_.sender_fn[theta].value(activated_set(s, profiles_[i]));
    if (f != 0.0) {
      (*normal)[layout_.nu_index(static_cast<int>(i))] += inst_.prior[theta] * f;
    }
  }
  for (int r = 0; r < inst_.receiver_count(); ++r) {
    const Signal sr = s.signal[r];
    for (int k = 0; k < inst_.type_count(r); ++k) {
      if ((sr >> k) & 1u) {
        (*normal)[layout_.z_index(r, sr, k)] += inst_.prior[theta] * inst_.utility(r, k, theta);
      }
    }
  }
  *offset = 0.0;
}

SeparationResponse ProjectionSeparator::profile_cut(int theta, const SignalProfile& s) {
  Eigen::VectorXd normal;
  double offset = 0.0;
  profile_constraint(theta, s, &normal, &offset);
  return emit(std::move(normal), offset, {ConstraintTag::Kind::kProfile, theta, s});
}

void ProjectionSeparator::add_explicit(int theta, const SignalProfile& s) {
  const ConstraintTag tag{ConstraintTag::Kind::kProfile, theta, s};
  for (const ConstraintTag& existing : explicit_tags_) {
    if (existing == tag) return;
  }
  Eigen::VectorXd normal;
  double offset = 0.0;
  profile_constraint(theta, s, &normal, &offset);
  explicit_tags_.push_back(tag);
  explicit_normals_.push_back(std::move(normal));
  explicit_offsets_.push_back(offset);
}

SeparationResponse ProjectionSeparator::separate(const Eigen::VectorXd& center,
                                                 double gamma) {
  const int d = inst_.state_count();
  const int p = layout_.dimension();
  const int kcount = layout_.nu_count();

  // Explicitly carried constraints (the accumulated H_Unf) come first.
  for (std::size_t i = 0; i < explicit_tags_.size(); ++i) {
    if (explicit_normals_[i].dot(center) > explicit_offsets_[i] + tol::kCutMargin) {
      return emit(explicit_normals_[i], explicit_offsets_[i], explicit_tags_[i]);
    }
  }

  // Objective constraint: sum_k (nu_k y_k - nu_k^2 / 4) - sum_theta d_theta >= gamma.
  // Concave in nu, so the supporting hyperplane at the center is a valid cut.
  double objective = 0.0;
  for (int i = 0; i < kcount; ++i) {
    const double nu = center[layout_.nu_index(i)];
    objective += nu * y_[i] - 0.25 * nu * nu;
  }
  for (int t = 0; t < d; ++t) objective -= center[layout_.d_index(t)];
  if (objective < gamma - tol::kCutMargin) {
    Eigen::VectorXd normal = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < kcount; ++i) {
      const double nu = center[layout_.nu_index(i)];
      normal[layout_.nu_index(i)] = -(y_[i] - 0.5 * nu);
    }
    for (int t = 0; t < d; ++t) normal[layout_.d_index(t)] = 1.0;
    const double offset = normal.dot(center) - (gamma - objective);
    return emit(std::move(normal), offset, {ConstraintTag::Kind::kObjective, -1, {}});
  }

  // d_theta in [0, 4|K|]: lower violations cut the (theta, empty) constraint,
  // upper violations the derived bound (the objective constraint held above,
  // so this branch is the numerical contradiction path).
  for (int t = 0; t < d; ++t) {
    const double dt = center[layout_.d_index(t)];
    if (dt < -tol::kAffine) {
      SignalProfile empty;
      empty.signal.assign(inst_.receiver_count(), 0);
      return profile_cut(t, empty);
    }
    if (dt > d_upper_ + tol::kAffine) {
      Eigen::VectorXd normal = Eigen::VectorXd::Zero(p);
      normal[layout_.d_index(t)] = 1.0;
      return emit(std::move(normal), d_upper_, {ConstraintTag::Kind::kBound, t, {}});
    }
  }

  // nu_k in [0, |K| + 10].
  for (int i = 0; i < kcount; ++i) {
    const double nu = center[layout_.nu_index(i)];
    if (nu < -tol::kAffine) {
      Eigen::VectorXd normal = Eigen::VectorXd::Zero(p);
      normal[layout_.nu_index(i)] = -1.0;
      return emit(std::move(normal), 0.0, {ConstraintTag::Kind::kBound, -1, {}});
    }
    if (nu > nu_upper_ + tol::kAffine) {
      Eigen::VectorXd normal = Eigen::VectorXd::Zero(p);
      normal[layout_.nu_index(i)] = 1.0;
      return emit(std::move(normal), nu_upper_, {ConstraintTag::Kind::kBound, -1, {}});
    }
  }

  // z >= 0.
  for (int i = 0; i < layout_.z_count(); ++i) {
    if (center[layout_.d_count() + i] < -tol::kAffine) {
      Eigen::VectorXd normal = Eigen::VectorXd::Zero(p);
      normal[layout_.d_count() + i] = -1.0;
      return emit(std::move(normal), 0.0, {ConstraintTag::Kind::kBound, -1, {}});
    }
  }

  const auto weights = dual_weights(inst_, layout_, center);

  for (int t = 0; t < d; ++t) {
    for (int r = 0; r < inst_.receiver_count(); ++r) {
      for (Signal s = 1; s < Signal(weights[t][r].size()); ++s) {
        if (weights[t][r][s] > d_upper_ + tol::kCutMargin) {
          return profile_cut(t, extend_signal(inst_, r, s));
        }
      }
    }
  }

  for (int t = 0; t < d; ++t) {
    const auto clamped = clamp_weights(weights[t], w_lower_);
    SepQuery q;
    q.theta = t;
    q.profiles = profiles_;
    q.lambda.resize(profiles_.size());
    for (int i = 0; i < kcount; ++i) {
      q.lambda[i] = inst_.prior[t] * std::max(center[layout_.nu_index(i)], 0.0);
    }
    q.weights = clamped;
    q.eps = delta_;
    const SepResult res = run_sep_oracle(inst_, q, oracle_);

    double rhs = 0.0;
    for (int i = 0; i < kcount; ++i) {
      rhs += center[layout_.nu_index(i)] *
             inst_.sender_fn[t].value(activated_set(res.profile, profiles_[i]));
    }
    rhs *= inst_.prior[t];
    for (int r = 0; r < inst_.receiver_count(); ++r) {
      rhs += weights[t][r][res.profile.signal[r]];
    }
    if (rhs > center[layout_.d_index(t)] + tol::kCutMargin) {
      return profile_cut(t, res.profile);
    }
  }

  return SeparationResponse::feasible();
}

SeparationResponse projection_sep_case_analysis(
    const Instance& inst, const std::vector<TypeProfile>& profiles,
    const std::vector<double>& y_values, const ProjectionDualPoint& point, double gamma,
    const std::vector<ConstraintTag>& explicit_set, OracleKind oracle, double delta,
    ConstraintTag* emitted) {
  ProjectionSeparator sep(inst, profiles, y_values, oracle, delta);
  for (const ConstraintTag& tag : explicit_set) {
    if (tag.kind == ConstraintTag::Kind::kProfile) sep.add_explicit(tag.theta, tag.profile);
  }
  Eigen::VectorXd center(sep.layout().dimension());
  center << point.d, point.z, point.nu;
  const SeparationResponse response = sep.separate(center, gamma);
  if (emitted != nullptr && !response.is_feasible) {
    *emitted = sep.tags().at(response.violated.label);
  }
  return response;
}

// ---------------------------------------------------------------------------
// Restricted primal recovery
// ---------------------------------------------------------------------------

namespace {

struct RestrictedVars {
  std::vector<std::vector<SignalProfile>> per_state;  // sorted, unique
  std::vector<int> offset;                            // variable start per state
  int total = 0;

  void finalize(int x_block) {
    offset.resize(per_state.size());
    int at = x_block;
    for (std::size_t t = 0; t < per_state.size(); ++t) {
      offset[t] = at;
      at += static_cast<int>(per_state[t].size());
    }
    total = at - x_block;
  }
};

// Variables named by the cut list: one phi_theta(s) per profile constraint.
// The always-empty profile is included for every state so the per-state
// simplex rows always admit a (persuasive) solution.
RestrictedVars restricted_vars(const Instance& inst,
                               const std::vector<ConstraintTag>& tags, int x_block) {
  std::vector<std::set<SignalProfile>> sets(inst.state_count());
  SignalProfile empty;
  empty.signal.assign(inst.receiver_count(), 0);
  for (int t = 0; t < inst.state_count(); ++t) sets[t].insert(empty);
  for (const ConstraintTag& tag : tags) {
    if (tag.kind == ConstraintTag::Kind::kProfile) {
      sets[tag.theta].insert(tag.profile);
    }
  }
  RestrictedVars vars;
  vars.per_state.resize(inst.state_count());
  for (int t = 0; t < inst.state_count(); ++t) {
    vars.per_state[t].assign(sets[t].begin(), sets[t].end());
  }
  vars.finalize(x_block);
  return vars;
}

RestrictedVars full_vars(const Instance& inst, int x_block) {
  const std::uint64_t total = inst.signal_profile_count();
  RestrictedVars vars;
  vars.per_state.resize(inst.state_count());
  std::vector<SignalProfile> all;
  all.reserve(total);
  for (std::uint64_t i = 0; i < total; ++i) {
    all.push_back(signal_profile_from_index(inst, i));
  }
  for (int t = 0; t < inst.state_count(); ++t) vars.per_state[t] = all;
  vars.finalize(x_block);
  return vars;
}

struct PersuasivenessRows {
  // One row per (receiver, signal, type in signal) that occurs among the
  // available profile variables.
  struct Row {
    int receiver;
    Signal signal;
    int type;
  };
  std::vector<Row> rows;
};

PersuasivenessRows collect_rows(const Instance& inst, const RestrictedVars& vars) {
  std::set<std::pair<int, Signal>> used;
  for (const auto& profiles : vars.per_state) {
    for (const SignalProfile& s : profiles) {
      for (int r = 0; r < inst.receiver_count(); ++r) {
        if (s.signal[r] != 0) used.insert({r, s.signal[r]});
      }
    }
  }
  PersuasivenessRows out;
  for (const auto& [r, s] : used) {
    for (int k = 0; k < inst.type_count(r); ++k) {
      if ((s >> k) & 1u) out.rows.push_back({r, s, k});
    }
  }
  return out;
}

// Fills the persuasiveness block (as <= rows: negated residuals) and the
// per-state simplex equalities shared by the LP and QP recoveries.
void fill_common_constraints(const Instance& inst, const RestrictedVars& vars,
                             const PersuasivenessRows& rows, Eigen::MatrixXd* ineq_a,
                             Eigen::VectorXd* ineq_b, Eigen::MatrixXd* eq_a,
                             Eigen::VectorXd* eq_b) {
  for (std::size_t row = 0; row < rows.rows.size(); ++row) {
    const auto& pr = rows.rows[row];
    for (int t = 0; t < inst.state_count(); ++t) {
      const double mu_u = inst.prior[t] * inst.utility(pr.receiver, pr.type, t);
      for (std::size_t j = 0; j < vars.per_state[t].size(); ++j) {
        if (vars.per_state[t][j].signal[pr.receiver] == pr.signal) {
          (*ineq_a)(row, vars.offset[t] + j) = -mu_u;
        }
      }
    }
    (*ineq_b)(row) = 0.0;
  }
  for (int t = 0; t < inst.state_count(); ++t) {
    for (std::size_t j = 0; j < vars.per_state[t].size(); ++j) {
      (*eq_a)(t, vars.offset[t] + j) = 1.0;
    }
    (*eq_b)(t) = 1.0;
  }
}

SignalingScheme scheme_from_solution(const Instance& inst, const RestrictedVars& vars,
                                     const Eigen::VectorXd& x) {
  SignalingScheme phi(inst.state_count());
  for (int t = 0; t < inst.state_count(); ++t) {
    double mass = 0.0;
    for (std::size_t j = 0; j < vars.per_state[t].size(); ++j) {
      mass += std::max(x[vars.offset[t] + j], 0.0);
    }
    if (mass <= 0.0) {
      throw InvariantViolationError("recovered scheme has no probability mass");
    }
    for (std::size_t j = 0; j < vars.per_state[t].size(); ++j) {
      const double p = std::max(x[vars.offset[t] + j], 0.0) / mass;
      if (p > SignalingScheme::kDropMass) phi.add(t, vars.per_state[t][j], p);
    }
  }
  return phi;
}

// LP (full or restricted): maximize the expected sender utility over the
// available profile variables.
LpSolution solve_signaling_lp(const Instance& inst, const std::vector<TypeProfile>& profiles,
                              const std::vector<double>& lambda, const RestrictedVars& vars) {
  const PersuasivenessRows rows = collect_rows(inst, vars);
  LinearProgram lp = LinearProgram::zeros(vars.total, static_cast<int>(rows.rows.size()),
                                          inst.state_count());
  fill_common_constraints(inst, vars, rows, &lp.ineq_a, &lp.ineq_b, &lp.eq_a, &lp.eq_b);
  for (int t = 0; t < inst.state_count(); ++t) {
    for (std::size_t j = 0; j < vars.per_state[t].size(); ++j) {
      double coeff = 0.0;
      for (std::size_t i = 0; i < profiles.size(); ++i) {
        coeff += lambda[i] *
                 inst.sender_fn[t].value(activated_set(vars.per_state[t][j], profiles[i]));
      }
      lp.objective(vars.offset[t] + j) = inst.prior[t] * coeff;
    }
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw InvariantViolationError("signaling LP is not solvable; simplex rows should admit a solution");
  }
  return sol;
}

// Restricted projection QP: variables [x_k | phi blocks], objective
// sum (x_k - y_k)^2, dominance rows x_k <= sum mu phi f.
QpSolution solve_projection_qp(const Instance& inst, const std::vector<TypeProfile>& profiles,
                               const std::vector<double>& y, const RestrictedVars& vars) {
  const int kcount = static_cast<int>(profiles.size());
  const PersuasivenessRows rows = collect_rows(inst, vars);
  const int nvars = kcount + vars.total;
  const int nineq = static_cast<int>(rows.rows.size()) + kcount;

  QuadraticProgram qp = QuadraticProgram::zeros(nvars, nineq, inst.state_count());
  Eigen::MatrixXd ineq_shift = Eigen::MatrixXd::Zero(static_cast<int>(rows.rows.size()), nvars);
  Eigen::VectorXd ineq_b = Eigen::VectorXd::Zero(static_cast<int>(rows.rows.size()));
  Eigen::MatrixXd eq_a = Eigen::MatrixXd::Zero(inst.state_count(), nvars);
  Eigen::VectorXd eq_b = Eigen::VectorXd::Zero(inst.state_count());
  fill_common_constraints(inst, vars, rows, &ineq_shift, &ineq_b, &eq_a, &eq_b);
  qp.ineq_a.topRows(rows.rows.size()) = ineq_shift;
  qp.ineq_b.head(rows.rows.size()) = ineq_b;
  qp.eq_a = eq_a;
  qp.eq_b = eq_b;

  const int dom_base = static_cast<int>(rows.rows.size());
  for (int i = 0; i < kcount; ++i) {
    qp.ineq_a(dom_base + i, i) = 1.0;
    for (int t = 0; t < inst.state_count(); ++t) {
      for (std::size_t j = 0; j < vars.per_state[t].size(); ++j) {
        const double f =
            inst.sender_fn[t].value(activated_set(vars.per_state[t][j], profiles[i]));
        if (f != 0.0) qp.ineq_a(dom_base + i, vars.offset[t] + j) -= inst.prior[t] * f;
      }
    }
    qp.ineq_b(dom_base + i) = 0.0;
  }

  for (int i = 0; i < kcount; ++i) {
    qp.quad_diag(i) = 1.0;
    qp.linear(i) = -2.0 * y[i];
    qp.constant += y[i] * y[i];
    qp.lower(i) = 0.0;
    qp.upper(i) = 1.0;
  }
  return solve_qp(qp);
}

void validate_profile_set(const Instance& inst, const std::vector<TypeProfile>& profiles) {
  std::set<TypeProfile> seen;
  for (const TypeProfile& k : profiles) {
    if (static_cast<int>(k.type.size()) != inst.receiver_count()) {
      throw InvariantViolationError("type profile dimension mismatch");
    }
    for (int r = 0; r < inst.receiver_count(); ++r) {
      if (k.type[r] < 0 || k.type[r] >= inst.type_count(r)) {
        throw InvariantViolationError("type index out of range");
      }
    }
    if (!seen.insert(k).second) {
      throw InvariantViolationError("duplicate type profile in K");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Offline pipeline
// ---------------------------------------------------------------------------

OfflineResult exact_offline_solve(const Instance& inst,
                                  const std::vector<TypeProfile>& profiles,
                                  const std::vector<double>& lambda) {
  validate_profile_set(inst, profiles);
  if (profiles.size() != lambda.size()) {
    throw InvariantViolationError("exact_offline_solve: |lambda| != |K|");
  }
  for (double l : lambda) {
    if (!(l >= 0.0)) throw InvariantViolationError("exact_offline_solve: lambda < 0");
  }
  if (inst.signal_profile_count() > kOfflineEnumGuard) {
    throw OracleScaleError("exact_offline_solve: profile space exceeds the enumeration guard");
  }

  const RestrictedVars vars = full_vars(inst, 0);
  const LpSolution sol = solve_signaling_lp(inst, profiles, lambda, vars);
  OfflineResult out;
  out.scheme = scheme_from_solution(inst, vars, sol.x);
  out.value = sol.value;
  return out;
}

OfflineResult offline_solve(const Instance& inst, const std::vector<TypeProfile>& profiles,
                            const std::vector<double>& lambda, double eps,
                            OracleKind oracle) {
  validate_profile_set(inst, profiles);
  if (profiles.size() != lambda.size() || profiles.empty()) {
    throw InvariantViolationError("offline_solve: bad K / lambda");
  }
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw InvariantViolationError("offline_solve: eps must lie in (0, 1]");
  }
  double scale = 0.0;
  for (double l : lambda) {
    if (!(l > 0.0)) throw InvariantViolationError("offline_solve: lambda must be > 0 on K");
    scale += l;
  }
  std::vector<double> normalized(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) normalized[i] = lambda[i] / scale;

  const double beta = eps / 2.0;
  const double delta = eps / (2.0 * inst.state_count());
  OfflineSeparator separator(inst, profiles, normalized, oracle, delta);
  const DualLayout& layout = separator.layout();

  Eigen::VectorXd lo(layout.dimension());
  Eigen::VectorXd hi(layout.dimension());
  for (int t = 0; t < layout.d_count(); ++t) {
    lo[t] = -1.0;
    hi[t] = 2.0;
  }
  const double z_max = 4.0 * inst.receiver_count();
  for (int i = 0; i < layout.z_count(); ++i) {
    lo[layout.d_count() + i] = 0.0;
    hi[layout.d_count() + i] = z_max;
  }

  OfflineResult out;
  std::vector<ConstraintTag> last_infeasible;
  double low = 0.0;
  double high = 1.0;
  while (high - low > beta) {
    const double gamma_bar = 0.5 * (low + high);
    separator.clear_tags();
    const FeasibilityResult probe = feasibility_search(
        lo, hi, [&](const Eigen::VectorXd& c) { return separator.separate(c, gamma_bar); });
    ++out.probes;
    if (probe.feasible) {
      high = gamma_bar;
    } else {
      low = gamma_bar;
      last_infeasible.clear();
      for (const Cut& cut : probe.cuts) {
        last_infeasible.push_back(separator.tags().at(cut.label));
      }
    }
  }
  out.gamma_star = high;

  const RestrictedVars vars = restricted_vars(inst, last_infeasible, 0);
  const LpSolution sol = solve_signaling_lp(inst, profiles, normalized, vars);
  out.scheme = scheme_from_solution(inst, vars, sol.x);
  out.value = scale * sol.value;
  return out;
}

// ---------------------------------------------------------------------------
// Projection pipeline
// ---------------------------------------------------------------------------

namespace {

std::vector<double> y_values_on(const std::vector<TypeProfile>& profiles,
                                const RewardVector& y) {
  std::vector<double> out(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double v = y.value(profiles[i]);
    if (v < 0.0 || v > 2.0) {
      throw InvariantViolationError("projection input y must lie in [0, 2]");
    }
    out[i] = v;
  }
  return out;
}

}  // namespace

ProjectionResult approx_projection(const Instance& inst,
                                   const std::vector<TypeProfile>& profiles,
                                   const RewardVector& y, double eps, OracleKind oracle) {
  validate_profile_set(inst, profiles);
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw InvariantViolationError("approx_projection: eps must lie in (0, 1]");
  }
  for (const TypeProfile& k : y.support()) {
    bool found = false;
    for (const TypeProfile& p : profiles) {
      if (p == k) {
        found = true;
        break;
      }
    }
    if (!found && y.value(k) != 0.0) {
      throw InvariantViolationError("approx_projection: y must vanish outside K");
    }
  }

  ProjectionResult out;
  if (profiles.empty()) {
    out.scheme = SignalingScheme::always_empty(inst);
    return out;
  }
  const std::vector<double> yv = y_values_on(profiles, y);

  const double beta = eps / 2.0;
  const double delta = eps / (2.0 * inst.state_count());
  ProjectionSeparator separator(inst, profiles, yv, oracle, delta);
  const DualLayout& layout = separator.layout();
  const double kcount = static_cast<double>(profiles.size());

  Eigen::VectorXd lo(layout.dimension());
  Eigen::VectorXd hi(layout.dimension());
  for (int t = 0; t < layout.d_count(); ++t) {
    lo[layout.d_index(t)] = -1.0;
    hi[layout.d_index(t)] = 4.0 * kcount + 1.0;
  }
  const double z_max = 4.0 * inst.receiver_count();
  for (int i = 0; i < layout.z_count(); ++i) {
    lo[layout.d_count() + i] = 0.0;
    hi[layout.d_count() + i] = z_max;
  }
  for (int i = 0; i < layout.nu_count(); ++i) {
    lo[layout.nu_index(i)] = -1.0;
    hi[layout.nu_index(i)] = kcount + 11.0;
  }

  auto probe = [&](double gamma) {
    separator.clear_tags();
    const FeasibilityResult res = feasibility_search(
        lo, hi, [&](const Eigen::VectorXd& c) { return separator.separate(c, gamma); });
    ++out.probes;
    // Every profile constraint discovered so far is carried forward and
    // checked explicitly in later runs (the growing H_Unf set).
    for (const Cut& cut : res.cuts) {
      const ConstraintTag& tag = separator.tags().at(cut.label);
      if (tag.kind == ConstraintTag::Kind::kProfile) {
        separator.add_explicit(tag.theta, tag.profile);
      }
    }
    return res.feasible;
  };

  // The dual value never exceeds 4|K|, so the top probe must reject; the
  // search then brackets the boundary down to width beta.
  double gamma_hi = 4.0 * kcount + 1.0;
  double gamma_lo = 0.0;
  if (probe(gamma_hi)) {
    throw InvariantViolationError("approx_projection: dual accepted above its value bound");
  }
  while (gamma_hi - gamma_lo > beta) {
    const double gamma = 0.5 * (gamma_lo + gamma_hi);
    if (probe(gamma)) {
      gamma_lo = gamma;
    } else {
      gamma_hi = gamma;
    }
  }
  out.gamma_star = gamma_lo;

  const RestrictedVars vars =
      restricted_vars(inst, separator.explicit_set(), static_cast<int>(profiles.size()));
  const QpSolution qp = solve_projection_qp(inst, profiles, yv, vars);
  out.qp_gap_satisfied = qp.gap_satisfied;
  out.scheme = scheme_from_solution(inst, vars, qp.x);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    out.x.set(profiles[i], std::clamp(qp.x[i], 0.0, 1.0));
  }
  return out;
}

RewardVector exact_projection(const Instance& inst, const std::vector<TypeProfile>& profiles,
                              const RewardVector& y) {
  validate_profile_set(inst, profiles);
  if (inst.signal_profile_count() > kOfflineEnumGuard) {
    throw OracleScaleError("exact_projection: profile space exceeds the enumeration guard");
  }
  RewardVector out;
  if (profiles.empty()) return out;
  const std::vector<double> yv = y_values_on(profiles, y);
  const RestrictedVars vars = full_vars(inst, static_cast<int>(profiles.size()));
  const QpSolution qp = solve_projection_qp(inst, profiles, yv, vars);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    out.set(profiles[i], std::clamp(qp.x[i], 0.0, 1.0));
  }
  return out;
}

}  // namespace persuade
