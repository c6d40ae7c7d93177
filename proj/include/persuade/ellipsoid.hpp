#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "persuade/types.hpp"

namespace persuade {

// A violated constraint a.x <= b reported by a separation callback. The label
// is opaque to the engine; callers use it to map cuts back to tagged
// constraints (the H / H_Unf sets of the persuasion pipelines).
struct Cut {
  Eigen::VectorXd normal;
  double offset = 0.0;
  std::uint64_t label = 0;
};

struct SeparationResponse {
  static SeparationResponse feasible() { return {true, {}}; }
  static SeparationResponse cut(Eigen::VectorXd normal, double offset,
                                std::uint64_t label = 0) {
    return {false, {std::move(normal), offset, label}};
  }

  bool is_feasible = false;
  Cut violated;
};

using SeparationOracle = std::function<SeparationResponse(const Eigen::VectorXd&)>;

struct EllipsoidState {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;     // symmetric positive definite
  int iteration = 0;
  double half_log_det = 0.0; // volume proxy, 0.5 * log det(shape)
};

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd point;      // accepted center when feasible
  std::vector<Cut> cuts;      // ordered list of every cut issued
  int iterations = 0;
  double final_half_log_det = 0.0;
};

struct EllipsoidOptions {
  // <= 0 means the default ceil(4 p (p+1) ln(width / feas_tol)).
  int max_iterations = 0;
  // Volume proxy threshold; NaN means the default p * ln(feas_tol).
  double volume_threshold = std::numeric_limits<double>::quiet_NaN();
  double feasibility_tolerance = tol::kEllipsoidFeas;
};

// Central-cut ellipsoid feasibility search. Starts from the ball
// circumscribing [lo, hi]; each Cut response triggers the standard update.
// Returns Feasible(center) the first time the oracle accepts, Infeasible with
// the ordered cut list when the volume proxy falls below the threshold or the
// iteration budget is exhausted. Loss of positive definiteness restarts the
// search once with doubled initial radius; a second failure throws
// NumericalFailureError.
FeasibilityResult feasibility_search(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                     const SeparationOracle& oracle,
                                     const EllipsoidOptions& options = {});

}  // namespace persuade
