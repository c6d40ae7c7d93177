#include "persuade/ellipsoid.hpp"

#include <cmath>

namespace persuade {

namespace {

double half_log_det(const Eigen::MatrixXd& shape) {
  Eigen::LLT<Eigen::MatrixXd> llt(shape);
  if (llt.info() != Eigen::Success) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace

FeasibilityResult feasibility_search(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                     const SeparationOracle& oracle,
                                     const EllipsoidOptions& options) {
  const int p = static_cast<int>(lo.size());
  if (p <= 0 || hi.size() != p) {
    throw InvariantViolationError("feasibility_search: inconsistent box dimensions");
  }
  double width = 0.0;
  for (int i = 0; i < p; ++i) {
    if (!(lo[i] < hi[i])) {
      throw InvariantViolationError("feasibility_search: box requires lo < hi");
    }
    width = std::max(width, hi[i] - lo[i]);
  }

  const double feas_tol = options.feasibility_tolerance;
  const int max_iters =
      options.max_iterations > 0
          ? options.max_iterations
          : static_cast<int>(std::ceil(4.0 * p * (p + 1) * std::log(width / feas_tol)));
  const double vol_threshold = std::isnan(options.volume_threshold)
                                   ? p * std::log(feas_tol)
                                   : options.volume_threshold;
  const std::size_t cut_cap = 10 * static_cast<std::size_t>(max_iters);

  FeasibilityResult result;
  const double initial_radius = 0.5 * (hi - lo).norm();

  for (int attempt = 0; attempt < 2; ++attempt) {
    EllipsoidState state;
    state.center = 0.5 * (lo + hi);
    const double radius = initial_radius * (attempt == 0 ? 1.0 : 2.0);
    state.shape = radius * radius * Eigen::MatrixXd::Identity(p, p);
    state.half_log_det = p * std::log(radius);

    bool restart = false;
    for (state.iteration = 0; state.iteration < max_iters; ++state.iteration) {
      const SeparationResponse response = oracle(state.center);
      if (response.is_feasible) {
        result.feasible = true;
        result.point = state.center;
        result.iterations = state.iteration;
        result.final_half_log_det = state.half_log_det;
        return result;
      }

      const Cut& cut = response.violated;
      if (cut.normal.size() != p) {
        throw InvariantViolationError("separation cut has wrong dimension");
      }
      if (cut.normal.dot(state.center) <= cut.offset - tol::kAffine) {
        throw InvariantViolationError("separation cut does not separate the center");
      }
      if (result.cuts.size() >= cut_cap) {
        throw NumericalFailureError("feasibility_search: cut log overflow");
      }
      result.cuts.push_back(cut);

      // Central-cut update toward {x : a.x <= a.center}.
      const Eigen::VectorXd shape_a = state.shape * cut.normal;
      const double quad = cut.normal.dot(shape_a);
      if (!(quad > 0.0) || !std::isfinite(quad)) {
        restart = true;
        break;
      }
      const Eigen::VectorXd g = shape_a / std::sqrt(quad);
      state.center -= g / (p + 1);
      if (p == 1) {
        state.shape *= 0.25;
      } else {
        const double scale = static_cast<double>(p) * p / (static_cast<double>(p) * p - 1.0);
        state.shape = scale * (state.shape - (2.0 / (p + 1)) * (g * g.transpose()));
        state.shape = 0.5 * (state.shape + state.shape.transpose());
      }

      const double hld = half_log_det(state.shape);
      if (std::isnan(hld)) {
        restart = true;
        break;
      }
      state.half_log_det = hld;
      if (state.half_log_det < vol_threshold) {
        result.feasible = false;
        result.iterations = state.iteration + 1;
        result.final_half_log_det = state.half_log_det;
        return result;
      }
    }

    if (!restart) {
      // Iteration budget exhausted without acceptance: infeasible by budget.
      result.feasible = false;
      result.iterations = max_iters;
      result.final_half_log_det = state.half_log_det;
      return result;
    }
    // else: positive definiteness lost, retry once from a doubled ball
  }

  throw NumericalFailureError("feasibility_search: shape matrix lost positive definiteness twice");
}

}  // namespace persuade
