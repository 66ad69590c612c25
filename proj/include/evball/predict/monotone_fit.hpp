#pragma once

#include <Eigen/Core>
#include <vector>

#include "evball/core/types.hpp"

namespace evball::predict {

using core::BallMeasurement;

/// Per-axis polynomial regression over one measurement span. x(t) and y(t)
/// are plain least squares; Z(t) additionally satisfies dZ/dt <= 0 at every
/// collocation point (the measurement times plus a uniform 10-point grid).
struct PolyFit {
  Eigen::VectorXd beta_x;
  Eigen::VectorXd beta_y;
  Eigen::VectorXd beta_z;
  int degree = 0;
  double t0 = 0.0;     // measurement epoch the basis is anchored at
  double t_max = 0.0;  // fit window is [0, t_max] in shifted time
  bool degree_reduced = false;
  bool constraint_active = false;

  double eval_x(double t) const;
  double eval_y(double t) const;
  double eval_z(double t) const;
  double eval_dz(double t) const;
};

/// Solves the constrained least-squares problem as a convex QP with an
/// active-set method; the result satisfies the KKT conditions to solver
/// tolerance. A rank-deficient design matrix (or fewer than degree+1
/// samples) falls back to a reduced degree.
PolyFit fit_monotone_poly(const std::vector<BallMeasurement>& meas, int degree);

/// Minimizes 0.5 p'Hp + g'p subject to C p <= d (H positive semidefinite).
/// Exposed for testing; requires a feasible start.
Eigen::VectorXd solve_qp_active_set(const Eigen::MatrixXd& h,
                                    const Eigen::VectorXd& g,
                                    const Eigen::MatrixXd& c,
                                    const Eigen::VectorXd& d,
                                    const Eigen::VectorXd& feasible_start,
                                    bool* any_active = nullptr);

}  // namespace evball::predict
