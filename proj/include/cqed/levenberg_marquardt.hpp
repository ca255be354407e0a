#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace cqed {

/// Fills residuals r(x) and, when `jac` is non-null, the Jacobian dr/dx.
/// Returning false marks x as infeasible (the step is rejected).
using ResidualFn = std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac)>;

struct LmOptions {
    int max_iterations = 200;
    double cost_tolerance = 1e-10;      // relative cost change
    double gradient_tolerance = 1e-8;   // max scaled |J_i . r| / (|J_i| |r|)
    double initial_damping = 1e-3;
};

struct LmResult {
    Eigen::VectorXd x;
    Eigen::VectorXd residual;
    Eigen::MatrixXd jacobian;
    double cost = 0.0;  // 1/2 |r|^2
    int iterations = 0;
    bool converged = false;
    std::string reason;
};

/// Levenberg-Marquardt with Marquardt's diagonal scaling. On failure the
/// best point seen is returned with converged = false.
LmResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0, const LmOptions& options = {});

/// s^2 (J^T J)^-1 with s^2 = |r|^2 / (m - n).
Eigen::MatrixXd covariance(const LmResult& r);

}  // namespace cqed
