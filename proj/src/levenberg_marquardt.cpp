#include "cqed/levenberg_marquardt.hpp"

#include <cmath>
#include <stdexcept>

namespace cqed {

namespace {

double scaled_gradient(const Eigen::MatrixXd& j, const Eigen::VectorXd& r)
{
    const double rn = r.norm();
    if (rn == 0.0)
        return 0.0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < j.cols(); ++i) {
        const double cn = j.col(i).norm();
        if (cn > 0.0)
            worst = std::max(worst, std::abs(j.col(i).dot(r)) / (cn * rn));
    }
    return worst;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0, const LmOptions& options)
{
    LmResult out;
    out.x = x0;
    if (!fn(out.x, out.residual, &out.jacobian))
        throw std::invalid_argument("levenberg_marquardt: infeasible starting point");
    if (out.residual.size() < x0.size())
        throw std::invalid_argument("levenberg_marquardt: fewer residuals than parameters");
    out.cost = 0.5 * out.residual.squaredNorm();

    double lambda = options.initial_damping;
    Eigen::VectorXd r_try;
    Eigen::MatrixXd j_try;
    for (int it = 0; it < options.max_iterations; ++it) {
        out.iterations = it + 1;
        if (scaled_gradient(out.jacobian, out.residual) < options.gradient_tolerance) {
            out.converged = true;
            out.reason = "gradient";
            return out;
        }
        const Eigen::MatrixXd jtj = out.jacobian.transpose() * out.jacobian;
        const Eigen::VectorXd g = out.jacobian.transpose() * out.residual;
        Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-300);

        bool accepted = false;
        while (lambda < 1e20) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * diag;
            const Eigen::VectorXd step = a.ldlt().solve(-g);
            const Eigen::VectorXd x_try = out.x + step;
            if (step.allFinite() && fn(x_try, r_try, &j_try) && r_try.allFinite()) {
                const double cost = 0.5 * r_try.squaredNorm();
                if (cost < out.cost) {
                    const double rel = (out.cost - cost) / std::max(out.cost, 1e-300);
                    out.x = x_try;
                    out.residual = r_try;
                    out.jacobian = j_try;
                    out.cost = cost;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    accepted = true;
                    if (rel < options.cost_tolerance) {
                        out.converged = true;
                        out.reason = "cost";
                        return out;
                    }
                    break;
                }
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // No downhill step at any damping: a local minimum to working precision.
            out.converged = true;
            out.reason = "stalled";
            return out;
        }
    }
    out.reason = "max_iterations";
    return out;
}

Eigen::MatrixXd covariance(const LmResult& r)
{
    const auto m = r.residual.size();
    const auto n = r.x.size();
    const double s2 = m > n ? r.residual.squaredNorm() / static_cast<double>(m - n) : 0.0;
    const Eigen::MatrixXd jtj = r.jacobian.transpose() * r.jacobian;
    return s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace cqed
