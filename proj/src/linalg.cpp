#include "gpocc/linalg.hpp"

#include <sstream>

#include "gpocc/errors.hpp"

namespace gpocc {

SpdSolver::SpdSolver(Eigen::MatrixXd matrix, Options options) {
    const Eigen::Index n = matrix.rows();
    if (n != matrix.cols()) throw ContractViolation("SpdSolver: matrix must be square");
    if (static_cast<std::size_t>(n) > options.max_n) {
        std::ostringstream msg;
        msg << "SpdSolver: n=" << n << " exceeds local-GP cap " << options.max_n;
        throw ContractViolation(msg.str());
    }
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-12)) {
        std::ostringstream msg;
        msg << "SpdSolver: matrix not symmetric (max |A-A^T| = " << asym << ")";
        throw ContractViolation(msg.str());
    }

    double jitter = options.jitter;
    for (int attempt = 0; attempt <= options.max_jitter_retries; ++attempt) {
        Eigen::MatrixXd a = matrix;
        a.diagonal().array() += jitter;
        llt_.compute(a);
        if (llt_.info() == Eigen::Success) {
            applied_jitter_ = jitter;
            return;
        }
        jitter = jitter > 0.0 ? jitter * 2.0 : 1e-12;
    }

    std::ostringstream msg;
    msg << "SpdSolver: Cholesky failed after jitter escalation (n=" << n
        << ", final jitter=" << jitter
        << ", diag min=" << matrix.diagonal().minCoeff()
        << ", diag max=" << matrix.diagonal().maxCoeff() << ")";
    throw NumericalError(msg.str());
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

Eigen::MatrixXd SpdSolver::solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }

Eigen::VectorXd SpdSolver::solve_lower(const Eigen::VectorXd& rhs) const {
    return llt_.matrixL().solve(rhs);
}

}  // namespace gpocc
