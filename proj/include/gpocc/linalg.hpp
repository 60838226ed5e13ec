#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace gpocc {

/// Cholesky solver for the small dense SPD systems behind Eq.-style GP
/// conditioning. Factors once; the factorization is reused for repeated
/// right-hand sides. On a failed factorization the diagonal jitter is
/// doubled up to max_jitter_retries times before giving up.
class SpdSolver {
public:
    struct Options {
        double jitter{1e-10};
        int max_jitter_retries{3};
        std::size_t max_n{64};  // local-GP cap
    };

    /// Factors `matrix` (+ jitter on the diagonal). Throws ContractViolation
    /// when the matrix is not symmetric within 1e-12 or exceeds max_n, and
    /// NumericalError when factorization fails after jitter escalation.
    SpdSolver(Eigen::MatrixXd matrix, Options options);
    explicit SpdSolver(Eigen::MatrixXd matrix) : SpdSolver(std::move(matrix), Options{}) {}

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

    /// Solves L y = rhs (forward substitution only), for variance terms.
    Eigen::VectorXd solve_lower(const Eigen::VectorXd& rhs) const;

    double applied_jitter() const { return applied_jitter_; }
    Eigen::Index size() const { return llt_.matrixLLT().rows(); }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double applied_jitter_{0.0};
};

}  // namespace gpocc
