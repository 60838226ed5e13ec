#include "gpocc/gp.hpp"

#include <cmath>

#include "gpocc/linalg.hpp"
#include "gpocc/simd/kernels.hpp"

namespace gpocc {
namespace {

constexpr double kDuplicateTol = 1e-9;

struct Soa {
    std::vector<double> xs, ys, y;
};

Soa deduplicate(const TrainingSet& train) {
    Soa soa;
    soa.xs.reserve(train.inputs.size());
    soa.ys.reserve(train.inputs.size());
    soa.y.reserve(train.inputs.size());
    for (std::size_t i = 0; i < train.inputs.size(); ++i) {
        const Point2 p = train.inputs[i];
        bool dup = false;
        for (std::size_t j = 0; j < soa.xs.size(); ++j) {
            const double dx = p.x - soa.xs[j];
            const double dy = p.y - soa.ys[j];
            if (dx * dx + dy * dy <= kDuplicateTol * kDuplicateTol) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            soa.xs.push_back(p.x);
            soa.ys.push_back(p.y);
            soa.y.push_back(train.targets[i]);
        }
    }
    return soa;
}

}  // namespace

Posterior gp_posterior(Point2 query, const TrainingSet& train, const PriorMeanFn& prior_mean,
                       const KernelParams& params) {
    train.validate();
    params.validate();

    if (train.inputs.empty()) return {prior_mean(query), KernelParams::signal_variance};

    const Soa soa = deduplicate(train);
    const auto n = static_cast<Eigen::Index>(soa.xs.size());
    const double inv_l = 1.0 / params.lengthscale;
    const auto& ops = simd::active();

    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // Fills column i; the Gram matrix is exactly symmetric.
        ops.kernel_row(soa.xs.data(), soa.ys.data(), soa.xs.size(), soa.xs[i], soa.ys[i], inv_l,
                       gram.data() + i * n);
    }
    gram.diagonal().array() += train.noise_sigma2;

    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i)
        residual[i] = soa.y[i] - prior_mean({soa.xs[i], soa.ys[i]});

    SpdSolver solver(std::move(gram), {.jitter = params.jitter});
    const Eigen::VectorXd alpha = solver.solve(residual);

    Eigen::VectorXd k_star(n);
    ops.kernel_row(soa.xs.data(), soa.ys.data(), soa.xs.size(), query.x, query.y, inv_l,
                   k_star.data());

    const double mean = prior_mean(query) + k_star.dot(alpha);
    const double explained = solver.solve_lower(k_star).squaredNorm();
    double variance = KernelParams::signal_variance - explained;
    variance = std::clamp(variance, 0.0, KernelParams::signal_variance + params.jitter);
    return {mean, variance};
}

}  // namespace gpocc
