#pragma once

#include <functional>
#include <vector>

#include "gpocc/geometry.hpp"
#include "gpocc/kernel.hpp"

namespace gpocc {

/// Noisy latent-value observations. Inputs closer together than 1e-9 m are
/// treated as duplicates and dropped (first occurrence wins) before any
/// solve so the Gram matrix stays SPD.
struct TrainingSet {
    std::vector<Point2> inputs;
    std::vector<double> targets;
    double noise_sigma2{1e-6};

    void validate() const {
        if (inputs.size() != targets.size())
            throw ContractViolation("TrainingSet: |inputs| != |targets|");
        if (!(noise_sigma2 >= 0.0))
            throw ContractViolation("TrainingSet: noise_sigma2 must be >= 0");
    }
};

struct Posterior {
    double mean{0.0};
    double variance{1.0};
};

using PriorMeanFn = std::function<double(Point2)>;

/// Exact GP conditioning: mean = m(x*) + k_*X [K + sigma^2 I]^-1 (Y - m(X)),
/// variance = 1 - k_*X [K + sigma^2 I]^-1 k_X*. An empty training set
/// returns (m(x*), 1).
Posterior gp_posterior(Point2 query, const TrainingSet& train, const PriorMeanFn& prior_mean,
                       const KernelParams& params);

}  // namespace gpocc
