#pragma once

#include <cmath>

#include "gpocc/errors.hpp"

namespace gpocc {

/// Matern nu=1/2 kernel parameters. The kernel is deliberately unscaled
/// (unit signal variance): the field-shaping identities used throughout
/// (kappa(a)*kappa(b) == kappa(a+b), prior-mean scaling) hold only for
/// kappa(d) = exp(-d/l) with kappa(0) == 1. There is no kernel abstraction
/// on purpose.
struct KernelParams {
    double lengthscale{0.3};  // meters, > 0
    double jitter{1e-10};     // added to the diagonal, >= 0

    static constexpr double signal_variance = 1.0;

    void validate() const {
        if (!(lengthscale > 0.0)) throw ContractViolation("KernelParams: lengthscale must be > 0");
        if (!(jitter >= 0.0)) throw ContractViolation("KernelParams: jitter must be >= 0");
    }
};

/// kappa(d) = exp(-d/l). Monotone decreasing, 1 at d == 0.
inline double matern_half(double dist, const KernelParams& params) {
    if (!(dist >= 0.0)) throw ContractViolation("matern_half: distance must be >= 0");
    return std::exp(-dist / params.lengthscale);
}

}  // namespace gpocc
