#pragma once

#include <cmath>

#include "trm/errors.hpp"

namespace trm {

/// C(theta) = lgt(theta)/2 maps the real line onto the admissible interval
/// (0, 1/2), with lgt(theta) = 1/(1+e^{-theta}).
struct LogitC {
    double c = 0.0;
    double dc_dtheta = 0.0;
};

inline LogitC logit_c(double theta) {
    const double lgt = 1.0 / (1.0 + std::exp(-theta));
    return {0.5 * lgt, 0.5 * lgt * (1.0 - lgt)};
}

/// Inverse map, defined for c in (0, 1/2): theta = lgt^{-1}(2c).
inline double logit_c_inverse(double c) {
    if (!(c > 0.0 && c < 0.5))
        throw InverseOutOfRange("logit_c_inverse: c must lie in (0, 1/2)");
    const double y = 2.0 * c;
    return -std::log(1.0 / y - 1.0);
}

/// dC/dtheta expressed through C itself: with lgt = 2C the chain factor is
/// lgt(1-lgt)/2 = C(1-2C).
inline double logit_chain_from_c(double c) { return c * (1.0 - 2.0 * c); }

}  // namespace trm
