#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "marginforge/bounds.hpp"

namespace marginforge {

double kl(double q, double p) {
    if (!(q >= 0.0 && q <= 1.0) || !(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("kl: arguments must lie in [0, 1]");
    constexpr double inf = std::numeric_limits<double>::infinity();
    double a = 0.0;
    if (q > 0.0) a = p == 0.0 ? inf : q * std::log(q / p);
    double b = 0.0;
    if (q < 1.0) b = p == 1.0 ? inf : (1.0 - q) * (std::log1p(-q) - std::log1p(-p));
    const double d = a + b;
    return d > 0.0 ? d : 0.0;
}

KlInverse kl_inverse(double q, double u) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("kl_inverse: q = " + std::to_string(q) + " outside [0, 1]");
    if (!(u >= 0.0)) throw std::invalid_argument("kl_inverse: budget u must be non-negative");
    if (u == 0.0) return {q, false};
    if (q >= kKlInverseCeiling || kl(q, kKlInverseCeiling) < u) return {1.0, true};

    double lo = q;
    double hi = kKlInverseCeiling;
    for (int i = 0; i < kKlInverseIterations; ++i) {
        const double mid = lo + (hi - lo) / 2.0;
        if (kl(q, mid) >= u)
            hi = mid;
        else
            lo = mid;
    }
    return {hi, false};
}

}  // namespace marginforge
