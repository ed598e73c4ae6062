#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fsqkd/event_sim.hpp"

namespace fsqkd::test {

// Inverse standard normal CDF (Acklam approximation), used to build
// equal-probability histogram bins for goodness-of-fit checks.
inline double inv_norm_cdf(double p) {
    if (p <= 0.0 || p >= 1.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    static const double a1 = -39.69683028665376, a2 = 220.9460984245205,
                        a3 = -275.9285104469687, a4 = 138.3577518672690,
                        a5 = -30.66479806614716, a6 = 2.506628277459239;
    static const double b1 = -54.47609879822406, b2 = 161.5858368580409,
                        b3 = -155.6989798598866, b4 = 66.80131188771972,
                        b5 = -13.28068155288572;
    static const double c1 = -7.784894002430293e-03, c2 = -3.223964580411365e-01,
                        c3 = -2.400758277161838, c4 = -2.549732539343734,
                        c5 = 4.374664141464968, c6 = 2.938163982698783;
    static const double d1 = 7.784695709041462e-03, d2 = 3.224671290700398e-01,
                        d3 = 2.445134137142996, d4 = 3.754408661907416;
    const double plow = 0.02425;
    const double phigh = 1.0 - plow;
    double q;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) /
               ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0);
    }
    if (p > phigh) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) /
               ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0);
    }
    q = p - 0.5;
    const double r = q * q;
    return (((((a1 * r + a2) * r + a3) * r + a4) * r + a5) * r + a6) * q /
           (((((b1 * r + b2) * r + b3) * r + b4) * r + b5) * r + 1.0);
}

// Test-local homogeneous Poisson stream, independent of the simulator's
// generation path.
inline TimeTagStream poisson_stream(double rate_cps, double duration_s, std::uint64_t seed,
                                    Party party) {
    TimeTagStream s;
    s.party = party;
    s.duration_ns = static_cast<std::int64_t>(duration_s * 1e9);
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(rate_cps * 1e-9);
    std::uniform_int_distribution<int> bit(0, 1);
    double t = gap(rng);
    while (t < static_cast<double>(s.duration_ns)) {
        s.push_back(static_cast<std::int64_t>(t), bit(rng) ? Basis::X : Basis::Z,
                    static_cast<std::uint8_t>(bit(rng)), EventKind::Signal);
        t += gap(rng);
    }
    return s;
}

}  // namespace fsqkd::test
