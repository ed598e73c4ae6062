#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fsqkd/coincidence.hpp"

namespace fsqkd {

/// Binary entropy in bits, with h2(0) = h2(1) = 0. Arguments outside [0,1]
/// raise DomainError.
double binary_entropy(double e);

/// Error-correction inefficiency f(e) >= 1: either a constant or a table of
/// (qber, f) calibration points interpolated linearly and clamped at the
/// ends.
class ErrorCorrectionModel {
public:
    static ErrorCorrectionModel constant(double f);
    static ErrorCorrectionModel table(std::vector<std::pair<double, double>> points);
    /// Calibration measured with the Cascade implementation this models:
    /// f(4.30%) = 1.2202, f(5.51%) = 1.2697.
    static ErrorCorrectionModel default_table();

    double efficiency(double qber) const;

private:
    ErrorCorrectionModel() = default;
    std::vector<std::pair<double, double>> points_;
};

/// Secret key bits per *sifted* bit: 1 - f(e) h2(e) - h2(e). May be negative;
/// callers floor when converting to key sizes.
double secret_fraction(double e, const ErrorCorrectionModel& ec);

/// Same quantity per *raw* (unsifted) bit, i.e. with the 1/2 sifting factor.
double secret_fraction_per_raw_bit(double e, const ErrorCorrectionModel& ec);

struct KeyRateResult {
    std::uint64_t raw_count = 0;     // coincidences pooled over the kept blocks
    std::uint64_t sifted_count = 0;  // same-basis pairs
    double qber = 0.0;
    bool qber_defined = false;
    double f_used = 0.0;
    double secret_fraction_per_sifted_bit = 0.0;  // unfloored; negative means no key
    double secret_bits = 0.0;                     // floored at 0
};

/// Pools every block into one sifted key and applies the secret fraction once
/// at the pooled QBER. Zero sifted bits yield secret_bits = 0 with
/// qber_defined = false.
KeyRateResult secret_key_from_blocks(std::span<const BlockStats> blocks,
                                     const ErrorCorrectionModel& ec);

}  // namespace fsqkd
