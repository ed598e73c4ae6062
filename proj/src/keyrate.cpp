#include "fsqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>

#include "fsqkd/errors.hpp"

namespace fsqkd {

double binary_entropy(double e) {
    if (!(e >= 0.0 && e <= 1.0)) {
        throw DomainError("binary entropy argument must lie in [0,1]");
    }
    if (e == 0.0 || e == 1.0) {
        return 0.0;
    }
    return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

ErrorCorrectionModel ErrorCorrectionModel::constant(double f) {
    if (!(f >= 1.0)) {
        throw ArgumentError("error-correction inefficiency must be >= 1");
    }
    ErrorCorrectionModel m;
    m.points_.emplace_back(0.0, f);
    return m;
}

ErrorCorrectionModel ErrorCorrectionModel::table(std::vector<std::pair<double, double>> points) {
    if (points.empty()) {
        throw ArgumentError("error-correction table must be non-empty");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].second >= 1.0)) {
            throw ArgumentError("error-correction inefficiency must be >= 1 everywhere");
        }
        if (i > 0 && !(points[i].first > points[i - 1].first)) {
            throw ArgumentError("error-correction table QBER values must be strictly increasing");
        }
    }
    ErrorCorrectionModel m;
    m.points_ = std::move(points);
    return m;
}

ErrorCorrectionModel ErrorCorrectionModel::default_table() {
    return table({{0.0430, 1.2202}, {0.0551, 1.2697}});
}

double ErrorCorrectionModel::efficiency(double qber) const {
    if (points_.size() == 1 || qber <= points_.front().first) {
        return points_.front().second;
    }
    if (qber >= points_.back().first) {
        return points_.back().second;
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (qber <= points_[i].first) {
            const auto& [x0, y0] = points_[i - 1];
            const auto& [x1, y1] = points_[i];
            return y0 + (y1 - y0) * (qber - x0) / (x1 - x0);
        }
    }
    return points_.back().second;
}

double secret_fraction(double e, const ErrorCorrectionModel& ec) {
    if (!(e >= 0.0 && e <= 0.5)) {
        throw DomainError("QBER must lie in [0, 0.5]");
    }
    const double h = binary_entropy(e);
    return 1.0 - ec.efficiency(e) * h - h;
}

double secret_fraction_per_raw_bit(double e, const ErrorCorrectionModel& ec) {
    return 0.5 * secret_fraction(e, ec);
}

KeyRateResult secret_key_from_blocks(std::span<const BlockStats> blocks,
                                     const ErrorCorrectionModel& ec) {
    if (blocks.empty()) {
        throw ArgumentError("secret_key_from_blocks requires at least one block");
    }
    KeyRateResult r;
    std::uint64_t errors = 0;
    for (const BlockStats& b : blocks) {
        r.raw_count += b.coincidences;
        r.sifted_count += b.sifted_count;
        errors += b.errors_z + b.errors_x;
    }
    if (r.sifted_count == 0) {
        return r;  // qber_defined stays false, secret_bits stays 0
    }
    r.qber = static_cast<double>(errors) / static_cast<double>(r.sifted_count);
    r.qber_defined = true;
    r.f_used = ec.efficiency(r.qber);
    r.secret_fraction_per_sifted_bit = secret_fraction(std::min(r.qber, 0.5), ec);
    r.secret_bits =
        std::max(0.0, static_cast<double>(r.sifted_count) * r.secret_fraction_per_sifted_bit);
    return r;
}

}  // namespace fsqkd
