#include "fsqkd/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fsqkd/errors.hpp"

namespace fsqkd {

namespace {

void require_ordered(const TimeTagStream& s, const char* name) {
    for (std::size_t i = 1; i < s.times.size(); ++i) {
        if (s.times[i] < s.times[i - 1]) {
            throw FormatError(std::string(name) + " stream is not time-ordered");
        }
    }
}

// Greedy earliest-first scan; Bob timestamps are read with a constant shift
// so accidental estimation reuses the same pass.
std::vector<MatchedPair> match_with_shift(const TimeTagStream& a, const TimeTagStream& b,
                                          std::int64_t window_ns, std::int64_t shift_ns) {
    std::vector<MatchedPair> pairs;
    std::size_t i = 0;
    std::size_t j = 0;
    const std::size_t na = a.times.size();
    const std::size_t nb = b.times.size();
    while (i < na && j < nb) {
        const std::int64_t delta = b.times[j] + shift_ns - a.times[i];
        if (delta < 0) {
            ++j;
        } else if (delta >= window_ns) {
            ++i;
        } else {
            pairs.push_back(MatchedPair{i, j});
            ++i;
            ++j;
        }
    }
    return pairs;
}

}  // namespace

void CoincidenceConfig::validate() const {
    if (window_ns <= 0) {
        throw ArgumentError("coincidence window must be > 0");
    }
    if (accidental_shift_ns <= window_ns) {
        throw ArgumentError("accidental shift must exceed the coincidence window");
    }
}

std::vector<MatchedPair> find_coincidences(const TimeTagStream& a, const TimeTagStream& b,
                                           const CoincidenceConfig& cfg) {
    cfg.validate();
    require_ordered(a, "first");
    require_ordered(b, "second");
    return match_with_shift(a, b, cfg.window_ns, 0);
}

AccidentalEstimate estimate_accidentals(const TimeTagStream& a, const TimeTagStream& b,
                                        const CoincidenceConfig& cfg) {
    cfg.validate();
    require_ordered(a, "first");
    require_ordered(b, "second");

    // Shifted Bob events occupy [shift, duration_b + shift).
    const std::int64_t overlap_ns =
        std::min(a.duration_ns, b.duration_ns + cfg.accidental_shift_ns) - cfg.accidental_shift_ns;
    if (overlap_ns <= 0) {
        throw ArgumentError("no overlap between streams after the accidental shift");
    }
    const double overlap_s = static_cast<double>(overlap_ns) * 1e-9;

    AccidentalEstimate est;
    est.measured_rate_cps =
        static_cast<double>(match_with_shift(a, b, cfg.window_ns, cfg.accidental_shift_ns).size()) /
        overlap_s;

    if (a.duration_ns > 0 && b.duration_ns > 0) {
        const double rate_a = static_cast<double>(a.size()) / a.duration_s();
        const double rate_b = static_cast<double>(b.size()) / b.duration_s();
        est.analytic_rate_cps = rate_a * rate_b * static_cast<double>(cfg.window_ns) * 1e-9;
    }
    return est;
}

namespace detail {

MatchedEvents match_events(const TimeTagStream& a, const TimeTagStream& b,
                           const CoincidenceConfig& cfg) {
    cfg.validate();
    require_ordered(a, "first");
    require_ordered(b, "second");
    MatchedEvents out;
    out.pairs = match_with_shift(a, b, cfg.window_ns, 0);
    const auto shifted = match_with_shift(a, b, cfg.window_ns, cfg.accidental_shift_ns);
    out.shifted_a_indices.reserve(shifted.size());
    for (const MatchedPair& p : shifted) {
        out.shifted_a_indices.push_back(p.a_index);
    }
    return out;
}

std::vector<BlockStats> bin_matches(const TimeTagStream& a, const TimeTagStream& b,
                                    const MatchedEvents& matches, double block_duration_s) {
    if (!(block_duration_s > 0.0)) {
        throw ArgumentError("block duration must be > 0");
    }
    const std::int64_t block_ns = static_cast<std::int64_t>(std::llround(block_duration_s * 1e9));
    if (block_ns <= 0) {
        throw ArgumentError("block duration must be at least 1 ns");
    }

    std::int64_t total_ns = std::max(a.duration_ns, b.duration_ns);
    if (!a.times.empty()) {
        total_ns = std::max(total_ns, a.times.back() + 1);
    }
    if (!b.times.empty()) {
        total_ns = std::max(total_ns, b.times.back() + 1);
    }
    const std::size_t n_blocks = static_cast<std::size_t>((total_ns + block_ns - 1) / block_ns);

    std::vector<BlockStats> blocks(n_blocks);
    for (std::size_t k = 0; k < n_blocks; ++k) {
        blocks[k].block_index = k;
        const std::int64_t start = static_cast<std::int64_t>(k) * block_ns;
        const std::int64_t span = std::min(block_ns, total_ns - start);
        blocks[k].duration_s = static_cast<double>(span) * 1e-9;
    }

    // The inputs are time-ordered, so every pass walks the block boundary
    // forward instead of dividing each timestamp.
    struct BlockWalker {
        std::int64_t block_ns;
        std::size_t index = 0;
        std::int64_t end;
        explicit BlockWalker(std::int64_t ns) : block_ns(ns), end(ns) {}
        std::size_t at(std::int64_t t) {
            while (t >= end) {
                ++index;
                end += block_ns;
            }
            return index;
        }
    };

    BlockWalker wa(block_ns);
    for (std::int64_t t : a.times) {
        ++blocks[wa.at(t)].alice_singles;
    }
    BlockWalker wb(block_ns);
    for (std::int64_t t : b.times) {
        ++blocks[wb.at(t)].bob_singles;
    }
    BlockWalker ws(block_ns);
    for (std::size_t idx : matches.shifted_a_indices) {
        blocks[ws.at(a.times[idx])].accidental_estimate += 1.0;
    }
    BlockWalker wp(block_ns);
    for (const MatchedPair& p : matches.pairs) {
        BlockStats& blk = blocks[wp.at(a.times[p.a_index])];
        ++blk.coincidences;
        if (a.basis(p.a_index) == b.basis(p.b_index)) {
            ++blk.sifted_count;
            const bool error = a.outcome(p.a_index) != b.outcome(p.b_index);
            if (a.basis(p.a_index) == Basis::Z) {
                ++blk.sifted_z;
                blk.errors_z += error ? 1 : 0;
            } else {
                ++blk.sifted_x;
                blk.errors_x += error ? 1 : 0;
            }
        }
    }
    return blocks;
}

}  // namespace detail

std::vector<BlockStats> block_statistics(const TimeTagStream& a, const TimeTagStream& b,
                                         double block_duration_s, const CoincidenceConfig& cfg) {
    return detail::bin_matches(a, b, detail::match_events(a, b, cfg), block_duration_s);
}

QberSummary qber(std::span<const BlockStats> stats) {
    std::uint64_t sifted = 0;
    std::uint64_t sifted_z = 0;
    std::uint64_t sifted_x = 0;
    std::uint64_t errors_z = 0;
    std::uint64_t errors_x = 0;
    for (const BlockStats& b : stats) {
        sifted += b.sifted_count;
        sifted_z += b.sifted_z;
        sifted_x += b.sifted_x;
        errors_z += b.errors_z;
        errors_x += b.errors_x;
    }
    if (sifted == 0) {
        throw UndefinedQberError("no sifted bits: QBER is undefined");
    }
    QberSummary q;
    q.total = static_cast<double>(errors_z + errors_x) / static_cast<double>(sifted);
    q.z = sifted_z > 0 ? static_cast<double>(errors_z) / static_cast<double>(sifted_z) : 0.0;
    q.x = sifted_x > 0 ? static_cast<double>(errors_x) / static_cast<double>(sifted_x) : 0.0;
    return q;
}

}  // namespace fsqkd
