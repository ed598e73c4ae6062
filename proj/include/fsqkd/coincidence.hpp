#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fsqkd/event_sim.hpp"

namespace fsqkd {

/// Coincidence identification settings. An event pair matches when Bob's
/// timestamp falls in [t_alice, t_alice + window_ns); with integer-nanosecond
/// tags this makes the accepted width exactly window_ns, so uncorrelated
/// streams produce accidentals at the textbook rate N_A * N_B * window.
/// Entangled pairs share a timestamp and land at offset zero.
struct CoincidenceConfig {
    std::int64_t window_ns = 5;
    std::int64_t accidental_shift_ns = 50;

    void validate() const;
};

struct MatchedPair {
    std::size_t a_index;
    std::size_t b_index;
};

/// Greedy earliest-first one-to-one matching of two time-ordered streams.
/// Each event is used at most once; output is ordered by Alice timestamp.
/// Unordered input raises FormatError.
std::vector<MatchedPair> find_coincidences(const TimeTagStream& a, const TimeTagStream& b,
                                           const CoincidenceConfig& cfg);

struct AccidentalEstimate {
    // Coincidence rate after shifting Bob by accidental_shift_ns, per second
    // of overlap.
    double measured_rate_cps = 0.0;
    // N_A * N_B * window evaluated from the measured singles rates.
    double analytic_rate_cps = 0.0;
};

AccidentalEstimate estimate_accidentals(const TimeTagStream& a, const TimeTagStream& b,
                                        const CoincidenceConfig& cfg);

/// Per-block aggregates. A singles event belongs to the block containing its
/// timestamp; a coincidence belongs to the block of its Alice member.
struct BlockStats {
    std::size_t block_index = 0;
    double duration_s = 0.0;
    std::uint64_t alice_singles = 0;
    std::uint64_t bob_singles = 0;
    std::uint64_t coincidences = 0;
    double accidental_estimate = 0.0;  // shifted-window coincidences in this block
    std::uint64_t sifted_count = 0;
    std::uint64_t errors_z = 0;
    std::uint64_t errors_x = 0;
    std::uint64_t sifted_z = 0;
    std::uint64_t sifted_x = 0;

    double bob_rate_cps() const {
        return duration_s > 0.0 ? static_cast<double>(bob_singles) / duration_s : 0.0;
    }
};

std::vector<BlockStats> block_statistics(const TimeTagStream& a, const TimeTagStream& b,
                                         double block_duration_s, const CoincidenceConfig& cfg);

struct QberSummary {
    double total;
    double z;
    double x;
};

/// Pooled QBER over a block collection. Raises UndefinedQberError when no
/// sifted bits exist (per-basis rates are 0 when that basis is empty but the
/// total is not).
QberSummary qber(std::span<const BlockStats> stats);

// Shared with the SNRF sweep so matching happens once per stream pair.
namespace detail {

struct MatchedEvents {
    std::vector<MatchedPair> pairs;
    std::vector<std::size_t> shifted_a_indices;  // Alice members of shifted-window matches
};

MatchedEvents match_events(const TimeTagStream& a, const TimeTagStream& b,
                           const CoincidenceConfig& cfg);

std::vector<BlockStats> bin_matches(const TimeTagStream& a, const TimeTagStream& b,
                                    const MatchedEvents& matches, double block_duration_s);

}  // namespace detail

}  // namespace fsqkd
