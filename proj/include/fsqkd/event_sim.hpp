#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fsqkd/channel_models.hpp"

namespace fsqkd {

enum class Basis : std::uint8_t { Z = 0, X = 1 };
enum class EventKind : std::uint8_t { Signal = 0, Background = 1, Dark = 2 };
enum class Party : std::uint8_t { Alice = 0, Bob = 1 };

/// One party's detection record over [0, duration_ns). Timestamps are
/// integer nanoseconds, nondecreasing. Stored as parallel arrays: realistic
/// runs reach ~1e9 events, so every byte per event counts.
///
/// The event kind (signal/background/dark) is simulation ground truth.
/// Analysis code must never branch on it; it exists for test oracles and the
/// optional debug CSV column only.
struct TimeTagStream {
    Party party = Party::Alice;
    std::int64_t duration_ns = 0;
    std::vector<std::int64_t> times;
    std::vector<std::uint8_t> meta;  // bit0 outcome, bit1 basis, bits 2-3 kind

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    double duration_s() const { return static_cast<double>(duration_ns) * 1e-9; }

    Basis basis(std::size_t i) const { return static_cast<Basis>((meta[i] >> 1) & 1u); }
    std::uint8_t outcome(std::size_t i) const { return meta[i] & 1u; }
    EventKind kind(std::size_t i) const { return static_cast<EventKind>((meta[i] >> 2) & 3u); }

    static std::uint8_t pack(Basis b, std::uint8_t outcome, EventKind k) {
        return static_cast<std::uint8_t>((outcome & 1u) |
                                         (static_cast<std::uint8_t>(b) << 1) |
                                         (static_cast<std::uint8_t>(k) << 2));
    }

    void push_back(std::int64_t t, Basis b, std::uint8_t outcome, EventKind k) {
        times.push_back(t);
        meta.push_back(pack(b, outcome, k));
    }

    void reserve(std::size_t n) {
        times.reserve(n);
        meta.reserve(n);
    }
};

struct SourceConfig {
    double pair_rate = 0.0;       // entangled pairs produced per second
    double intrinsic_qber = 0.0;  // device-level same-basis error probability
};

struct PartyEfficiency {
    double source_coupling = 1.0;
    double polarization_analyzer = 1.0;
    double detector = 1.0;

    double total() const { return source_coupling * polarization_analyzer * detector; }
};

struct DeviceEfficiencies {
    PartyEfficiency alice;
    PartyEfficiency bob;
    // Optional Gaussian detector jitter applied to every timestamp.
    double timing_jitter_ns = 0.0;
};

struct BackgroundConfig {
    double bob_background_rate = 0.0;  // stray light collected over the link
    double alice_dark_rate = 0.0;
    double bob_dark_rate = 0.0;
};

/// Simulates a tabletop run with both analyzers next to the source: pairs
/// arrive as a Poisson process at the pair rate, each member survives to its
/// party with that party's device efficiency, and dark counts are added as
/// independent Poisson streams. bob_background_rate does not apply here (it
/// models light collected over the free-space link).
std::pair<TimeTagStream, TimeTagStream> simulate_local_experiment(
    const SourceConfig& source, const DeviceEfficiencies& dev, const BackgroundConfig& bg,
    double duration_s, std::uint64_t seed);

/// Simulates a run where Bob sits across the fluctuating link: within trace
/// block i his per-pair survival probability is dev.bob.total() * etas[i],
/// and he additionally collects background light at bob_background_rate with
/// uniformly random basis and outcome. Total duration is
/// trace.etas.size() * trace.block_duration_s.
std::pair<TimeTagStream, TimeTagStream> simulate_link_experiment(
    const SourceConfig& source, const DeviceEfficiencies& dev, const BackgroundConfig& bg,
    const TransmissionTrace& trace, std::uint64_t seed);

}  // namespace fsqkd
