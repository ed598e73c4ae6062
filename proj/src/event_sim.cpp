#include "fsqkd/event_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "fsqkd/errors.hpp"
#include "fsqkd/rng.hpp"

namespace fsqkd {

namespace {

void validate_source(const SourceConfig& source) {
    if (!(source.pair_rate > 0.0)) {
        throw ArgumentError("pair rate must be > 0");
    }
    if (!(source.intrinsic_qber >= 0.0 && source.intrinsic_qber <= 0.5)) {
        throw ArgumentError("intrinsic QBER must lie in [0, 0.5]");
    }
}

void validate_efficiency(const PartyEfficiency& p) {
    for (double f : {p.source_coupling, p.polarization_analyzer, p.detector}) {
        if (!(f > 0.0 && f <= 1.0)) {
            throw ArgumentError("device efficiency factors must lie in (0,1]");
        }
    }
}

void validate_background(const BackgroundConfig& bg) {
    if (bg.bob_background_rate < 0.0 || bg.alice_dark_rate < 0.0 || bg.bob_dark_rate < 0.0) {
        throw ArgumentError("background and dark rates must be >= 0");
    }
}

constexpr double kNever = std::numeric_limits<double>::infinity();

// Exponential arrival clock in nanoseconds. Restarting it at block
// boundaries leaves the Poisson law unchanged.
struct ArrivalClock {
    double next_ns = kNever;
    double mean_gap_ns = 0.0;

    void restart(double rate_cps, std::mt19937_64& rng, std::exponential_distribution<double>& exp1) {
        if (rate_cps <= 0.0) {
            next_ns = kNever;
            mean_gap_ns = 0.0;
            return;
        }
        mean_gap_ns = 1e9 / rate_cps;
        next_ns = exp1(rng) * mean_gap_ns;
    }

    void advance(std::mt19937_64& rng, std::exponential_distribution<double>& exp1) {
        next_ns += exp1(rng) * mean_gap_ns;
    }
};

enum ClockId : std::size_t {
    kPair = 0,
    kAliceOnly = 1,
    kBobOnly = 2,
    kBobBackground = 3,
    kAliceDark = 4,
    kBobDark = 5,
    kClockCount = 6,
};

// Shared generator. etas holds one atmospheric transmittance per block and
// spans_ns the matching block lengths; link_background enables Bob's
// background stream. Events are produced time-ordered by racing one
// exponential clock per thinned category, so no sorting pass is needed.
std::pair<TimeTagStream, TimeTagStream> generate(
    const SourceConfig& source, const DeviceEfficiencies& dev, const BackgroundConfig& bg,
    const std::vector<double>& etas, const std::vector<std::int64_t>& spans_ns,
    bool link_background, std::uint64_t seed) {
    validate_source(source);
    validate_efficiency(dev.alice);
    validate_efficiency(dev.bob);
    validate_background(bg);

    const double eta_a = dev.alice.total();
    const double eta_b_dev = dev.bob.total();

    TimeTagStream alice;
    TimeTagStream bob;
    alice.party = Party::Alice;
    bob.party = Party::Bob;
    std::int64_t total_ns = 0;
    for (std::int64_t s : spans_ns) {
        total_ns += s;
    }
    alice.duration_ns = total_ns;
    bob.duration_ns = total_ns;

    const double total_s = static_cast<double>(total_ns) * 1e-9;
    auto with_margin = [](double expected) {
        return static_cast<std::size_t>(expected + 6.0 * std::sqrt(expected + 1.0) + 64.0);
    };
    alice.reserve(with_margin(source.pair_rate * eta_a * total_s + bg.alice_dark_rate * total_s));
    double mean_eta_atm = 0.0;
    for (std::size_t i = 0; i < etas.size(); ++i) {
        mean_eta_atm += etas[i] * static_cast<double>(spans_ns[i]);
    }
    mean_eta_atm /= static_cast<double>(total_ns);
    bob.reserve(with_margin(source.pair_rate * eta_b_dev * mean_eta_atm * total_s +
                            (link_background ? bg.bob_background_rate : 0.0) * total_s +
                            bg.bob_dark_rate * total_s));

    auto rng = make_engine(seed);
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_bits = [&rng]() { return static_cast<std::uint8_t>(rng() & 3u); };

    std::array<ArrivalClock, kClockCount> clocks;

    std::int64_t block_start = 0;
    for (std::size_t i = 0; i < etas.size(); ++i) {
        if (!(etas[i] >= 0.0 && etas[i] <= 1.0)) {
            throw ArgumentError("trace transmittances must lie in [0,1]");
        }
        const double eta_b = eta_b_dev * etas[i];
        const double span = static_cast<double>(spans_ns[i]);

        clocks[kPair].restart(source.pair_rate * eta_a * eta_b, rng, exp1);
        clocks[kAliceOnly].restart(source.pair_rate * eta_a * (1.0 - eta_b), rng, exp1);
        clocks[kBobOnly].restart(source.pair_rate * eta_b * (1.0 - eta_a), rng, exp1);
        clocks[kBobBackground].restart(link_background ? bg.bob_background_rate : 0.0, rng, exp1);
        clocks[kAliceDark].restart(bg.alice_dark_rate, rng, exp1);
        clocks[kBobDark].restart(bg.bob_dark_rate, rng, exp1);

        for (;;) {
            std::size_t best = 0;
            double best_t = clocks[0].next_ns;
            for (std::size_t c = 1; c < kClockCount; ++c) {
                if (clocks[c].next_ns < best_t) {
                    best_t = clocks[c].next_ns;
                    best = c;
                }
            }
            if (!(best_t < span)) {
                break;
            }
            const std::int64_t t =
                block_start + std::min<std::int64_t>(static_cast<std::int64_t>(best_t),
                                                     spans_ns[i] - 1);
            switch (best) {
                case kPair: {
                    const std::uint8_t bits = random_bits();
                    const Basis ba = static_cast<Basis>(bits & 1u);
                    const Basis bb = static_cast<Basis>((bits >> 1) & 1u);
                    const std::uint8_t oa = static_cast<std::uint8_t>(rng() & 1u);
                    std::uint8_t ob;
                    if (ba == bb) {
                        ob = unit(rng) < source.intrinsic_qber
                                 ? static_cast<std::uint8_t>(1 - oa)
                                 : oa;
                    } else {
                        ob = static_cast<std::uint8_t>(rng() & 1u);
                    }
                    alice.push_back(t, ba, oa, EventKind::Signal);
                    bob.push_back(t, bb, ob, EventKind::Signal);
                    break;
                }
                case kAliceOnly: {
                    const std::uint8_t bits = random_bits();
                    alice.push_back(t, static_cast<Basis>((bits >> 1) & 1u), bits & 1u,
                                    EventKind::Signal);
                    break;
                }
                case kBobOnly: {
                    const std::uint8_t bits = random_bits();
                    bob.push_back(t, static_cast<Basis>((bits >> 1) & 1u), bits & 1u,
                                  EventKind::Signal);
                    break;
                }
                case kBobBackground: {
                    const std::uint8_t bits = random_bits();
                    bob.push_back(t, static_cast<Basis>((bits >> 1) & 1u), bits & 1u,
                                  EventKind::Background);
                    break;
                }
                case kAliceDark: {
                    const std::uint8_t bits = random_bits();
                    alice.push_back(t, static_cast<Basis>((bits >> 1) & 1u), bits & 1u,
                                    EventKind::Dark);
                    break;
                }
                default: {
                    const std::uint8_t bits = random_bits();
                    bob.push_back(t, static_cast<Basis>((bits >> 1) & 1u), bits & 1u,
                                  EventKind::Dark);
                    break;
                }
            }
            clocks[best].advance(rng, exp1);
        }
        block_start += spans_ns[i];
    }

    if (dev.timing_jitter_ns > 0.0) {
        std::normal_distribution<double> noise(0.0, dev.timing_jitter_ns);
        for (TimeTagStream* s : {&alice, &bob}) {
            std::vector<std::pair<std::int64_t, std::uint8_t>> tagged(s->size());
            for (std::size_t k = 0; k < s->size(); ++k) {
                const std::int64_t shifted =
                    s->times[k] + static_cast<std::int64_t>(std::llround(noise(rng)));
                tagged[k] = {std::clamp<std::int64_t>(shifted, 0, s->duration_ns - 1),
                             s->meta[k]};
            }
            std::stable_sort(tagged.begin(), tagged.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t k = 0; k < tagged.size(); ++k) {
                s->times[k] = tagged[k].first;
                s->meta[k] = tagged[k].second;
            }
        }
    }
    return {std::move(alice), std::move(bob)};
}

}  // namespace

std::pair<TimeTagStream, TimeTagStream> simulate_local_experiment(
    const SourceConfig& source, const DeviceEfficiencies& dev, const BackgroundConfig& bg,
    double duration_s, std::uint64_t seed) {
    if (!(duration_s > 0.0)) {
        throw ArgumentError("duration must be > 0");
    }
    const std::int64_t total_ns = static_cast<std::int64_t>(std::llround(duration_s * 1e9));
    if (total_ns <= 0) {
        throw ArgumentError("duration must be at least 1 ns");
    }
    const std::int64_t chunk_ns = 1'000'000'000;
    std::vector<double> etas;
    std::vector<std::int64_t> spans;
    std::int64_t remaining = total_ns;
    while (remaining > 0) {
        const std::int64_t span = std::min(chunk_ns, remaining);
        etas.push_back(1.0);
        spans.push_back(span);
        remaining -= span;
    }
    return generate(source, dev, bg, etas, spans, /*link_background=*/false, seed);
}

std::pair<TimeTagStream, TimeTagStream> simulate_link_experiment(
    const SourceConfig& source, const DeviceEfficiencies& dev, const BackgroundConfig& bg,
    const TransmissionTrace& trace, std::uint64_t seed) {
    if (trace.etas.empty()) {
        throw ArgumentError("transmission trace must be non-empty");
    }
    if (!(trace.block_duration_s > 0.0)) {
        throw ArgumentError("trace block duration must be > 0");
    }
    const std::int64_t block_ns =
        static_cast<std::int64_t>(std::llround(trace.block_duration_s * 1e9));
    if (block_ns <= 0) {
        throw ArgumentError("trace block duration must be at least 1 ns");
    }
    std::vector<std::int64_t> spans(trace.etas.size(), block_ns);
    return generate(source, dev, bg, trace.etas, spans, /*link_background=*/true, seed);
}

}  // namespace fsqkd
