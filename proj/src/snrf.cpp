#include "fsqkd/snrf.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

#include "fsqkd/errors.hpp"

namespace fsqkd {

namespace {

double block_metric(const BlockStats& b, const SnrfConfig& cfg) {
    const double rate = b.bob_rate_cps();
    if (cfg.mode == SnrfMode::SnrThreshold) {
        return (rate - cfg.background_rate) / cfg.background_rate;
    }
    return rate;
}

// Pooled secret bits for the blocks kept by `threshold` on a partition that
// has been sorted by descending rate and prefix-summed.
struct PrefixSums {
    std::vector<double> rates;  // descending
    std::vector<std::uint64_t> raw;
    std::vector<std::uint64_t> sifted;
    std::vector<std::uint64_t> errors;
};

PrefixSums build_prefix_sums(std::span<const BlockStats> blocks) {
    std::vector<std::size_t> order(blocks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return blocks[i].bob_rate_cps() > blocks[j].bob_rate_cps();
    });
    PrefixSums ps;
    ps.rates.reserve(blocks.size());
    ps.raw.resize(blocks.size());
    ps.sifted.resize(blocks.size());
    ps.errors.resize(blocks.size());
    std::uint64_t raw = 0;
    std::uint64_t sifted = 0;
    std::uint64_t errors = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const BlockStats& b = blocks[order[k]];
        ps.rates.push_back(b.bob_rate_cps());
        raw += b.coincidences;
        sifted += b.sifted_count;
        errors += b.errors_z + b.errors_x;
        ps.raw[k] = raw;
        ps.sifted[k] = sifted;
        ps.errors[k] = errors;
    }
    return ps;
}

double pooled_secret_bits(const PrefixSums& ps, double threshold, const ErrorCorrectionModel& ec) {
    // Number of blocks with rate >= threshold.
    const auto it = std::lower_bound(ps.rates.begin(), ps.rates.end(), threshold,
                                     [](double rate, double thr) { return rate >= thr; });
    const std::size_t n = static_cast<std::size_t>(it - ps.rates.begin());
    if (n == 0 || ps.sifted[n - 1] == 0) {
        return 0.0;
    }
    const double qber =
        static_cast<double>(ps.errors[n - 1]) / static_cast<double>(ps.sifted[n - 1]);
    const double fraction = secret_fraction(std::min(qber, 0.5), ec);
    return std::max(0.0, static_cast<double>(ps.sifted[n - 1]) * fraction);
}

}  // namespace

void SnrfConfig::validate() const {
    if (!(block_duration_s > 0.0)) {
        throw ArgumentError("SNRF block duration must be > 0");
    }
    if (!(threshold >= 0.0)) {
        throw ArgumentError("SNRF threshold must be >= 0");
    }
    if (mode == SnrfMode::SnrThreshold && !(background_rate > 0.0)) {
        throw ArgumentError("SNR threshold mode requires a positive background rate");
    }
}

SnrfPartition apply_snrf(std::span<const BlockStats> blocks, const SnrfConfig& cfg) {
    cfg.validate();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const bool final_block = i + 1 == blocks.size();
        const double d = blocks[i].duration_s;
        const bool matches = std::abs(d - cfg.block_duration_s) < 1e-9;
        if (!matches && !(final_block && d < cfg.block_duration_s)) {
            throw ArgumentError("block statistics were computed with a different block duration");
        }
    }
    SnrfPartition part;
    for (const BlockStats& b : blocks) {
        if (block_metric(b, cfg) >= cfg.threshold) {
            part.kept.push_back(b);
        } else {
            part.rejected.push_back(b);
        }
    }
    return part;
}

SweepResult sweep(const TimeTagStream& a, const TimeTagStream& b,
                  std::span<const double> durations_s, std::span<const double> thresholds_cps,
                  const CoincidenceConfig& cc, const ErrorCorrectionModel& ec,
                  unsigned n_threads) {
    if (durations_s.empty()) {
        throw ArgumentError("sweep needs at least one block duration");
    }
    for (double d : durations_s) {
        if (!(d > 0.0)) {
            throw ArgumentError("sweep durations must be > 0");
        }
    }

    SweepResult result;
    result.durations_s.assign(durations_s.begin(), durations_s.end());
    std::sort(result.durations_s.begin(), result.durations_s.end());

    if (thresholds_cps.empty()) {
        const double mean_rate =
            b.duration_ns > 0 ? static_cast<double>(b.size()) / b.duration_s() : 0.0;
        result.thresholds_cps.resize(41);
        for (std::size_t i = 0; i < result.thresholds_cps.size(); ++i) {
            result.thresholds_cps[i] = 2.0 * mean_rate * static_cast<double>(i) / 40.0;
        }
    } else {
        result.thresholds_cps.assign(thresholds_cps.begin(), thresholds_cps.end());
        std::sort(result.thresholds_cps.begin(), result.thresholds_cps.end());
        for (double t : result.thresholds_cps) {
            if (!(t >= 0.0)) {
                throw ArgumentError("sweep thresholds must be >= 0");
            }
        }
    }

    const auto matches = detail::match_events(a, b, cc);

    // One binning pass per duration; rows are then filled threshold by
    // threshold from prefix sums over the rate-sorted blocks.
    const std::size_t n_dur = result.durations_s.size();
    result.secret_bits.assign(n_dur, std::vector<double>(result.thresholds_cps.size(), 0.0));
    std::vector<double> max_rates(n_dur, 0.0);

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) {
        hw = 1;
    }
    const unsigned workers = std::min<unsigned>(n_threads == 0 ? hw : n_threads,
                                                static_cast<unsigned>(n_dur));

    auto run_duration = [&](std::size_t di) {
        const auto blocks = detail::bin_matches(a, b, matches, result.durations_s[di]);
        const PrefixSums ps = build_prefix_sums(blocks);
        if (!ps.rates.empty()) {
            max_rates[di] = ps.rates.front();
        }
        for (std::size_t ti = 0; ti < result.thresholds_cps.size(); ++ti) {
            result.secret_bits[di][ti] = pooled_secret_bits(ps, result.thresholds_cps[ti], ec);
        }
        if (di == 0) {
            result.unfiltered_secret_bits = pooled_secret_bits(ps, 0.0, ec);
        }
    };

    if (workers <= 1) {
        for (std::size_t di = 0; di < n_dur; ++di) {
            run_duration(di);
        }
    } else {
        std::vector<std::future<void>> futures;
        futures.reserve(n_dur);
        for (std::size_t di = 0; di < n_dur; ++di) {
            futures.push_back(std::async(std::launch::async, run_duration, di));
        }
        for (auto& f : futures) {
            f.get();
        }
    }

    result.max_bob_rate_cps = max_rates.empty() ? 0.0 : max_rates.front();

    result.optimum = SweepOptimum{result.durations_s.front(), result.thresholds_cps.front(),
                                  result.secret_bits[0][0]};
    for (std::size_t di = 0; di < n_dur; ++di) {
        for (std::size_t ti = 0; ti < result.thresholds_cps.size(); ++ti) {
            if (result.secret_bits[di][ti] > result.optimum.secret_bits) {
                result.optimum = SweepOptimum{result.durations_s[di], result.thresholds_cps[ti],
                                              result.secret_bits[di][ti]};
            }
        }
    }
    return result;
}

RollingResult rolling_threshold(std::span<const BlockStats> blocks, std::size_t window_blocks,
                                const ErrorCorrectionModel& ec) {
    if (window_blocks < 10) {
        throw ArgumentError("rolling window must cover at least 10 blocks");
    }
    if (blocks.empty()) {
        throw ArgumentError("rolling_threshold requires at least one block");
    }

    auto best_threshold = [&](std::span<const BlockStats> window) {
        const PrefixSums ps = build_prefix_sums(window);
        double best_thr = 0.0;
        double best_bits = pooled_secret_bits(ps, 0.0, ec);
        // Candidate cuts sit exactly at the observed rates.
        for (double rate : ps.rates) {
            const double bits = pooled_secret_bits(ps, rate, ec);
            if (bits > best_bits) {
                best_bits = bits;
                best_thr = rate;
            }
        }
        return best_thr;
    };

    RollingResult out;
    std::vector<BlockStats> kept;
    std::span<const BlockStats> previous;
    for (std::size_t start = 0; start < blocks.size(); start += window_blocks) {
        const std::size_t len = std::min(window_blocks, blocks.size() - start);
        const auto segment = blocks.subspan(start, len);
        // The first segment bootstraps on itself; afterwards each segment
        // uses the optimum found on the trailing window.
        const double thr = best_threshold(previous.empty() ? segment : previous);
        out.segment_thresholds.push_back(thr);
        for (const BlockStats& b : segment) {
            if (b.bob_rate_cps() >= thr) {
                kept.push_back(b);
            }
        }
        previous = segment;
    }
    out.kept_blocks = kept.size();
    out.total_secret_bits =
        kept.empty() ? 0.0 : secret_key_from_blocks(kept, ec).secret_bits;
    return out;
}

}  // namespace fsqkd
