#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fsqkd/coincidence.hpp"
#include "fsqkd/keyrate.hpp"

namespace fsqkd {

enum class SnrfMode {
    SinglesThreshold,  // threshold on Bob's summed singles rate, counts/sec
    SnrThreshold,      // threshold on (rate - background) / background
};

struct SnrfConfig {
    double block_duration_s = 0.030;
    double threshold = 0.0;
    SnrfMode mode = SnrfMode::SinglesThreshold;
    double background_rate = 0.0;  // required for SnrThreshold

    void validate() const;
};

struct SnrfPartition {
    std::vector<BlockStats> kept;
    std::vector<BlockStats> rejected;
};

/// Splits blocks into kept/rejected. A block is kept when its Bob singles
/// rate (or SNR) is at or above the threshold, so threshold 0 keeps
/// everything. Blocks must have been computed at cfg.block_duration_s; a
/// mismatch raises ArgumentError (a shorter final block is allowed).
SnrfPartition apply_snrf(std::span<const BlockStats> blocks, const SnrfConfig& cfg);

struct SweepOptimum {
    double duration_s = 0.0;
    double threshold_cps = 0.0;
    double secret_bits = 0.0;
};

struct SweepResult {
    std::vector<double> durations_s;
    std::vector<double> thresholds_cps;
    // secret_bits[i][j]: duration i, threshold j
    std::vector<std::vector<double>> secret_bits;
    SweepOptimum optimum;  // grid argmax; ties go to the smallest duration, then threshold
    double unfiltered_secret_bits = 0.0;
    double max_bob_rate_cps = 0.0;  // largest per-block rate at the finest duration
};

/// Full 2-D sweep: for each block duration the event streams are re-binned
/// once, then every threshold filters that fixed partition and the kept
/// blocks are pooled through secret_key_from_blocks. An empty threshold list
/// requests the default 41-point grid from 0 to twice Bob's mean rate. The
/// unfiltered baseline is the threshold-0 key at the finest duration.
SweepResult sweep(const TimeTagStream& a, const TimeTagStream& b,
                  std::span<const double> durations_s, std::span<const double> thresholds_cps,
                  const CoincidenceConfig& cc, const ErrorCorrectionModel& ec,
                  unsigned n_threads = 0);

struct RollingResult {
    std::vector<double> segment_thresholds;
    double total_secret_bits = 0.0;
    std::size_t kept_blocks = 0;
};

/// Online variant: blocks are processed in consecutive segments of
/// window_blocks. Each segment is filtered with the best 1-D threshold found
/// on the previous segment (the first segment bootstraps on itself, so a
/// window spanning the whole run reduces to the global 1-D optimum). The
/// total key pools every kept block.
RollingResult rolling_threshold(std::span<const BlockStats> blocks, std::size_t window_blocks,
                                const ErrorCorrectionModel& ec);

}  // namespace fsqkd
