#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsqkd/coincidence.hpp"
#include "fsqkd/event_sim.hpp"
#include "fsqkd/keyrate.hpp"
#include "fsqkd/snrf.hpp"

namespace fsqkd {

/// One quasi-static slice of a LEO pass. The elevation-to-link mapping
/// (loss, turbulence, background) is configuration data supplied per entry.
struct PassEntry {
    double elevation_deg = 90.0;
    double mean_loss_db = 0.0;       // total optical loss toward Bob at this elevation
    double sigma = 0.0;              // lognormal turbulence parameter
    double background_rate = 0.0;    // counts/sec collected by Bob
    double dwell_time_s = 0.0;       // time spent at this elevation
};

struct PassScenario {
    std::vector<PassEntry> entries;  // sorted by ascending elevation
    SourceConfig source{1e8, 0.025};
    // Collection and detection on the source side; Bob's device losses are
    // folded into mean_loss_db, so his explicit factors stay at 1.
    DeviceEfficiencies devices;
    double trace_block_duration_s = 0.010;

    void validate() const;
};

struct PassEvaluation {
    double elevation_deg = 0.0;
    bool with_snrf = false;
    KeyRateResult key;
    double secret_bits_per_s = 0.0;
    double secret_bits_per_pass = 0.0;
    double qber = 0.0;  // pooled over the kept blocks
    // Secret fraction before flooring; negative values mark the "no key"
    // region.
    double unfloored_fraction = 0.0;
    SweepOptimum optimum;  // meaningful only when with_snrf
};

struct SnrfGrids {
    std::vector<double> durations_s{0.005, 0.010, 0.020, 0.030, 0.050, 0.100};
    std::vector<double> thresholds_cps;  // empty: auto grid per entry
};

/// Runs the full pipeline per entry: sample a lognormal trace, simulate the
/// link, aggregate blocks, optionally sweep the SNRF, and compute the pooled
/// secret key. Entry k of a run with root seed s uses derive_seed(s, k), so
/// entries are independent and reproducible.
std::vector<PassEvaluation> evaluate_pass(const PassScenario& scenario, bool with_snrf,
                                          const CoincidenceConfig& cc,
                                          const ErrorCorrectionModel& ec, std::uint64_t seed,
                                          const SnrfGrids& grids = {}, unsigned n_threads = 0);

}  // namespace fsqkd
