#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fsqkd/channel_models.hpp"
#include "fsqkd/coincidence.hpp"

namespace fsqkd {

/// Coincidence-ratio estimate of Bob's total device transmission from a
/// tabletop run: sum(N_coin) / sum(N_A). Raises EstimationError when Alice
/// recorded nothing or any block claims more coincidences than Alice singles.
double device_efficiency_from_local(std::span<const BlockStats> stats);

struct PdtcEstimate {
    PdtcModel model;                // normalized histogram of the per-block estimates
    std::vector<double> eta_hats;   // one estimate per usable block, clamped to [0,1]
    std::size_t skipped_blocks = 0;  // blocks with no Alice singles
    double mean_eta_hat = 0.0;
};

/// Reconstructs the free-space PDTC from link-run block statistics: per block
/// eta_hat = max(0, (N_coin - N_accidental) / N_A) / eta_b_device, clamped to
/// [0,1], then histogrammed over n_bins equal-width bins on [0, max eta_hat].
PdtcEstimate estimate_link_pdtc(std::span<const BlockStats> stats, double eta_b_device,
                                std::size_t n_bins = 50);

}  // namespace fsqkd
