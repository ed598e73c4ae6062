#include "fsqkd/pdtc_estimation.hpp"

#include <algorithm>
#include <cmath>

#include "fsqkd/errors.hpp"

namespace fsqkd {

double device_efficiency_from_local(std::span<const BlockStats> stats) {
    std::uint64_t singles = 0;
    std::uint64_t coincidences = 0;
    for (const BlockStats& b : stats) {
        if (b.coincidences > b.alice_singles) {
            throw EstimationError("block has more coincidences than Alice singles");
        }
        singles += b.alice_singles;
        coincidences += b.coincidences;
    }
    if (singles == 0) {
        throw EstimationError("no Alice singles: device efficiency undefined");
    }
    return static_cast<double>(coincidences) / static_cast<double>(singles);
}

PdtcEstimate estimate_link_pdtc(std::span<const BlockStats> stats, double eta_b_device,
                                std::size_t n_bins) {
    if (!(eta_b_device > 0.0 && eta_b_device <= 1.0)) {
        throw ArgumentError("device efficiency must lie in (0,1]");
    }
    if (n_bins == 0) {
        throw ArgumentError("histogram needs at least one bin");
    }

    PdtcEstimate est;
    est.eta_hats.reserve(stats.size());
    double sum = 0.0;
    for (const BlockStats& b : stats) {
        if (b.alice_singles == 0) {
            ++est.skipped_blocks;
            continue;
        }
        const double corrected =
            std::max(0.0, static_cast<double>(b.coincidences) - b.accidental_estimate);
        const double eta_hat = std::clamp(
            corrected / static_cast<double>(b.alice_singles) / eta_b_device, 0.0, 1.0);
        est.eta_hats.push_back(eta_hat);
        sum += eta_hat;
    }
    if (est.eta_hats.empty()) {
        throw EstimationError("every block was skipped: cannot build a PDTC");
    }
    est.mean_eta_hat = sum / static_cast<double>(est.eta_hats.size());

    double max_eta = *std::max_element(est.eta_hats.begin(), est.eta_hats.end());
    if (max_eta <= 0.0) {
        max_eta = 1e-9;  // all-zero estimates: a single sliver of support at 0
    }
    std::vector<double> edges(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) {
        edges[i] = max_eta * static_cast<double>(i) / static_cast<double>(n_bins);
    }
    std::vector<double> counts(n_bins, 0.0);
    for (double eta : est.eta_hats) {
        std::size_t bin = static_cast<std::size_t>(
            std::floor(eta / max_eta * static_cast<double>(n_bins)));
        bin = std::min(bin, n_bins - 1);
        counts[bin] += 1.0;
    }
    const double total = static_cast<double>(est.eta_hats.size());
    for (double& c : counts) {
        c /= total;
    }
    est.model = PdtcModel::empirical(std::move(edges), std::move(counts));
    return est;
}

}  // namespace fsqkd
