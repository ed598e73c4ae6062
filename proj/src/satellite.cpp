#include "fsqkd/satellite.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include "fsqkd/decoy.hpp"
#include "fsqkd/errors.hpp"
#include "fsqkd/rng.hpp"

namespace fsqkd {

void PassScenario::validate() const {
    if (entries.empty()) {
        throw ArgumentError("pass scenario needs at least one entry");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const PassEntry& e = entries[i];
        if (!(e.elevation_deg > 0.0 && e.elevation_deg <= 90.0)) {
            throw ArgumentError("elevation must lie in (0, 90] degrees");
        }
        if (!(e.mean_loss_db > 0.0)) {
            throw ArgumentError("mean loss must be > 0 dB");
        }
        if (!(e.sigma > 0.0)) {
            throw ArgumentError("turbulence parameter must be > 0");
        }
        if (e.background_rate < 0.0) {
            throw ArgumentError("background rate must be >= 0");
        }
        if (!(e.dwell_time_s > 0.0)) {
            throw ArgumentError("dwell time must be > 0");
        }
        if (i > 0 && !(e.elevation_deg > entries[i - 1].elevation_deg)) {
            throw ArgumentError("pass entries must be sorted by ascending elevation");
        }
    }
    if (!(trace_block_duration_s > 0.0)) {
        throw ArgumentError("trace block duration must be > 0");
    }
}

namespace {

PassEvaluation evaluate_entry(const PassScenario& scenario, const PassEntry& entry,
                              bool with_snrf, const CoincidenceConfig& cc,
                              const ErrorCorrectionModel& ec, std::uint64_t entry_seed,
                              const SnrfGrids& grids) {
    const double mean_eta = db_to_transmittance(entry.mean_loss_db);
    const PdtcModel model = PdtcModel::lognormal(entry.sigma, mean_eta);
    const std::size_t n_blocks = static_cast<std::size_t>(
        std::ceil(entry.dwell_time_s / scenario.trace_block_duration_s));
    const TransmissionTrace trace =
        sample_trace(model, n_blocks, scenario.trace_block_duration_s, entry_seed);

    BackgroundConfig bg;
    bg.bob_background_rate = entry.background_rate;
    const auto [alice, bob] =
        simulate_link_experiment(scenario.source, scenario.devices, bg, trace,
                                 derive_seed(entry_seed, 1));

    PassEvaluation eval;
    eval.elevation_deg = entry.elevation_deg;
    eval.with_snrf = with_snrf;

    if (with_snrf) {
        const SweepResult sw = sweep(alice, bob, grids.durations_s, grids.thresholds_cps, cc, ec,
                                     /*n_threads=*/1);
        eval.optimum = sw.optimum;
        const auto blocks = block_statistics(alice, bob, sw.optimum.duration_s, cc);
        SnrfConfig filt;
        filt.block_duration_s = sw.optimum.duration_s;
        filt.threshold = sw.optimum.threshold_cps;
        const SnrfPartition part = apply_snrf(blocks, filt);
        eval.key = part.kept.empty() ? KeyRateResult{} : secret_key_from_blocks(part.kept, ec);
    } else {
        const auto blocks = block_statistics(alice, bob, scenario.trace_block_duration_s, cc);
        eval.key = secret_key_from_blocks(blocks, ec);
    }

    eval.qber = eval.key.qber_defined ? eval.key.qber : 0.0;
    eval.unfloored_fraction =
        eval.key.qber_defined ? eval.key.secret_fraction_per_sifted_bit : 0.0;
    const double dwell = static_cast<double>(alice.duration_ns) * 1e-9;
    eval.secret_bits_per_pass = eval.key.secret_bits;
    eval.secret_bits_per_s = dwell > 0.0 ? eval.key.secret_bits / dwell : 0.0;
    return eval;
}

}  // namespace

std::vector<PassEvaluation> evaluate_pass(const PassScenario& scenario, bool with_snrf,
                                          const CoincidenceConfig& cc,
                                          const ErrorCorrectionModel& ec, std::uint64_t seed,
                                          const SnrfGrids& grids, unsigned n_threads) {
    scenario.validate();
    cc.validate();

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) {
        hw = 1;
    }
    const unsigned workers =
        std::min<unsigned>(n_threads == 0 ? hw : n_threads,
                           static_cast<unsigned>(scenario.entries.size()));

    std::vector<PassEvaluation> evals(scenario.entries.size());
    auto run = [&](std::size_t i) {
        evals[i] = evaluate_entry(scenario, scenario.entries[i], with_snrf, cc, ec,
                                  derive_seed(seed, i), grids);
    };

    if (workers <= 1) {
        for (std::size_t i = 0; i < scenario.entries.size(); ++i) {
            run(i);
        }
    } else {
        std::vector<std::future<void>> futures;
        for (std::size_t i = 0; i < scenario.entries.size(); ++i) {
            futures.push_back(std::async(std::launch::async, run, i));
        }
        for (auto& f : futures) {
            f.get();
        }
    }
    return evals;
}

}  // namespace fsqkd
