#include "fsqkd/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "fsqkd/channel_models.hpp"
#include "fsqkd/coincidence.hpp"
#include "fsqkd/config.hpp"
#include "fsqkd/decoy.hpp"
#include "fsqkd/errors.hpp"
#include "fsqkd/event_sim.hpp"
#include "fsqkd/keyrate.hpp"
#include "fsqkd/pdtc_estimation.hpp"
#include "fsqkd/rng.hpp"
#include "fsqkd/satellite.hpp"
#include "fsqkd/snrf.hpp"

#ifndef FSQKD_CONFIG_DIR
#define FSQKD_CONFIG_DIR "configs"
#endif

namespace fsqkd {

namespace {

std::string fmt(const char* format, ...) {
    char buf[1024];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return std::string(buf);
}

BlockStats block_with(std::uint64_t sifted, std::uint64_t errors) {
    BlockStats b;
    b.duration_s = 1.0;
    b.coincidences = 2 * sifted;
    b.sifted_count = sifted;
    b.sifted_z = sifted / 2;
    b.sifted_x = sifted - b.sifted_z;
    b.errors_z = errors / 2;
    b.errors_x = errors - b.errors_z;
    return b;
}

// ---------------------------------------------------------------------------
// Criterion 1: key-size arithmetic against the published operating points.

std::pair<bool, std::string> criterion_table_arithmetic() {
    const auto case_a = secret_key_from_blocks(
        std::vector<BlockStats>{block_with(259855, 14318)},  // 14318/259855 = 5.51%
        ErrorCorrectionModel::constant(1.2697));
    const auto case_b = secret_key_from_blocks(
        std::vector<BlockStats>{block_with(226279, 9730)},  // 9730/226279 = 4.30%
        ErrorCorrectionModel::constant(1.2202));

    const double rel_a = std::abs(case_a.secret_bits - 78009.0) / 78009.0;
    const double rel_b = std::abs(case_b.secret_bits - 97678.0) / 97678.0;
    const bool pass = rel_a <= 0.01 && rel_b <= 0.005;
    return {pass, fmt("78009 target -> %.0f (%.3f%% off, limit 1%%); "
                      "97678 target -> %.0f (%.3f%% off, limit 0.5%%)",
                      case_a.secret_bits, rel_a * 100.0, case_b.secret_bits, rel_b * 100.0)};
}

// ---------------------------------------------------------------------------
// Criteria 2 and 3 share one simulation of the bundled turbulent replica.

struct ReplicaRun {
    bool ok = false;
    std::string error;
    std::uint64_t sifted_unfiltered = 0;
    double qber_unfiltered = 0.0;
    double unfiltered_secret = 0.0;
    SweepOptimum optimum;
    double kept_qber = 0.0;
    double rejected_qber = 0.0;
    double max_rate_cps = 0.0;
    double min_duration_s = 0.0;
};

const ReplicaRun& replica_run() {
    static const ReplicaRun run = [] {
        ReplicaRun r;
        try {
            const ExperimentConfig cfg =
                load_config(bundled_config_dir() + "/replica_turbulent.json");
            const PdtcModel model = cfg.channel.make_model();
            const std::size_t n_blocks = static_cast<std::size_t>(
                std::llround(cfg.channel.duration_s / cfg.channel.block_duration_s));
            const TransmissionTrace trace =
                sample_trace(model, n_blocks, cfg.channel.block_duration_s, cfg.seed);
            const auto [alice, bob] = simulate_link_experiment(
                cfg.source, cfg.devices, cfg.background, trace, derive_seed(cfg.seed, 1));

            const ErrorCorrectionModel ec = ErrorCorrectionModel::default_table();
            const SweepResult sw = sweep(alice, bob, cfg.snrf.durations_s,
                                         cfg.snrf.thresholds_cps, cfg.coincidence, ec);
            r.optimum = sw.optimum;
            r.unfiltered_secret = sw.unfiltered_secret_bits;
            r.min_duration_s =
                *std::min_element(sw.durations_s.begin(), sw.durations_s.end());

            const auto blocks = block_statistics(alice, bob, sw.optimum.duration_s,
                                                 cfg.coincidence);
            const KeyRateResult unfiltered = secret_key_from_blocks(blocks, ec);
            r.sifted_unfiltered = unfiltered.sifted_count;
            r.qber_unfiltered = unfiltered.qber;

            SnrfConfig filt;
            filt.block_duration_s = sw.optimum.duration_s;
            filt.threshold = sw.optimum.threshold_cps;
            const SnrfPartition part = apply_snrf(blocks, filt);
            r.kept_qber = part.kept.empty() ? 0.0 : qber(part.kept).total;
            r.rejected_qber = part.rejected.empty() ? 0.0 : qber(part.rejected).total;
            for (const BlockStats& b : blocks) {
                r.max_rate_cps = std::max(r.max_rate_cps, b.bob_rate_cps());
            }
            r.ok = true;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        return r;
    }();
    return run;
}

std::pair<bool, std::string> criterion_snrf_gain() {
    const ReplicaRun& r = replica_run();
    if (!r.ok) {
        return {false, "replica failed: " + r.error};
    }
    const bool sifted_ok = r.sifted_unfiltered >= 234000 && r.sifted_unfiltered <= 286000;
    const bool qber_ok = r.qber_unfiltered >= 0.050 && r.qber_unfiltered <= 0.060;
    const double gain =
        r.unfiltered_secret > 0.0 ? r.optimum.secret_bits / r.unfiltered_secret : 0.0;
    const bool gain_ok = gain >= 1.15;
    const bool split_ok = r.rejected_qber - r.kept_qber >= 0.05;
    const bool pass = sifted_ok && qber_ok && gain_ok && split_ok;
    return {pass,
            fmt("sifted=%llu (target 260k +/- 10%%), unfiltered QBER=%.2f%%, "
                "secret %.0f -> %.0f (gain %.3f, need >= 1.15), kept QBER=%.2f%%, "
                "rejected QBER=%.2f%% (gap %.1f pp, need >= 5)",
                static_cast<unsigned long long>(r.sifted_unfiltered),
                r.qber_unfiltered * 100.0, r.unfiltered_secret, r.optimum.secret_bits, gain,
                r.kept_qber * 100.0, r.rejected_qber * 100.0,
                (r.rejected_qber - r.kept_qber) * 100.0)};
}

std::pair<bool, std::string> criterion_sweep_optimum() {
    const ReplicaRun& r = replica_run();
    if (!r.ok) {
        return {false, "replica failed: " + r.error};
    }
    const bool duration_ok =
        r.optimum.duration_s >= 0.010 - 1e-12 && r.optimum.duration_s <= 0.100 + 1e-12;
    const bool threshold_ok =
        r.optimum.threshold_cps > 0.0 && r.optimum.threshold_cps < r.max_rate_cps;
    return {duration_ok && threshold_ok,
            fmt("optimum duration %.0f ms (need 10..100), threshold %.0f counts/s "
                "(need within (0, %.0f))",
                r.optimum.duration_s * 1e3, r.optimum.threshold_cps, r.max_rate_cps)};
}

// ---------------------------------------------------------------------------
// Criterion 4: PDTC reconstruction round trip at ~20 dB device+link loss.

std::pair<bool, std::string> criterion_pdtc_round_trip() {
    SourceConfig source{1.6e6, 0.02};
    DeviceEfficiencies dev;
    dev.alice = {0.5, 0.5, 1.0};   // 0.25
    dev.bob = {0.75, 0.8, 0.5};    // 0.30; with mean eta 1/30 this is ~20 dB total
    BackgroundConfig bg;           // background off

    const auto [la, lb] = simulate_local_experiment(source, dev, bg, 30.0, 401);
    CoincidenceConfig cc;
    const auto local_blocks = block_statistics(la, lb, 0.010, cc);
    const double eta_b_dev = device_efficiency_from_local(local_blocks);

    const PdtcModel model = PdtcModel::lognormal(1.0, 1.0 / 30.0);
    const TransmissionTrace trace = sample_trace(model, 18000, 0.010, 402);
    const auto [a, b] = simulate_link_experiment(source, dev, bg, trace, 403);
    const auto blocks = block_statistics(a, b, 0.010, cc);
    const PdtcEstimate est = estimate_link_pdtc(blocks, eta_b_dev);

    std::vector<double> positive;
    positive.reserve(est.eta_hats.size());
    for (double v : est.eta_hats) {
        if (v > 0.0) {
            positive.push_back(v);
        }
    }
    const LogNormalFit fit = fit_lognormal(positive);
    const double sigma_err = std::abs(fit.sigma - 1.0);
    const double mean_err = std::abs(fit.mean_eta / model.mean() - 1.0);
    const bool pass = sigma_err <= 0.15 && mean_err <= 0.05;
    return {pass, fmt("device eta %.4f, recovered sigma %.3f (true 1.0, tol 15%%), "
                      "mean %.5f vs %.5f (off %.2f%%, tol 5%%), skipped %zu blocks",
                      eta_b_dev, fit.sigma, fit.mean_eta, model.mean(), mean_err * 100.0,
                      est.skipped_blocks)};
}

// ---------------------------------------------------------------------------
// Criterion 5: shifted-window accidental rate against N_A N_B dt.

std::pair<bool, std::string> criterion_accidentals() {
    SourceConfig source{1e5, 0.0};
    DeviceEfficiencies dev;  // Alice collects every pair member
    BackgroundConfig bg;
    bg.bob_background_rate = 2700.0;
    // A dead channel leaves Bob with pure background, uncorrelated with Alice.
    const TransmissionTrace trace = sample_trace(PdtcModel::degenerate(0.0), 600, 1.0, 501);
    const auto [a, b] = simulate_link_experiment(source, dev, bg, trace, 502);

    CoincidenceConfig cc;
    const AccidentalEstimate est = estimate_accidentals(a, b, cc);
    const double expected = 1e5 * 2700.0 * 5e-9;  // 1.35 per second
    const double three_sigma = 3.0 * std::sqrt(expected * 600.0) / 600.0;
    const bool pass = std::abs(est.measured_rate_cps - expected) <= three_sigma;
    return {pass, fmt("measured %.4f /s vs 1.35 /s (3 sigma band +/- %.4f); "
                      "analytic field %.4f /s",
                      est.measured_rate_cps, three_sigma, est.analytic_rate_cps)};
}

// ---------------------------------------------------------------------------
// Criterion 6: static versus fluctuating one-decoy rates.

std::pair<bool, std::string> criterion_decoy_comparison() {
    DecoyParams params;  // mu optimized per loss point
    const std::vector<double> losses{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    const std::vector<double> sigma_mild{0.18};
    const std::vector<double> sigma_strong{1.8};

    std::ostringstream detail;
    bool pass = true;

    for (const SigmaScanRow& row : scan_sigma(params, losses, sigma_mild)) {
        const double scale = std::max(row.rate_static, row.rate_fluctuating);
        const double rel = scale > 0.0 ? std::abs(row.rate_static - row.rate_fluctuating) / scale
                                       : 0.0;
        if (rel > 0.01) {
            pass = false;
            detail << fmt("sigma 0.18 at %g dB off by %.2f%%; ", row.mean_loss_db, rel * 100.0);
        }
    }

    const auto strong = scan_sigma(params, losses, sigma_strong);
    for (const SigmaScanRow& row : strong) {
        if (row.mean_loss_db == 5.0) {
            if (!(row.rate_fluctuating < row.rate_static)) {
                pass = false;
                detail << "sigma 1.8 at 5 dB not below static; ";
            }
            detail << fmt("sigma 1.8 at 5 dB: static %.3e fluct %.3e; ", row.rate_static,
                          row.rate_fluctuating);
        } else if (row.mean_loss_db > 15.0) {
            const double scale = std::max(row.rate_static, row.rate_fluctuating);
            const double rel =
                scale > 0.0 ? std::abs(row.rate_static - row.rate_fluctuating) / scale : 0.0;
            if (rel > 0.02) {
                pass = false;
                detail << fmt("sigma 1.8 at %g dB off by %.2f%%; ", row.mean_loss_db,
                              rel * 100.0);
            }
        }
    }
    if (pass) {
        detail << "0.18 within 1% everywhere; 1.8 below static at 5 dB and within 2% above 15 dB";
    }
    return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 7: property suite.

std::pair<bool, std::string> criterion_properties() {
    std::ostringstream detail;
    bool pass = true;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << what << " failed; ";
        }
    };

    // Binary entropy identities.
    expect(binary_entropy(0.0) == 0.0 && binary_entropy(1.0) == 0.0, "h2 endpoints");
    expect(std::abs(binary_entropy(0.5) - 1.0) < 1e-12, "h2(1/2)=1");
    bool symmetric = true;
    for (double e = 0.05; e < 0.5; e += 0.05) {
        symmetric = symmetric && std::abs(binary_entropy(e) - binary_entropy(1.0 - e)) < 1e-12;
    }
    expect(symmetric, "h2 symmetry");
    expect(std::abs(binary_entropy(0.11) - 0.49991) <= 1e-4, "h2(0.11)");

    // Secret fraction: strictly decreasing, zero crossing between 9% and 11%.
    const auto ec122 = ErrorCorrectionModel::constant(1.22);
    bool decreasing = true;
    double prev = secret_fraction(0.0, ec122);
    for (double e = 0.005; e <= 0.105; e += 0.005) {
        const double cur = secret_fraction(e, ec122);
        decreasing = decreasing && cur < prev;
        prev = cur;
    }
    expect(decreasing, "secret fraction monotonicity");
    expect(secret_fraction(0.09, ec122) > 0.0 && secret_fraction(0.11, ec122) < 0.0,
           "zero crossing near 0.11");

    // Degenerate PDTC equals the static channel bit for bit.
    for (double eta : {0.5, 0.1, 0.01}) {
        DecoyParams p;
        p.mu = 0.5;
        const auto st = ChannelSpec::fixed(eta);
        const auto fl = ChannelSpec::fluctuating(PdtcModel::degenerate(eta));
        const GainError gs = gain_and_error(p, st, 0.5);
        const GainError gf = gain_and_error(p, fl, 0.5);
        expect(gs.gain == gf.gain && gs.error == gf.error, "degenerate gain equivalence");
        expect(secure_key_rate(p, st) == secure_key_rate(p, fl), "degenerate rate equivalence");
    }

    // Threshold-0 filter identity and block-count conservation on a small run.
    {
        SourceConfig source{2e5, 0.02};
        DeviceEfficiencies dev;
        dev.alice = {0.5, 1.0, 1.0};
        dev.bob = {0.4, 1.0, 1.0};
        BackgroundConfig bg;
        bg.bob_background_rate = 2000.0;
        const TransmissionTrace trace =
            sample_trace(PdtcModel::lognormal(1.0, 0.2), 500, 0.010, 701);
        const auto [a, b] = simulate_link_experiment(source, dev, bg, trace, 702);
        CoincidenceConfig cc;
        const ErrorCorrectionModel ec = ErrorCorrectionModel::default_table();

        const std::vector<double> durations{0.010, 0.030};
        const std::vector<double> thresholds{0.0, 1e4, 1e9};
        const SweepResult sw = sweep(a, b, durations, thresholds, cc, ec);
        for (std::size_t di = 0; di < durations.size(); ++di) {
            const auto blocks = block_statistics(a, b, sw.durations_s[di], cc);
            const double unfiltered = secret_key_from_blocks(blocks, ec).secret_bits;
            expect(sw.secret_bits[di][0] == unfiltered, "threshold-0 identity");
            expect(sw.secret_bits[di][2] == 0.0, "all-rejected grid cell");

            std::uint64_t na = 0;
            std::uint64_t nb = 0;
            std::uint64_t ncoin = 0;
            for (const BlockStats& blk : blocks) {
                na += blk.alice_singles;
                nb += blk.bob_singles;
                ncoin += blk.coincidences;
            }
            expect(na == a.size() && nb == b.size(), "block count conservation");
            expect(ncoin == find_coincidences(a, b, cc).size(), "coincidence conservation");

            SnrfConfig zero;
            zero.block_duration_s = sw.durations_s[di];
            zero.threshold = 0.0;
            const SnrfPartition part = apply_snrf(blocks, zero);
            expect(part.kept.size() == blocks.size() && part.rejected.empty(),
                   "threshold-0 keeps everything");
        }
    }

    // Truncated lognormal density integrates to 1 (theta-space Simpson rule).
    for (const auto& [sigma, mean_eta] :
         std::vector<std::pair<double, double>>{{0.01, 0.5}, {0.3, 0.1}, {1.0, 1e-3},
                                                {2.0, 0.02}, {3.0, 1e-4}, {0.5, 0.9}}) {
        const PdtcModel m = PdtcModel::lognormal(sigma, mean_eta);
        const double upper = m.theta_location() + 12.0 * sigma;
        const std::size_t steps = 40000;  // even
        const double h = upper / static_cast<double>(steps);
        double sum = 0.0;
        for (std::size_t i = 0; i <= steps; ++i) {
            const double theta = h * static_cast<double>(i);
            const double eta = std::exp(-theta);
            const double f = pdtc_density(m, eta) * eta;  // d eta = -eta d theta
            const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            sum += w * f;
        }
        sum *= h / 3.0;
        expect(std::abs(sum - 1.0) <= 1e-6,
               fmt("density normalization (sigma %.2f, mean %.4f): %.8f", sigma, mean_eta, sum));
    }

    // Determinism under a fixed seed.
    {
        const PdtcModel m = PdtcModel::lognormal(1.0, 0.1);
        const TransmissionTrace t1 = sample_trace(m, 1000, 0.01, 703);
        const TransmissionTrace t2 = sample_trace(m, 1000, 0.01, 703);
        expect(t1.etas == t2.etas, "trace determinism");

        SourceConfig source{1e5, 0.03};
        DeviceEfficiencies dev;
        dev.alice = {0.5, 1.0, 1.0};
        dev.bob = {0.5, 1.0, 1.0};
        BackgroundConfig bg;
        bg.bob_background_rate = 1000.0;
        const auto r1 = simulate_link_experiment(source, dev, bg, t1, 704);
        const auto r2 = simulate_link_experiment(source, dev, bg, t1, 704);
        expect(r1.first.times == r2.first.times && r1.first.meta == r2.first.meta &&
                   r1.second.times == r2.second.times && r1.second.meta == r2.second.meta,
               "stream determinism");
    }

    if (pass) {
        detail << "entropy identities, fraction shape, degenerate=static, threshold-0 "
                  "identity, count conservation, density normalization, determinism";
    }
    return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 8: satellite entry rescued by the filter, five seeds.

std::pair<bool, std::string> criterion_satellite_rescue() {
    PassScenario scenario;
    scenario.source = SourceConfig{4e6, 0.025};
    scenario.devices.alice = {0.5, 0.5, 0.2};  // 0.05
    scenario.devices.bob = {1.0, 1.0, 1.0};    // losses live in mean_loss_db
    scenario.trace_block_duration_s = 0.010;
    scenario.entries = {PassEntry{30.0, 23.0, 2.0, 3.5e5, 20.0}};

    CoincidenceConfig cc;
    const ErrorCorrectionModel ec = ErrorCorrectionModel::default_table();

    std::ostringstream detail;
    bool pass = true;
    for (std::uint64_t seed = 801; seed <= 805; ++seed) {
        const auto direct = evaluate_pass(scenario, false, cc, ec, seed);
        const auto filtered = evaluate_pass(scenario, true, cc, ec, seed);
        const bool dead_without = direct[0].key.secret_bits == 0.0;
        const bool alive_with = filtered[0].key.secret_bits > 0.0;
        if (!(dead_without && alive_with)) {
            pass = false;
        }
        detail << fmt("seed %llu: direct QBER %.1f%% -> %.0f bits, snrf QBER %.1f%% -> %.0f "
                      "bits; ",
                      static_cast<unsigned long long>(seed), direct[0].qber * 100.0,
                      direct[0].key.secret_bits, filtered[0].qber * 100.0,
                      filtered[0].key.secret_bits);
    }
    return {pass, detail.str()};
}

}  // namespace

std::string bundled_config_dir() {
    if (const char* env = std::getenv("FSQKD_CONFIG_DIR")) {
        return env;
    }
    return FSQKD_CONFIG_DIR;
}

std::vector<SelfTestCase> selftest_cases() {
    return {
        {1, "key-size arithmetic at the published operating points", criterion_table_arithmetic},
        {2, "SNRF end-to-end gain on the turbulent replica", criterion_snrf_gain},
        {3, "sweep optimum plausibility", criterion_sweep_optimum},
        {4, "PDTC reconstruction round trip", criterion_pdtc_round_trip},
        {5, "shifted-window accidental rate", criterion_accidentals},
        {6, "decoy static versus fluctuating channel", criterion_decoy_comparison},
        {7, "property suite", criterion_properties},
        {8, "satellite key rescue with the filter", criterion_satellite_rescue},
    };
}

bool run_selftest(std::ostream& out, const std::vector<int>& only) {
    bool all_pass = true;
    for (const SelfTestCase& c : selftest_cases()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
            continue;
        }
        const auto [pass, detail] = c.run();
        all_pass = all_pass && pass;
        out << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id << " (" << c.name
            << "): " << detail << "\n";
        out.flush();
    }
    return all_pass;
}

}  // namespace fsqkd
