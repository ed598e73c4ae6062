#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsqkd/channel_models.hpp"
#include "fsqkd/coincidence.hpp"
#include "fsqkd/config.hpp"
#include "fsqkd/csv_io.hpp"
#include "fsqkd/decoy.hpp"
#include "fsqkd/errors.hpp"
#include "fsqkd/event_sim.hpp"
#include "fsqkd/keyrate.hpp"
#include "fsqkd/pdtc_estimation.hpp"
#include "fsqkd/rng.hpp"
#include "fsqkd/satellite.hpp"
#include "fsqkd/selftest.hpp"
#include "fsqkd/snrf.hpp"

namespace fs = std::filesystem;
using namespace fsqkd;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    unsigned threads = 0;
    bool debug_truth = false;
};

// Removes everything written by a subcommand when it fails partway.
class OutputTracker {
public:
    explicit OutputTracker(const std::string& out_dir) : dir_(out_dir) {
        fs::create_directories(dir_);
    }

    std::string path(const std::string& name) {
        written_.push_back((dir_ / name).string());
        return written_.back();
    }

    void commit() { written_.clear(); }

    ~OutputTracker() {
        for (const std::string& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    fs::path dir_;
    std::vector<std::string> written_;
};

ExperimentConfig require_config(const GlobalOptions& opt) {
    if (opt.config_path.empty()) {
        throw ConfigError("this subcommand requires --config");
    }
    ExperimentConfig cfg = load_config(opt.config_path);
    if (opt.seed_override) {
        cfg.seed = *opt.seed_override;
    }
    return cfg;
}

struct SimulatedRun {
    TimeTagStream alice;
    TimeTagStream bob;
    std::optional<TransmissionTrace> trace;
};

SimulatedRun simulate_from_config(const ExperimentConfig& cfg) {
    SimulatedRun run;
    if (cfg.channel.type == ChannelConfig::Type::Local) {
        auto [a, b] = simulate_local_experiment(cfg.source, cfg.devices, cfg.background,
                                                cfg.channel.duration_s, derive_seed(cfg.seed, 1));
        run.alice = std::move(a);
        run.bob = std::move(b);
        return run;
    }
    const PdtcModel model = cfg.channel.make_model();
    const auto n_blocks = static_cast<std::size_t>(
        std::llround(cfg.channel.duration_s / cfg.channel.block_duration_s));
    if (n_blocks == 0) {
        throw ConfigError("config.channel.duration_s: shorter than one block");
    }
    run.trace = sample_trace(model, n_blocks, cfg.channel.block_duration_s, cfg.seed);
    auto [a, b] = simulate_link_experiment(cfg.source, cfg.devices, cfg.background, *run.trace,
                                           derive_seed(cfg.seed, 1));
    run.alice = std::move(a);
    run.bob = std::move(b);
    return run;
}

// Streams for the analysis subcommands: referenced CSVs when the config names
// them, otherwise a fresh simulation.
SimulatedRun obtain_streams(const ExperimentConfig& cfg) {
    if (cfg.inputs.alice_csv && cfg.inputs.bob_csv) {
        SimulatedRun run;
        const auto duration_ns =
            static_cast<std::int64_t>(std::llround(cfg.inputs.duration_s * 1e9));
        run.alice = read_stream_csv(*cfg.inputs.alice_csv, Party::Alice, duration_ns);
        run.bob = read_stream_csv(*cfg.inputs.bob_csv, Party::Bob, duration_ns);
        return run;
    }
    if (cfg.inputs.alice_csv || cfg.inputs.bob_csv) {
        throw ConfigError("config.inputs: needs both alice_csv and bob_csv");
    }
    return simulate_from_config(cfg);
}

int cmd_simulate(const GlobalOptions& opt) {
    const ExperimentConfig cfg = require_config(opt);
    OutputTracker out(opt.out_dir);
    const SimulatedRun run = simulate_from_config(cfg);
    write_stream_csv(out.path("alice.csv"), run.alice, opt.debug_truth);
    write_stream_csv(out.path("bob.csv"), run.bob, opt.debug_truth);
    if (run.trace) {
        write_trace_csv(out.path("trace.csv"), *run.trace);
    }
    std::printf("simulate: %zu Alice events, %zu Bob events over %.3f s\n", run.alice.size(),
                run.bob.size(), run.alice.duration_s());
    out.commit();
    return 0;
}

int cmd_pdtc(const GlobalOptions& opt) {
    const ExperimentConfig cfg = require_config(opt);
    OutputTracker out(opt.out_dir);
    const SimulatedRun run = obtain_streams(cfg);

    double eta_b_device;
    if (cfg.inputs.local_alice_csv && cfg.inputs.local_bob_csv) {
        const auto duration_ns =
            static_cast<std::int64_t>(std::llround(cfg.inputs.local_duration_s * 1e9));
        const auto la = read_stream_csv(*cfg.inputs.local_alice_csv, Party::Alice, duration_ns);
        const auto lb = read_stream_csv(*cfg.inputs.local_bob_csv, Party::Bob, duration_ns);
        eta_b_device = device_efficiency_from_local(
            block_statistics(la, lb, cfg.channel.block_duration_s, cfg.coincidence));
    } else {
        eta_b_device = cfg.devices.bob.total();
    }

    const auto blocks =
        block_statistics(run.alice, run.bob, cfg.channel.block_duration_s, cfg.coincidence);
    const PdtcEstimate est = estimate_link_pdtc(blocks, eta_b_device, cfg.pdtc_bins);
    write_pdtc_histogram_csv(out.path("pdtc_histogram.csv"), est.model);
    write_block_stats_csv(out.path("pdtc_blocks.csv"), blocks);
    std::printf("pdtc: eta_b_device %.6g, mean eta %.6g over %zu blocks (%zu skipped)\n",
                eta_b_device, est.mean_eta_hat, est.eta_hats.size(), est.skipped_blocks);
    out.commit();
    return 0;
}

int cmd_snrf_sweep(const GlobalOptions& opt) {
    const ExperimentConfig cfg = require_config(opt);
    OutputTracker out(opt.out_dir);
    const SimulatedRun run = obtain_streams(cfg);
    const ErrorCorrectionModel ec = ErrorCorrectionModel::default_table();

    const SweepResult sw = sweep(run.alice, run.bob, cfg.snrf.durations_s,
                                 cfg.snrf.thresholds_cps, cfg.coincidence, ec, opt.threads);
    write_sweep_csv(out.path("sweep_grid.csv"), sw);

    const auto blocks =
        block_statistics(run.alice, run.bob, sw.optimum.duration_s, cfg.coincidence);
    const KeyRateResult unfiltered = secret_key_from_blocks(blocks, ec);
    SnrfConfig filt;
    filt.block_duration_s = sw.optimum.duration_s;
    filt.threshold = sw.optimum.threshold_cps;
    const SnrfPartition part = apply_snrf(blocks, filt);
    const KeyRateResult above =
        part.kept.empty() ? KeyRateResult{} : secret_key_from_blocks(part.kept, ec);

    std::uint64_t below_raw = 0;
    std::uint64_t below_sifted = 0;
    std::uint64_t below_errors = 0;
    for (const BlockStats& b : part.rejected) {
        below_raw += b.coincidences;
        below_sifted += b.sifted_count;
        below_errors += b.errors_z + b.errors_x;
    }

    {
        auto* f = std::fopen(out.path("snrf_summary.csv").c_str(), "w");
        if (f == nullptr) {
            throw ArgumentError("cannot write snrf_summary.csv");
        }
        std::fprintf(f, "scenario,raw_key,sifted_key,secret_key,f,qber\n");
        std::fprintf(f, "no_snrf,%llu,%llu,%.0f,%.4f,%.6f\n",
                     static_cast<unsigned long long>(unfiltered.raw_count),
                     static_cast<unsigned long long>(unfiltered.sifted_count),
                     unfiltered.secret_bits, unfiltered.f_used, unfiltered.qber);
        std::fprintf(f, "above_snrf,%llu,%llu,%.0f,%.4f,%.6f\n",
                     static_cast<unsigned long long>(above.raw_count),
                     static_cast<unsigned long long>(above.sifted_count), above.secret_bits,
                     above.f_used, above.qber);
        const double below_qber =
            below_sifted > 0 ? static_cast<double>(below_errors) / below_sifted : 0.0;
        std::fprintf(f, "below_snrf,%llu,%llu,-,-,%.6f\n",
                     static_cast<unsigned long long>(below_raw),
                     static_cast<unsigned long long>(below_sifted), below_qber);
        std::fclose(f);
    }
    {
        auto* f = std::fopen(out.path("sweep_optimum.json").c_str(), "w");
        if (f == nullptr) {
            throw ArgumentError("cannot write sweep_optimum.json");
        }
        std::fprintf(f,
                     "{\"duration_ms\": %.6g, \"threshold_cps\": %.6g, \"secret_bits\": %.6g, "
                     "\"unfiltered_secret_bits\": %.6g, \"counts_per_block_at_threshold\": "
                     "%.6g}\n",
                     sw.optimum.duration_s * 1e3, sw.optimum.threshold_cps,
                     sw.optimum.secret_bits, sw.unfiltered_secret_bits,
                     sw.optimum.threshold_cps * sw.optimum.duration_s);
        std::fclose(f);
    }
    std::printf("snrf-sweep: optimum %.0f ms / %.0f counts per sec -> %.0f secret bits "
                "(unfiltered %.0f)\n",
                sw.optimum.duration_s * 1e3, sw.optimum.threshold_cps, sw.optimum.secret_bits,
                sw.unfiltered_secret_bits);
    out.commit();
    return 0;
}

int cmd_decoy_scan(const GlobalOptions& opt) {
    const ExperimentConfig cfg = require_config(opt);
    OutputTracker out(opt.out_dir);
    const auto rows = scan_sigma(cfg.decoy.params, cfg.decoy.losses_db, cfg.decoy.sigmas);
    write_decoy_scan_csv(out.path("decoy_rates.csv"), rows);
    std::printf("decoy-scan: %zu grid points\n", rows.size());
    out.commit();
    return 0;
}

int cmd_satellite(const GlobalOptions& opt) {
    const ExperimentConfig cfg = require_config(opt);
    if (!cfg.has_satellite) {
        throw ConfigError("config.satellite: missing section");
    }
    OutputTracker out(opt.out_dir);
    const ErrorCorrectionModel ec = ErrorCorrectionModel::default_table();
    SnrfGrids grids;
    grids.durations_s = cfg.snrf.durations_s;
    grids.thresholds_cps = cfg.snrf.thresholds_cps;

    auto rows = evaluate_pass(cfg.satellite, false, cfg.coincidence, ec, cfg.seed, grids,
                              opt.threads);
    const auto snrf_rows = evaluate_pass(cfg.satellite, true, cfg.coincidence, ec, cfg.seed,
                                         grids, opt.threads);
    rows.insert(rows.end(), snrf_rows.begin(), snrf_rows.end());
    write_satellite_csv(out.path("satellite_rates.csv"), rows);
    std::printf("satellite: %zu entries x 2 modes\n", cfg.satellite.entries.size());
    out.commit();
    return 0;
}

int cmd_selftest(const GlobalOptions& opt, const std::vector<int>& criteria) {
    (void)opt;
    return run_selftest(std::cout, criteria) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free-space QKD simulation and post-processing toolkit"};
    app.require_subcommand(1);

    GlobalOptions opt;
    app.add_option("--config", opt.config_path, "experiment configuration (JSON)");
    app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the configured root seed");
    app.add_option("--threads", opt.threads, "parallelism cap (0 = hardware)");
    app.add_flag("--debug-truth", opt.debug_truth,
                 "include the simulation-truth kind column in stream CSVs");

    auto* sim = app.add_subcommand("simulate", "generate detection streams");
    auto* pdtc = app.add_subcommand("pdtc", "estimate the channel PDTC from streams");
    auto* sweep_cmd = app.add_subcommand("snrf-sweep", "sweep block duration and SNRF threshold");
    auto* decoy = app.add_subcommand("decoy-scan", "decoy-state static versus fluctuating rates");
    auto* sat = app.add_subcommand("satellite", "evaluate a LEO pass scenario");
    auto* self = app.add_subcommand("selftest", "run the acceptance suite");
    std::vector<int> criteria;
    self->add_option("--criterion", criteria, "restrict to specific criteria (repeatable)");

    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) {
        opt.seed_override = seed_value;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(opt);
        }
        if (pdtc->parsed()) {
            return cmd_pdtc(opt);
        }
        if (sweep_cmd->parsed()) {
            return cmd_snrf_sweep(opt);
        }
        if (decoy->parsed()) {
            return cmd_decoy_scan(opt);
        }
        if (sat->parsed()) {
            return cmd_satellite(opt);
        }
        if (self->parsed()) {
            return cmd_selftest(opt, criteria);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "{\"error\": \"invalid_input\", \"message\": \"%s\"}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "{\"error\": \"internal\", \"message\": \"%s\"}\n", e.what());
        return 2;
    }
    return 0;
}
