#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsqkd/channel_models.hpp"
#include "fsqkd/coincidence.hpp"
#include "fsqkd/decoy.hpp"
#include "fsqkd/event_sim.hpp"
#include "fsqkd/satellite.hpp"

namespace fsqkd {

/// Channel section of an experiment configuration: either a tabletop run
/// ("local") or a link run over a degenerate/lognormal/empirical PDTC.
struct ChannelConfig {
    enum class Type { Local, Degenerate, LogNormal, Empirical } type = Type::Local;
    double eta0 = 1.0;
    double sigma = 1.0;
    double mean_eta = 0.1;
    bool literal_location = false;
    std::vector<double> bin_edges;
    std::vector<double> bin_probabilities;
    double block_duration_s = 0.010;  // trace granularity
    double duration_s = 1.0;

    PdtcModel make_model() const;
};

struct SnrfSection {
    std::vector<double> durations_s{0.005, 0.010, 0.020, 0.030, 0.050, 0.100};
    std::vector<double> thresholds_cps;  // empty: auto grid
};

struct DecoySection {
    DecoyParams params;
    std::vector<double> sigmas{0.18, 1.8};
    std::vector<double> losses_db{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
};

struct InputsSection {
    std::optional<std::string> alice_csv;
    std::optional<std::string> bob_csv;
    std::optional<std::string> local_alice_csv;
    std::optional<std::string> local_bob_csv;
    double duration_s = 0.0;        // 0: infer from timestamps
    double local_duration_s = 0.0;  // 0: infer from timestamps
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    SourceConfig source{1e6, 0.0};
    DeviceEfficiencies devices;
    BackgroundConfig background;
    ChannelConfig channel;
    CoincidenceConfig coincidence;
    SnrfSection snrf;
    DecoySection decoy;
    PassScenario satellite;
    bool has_satellite = false;
    std::size_t pdtc_bins = 50;
    InputsSection inputs;
};

/// Parses a JSON experiment configuration. Schema violations raise
/// ConfigError naming the offending key path.
ExperimentConfig load_config(const std::string& path);

}  // namespace fsqkd
