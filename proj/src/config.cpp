#include "fsqkd/config.hpp"

#include <fstream>

#include <json.hpp>

#include "fsqkd/errors.hpp"

namespace fsqkd {

namespace {

using nlohmann::json;

// Typed field access that reports the full key path on violation.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_ + ": expected an object");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    Section child(const char* key) const { return Section(at(key), path_ + "." + key); }

    std::optional<Section> optional_child(const char* key) const {
        if (!has(key)) {
            return std::nullopt;
        }
        return child(key);
    }

    double number(const char* key) const {
        const json& v = at(key);
        if (!v.is_number()) {
            throw ConfigError(path_ + "." + key + ": expected a number");
        }
        return v.get<double>();
    }

    double number_or(const char* key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    std::uint64_t uinteger(const char* key) const {
        const json& v = at(key);
        if (!v.is_number_unsigned() && !v.is_number_integer()) {
            throw ConfigError(path_ + "." + key + ": expected an integer");
        }
        return v.get<std::uint64_t>();
    }

    std::uint64_t uinteger_or(const char* key, std::uint64_t fallback) const {
        return has(key) ? uinteger(key) : fallback;
    }

    bool boolean_or(const char* key, bool fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json& v = at(key);
        if (!v.is_boolean()) {
            throw ConfigError(path_ + "." + key + ": expected a boolean");
        }
        return v.get<bool>();
    }

    std::string string(const char* key) const {
        const json& v = at(key);
        if (!v.is_string()) {
            throw ConfigError(path_ + "." + key + ": expected a string");
        }
        return v.get<std::string>();
    }

    std::optional<std::string> optional_string(const char* key) const {
        if (!has(key)) {
            return std::nullopt;
        }
        return string(key);
    }

    std::vector<double> number_list(const char* key) const {
        const json& v = at(key);
        if (!v.is_array()) {
            throw ConfigError(path_ + "." + key + ": expected an array of numbers");
        }
        std::vector<double> out;
        out.reserve(v.size());
        for (const json& e : v) {
            if (!e.is_number()) {
                throw ConfigError(path_ + "." + key + ": expected an array of numbers");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<double> number_list_or(const char* key, std::vector<double> fallback) const {
        return has(key) ? number_list(key) : std::move(fallback);
    }

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

private:
    const json& at(const char* key) const {
        if (!j_.contains(key)) {
            throw ConfigError(path_ + "." + key + ": missing required key");
        }
        return j_[key];
    }

    const json& j_;
    std::string path_;
};

PartyEfficiency parse_party(const Section& s) {
    PartyEfficiency p;
    p.source_coupling = s.number_or("source_coupling", 1.0);
    p.polarization_analyzer = s.number_or("polarization_analyzer", 1.0);
    p.detector = s.number_or("detector", 1.0);
    return p;
}

ChannelConfig parse_channel(const Section& s) {
    ChannelConfig c;
    const std::string type = s.string("type");
    if (type == "local") {
        c.type = ChannelConfig::Type::Local;
    } else if (type == "degenerate") {
        c.type = ChannelConfig::Type::Degenerate;
        c.eta0 = s.number("eta0");
    } else if (type == "lognormal") {
        c.type = ChannelConfig::Type::LogNormal;
        c.sigma = s.number("sigma");
        c.mean_eta = s.number("mean_eta");
        c.literal_location = s.boolean_or("literal_location", false);
    } else if (type == "empirical") {
        c.type = ChannelConfig::Type::Empirical;
        c.bin_edges = s.number_list("bin_edges");
        c.bin_probabilities = s.number_list("bin_probabilities");
    } else {
        throw ConfigError(s.path() + ".type: unknown channel type '" + type + "'");
    }
    c.block_duration_s = s.number_or("block_duration_ms", 10.0) * 1e-3;
    c.duration_s = s.number_or("duration_s", 1.0);
    return c;
}

PassScenario parse_satellite(const Section& s, const DeviceEfficiencies& devices) {
    PassScenario sc;
    sc.devices = devices;
    sc.source.pair_rate = s.number_or("pair_rate", 1e8);
    sc.source.intrinsic_qber = s.number_or("intrinsic_qber", 0.025);
    sc.trace_block_duration_s = s.number_or("block_duration_ms", 10.0) * 1e-3;
    const json& entries = s.raw().contains("entries") ? s.raw()["entries"] : json::array();
    if (!entries.is_array() || entries.empty()) {
        throw ConfigError(s.path() + ".entries: expected a non-empty array");
    }
    std::size_t idx = 0;
    for (const json& e : entries) {
        Section entry(e, s.path() + ".entries[" + std::to_string(idx) + "]");
        PassEntry pe;
        pe.elevation_deg = entry.number("elevation_deg");
        pe.mean_loss_db = entry.number("mean_loss_db");
        pe.sigma = entry.number("sigma");
        pe.background_rate = entry.number("background_rate");
        pe.dwell_time_s = entry.number("dwell_time_s");
        sc.entries.push_back(pe);
        ++idx;
    }
    return sc;
}

}  // namespace

PdtcModel ChannelConfig::make_model() const {
    switch (type) {
        case Type::Local:
            return PdtcModel::degenerate(1.0);
        case Type::Degenerate:
            return PdtcModel::degenerate(eta0);
        case Type::LogNormal:
            return PdtcModel::lognormal(sigma, mean_eta, literal_location);
        case Type::Empirical:
            return PdtcModel::empirical(bin_edges, bin_probabilities);
    }
    throw Error("unreachable");
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    json root;
    try {
        in >> root;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Section top(root, "config");

    ExperimentConfig cfg;
    cfg.seed = top.uinteger_or("seed", 1);

    if (auto s = top.optional_child("source")) {
        cfg.source.pair_rate = s->number_or("pair_rate", cfg.source.pair_rate);
        cfg.source.intrinsic_qber = s->number_or("intrinsic_qber", cfg.source.intrinsic_qber);
    }
    if (auto s = top.optional_child("devices")) {
        if (auto a = s->optional_child("alice")) {
            cfg.devices.alice = parse_party(*a);
        }
        if (auto b = s->optional_child("bob")) {
            cfg.devices.bob = parse_party(*b);
        }
        cfg.devices.timing_jitter_ns = s->number_or("timing_jitter_ns", 0.0);
    }
    if (auto s = top.optional_child("background")) {
        cfg.background.bob_background_rate = s->number_or("bob_background_rate", 0.0);
        cfg.background.alice_dark_rate = s->number_or("alice_dark_rate", 0.0);
        cfg.background.bob_dark_rate = s->number_or("bob_dark_rate", 0.0);
    }
    if (auto s = top.optional_child("channel")) {
        cfg.channel = parse_channel(*s);
    }
    if (auto s = top.optional_child("coincidence")) {
        cfg.coincidence.window_ns = static_cast<std::int64_t>(s->number_or("window_ns", 5.0));
        cfg.coincidence.accidental_shift_ns =
            static_cast<std::int64_t>(s->number_or("accidental_shift_ns", 0.0));
        if (cfg.coincidence.accidental_shift_ns == 0) {
            cfg.coincidence.accidental_shift_ns = 10 * cfg.coincidence.window_ns;
        }
    } else {
        cfg.coincidence.accidental_shift_ns = 10 * cfg.coincidence.window_ns;
    }
    if (auto s = top.optional_child("snrf")) {
        auto durations_ms = s->number_list_or("durations_ms", {5, 10, 20, 30, 50, 100});
        cfg.snrf.durations_s.clear();
        for (double d : durations_ms) {
            cfg.snrf.durations_s.push_back(d * 1e-3);
        }
        cfg.snrf.thresholds_cps = s->number_list_or("thresholds_cps", {});
    }
    if (auto s = top.optional_child("decoy")) {
        cfg.decoy.params.mu = s->number_or("mu", 0.0);
        cfg.decoy.params.nu = s->number_or("nu", 0.05);
        cfg.decoy.params.y0 = s->number_or("y0", 1.7e-6);
        cfg.decoy.params.e_detector = s->number_or("e_detector", 0.033);
        cfg.decoy.params.f_ec = s->number_or("f_ec", 1.22);
        cfg.decoy.params.sift_q = s->number_or("q", 0.5);
        cfg.decoy.sigmas = s->number_list_or("sigmas", cfg.decoy.sigmas);
        cfg.decoy.losses_db = s->number_list_or("losses_db", cfg.decoy.losses_db);
    }
    if (auto s = top.optional_child("satellite")) {
        cfg.satellite = parse_satellite(*s, cfg.devices);
        cfg.has_satellite = true;
    }
    if (auto s = top.optional_child("pdtc")) {
        cfg.pdtc_bins = static_cast<std::size_t>(s->uinteger_or("n_bins", 50));
    }
    if (auto s = top.optional_child("inputs")) {
        cfg.inputs.alice_csv = s->optional_string("alice_csv");
        cfg.inputs.bob_csv = s->optional_string("bob_csv");
        cfg.inputs.local_alice_csv = s->optional_string("local_alice_csv");
        cfg.inputs.local_bob_csv = s->optional_string("local_bob_csv");
        cfg.inputs.duration_s = s->number_or("duration_s", 0.0);
        cfg.inputs.local_duration_s = s->number_or("local_duration_s", 0.0);
    }
    return cfg;
}

}  // namespace fsqkd
