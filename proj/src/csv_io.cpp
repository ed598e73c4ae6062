#include "fsqkd/csv_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "fsqkd/errors.hpp"

namespace fsqkd {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "w"));
    if (!f) {
        throw ArgumentError("cannot open " + path + " for writing");
    }
    return f;
}

char basis_char(Basis b) {
    return b == Basis::Z ? 'Z' : 'X';
}

Basis parse_basis(const std::string& token, std::size_t line) {
    if (token == "Z" || token == "z") {
        return Basis::Z;
    }
    if (token == "X" || token == "x") {
        return Basis::X;
    }
    throw FormatError("line " + std::to_string(line) + ": bad basis '" + token + "'");
}

const char* kind_name(EventKind k) {
    switch (k) {
        case EventKind::Signal:
            return "signal";
        case EventKind::Background:
            return "background";
        case EventKind::Dark:
            return "dark";
    }
    return "signal";
}

}  // namespace

void write_trace_csv(const std::string& path, const TransmissionTrace& trace) {
    auto f = open_for_write(path);
    std::fprintf(f.get(), "block_index,eta\n");
    for (std::size_t i = 0; i < trace.etas.size(); ++i) {
        std::fprintf(f.get(), "%zu,%.12g\n", i, trace.etas[i]);
    }
}

void write_stream_csv(const std::string& path, const TimeTagStream& stream, bool include_kind) {
    auto f = open_for_write(path);
    std::fprintf(f.get(), include_kind ? "timestamp_ns,basis,outcome,kind\n"
                                       : "timestamp_ns,basis,outcome\n");
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (include_kind) {
            std::fprintf(f.get(), "%" PRId64 ",%c,%u,%s\n", stream.times[i],
                         basis_char(stream.basis(i)), static_cast<unsigned>(stream.outcome(i)),
                         kind_name(stream.kind(i)));
        } else {
            std::fprintf(f.get(), "%" PRId64 ",%c,%u\n", stream.times[i],
                         basis_char(stream.basis(i)), static_cast<unsigned>(stream.outcome(i)));
        }
    }
}

TimeTagStream read_stream_csv(const std::string& path, Party party, std::int64_t duration_ns) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open " + path + " for reading");
    }
    TimeTagStream stream;
    stream.party = party;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (line_no == 1 && line.rfind("timestamp_ns", 0) == 0) {
            continue;  // header
        }
        std::istringstream row(line);
        std::string t_tok;
        std::string basis_tok;
        std::string outcome_tok;
        if (!std::getline(row, t_tok, ',') || !std::getline(row, basis_tok, ',') ||
            !std::getline(row, outcome_tok, ',')) {
            throw FormatError("line " + std::to_string(line_no) + ": expected at least 3 columns");
        }
        std::int64_t t;
        try {
            t = std::stoll(t_tok);
        } catch (const std::exception&) {
            throw FormatError("line " + std::to_string(line_no) + ": bad timestamp '" + t_tok +
                              "'");
        }
        const Basis basis = parse_basis(basis_tok, line_no);
        std::uint8_t outcome;
        if (outcome_tok == "0") {
            outcome = 0;
        } else if (outcome_tok == "1") {
            outcome = 1;
        } else {
            throw FormatError("line " + std::to_string(line_no) + ": bad outcome '" + outcome_tok +
                              "'");
        }
        if (!stream.times.empty() && t < stream.times.back()) {
            throw FormatError("line " + std::to_string(line_no) + ": timestamps must not decrease");
        }
        // A trailing truth column, if present, is ignored.
        stream.push_back(t, basis, outcome, EventKind::Signal);
    }

    if (duration_ns > 0) {
        stream.duration_ns = duration_ns;
    } else if (!stream.times.empty()) {
        const std::int64_t last = stream.times.back();
        stream.duration_ns = ((last / 1'000'000'000) + 1) * 1'000'000'000;
    }
    return stream;
}

void write_block_stats_csv(const std::string& path, std::span<const BlockStats> blocks) {
    auto f = open_for_write(path);
    std::fprintf(f.get(),
                 "block_index,n_a,n_b,n_coin,n_acc,sifted,err_z,err_x,sifted_z,sifted_x\n");
    for (const BlockStats& b : blocks) {
        std::fprintf(f.get(),
                     "%zu,%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%.12g,%" PRIu64 ",%" PRIu64
                     ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 "\n",
                     b.block_index, b.alice_singles, b.bob_singles, b.coincidences,
                     b.accidental_estimate, b.sifted_count, b.errors_z, b.errors_x, b.sifted_z,
                     b.sifted_x);
    }
}

void write_pdtc_histogram_csv(const std::string& path, const PdtcModel& empirical) {
    if (empirical.kind() != PdtcKind::Empirical) {
        throw ArgumentError("PDTC histogram export needs an empirical model");
    }
    auto f = open_for_write(path);
    std::fprintf(f.get(), "bin_left,bin_right,probability\n");
    const auto& edges = empirical.bin_edges();
    const auto& probs = empirical.bin_probabilities();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        std::fprintf(f.get(), "%.12g,%.12g,%.12g\n", edges[i], edges[i + 1], probs[i]);
    }
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
    auto f = open_for_write(path);
    std::fprintf(f.get(), "duration_ms,threshold_cps,secret_bits\n");
    for (std::size_t di = 0; di < sweep.durations_s.size(); ++di) {
        for (std::size_t ti = 0; ti < sweep.thresholds_cps.size(); ++ti) {
            std::fprintf(f.get(), "%.12g,%.12g,%.12g\n", sweep.durations_s[di] * 1e3,
                         sweep.thresholds_cps[ti], sweep.secret_bits[di][ti]);
        }
    }
}

void write_decoy_scan_csv(const std::string& path, std::span<const SigmaScanRow> rows) {
    auto f = open_for_write(path);
    std::fprintf(f.get(), "mean_loss_db,sigma,rate_static,rate_fluct\n");
    for (const SigmaScanRow& r : rows) {
        std::fprintf(f.get(), "%.12g,%.12g,%.12g,%.12g\n", r.mean_loss_db, r.sigma, r.rate_static,
                     r.rate_fluctuating);
    }
}

void write_satellite_csv(const std::string& path, std::span<const PassEvaluation> evals) {
    auto f = open_for_write(path);
    std::fprintf(f.get(),
                 "elevation_deg,mode,secret_bits_per_s,qber,unfloored_fraction,"
                 "secret_bits_per_pass\n");
    for (const PassEvaluation& e : evals) {
        std::fprintf(f.get(), "%.12g,%s,%.12g,%.12g,%.12g,%.12g\n", e.elevation_deg,
                     e.with_snrf ? "snrf" : "direct", e.secret_bits_per_s, e.qber,
                     e.unfloored_fraction, e.secret_bits_per_pass);
    }
}

std::string key_rate_result_json(const KeyRateResult& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"raw_count\": %" PRIu64 ", \"sifted_count\": %" PRIu64
                  ", \"qber\": %.12g, \"qber_defined\": %s, \"f_used\": %.12g, "
                  "\"secret_fraction_per_sifted_bit\": %.12g, \"secret_bits\": %.12g}",
                  r.raw_count, r.sifted_count, r.qber, r.qber_defined ? "true" : "false", r.f_used,
                  r.secret_fraction_per_sifted_bit, r.secret_bits);
    return std::string(buf);
}

}  // namespace fsqkd
