#pragma once

#include <span>
#include <string>
#include <vector>

#include "fsqkd/channel_models.hpp"
#include "fsqkd/coincidence.hpp"
#include "fsqkd/decoy.hpp"
#include "fsqkd/event_sim.hpp"
#include "fsqkd/keyrate.hpp"
#include "fsqkd/pdtc_estimation.hpp"
#include "fsqkd/satellite.hpp"
#include "fsqkd/snrf.hpp"

namespace fsqkd {

// All writers emit a header row and deterministic formatting, so identical
// inputs give byte-identical files.

void write_trace_csv(const std::string& path, const TransmissionTrace& trace);

/// Columns: timestamp_ns,basis,outcome. The simulation-truth `kind` column is
/// appended only when include_kind is set.
void write_stream_csv(const std::string& path, const TimeTagStream& stream, bool include_kind);

/// Reads a stream CSV; an optional kind column is ignored. The stream
/// duration is taken from duration_ns, or rounded up to the next whole second
/// past the last event when duration_ns <= 0.
TimeTagStream read_stream_csv(const std::string& path, Party party, std::int64_t duration_ns = 0);

void write_block_stats_csv(const std::string& path, std::span<const BlockStats> blocks);

/// Columns: bin_left,bin_right,probability.
void write_pdtc_histogram_csv(const std::string& path, const PdtcModel& empirical);

/// Long-form sweep grid: duration_ms,threshold_cps,secret_bits.
void write_sweep_csv(const std::string& path, const SweepResult& sweep);

void write_decoy_scan_csv(const std::string& path, std::span<const SigmaScanRow> rows);

/// Columns: elevation_deg,mode,secret_bits_per_s,qber,unfloored_fraction,
/// secret_bits_per_pass.
void write_satellite_csv(const std::string& path, std::span<const PassEvaluation> evals);

std::string key_rate_result_json(const KeyRateResult& r);

}  // namespace fsqkd
