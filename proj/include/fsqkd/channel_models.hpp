#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fsqkd {

enum class PdtcKind { Degenerate, LogNormal, Empirical };

/// Probability distribution of the per-block atmospheric transmission
/// coefficient eta_atm in [0,1].
///
/// The LogNormal variant models theta = -ln(eta) as Gaussian with spread
/// sigma and location chosen so the untruncated mean transmittance equals
/// mean_eta (location = -ln(mean_eta) + sigma^2/2 in theta space). Passing
/// literal_location = true instead places the location at -ln(mean_eta),
/// which reproduces the textbook form exactly at the cost of a sampled mean
/// that exceeds mean_eta by exp(sigma^2/2). Support is truncated to (0,1]:
/// samples above 1 are redrawn and the density is renormalized accordingly.
class PdtcModel {
public:
    /// Defaults to a degenerate model with zero transmittance.
    PdtcModel() = default;

    static PdtcModel degenerate(double eta0);
    static PdtcModel lognormal(double sigma, double mean_eta, bool literal_location = false);
    static PdtcModel empirical(std::vector<double> bin_edges, std::vector<double> bin_probabilities);

    PdtcKind kind() const { return kind_; }

    double eta0() const;
    double sigma() const;
    double mean_eta() const;

    /// Location of theta = -ln(eta) in the underlying Gaussian (LogNormal only).
    double theta_location() const;
    /// Probability mass the untruncated law places on (0,1] (LogNormal only).
    double truncation_mass() const;

    /// Mean of the law actually sampled, truncation included.
    double mean() const;

    const std::vector<double>& bin_edges() const { return bin_edges_; }
    const std::vector<double>& bin_probabilities() const { return bin_probs_; }
    const std::vector<double>& bin_cumulative() const { return bin_cumulative_; }

private:
    PdtcKind kind_ = PdtcKind::Degenerate;
    double eta0_ = 0.0;
    double sigma_ = 0.0;
    double mean_eta_ = 0.0;
    double theta_loc_ = 0.0;
    std::vector<double> bin_edges_;
    std::vector<double> bin_probs_;
    std::vector<double> bin_cumulative_;
};

/// Ordered per-block transmittance samples produced by sample_trace.
struct TransmissionTrace {
    double block_duration_s = 0.0;
    std::vector<double> etas;
    std::uint64_t seed = 0;

    double total_duration_s() const {
        return block_duration_s * static_cast<double>(etas.size());
    }
};

/// Density of the model at eta in (0,1]. Degenerate models do not admit a
/// density query and raise UnsupportedQueryError; eta outside (0,1] raises
/// DomainError.
double pdtc_density(const PdtcModel& model, double eta);

/// Draws n_blocks i.i.d. per-block transmittances. Deterministic for a fixed
/// seed.
TransmissionTrace sample_trace(const PdtcModel& model, std::size_t n_blocks,
                               double block_duration_s, std::uint64_t seed);

struct LogNormalFit {
    double sigma;     // population standard deviation of -ln(eta)
    double mean_eta;  // arithmetic mean of eta
};

/// Fits (sigma, mean_eta) from strictly positive transmittance samples.
/// Requires at least two samples; any sample <= 0 raises DomainError.
LogNormalFit fit_lognormal(std::span<const double> samples);

/// Standard normal CDF, shared by the truncation bookkeeping and tests.
double normal_cdf(double x);

}  // namespace fsqkd
