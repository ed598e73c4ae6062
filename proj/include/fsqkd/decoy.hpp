#pragma once

#include <span>
#include <vector>

#include "fsqkd/channel_models.hpp"

namespace fsqkd {

/// One-decoy weak-coherent-pulse protocol parameters. mu <= 0 requests
/// per-point optimization of the signal intensity by golden-section search.
struct DecoyParams {
    double mu = 0.0;            // signal mean photon number; <= 0 means optimize
    double nu = 0.05;           // decoy mean photon number
    double y0 = 1.7e-6;         // background yield per pulse
    double e_detector = 0.033;  // misalignment error probability
    double e0 = 0.5;            // background error rate
    double f_ec = 1.22;         // error-correction inefficiency
    double sift_q = 0.5;        // basis-sifting factor

    void validate() const;
};

/// Either a fixed transmittance or a transmittance drawn per pulse from a
/// PDTC. In the fluctuating case the parties observe only the PDTC-averaged
/// gain and error rate.
class ChannelSpec {
public:
    static ChannelSpec fixed(double eta);
    static ChannelSpec fluctuating(PdtcModel model);

    bool is_fluctuating() const { return fluctuating_; }
    double eta() const;
    const PdtcModel& model() const;

private:
    ChannelSpec() = default;
    bool fluctuating_ = false;
    double eta_ = 1.0;
    PdtcModel model_;
};

struct GainError {
    double gain;   // Q: detections per pulse of this intensity
    double error;  // E: error rate among those detections
};

/// Observed gain and error rate for a pulse of mean photon number pulse_mu.
/// Fixed channel: Q = y0 + 1 - exp(-eta mu), EQ = e0 y0 + e_det (1 - exp(-eta mu)).
/// Fluctuating channel: both averaged over the PDTC by adaptive quadrature to
/// relative tolerance 1e-8 (degenerate PDTCs short-circuit to the fixed form).
GainError gain_and_error(const DecoyParams& params, const ChannelSpec& channel, double pulse_mu);

/// Single-photon yield/error bounds from the two observed intensities.
/// Y0 is bracketed from the gains (lower) and the error rates (upper); Y1's
/// lower bound uses the nu/mu gain combination with the Y0 upper bound; e1's
/// upper bound spends the Y0 lower bound, which tightens it whenever the
/// observed gains reveal a nonzero background floor.
struct OneDecoyBounds {
    double y0_lower;
    double y0_upper;
    double y1_lower;
    double e1_upper;
    double q1_lower;  // Y1 * mu * exp(-mu)
};

OneDecoyBounds one_decoy_bounds(double mu, double nu, double q_mu, double e_mu, double q_nu,
                                double e_nu, double e0);

/// Secure key rate per pulse at a fixed signal intensity, floored at 0:
/// q * (Q1 (1 - h2(e1)) - Qmu f h2(Emu)).
double secure_key_rate_at_mu(const DecoyParams& params, const ChannelSpec& channel, double mu);

/// Secure key rate per pulse; optimizes mu when params.mu <= 0.
double secure_key_rate(const DecoyParams& params, const ChannelSpec& channel);

struct SigmaScanRow {
    double mean_loss_db;
    double sigma;
    double rate_static;
    double rate_fluctuating;
};

/// Static-versus-fluctuating comparison grid. For every mean loss the signal
/// intensity is chosen for the static channel (the operating assumption the
/// comparison probes) and reused for the lognormal channel of equal mean.
std::vector<SigmaScanRow> scan_sigma(const DecoyParams& params,
                                     std::span<const double> mean_losses_db,
                                     std::span<const double> sigmas);

/// Loss in dB to mean transmittance.
double db_to_transmittance(double loss_db);

}  // namespace fsqkd
