#include "fsqkd/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "fsqkd/errors.hpp"
#include "fsqkd/keyrate.hpp"

namespace fsqkd {

namespace {

constexpr double kQuadratureRelTol = 1e-8;
constexpr int kQuadratureMaxDepth = 48;

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || b - a < 1e-14) {
        return left + right + delta / 15.0;
    }
    if (depth <= 0) {
        throw NumericError("quadrature did not converge on [" + std::to_string(a) + ", " +
                           std::to_string(b) + "]");
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (!(b > a)) {
        return 0.0;
    }
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double scale = std::max(std::abs(whole), 1e-300);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, rel_tol * scale, kQuadratureMaxDepth);
}

double gain_at(double eta, double pulse_mu, const DecoyParams& p) {
    return std::min(1.0, p.y0 + 1.0 - std::exp(-eta * pulse_mu));
}

double error_gain_at(double eta, double pulse_mu, const DecoyParams& p) {
    return p.e0 * p.y0 + p.e_detector * (1.0 - std::exp(-eta * pulse_mu));
}

// Averages Q and EQ over the PDTC. Lognormal models are integrated in
// theta = -ln(eta), where the weight is a plain truncated Gaussian.
std::pair<double, double> averaged_observables(const PdtcModel& model, double pulse_mu,
                                               const DecoyParams& p) {
    switch (model.kind()) {
        case PdtcKind::Degenerate:
            return {gain_at(model.mean_eta(), pulse_mu, p),
                    error_gain_at(model.mean_eta(), pulse_mu, p)};
        case PdtcKind::LogNormal: {
            const double loc = model.theta_location();
            const double sigma = model.sigma();
            const double mass = model.truncation_mass();
            const double upper = loc + 12.0 * sigma;
            auto weight = [&](double theta) {
                const double z = (theta - loc) / sigma;
                return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI) * mass);
            };
            const double q = integrate(
                [&](double th) { return weight(th) * gain_at(std::exp(-th), pulse_mu, p); }, 0.0,
                upper, kQuadratureRelTol);
            const double eq = integrate(
                [&](double th) { return weight(th) * error_gain_at(std::exp(-th), pulse_mu, p); },
                0.0, upper, kQuadratureRelTol);
            return {q, eq};
        }
        case PdtcKind::Empirical: {
            double q = 0.0;
            double eq = 0.0;
            const auto& edges = model.bin_edges();
            const auto& probs = model.bin_probabilities();
            for (std::size_t i = 0; i < probs.size(); ++i) {
                if (probs[i] <= 0.0) {
                    continue;
                }
                const double width = edges[i + 1] - edges[i];
                q += probs[i] / width *
                     integrate([&](double eta) { return gain_at(eta, pulse_mu, p); }, edges[i],
                               edges[i + 1], kQuadratureRelTol);
                eq += probs[i] / width *
                      integrate([&](double eta) { return error_gain_at(eta, pulse_mu, p); },
                                edges[i], edges[i + 1], kQuadratureRelTol);
            }
            return {q, eq};
        }
    }
    throw Error("unreachable");
}

double golden_section_mu(const DecoyParams& params, const ChannelSpec& channel) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = std::max(params.nu * 1.5, 0.01);
    double hi = 1.0;
    if (!(lo < hi)) {
        throw ArgumentError("no room to optimize mu above the decoy intensity");
    }
    auto rate = [&](double mu) { return secure_key_rate_at_mu(params, channel, mu); };
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = rate(x1);
    double f2 = rate(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-6; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = rate(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = rate(x1);
        }
    }
    return f1 > f2 ? x1 : x2;
}

}  // namespace

void DecoyParams::validate() const {
    if (!(nu >= 0.0)) {
        throw ArgumentError("decoy intensity must be >= 0");
    }
    if (mu > 0.0 && !(nu < mu)) {
        throw ArgumentError("decoy intensity must be below the signal intensity");
    }
    if (!(y0 >= 0.0 && y0 < 1.0)) {
        throw ArgumentError("background yield must lie in [0,1)");
    }
    if (!(e_detector >= 0.0 && e_detector <= 0.5)) {
        throw ArgumentError("detector error must lie in [0, 0.5]");
    }
    if (!(f_ec >= 1.0)) {
        throw ArgumentError("error-correction inefficiency must be >= 1");
    }
    if (!(sift_q > 0.0 && sift_q <= 1.0)) {
        throw ArgumentError("sifting factor must lie in (0,1]");
    }
}

ChannelSpec ChannelSpec::fixed(double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw ArgumentError("static channel transmittance must lie in (0,1]");
    }
    ChannelSpec c;
    c.fluctuating_ = false;
    c.eta_ = eta;
    return c;
}

ChannelSpec ChannelSpec::fluctuating(PdtcModel model) {
    ChannelSpec c;
    c.fluctuating_ = true;
    c.model_ = std::move(model);
    return c;
}

double ChannelSpec::eta() const {
    if (fluctuating_) {
        throw UnsupportedQueryError("fluctuating channel has no single transmittance");
    }
    return eta_;
}

const PdtcModel& ChannelSpec::model() const {
    if (!fluctuating_) {
        throw UnsupportedQueryError("static channel has no PDTC");
    }
    return model_;
}

GainError gain_and_error(const DecoyParams& params, const ChannelSpec& channel, double pulse_mu) {
    params.validate();
    if (!(pulse_mu >= 0.0)) {
        throw ArgumentError("pulse intensity must be >= 0");
    }
    double q;
    double eq;
    if (channel.is_fluctuating()) {
        std::tie(q, eq) = averaged_observables(channel.model(), pulse_mu, params);
    } else {
        q = gain_at(channel.eta(), pulse_mu, params);
        eq = error_gain_at(channel.eta(), pulse_mu, params);
    }
    GainError ge;
    ge.gain = q;
    ge.error = q > 0.0 ? std::clamp(eq / q, 0.0, 0.5) : params.e0;
    return ge;
}

OneDecoyBounds one_decoy_bounds(double mu, double nu, double q_mu, double e_mu, double q_nu,
                                double e_nu, double e0) {
    if (!(nu > 0.0 && nu < mu)) {
        throw ArgumentError("one-decoy bounds need 0 < nu < mu");
    }
    const double gmu = q_mu * std::exp(mu);  // sum_i Y_i mu^i / i!
    const double gnu = q_nu * std::exp(nu);
    const double emu = e_mu * q_mu * std::exp(mu);
    const double enu = e_nu * q_nu * std::exp(nu);

    OneDecoyBounds b;
    // Gains alone floor the background: the Y1 terms cancel in
    // mu*gnu - nu*gmu and the multiphoton terms only pull it down.
    b.y0_lower = std::max(0.0, (mu * gnu - nu * gmu) / (mu - nu));
    // All background errors are at most the observed error mass.
    b.y0_upper = std::min(enu, emu) / e0;

    const double ratio = (nu * nu) / (mu * mu);
    b.y1_lower = std::max(
        0.0, mu / (mu * nu - nu * nu) * (gnu - ratio * gmu - (1.0 - ratio) * b.y0_upper));
    b.q1_lower = b.y1_lower * mu * std::exp(-mu);

    if (b.y1_lower > 0.0) {
        b.e1_upper = std::clamp((enu - e0 * b.y0_lower) / (b.y1_lower * nu), 0.0, 0.5);
    } else {
        b.e1_upper = 0.5;
    }
    return b;
}

double secure_key_rate_at_mu(const DecoyParams& params, const ChannelSpec& channel, double mu) {
    params.validate();
    if (!(mu > params.nu)) {
        throw ArgumentError("signal intensity must exceed the decoy intensity");
    }
    const GainError sig = gain_and_error(params, channel, mu);
    const GainError dec = gain_and_error(params, channel, params.nu);
    const OneDecoyBounds b =
        one_decoy_bounds(mu, params.nu, sig.gain, sig.error, dec.gain, dec.error, params.e0);
    const double rate =
        params.sift_q * (b.q1_lower * (1.0 - binary_entropy(b.e1_upper)) -
                         sig.gain * params.f_ec * binary_entropy(sig.error));
    return std::max(0.0, rate);
}

double secure_key_rate(const DecoyParams& params, const ChannelSpec& channel) {
    params.validate();
    if (params.mu > 0.0) {
        return secure_key_rate_at_mu(params, channel, params.mu);
    }
    return secure_key_rate_at_mu(params, channel, golden_section_mu(params, channel));
}

double db_to_transmittance(double loss_db) {
    return std::pow(10.0, -loss_db / 10.0);
}

std::vector<SigmaScanRow> scan_sigma(const DecoyParams& params,
                                     std::span<const double> mean_losses_db,
                                     std::span<const double> sigmas) {
    params.validate();
    std::vector<SigmaScanRow> rows;
    rows.reserve(mean_losses_db.size() * sigmas.size());
    for (double loss : mean_losses_db) {
        if (!(loss > 0.0)) {
            throw ArgumentError("mean loss must be > 0 dB");
        }
        const double eta = db_to_transmittance(loss);
        const ChannelSpec static_channel = ChannelSpec::fixed(eta);
        const double mu = params.mu > 0.0 ? params.mu : golden_section_mu(params, static_channel);
        const double rate_static = secure_key_rate_at_mu(params, static_channel, mu);
        for (double sigma : sigmas) {
            const ChannelSpec fluct =
                ChannelSpec::fluctuating(PdtcModel::lognormal(sigma, eta));
            SigmaScanRow row;
            row.mean_loss_db = loss;
            row.sigma = sigma;
            row.rate_static = rate_static;
            row.rate_fluctuating = secure_key_rate_at_mu(params, fluct, mu);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace fsqkd
