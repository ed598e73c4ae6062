#include "fsqkd/channel_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fsqkd/errors.hpp"
#include "fsqkd/rng.hpp"

namespace fsqkd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_probability_sum(const std::vector<double>& probs) {
    const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ArgumentError("empirical bin probabilities must sum to 1, got " + std::to_string(sum));
    }
}

}  // namespace

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

PdtcModel PdtcModel::degenerate(double eta0) {
    if (!(eta0 >= 0.0 && eta0 <= 1.0)) {
        throw ArgumentError("degenerate transmittance must lie in [0,1]");
    }
    PdtcModel m;
    m.kind_ = PdtcKind::Degenerate;
    m.eta0_ = eta0;
    m.mean_eta_ = eta0;
    return m;
}

PdtcModel PdtcModel::lognormal(double sigma, double mean_eta, bool literal_location) {
    if (!(sigma > 0.0)) {
        throw ArgumentError("lognormal sigma must be > 0");
    }
    if (!(mean_eta > 0.0 && mean_eta <= 1.0)) {
        throw ArgumentError("lognormal mean transmittance must lie in (0,1]");
    }
    PdtcModel m;
    m.kind_ = PdtcKind::LogNormal;
    m.sigma_ = sigma;
    m.mean_eta_ = mean_eta;
    m.theta_loc_ = literal_location ? -std::log(mean_eta)
                                    : -std::log(mean_eta) + 0.5 * sigma * sigma;
    return m;
}

PdtcModel PdtcModel::empirical(std::vector<double> bin_edges, std::vector<double> bin_probabilities) {
    if (bin_edges.size() < 2 || bin_probabilities.size() + 1 != bin_edges.size()) {
        throw ArgumentError("empirical model needs n+1 edges for n bins");
    }
    for (std::size_t i = 0; i < bin_edges.size(); ++i) {
        if (!(bin_edges[i] >= 0.0 && bin_edges[i] <= 1.0)) {
            throw ArgumentError("empirical bin edges must lie in [0,1]");
        }
        if (i > 0 && !(bin_edges[i] > bin_edges[i - 1])) {
            throw ArgumentError("empirical bin edges must be strictly ascending");
        }
    }
    for (double p : bin_probabilities) {
        if (!(p >= 0.0)) {
            throw ArgumentError("empirical bin probabilities must be nonnegative");
        }
    }
    check_probability_sum(bin_probabilities);

    PdtcModel m;
    m.kind_ = PdtcKind::Empirical;
    m.bin_edges_ = std::move(bin_edges);
    m.bin_probs_ = std::move(bin_probabilities);
    m.bin_cumulative_.resize(m.bin_probs_.size());
    std::partial_sum(m.bin_probs_.begin(), m.bin_probs_.end(), m.bin_cumulative_.begin());
    m.bin_cumulative_.back() = 1.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < m.bin_probs_.size(); ++i) {
        mean += m.bin_probs_[i] * 0.5 * (m.bin_edges_[i] + m.bin_edges_[i + 1]);
    }
    m.mean_eta_ = mean;
    return m;
}

double PdtcModel::eta0() const {
    if (kind_ != PdtcKind::Degenerate) {
        throw UnsupportedQueryError("eta0 is only defined for the degenerate model");
    }
    return eta0_;
}

double PdtcModel::sigma() const {
    if (kind_ != PdtcKind::LogNormal) {
        throw UnsupportedQueryError("sigma is only defined for the lognormal model");
    }
    return sigma_;
}

double PdtcModel::mean_eta() const {
    return mean_eta_;
}

double PdtcModel::theta_location() const {
    if (kind_ != PdtcKind::LogNormal) {
        throw UnsupportedQueryError("theta location is only defined for the lognormal model");
    }
    return theta_loc_;
}

double PdtcModel::truncation_mass() const {
    if (kind_ != PdtcKind::LogNormal) {
        throw UnsupportedQueryError("truncation mass is only defined for the lognormal model");
    }
    // eta <= 1 is theta >= 0 for theta ~ N(theta_loc, sigma^2).
    return normal_cdf(theta_loc_ / sigma_);
}

double PdtcModel::mean() const {
    switch (kind_) {
        case PdtcKind::Degenerate:
            return eta0_;
        case PdtcKind::LogNormal: {
            const double untruncated = std::exp(-theta_loc_ + 0.5 * sigma_ * sigma_);
            const double kept = normal_cdf((theta_loc_ - sigma_ * sigma_) / sigma_);
            return untruncated * kept / truncation_mass();
        }
        case PdtcKind::Empirical:
            return mean_eta_;
    }
    throw Error("unreachable");
}

double pdtc_density(const PdtcModel& model, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw DomainError("transmittance must lie in (0,1] for a density query");
    }
    switch (model.kind()) {
        case PdtcKind::Degenerate:
            throw UnsupportedQueryError("degenerate model has no density; use sample_trace");
        case PdtcKind::LogNormal: {
            const double sigma = model.sigma();
            const double z = (std::log(eta) + model.theta_location()) / sigma;
            const double raw = std::exp(-0.5 * z * z) / (std::sqrt(kTwoPi) * sigma * eta);
            return raw / model.truncation_mass();
        }
        case PdtcKind::Empirical: {
            const auto& edges = model.bin_edges();
            if (eta < edges.front() || eta > edges.back()) {
                return 0.0;
            }
            auto it = std::upper_bound(edges.begin(), edges.end(), eta);
            std::size_t bin = (it == edges.end()) ? edges.size() - 2
                                                  : static_cast<std::size_t>(it - edges.begin()) - 1;
            bin = std::min(bin, model.bin_probabilities().size() - 1);
            const double width = edges[bin + 1] - edges[bin];
            return model.bin_probabilities()[bin] / width;
        }
    }
    throw Error("unreachable");
}

TransmissionTrace sample_trace(const PdtcModel& model, std::size_t n_blocks,
                               double block_duration_s, std::uint64_t seed) {
    if (n_blocks == 0) {
        throw ArgumentError("sample_trace requires at least one block");
    }
    if (!(block_duration_s > 0.0)) {
        throw ArgumentError("block duration must be > 0");
    }

    TransmissionTrace trace;
    trace.block_duration_s = block_duration_s;
    trace.seed = seed;
    trace.etas.resize(n_blocks);

    switch (model.kind()) {
        case PdtcKind::Degenerate: {
            std::fill(trace.etas.begin(), trace.etas.end(), model.mean_eta());
            break;
        }
        case PdtcKind::LogNormal: {
            auto rng = make_engine(seed);
            std::normal_distribution<double> theta(model.theta_location(), model.sigma());
            for (double& eta : trace.etas) {
                double t = theta(rng);
                while (t < 0.0) {  // eta > 1: redraw
                    t = theta(rng);
                }
                eta = std::exp(-t);
            }
            break;
        }
        case PdtcKind::Empirical: {
            auto rng = make_engine(seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const auto& cum = model.bin_cumulative();
            const auto& edges = model.bin_edges();
            const auto& probs = model.bin_probabilities();
            for (double& eta : trace.etas) {
                const double u = unit(rng);
                auto it = std::upper_bound(cum.begin(), cum.end(), u);
                const std::size_t bin = std::min(static_cast<std::size_t>(it - cum.begin()),
                                                 probs.size() - 1);
                const double lo = bin == 0 ? 0.0 : cum[bin - 1];
                const double frac = probs[bin] > 0.0 ? (u - lo) / probs[bin] : 0.5;
                eta = edges[bin] + frac * (edges[bin + 1] - edges[bin]);
            }
            break;
        }
    }
    return trace;
}

LogNormalFit fit_lognormal(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw ArgumentError("fit_lognormal requires at least two samples");
    }
    double sum_eta = 0.0;
    double sum_theta = 0.0;
    for (double s : samples) {
        if (!(s > 0.0)) {
            throw DomainError("fit_lognormal samples must be strictly positive");
        }
        sum_eta += s;
        sum_theta += -std::log(s);
    }
    const double n = static_cast<double>(samples.size());
    const double mean_theta = sum_theta / n;
    double ss = 0.0;
    for (double s : samples) {
        const double d = -std::log(s) - mean_theta;
        ss += d * d;
    }
    return LogNormalFit{std::sqrt(ss / n), sum_eta / n};
}

}  // namespace fsqkd
