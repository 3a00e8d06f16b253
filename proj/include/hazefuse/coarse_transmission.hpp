#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hazefuse/airlight.hpp"
#include "hazefuse/image.hpp"
#include "hazefuse/window_min.hpp"

namespace hazefuse {

/// Parameters of the fused foreground/sky coarse transmission estimate.
struct FusionParams {
    double omega = 0.95;              // DCP haze-removal strength
    std::size_t window = 21;          // dark-channel box size (odd)
    double tau = 3.4;                 // depth-range scale for corrected luminance
    std::array<double, 3> beta{0.3324, 0.3433, 0.3502};  // scattering coefficient per channel
    double percentile = 0.95;         // luminance normalization rank

    void validate() const {
        if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("omega must lie in (0, 1]");
        if (window == 0 || window % 2 == 0) throw std::invalid_argument("window must be odd and >= 1");
        if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
        for (double b : beta) {
            if (!(b > 0.0)) throw std::invalid_argument("scattering coefficients must be positive");
        }
        if (!(percentile > 0.0 && percentile < 1.0)) {
            throw std::invalid_argument("percentile must lie in (0, 1)");
        }
    }
};

/// min over channels of I_c / A_c, then min over the window (border-truncated).
inline ScalarField dark_channel(const ColorImage& hazy, const AtmosphericLight& airlight,
                                std::size_t window) {
    for (double a : airlight.rgb) {
        if (!(a > 0.0)) throw std::invalid_argument("dark_channel: airlight must be positive");
    }
    ScalarField normalized(hazy.height(), hazy.width());
    const auto v = hazy.values();
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        normalized[i] = std::min({v[3 * i] / airlight[0], v[3 * i + 1] / airlight[1],
                                  v[3 * i + 2] / airlight[2]});
    }
    return min_filter(normalized, window);
}

/// 1 - omega * dark, clamped to [0,1].
inline ScalarField dcp_transmission(const ScalarField& dark, double omega) {
    return map(dark, [omega](double d) { return std::clamp(1.0 - omega * d, 0.0, 1.0); });
}

/// Rec. 601 luma.
inline ScalarField luminance(const ColorImage& img) {
    ScalarField out(img.height(), img.width());
    const auto v = img.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 0.299 * v[3 * i] + 0.587 * v[3 * i + 1] + 0.114 * v[3 * i + 2];
    }
    return out;
}

/// Nearest-rank percentile: the ceil(p * N)-th smallest value (1-based).
inline double nearest_rank_percentile(const ScalarField& f, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("percentile must lie in (0, 1]");
    std::vector<double> values(f.begin(), f.end());
    const double n = static_cast<double>(values.size());
    // The epsilon keeps p * N from rounding up past an exact integer rank.
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    const auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

/// (tau / L*) L with L* the nearest-rank percentile of L. An all-black
/// luminance (L* = 0) yields an all-zero field.
inline ScalarField corrected_luminance(const ScalarField& lum, double tau, double percentile) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    const double reference = nearest_rank_percentile(lum, percentile);
    if (reference <= 0.0) return ScalarField(lum.height(), lum.width(), 0.0);
    const double scale = tau / reference;
    return map(lum, [scale](double l) { return scale * l; });
}

/// exp(-beta * L_hat).
inline ScalarField luminance_transmission(const ScalarField& corrected, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    return map(corrected, [beta](double l) { return std::exp(-beta * l); });
}

/// Sigmoid foreground weight on the range-normalized DCP transmission:
/// the field minimum maps to exponent -10, the maximum to +10. A constant
/// field carries no foreground/sky information and gets 0.5 everywhere.
inline ScalarField fusion_weight(const ScalarField& t_dcp) {
    const auto [lo, hi] = min_max(t_dcp);
    if (!(hi > lo)) return ScalarField(t_dcp.height(), t_dcp.width(), 0.5);
    const double theta1 = 20.0 / (hi - lo);
    const double theta2 = -10.0 - theta1 * lo;
    return map(t_dcp, [=](double t) { return 1.0 / (1.0 + std::exp(-theta1 * t - theta2)); });
}

/// chi * t_d + (1 - chi) * t_l, clamped to [0,1].
inline ScalarField fuse(const ScalarField& t_dcp, const ScalarField& t_lum, const ScalarField& chi) {
    if (!t_dcp.same_shape(t_lum) || !t_dcp.same_shape(chi)) {
        throw std::invalid_argument("fuse: field dimensions differ");
    }
    ScalarField out(t_dcp.height(), t_dcp.width());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(chi[i] * t_dcp[i] + (1.0 - chi[i]) * t_lum[i], 0.0, 1.0);
    }
    return out;
}

/// Every intermediate of the coarse estimate. dark, t_dcp and chi are
/// shared by all channels; the luminance map differs per channel via beta.
struct CoarseMaps {
    ScalarField dark;
    ScalarField t_dcp;
    ScalarField corrected_luminance;
    ScalarField chi;
    ChannelMaps t_lum;
    ChannelMaps t_coarse;
};

inline CoarseMaps coarse_transmission_maps(const ColorImage& hazy, const AtmosphericLight& airlight,
                                           const FusionParams& params) {
    params.validate();
    CoarseMaps m;
    m.dark = dark_channel(hazy, airlight, params.window);
    m.t_dcp = dcp_transmission(m.dark, params.omega);
    m.corrected_luminance = corrected_luminance(luminance(hazy), params.tau, params.percentile);
    m.chi = fusion_weight(m.t_dcp);
    for (std::size_t c = 0; c < 3; ++c) {
        m.t_lum[c] = luminance_transmission(m.corrected_luminance, params.beta[c]);
        m.t_coarse[c] = fuse(m.t_dcp, m.t_lum[c], m.chi);
    }
    return m;
}

/// Per-channel coarse transmission t_bar_c = fuse(t_d, t_l(beta_c), chi).
inline ChannelMaps coarse_transmission(const ColorImage& hazy, const AtmosphericLight& airlight,
                                       const FusionParams& params = {}) {
    return coarse_transmission_maps(hazy, airlight, params).t_coarse;
}

}  // namespace hazefuse
