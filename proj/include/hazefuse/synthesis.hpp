#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hazefuse/airlight.hpp"
#include "hazefuse/image.hpp"

namespace hazefuse {

/// Forward scattering model I = J t + (1 - t) A, without clamping.
inline ColorImage synthesize_unclamped(const ColorImage& clean, const ChannelMaps& t,
                                       const AtmosphericLight& airlight) {
    for (const auto& tc : t) {
        if (tc.height() != clean.height() || tc.width() != clean.width()) {
            throw std::invalid_argument("synthesize: transmission and image differ in shape");
        }
    }
    ColorImage out(clean.height(), clean.width());
    const auto in = clean.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < clean.pixel_count(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double tc = t[c][i];
            dst[3 * i + c] = in[3 * i + c] * tc + (1.0 - tc) * airlight[c];
        }
    }
    return out;
}

/// Forward scattering model, clamped to [0,1].
inline ColorImage synthesize(const ColorImage& clean, const ChannelMaps& t, const AtmosphericLight& airlight) {
    return clamp(synthesize_unclamped(clean, t, airlight), 0.0, 1.0);
}

/// Beer-Lambert attenuation exp(-beta * depth).
inline ScalarField depth_to_transmission(const ScalarField& depth, double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("depth_to_transmission: beta must be non-negative");
    return map(depth, [beta](double d) {
        if (d < 0.0) throw std::invalid_argument("depth_to_transmission: depth must be non-negative");
        return std::exp(-beta * d);
    });
}

inline ChannelMaps depth_to_transmission(const ScalarField& depth, const std::array<double, 3>& beta) {
    return {depth_to_transmission(depth, beta[0]), depth_to_transmission(depth, beta[1]),
            depth_to_transmission(depth, beta[2])};
}

/// Depth that grows linearly from `near` at the bottom row to `far` at the top row.
inline ScalarField ramp_depth(std::size_t height, std::size_t width, double near, double far) {
    ScalarField d(height, width);
    for (std::size_t i = 0; i < height; ++i) {
        const double s = height == 1 ? 0.0 : double(height - 1 - i) / double(height - 1);
        const double v = near + (far - near) * s;
        for (std::size_t j = 0; j < width; ++j) d(i, j) = v;
    }
    return d;
}

}  // namespace hazefuse
