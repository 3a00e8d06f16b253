#pragma once

#include <algorithm>
#include <stdexcept>

#include "hazefuse/airlight.hpp"
#include "hazefuse/image.hpp"

namespace hazefuse {

/// Inverts the scattering model without clamping the result:
/// J_c = (I_c - A_c) / max(t_c, t_eps) + A_c.
inline ColorImage recover_unclamped(const ColorImage& hazy, const ChannelMaps& t,
                                    const AtmosphericLight& airlight, double t_eps) {
    if (!(t_eps > 0.0 && t_eps < 1.0)) throw std::invalid_argument("recover: t_eps must lie in (0, 1)");
    for (const auto& tc : t) {
        if (tc.height() != hazy.height() || tc.width() != hazy.width()) {
            throw std::invalid_argument("recover: transmission and image differ in shape");
        }
    }
    ColorImage out(hazy.height(), hazy.width());
    const auto in = hazy.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < hazy.pixel_count(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double a = airlight[c];
            dst[3 * i + c] = (in[3 * i + c] - a) / std::max(t[c][i], t_eps) + a;
        }
    }
    return out;
}

/// Haze-free radiance from the scattering model, clamped to [0,1].
inline ColorImage recover(const ColorImage& hazy, const ChannelMaps& t, const AtmosphericLight& airlight,
                          double t_eps) {
    return clamp(recover_unclamped(hazy, t, airlight, t_eps), 0.0, 1.0);
}

/// Channel-averaged transmission, repeated for all three channels.
inline ChannelMaps average_channels(const ChannelMaps& t) {
    ScalarField avg(t[0].height(), t[0].width());
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = (t[0][i] + t[1][i] + t[2][i]) / 3.0;
    return {avg, avg, avg};
}

}  // namespace hazefuse
