#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "hazefuse/image.hpp"
#include "hazefuse/window_min.hpp"

namespace hazefuse {

/// Global atmospheric light, one component per color channel.
struct AtmosphericLight {
    std::array<double, 3> rgb{1.0, 1.0, 1.0};

    double operator[](std::size_t c) const noexcept { return rgb[c]; }
    double& operator[](std::size_t c) noexcept { return rgb[c]; }

    friend bool operator==(const AtmosphericLight&, const AtmosphericLight&) = default;
    friend std::ostream& operator<<(std::ostream& os, const AtmosphericLight& a) {
        return os << a.rgb[0] << ',' << a.rgb[1] << ',' << a.rgb[2];
    }
};

inline constexpr double kAirlightFloor = 0.05;

struct AirlightParams {
    std::size_t patch = 15;
    double top_fraction = 0.001;
    double floor = kAirlightFloor;
};

/// Per-pixel minimum over the three color channels.
inline ScalarField channel_min(const ColorImage& img) {
    ScalarField out(img.height(), img.width());
    const auto v = img.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::min({v[3 * i], v[3 * i + 1], v[3 * i + 2]});
    }
    return out;
}

/// Indices of the `count` largest entries, ties broken by lower index.
inline std::vector<std::size_t> top_indices(const ScalarField& f, std::size_t count) {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    count = std::min(count, idx.size());
    auto brighter = [&](std::size_t a, std::size_t b) {
        return f[a] > f[b] || (f[a] == f[b] && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count - 1), idx.end(),
                     brighter);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Dark-channel airlight estimate: the haze-opaque pixels are the top
/// `top_fraction` of min-over-patch(min-over-channels); A is the per-channel
/// mean of the hazy image over them, clamped to [floor, 1].
inline AtmosphericLight estimate_airlight(const ColorImage& hazy, const AirlightParams& params = {}) {
    if (hazy.empty()) throw std::invalid_argument("estimate_airlight: empty image");
    if (!(params.top_fraction > 0.0 && params.top_fraction <= 1.0)) {
        throw std::invalid_argument("estimate_airlight: top_fraction must lie in (0, 1]");
    }
    const ScalarField dark = min_filter(channel_min(hazy), params.patch);
    const auto wanted = static_cast<std::size_t>(
        std::ceil(params.top_fraction * static_cast<double>(dark.size())));
    const auto picks = top_indices(dark, std::max<std::size_t>(1, wanted));

    AtmosphericLight a;
    const auto v = hazy.values();
    for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (std::size_t i : picks) sum += v[3 * i + c];
        a[c] = std::clamp(sum / static_cast<double>(picks.size()), params.floor, 1.0);
    }
    return a;
}

}  // namespace hazefuse
