#pragma once

// Deterministic synthetic scenes used across the test suites.

#include <cmath>
#include <cstdint>
#include <random>

#include "hazefuse/hazefuse.hpp"

namespace hazefuse::testing {

inline double hash_noise(std::size_t i, std::size_t j, std::uint32_t seed) {
    std::uint32_t h = static_cast<std::uint32_t>(i) * 73856093u ^ static_cast<std::uint32_t>(j) * 19349663u ^
                      seed * 83492791u;
    h ^= h >> 13;
    h *= 0x5bd1e995u;
    h ^= h >> 15;
    return (h & 0xFFFFu) / 65535.0;
}

/// Outdoor-like scene: a sky band over a textured ground with colored
/// buildings. Coordinates are normalized so any size renders the same layout.
inline ColorImage outdoor_scene(std::size_t size) {
    ColorImage img(size, size);
    const double n = static_cast<double>(size);
    for (std::size_t i = 0; i < size; ++i) {
        const double y = i / n;
        for (std::size_t j = 0; j < size; ++j) {
            const double x = j / n;
            const double grain = hash_noise(i, j, 7) - 0.5;
            std::array<double, 3> rgb{};
            const double horizon = 0.32 + 0.04 * std::sin(6.0 * x);
            if (y < horizon) {
                const double s = y / horizon;
                rgb = {0.45 + 0.25 * s, 0.62 + 0.18 * s, 0.88 + 0.06 * s};
            } else {
                // grass with a stripe texture
                const double stripe = 0.5 + 0.5 * std::sin(40.0 * x + 25.0 * y);
                rgb = {0.12 + 0.08 * stripe, 0.35 + 0.15 * stripe, 0.08 + 0.04 * stripe};
                // buildings
                const bool tower = x > 0.08 && x < 0.3 && y > 0.22;
                const bool block = x > 0.55 && x < 0.9 && y > 0.4 && y < 0.8;
                const bool road = y > 0.85;
                if (tower) {
                    const bool window = std::fmod(x * 40.0, 2.0) < 0.8 && std::fmod(y * 30.0, 2.0) < 1.0;
                    rgb = window ? std::array<double, 3>{0.85, 0.8, 0.35} : std::array<double, 3>{0.55, 0.2, 0.15};
                } else if (block) {
                    const bool window = std::fmod(x * 25.0, 2.0) < 0.7 && std::fmod(y * 20.0, 2.0) < 0.9;
                    rgb = window ? std::array<double, 3>{0.1, 0.15, 0.3} : std::array<double, 3>{0.65, 0.6, 0.5};
                } else if (road) {
                    rgb = {0.22, 0.2, 0.2};
                }
            }
            for (std::size_t c = 0; c < 3; ++c) img(i, j, c) = std::clamp(rgb[c] + 0.06 * grain, 0.0, 1.0);
        }
    }
    return img;
}

/// Left half dark, right half bright; a single vertical step edge.
inline ColorImage step_edge_scene(std::size_t height, std::size_t width) {
    ColorImage img(height, width);
    for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            const bool bright = j >= width / 2;
            img(i, j, 0) = bright ? 0.8 : 0.15;
            img(i, j, 1) = bright ? 0.75 : 0.2;
            img(i, j, 2) = bright ? 0.7 : 0.1;
        }
    }
    return img;
}

inline const AtmosphericLight kFixtureAirlight{{0.8, 0.8, 0.8}};

/// Depth ramp used for the bundled hazy fixtures: far at the top row.
inline ScalarField fixture_depth(std::size_t size) { return ramp_depth(size, size, 0.3, 5.0); }

inline ColorImage hazy_outdoor_scene(std::size_t size) {
    const ChannelMaps t = depth_to_transmission(fixture_depth(size), FusionParams{}.beta);
    return synthesize(outdoor_scene(size), t, kFixtureAirlight);
}

inline ScalarField random_field(std::size_t h, std::size_t w, std::mt19937_64& rng, double lo = -1.0,
                                double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarField f(h, w);
    for (double& v : f) v = u(rng);
    return f;
}

inline GradientPair random_pair(std::size_t h, std::size_t w, std::mt19937_64& rng, double lo = -1.0,
                                double hi = 1.0) {
    return {random_field(h, w, rng, lo, hi), random_field(h, w, rng, lo, hi)};
}

inline ColorImage random_image(std::size_t h, std::size_t w, std::mt19937_64& rng, double lo = 0.0,
                               double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    ColorImage img(h, w);
    for (double& v : img.values()) v = u(rng);
    return img;
}

}  // namespace hazefuse::testing
