#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hazefuse/coarse_transmission.hpp"
#include "hazefuse/image.hpp"

namespace hazefuse {

struct QualityReport {
    double psnr = 0.0;  // dB; +inf for identical images
    double ssim = 0.0;
};

/// Mean squared error over every pixel and channel.
inline double mse(const ColorImage& a, const ColorImage& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("metrics: image dimensions differ");
    const auto va = a.values(), vb = b.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double d = va[i] - vb[i];
        acc += d * d;
    }
    return acc / static_cast<double>(va.size());
}

/// 10 log10(1 / MSE) for signals in [0,1].
inline double psnr(const ColorImage& a, const ColorImage& b) {
    const double e = mse(a, b);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / e);
}

struct SsimParams {
    static constexpr std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

namespace detail {

inline std::array<double, SsimParams::window> gaussian_taps(double sigma) {
    std::array<double, SsimParams::window> taps{};
    const double centre = (SsimParams::window - 1) / 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double d = double(i) - centre;
        taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Separable Gaussian average over the fully-inside ("valid") window positions.
inline ScalarField valid_blur(const ScalarField& f, const std::array<double, SsimParams::window>& taps) {
    const std::size_t n = taps.size();
    const std::size_t oh = f.height() - n + 1, ow = f.width() - n + 1;
    ScalarField rows(f.height(), ow);
    for (std::size_t i = 0; i < f.height(); ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += taps[k] * f(i, j + k);
            rows(i, j) = acc;
        }
    }
    ScalarField out(oh, ow);
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += taps[k] * rows(i + k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

}  // namespace detail

/// Mean structural similarity of two single-channel signals in [0,1].
inline double ssim(const ScalarField& a, const ScalarField& b, const SsimParams& params = {}) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: dimensions differ");
    if (a.height() < SsimParams::window || a.width() < SsimParams::window) {
        throw std::invalid_argument("ssim: images must be at least 11x11");
    }
    const auto taps = detail::gaussian_taps(params.sigma);
    const double c1 = params.k1 * params.k1, c2 = params.k2 * params.k2;
    const ScalarField mu_a = detail::valid_blur(a, taps);
    const ScalarField mu_b = detail::valid_blur(b, taps);
    const ScalarField aa = detail::valid_blur(zip(a, a, std::multiplies<>{}), taps);
    const ScalarField bb = detail::valid_blur(zip(b, b, std::multiplies<>{}), taps);
    const ScalarField ab = detail::valid_blur(zip(a, b, std::multiplies<>{}), taps);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double va = aa[i] - ma * ma;
        const double vb = bb[i] - mb * mb;
        const double cov = ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

/// SSIM on Rec. 601 luminance.
inline double ssim(const ColorImage& a, const ColorImage& b, const SsimParams& params = {}) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: image dimensions differ");
    return ssim(luminance(a), luminance(b), params);
}

inline QualityReport evaluate(const ColorImage& restored, const ColorImage& reference) {
    return {psnr(restored, reference), ssim(restored, reference)};
}

}  // namespace hazefuse
