#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "hazefuse/image.hpp"

namespace hazefuse {

namespace detail {

// The FFTW planner is not reentrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

struct FftwPlanDestroy {
    void operator()(fftw_plan p) const noexcept {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};

using PlanHandle = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDestroy>;

}  // namespace detail

/// 2-D real-to-complex DFT pair on an H x W periodic grid.
///
/// The spectrum uses FFTW's half layout: H rows of W/2+1 columns, entry
/// (k, l) at index k * (W/2+1) + l. forward() is unnormalized; inverse()
/// divides by H*W so that inverse(forward(f)) == f.
///
/// A plan owns scratch buffers, so one instance must not be used from two
/// threads at once. Separate instances are independent.
class FftPlan {
public:
    using Spectrum = std::vector<std::complex<double>>;

    FftPlan(std::size_t height, std::size_t width)
        : height_(height), width_(width), spectrum_width_(width / 2 + 1) {
        if (height == 0 || width == 0) throw std::invalid_argument("FFT grid must be non-empty");
        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * height * width)));
        freq_.reset(static_cast<fftw_complex*>(
            fftw_malloc(sizeof(fftw_complex) * height * spectrum_width_)));
        if (!real_ || !freq_) throw std::bad_alloc();

        std::lock_guard lock(detail::fftw_planner_mutex());
        const int h = static_cast<int>(height), w = static_cast<int>(width);
        forward_.reset(fftw_plan_dft_r2c_2d(h, w, real_.get(), freq_.get(), FFTW_ESTIMATE));
        inverse_.reset(fftw_plan_dft_c2r_2d(h, w, freq_.get(), real_.get(), FFTW_ESTIMATE));
        if (!forward_ || !inverse_) throw std::runtime_error("FFTW plan creation failed");
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t spectrum_width() const noexcept { return spectrum_width_; }
    std::size_t spectrum_size() const noexcept { return height_ * spectrum_width_; }

    Spectrum forward(const ScalarField& f) {
        if (f.height() != height_ || f.width() != width_) {
            throw std::invalid_argument("field does not match FFT plan dimensions");
        }
        std::copy(f.begin(), f.end(), real_.get());
        fftw_execute(forward_.get());
        Spectrum out(spectrum_size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = {freq_.get()[i][0], freq_.get()[i][1]};
        return out;
    }

    // The c2r transform treats the input as Hermitian, so any imaginary
    // residue in the implied full spectrum is discarded.
    ScalarField inverse(std::span<const std::complex<double>> spectrum) {
        if (spectrum.size() != spectrum_size()) {
            throw std::invalid_argument("spectrum does not match FFT plan dimensions");
        }
        for (std::size_t i = 0; i < spectrum.size(); ++i) {
            freq_.get()[i][0] = spectrum[i].real();
            freq_.get()[i][1] = spectrum[i].imag();
        }
        fftw_execute(inverse_.get());
        const double scale = 1.0 / static_cast<double>(height_ * width_);
        ScalarField out(height_, width_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = real_.get()[i] * scale;
        return out;
    }

private:
    std::size_t height_;
    std::size_t width_;
    std::size_t spectrum_width_;
    std::unique_ptr<double, detail::FftwFree> real_;
    std::unique_ptr<fftw_complex, detail::FftwFree> freq_;
    detail::PlanHandle forward_;
    detail::PlanHandle inverse_;
};

/// Frequency response of the periodic forward-difference operators on an
/// H x W grid, full (not half) layout, row-major over (k, l):
///   dx(k,l) = exp(2 pi i l / W) - 1,   dy(k,l) = exp(2 pi i k / H) - 1.
struct GradientSpectrum {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::complex<double>> dx;
    std::vector<std::complex<double>> dy;

    std::complex<double> at_dx(std::size_t k, std::size_t l) const { return dx[k * width + l]; }
    std::complex<double> at_dy(std::size_t k, std::size_t l) const { return dy[k * width + l]; }

    /// conj(F(grad)) F(grad) = |F(dx)|^2 + |F(dy)|^2, the spectrum of grad^T grad.
    double magnitude2(std::size_t k, std::size_t l) const {
        return std::norm(at_dx(k, l)) + std::norm(at_dy(k, l));
    }
};

inline GradientSpectrum gradient_transfer_spectrum(std::size_t height, std::size_t width) {
    if (height == 0 || width == 0) throw std::invalid_argument("spectrum grid must be non-empty");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    GradientSpectrum s{height, width, {}, {}};
    s.dx.resize(height * width);
    s.dy.resize(height * width);
    for (std::size_t k = 0; k < height; ++k) {
        for (std::size_t l = 0; l < width; ++l) {
            // Exact zeros on the axes so the DC term of |F(grad)|^2 is exactly 0.
            const std::complex<double> ex =
                l == 0 ? std::complex<double>{}
                       : std::polar(1.0, two_pi * double(l) / double(width)) - 1.0;
            const std::complex<double> ey =
                k == 0 ? std::complex<double>{}
                       : std::polar(1.0, two_pi * double(k) / double(height)) - 1.0;
            s.dx[k * width + l] = ex;
            s.dy[k * width + l] = ey;
        }
    }
    return s;
}

/// |F(grad)|^2 on the half-spectrum layout of FftPlan, in closed form
/// (2 - 2cos(2 pi l / W)) + (2 - 2cos(2 pi k / H)).
inline std::vector<double> laplacian_symbol(std::size_t height, std::size_t width) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const std::size_t sw = width / 2 + 1;
    std::vector<double> out(height * sw);
    for (std::size_t k = 0; k < height; ++k) {
        const double ky = k == 0 ? 0.0 : 2.0 - 2.0 * std::cos(two_pi * double(k) / double(height));
        for (std::size_t l = 0; l < sw; ++l) {
            const double kx = l == 0 ? 0.0 : 2.0 - 2.0 * std::cos(two_pi * double(l) / double(width));
            out[k * sw + l] = kx + ky;
        }
    }
    return out;
}

/// Solves (identity_weight * Id + gradient_weight * grad^T grad) u = rhs
/// exactly under periodic boundaries by diagonalizing in the Fourier basis.
/// Both weights must make the operator positive definite (identity_weight > 0).
class ScreenedPoissonSolver {
public:
    ScreenedPoissonSolver(std::size_t height, std::size_t width)
        : plan_(height, width), symbol_(laplacian_symbol(height, width)) {}

    std::size_t height() const noexcept { return plan_.height(); }
    std::size_t width() const noexcept { return plan_.width(); }

    ScalarField solve(const ScalarField& rhs, double identity_weight, double gradient_weight) {
        if (!(identity_weight > 0.0) || gradient_weight < 0.0) {
            throw std::invalid_argument("screened Poisson weights must give a positive operator");
        }
        auto spec = plan_.forward(rhs);
        for (std::size_t i = 0; i < spec.size(); ++i) {
            spec[i] /= identity_weight + gradient_weight * symbol_[i];
        }
        return plan_.inverse(spec);
    }

private:
    FftPlan plan_;
    std::vector<double> symbol_;
};

}  // namespace hazefuse
