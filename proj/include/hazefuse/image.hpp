#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hazefuse {

/// Single-channel H x W real-valued map (transmission, luminance, weights, ...).
/// Row-major storage, index (row, col).
template <typename T>
class BasicField {
public:
    using value_type = T;

    BasicField() = default;
    BasicField(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), data_(height * width, fill) {
        if (height == 0 || width == 0) {
            throw std::invalid_argument("field dimensions must be positive");
        }
    }
    BasicField(std::size_t height, std::size_t width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (height == 0 || width == 0) {
            throw std::invalid_argument("field dimensions must be positive");
        }
        if (data_.size() != height * width) {
            throw std::invalid_argument("field data length does not match dimensions");
        }
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t row, std::size_t col) noexcept {
        assert(row < height_ && col < width_);
        return data_[row * width_ + col];
    }
    const T& operator()(std::size_t row, std::size_t col) const noexcept {
        assert(row < height_ && col < width_);
        return data_[row * width_ + col];
    }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool same_shape(const BasicField& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const BasicField&, const BasicField&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> data_;
};

using ScalarField = BasicField<double>;

/// H x W x 3 image, interleaved RGB, nominal range [0,1].
class ColorImage {
public:
    static constexpr std::size_t channels = 3;

    ColorImage() = default;
    ColorImage(std::size_t height, std::size_t width, double fill = 0.0)
        : height_(height), width_(width), data_(height * width * channels, fill) {
        if (height == 0 || width == 0) {
            throw std::invalid_argument("image dimensions must be positive");
        }
    }
    ColorImage(std::size_t height, std::size_t width, std::array<double, 3> rgb)
        : ColorImage(height, width) {
        for (std::size_t i = 0; i < height * width; ++i) {
            std::copy(rgb.begin(), rgb.end(), data_.begin() + i * channels);
        }
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t pixel_count() const noexcept { return height_ * width_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t row, std::size_t col, std::size_t c) noexcept {
        assert(row < height_ && col < width_ && c < channels);
        return data_[(row * width_ + col) * channels + c];
    }
    double operator()(std::size_t row, std::size_t col, std::size_t c) const noexcept {
        assert(row < height_ && col < width_ && c < channels);
        return data_[(row * width_ + col) * channels + c];
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool same_shape(const ColorImage& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    ScalarField channel(std::size_t c) const {
        ScalarField out(height_, width_);
        for (std::size_t i = 0; i < pixel_count(); ++i) out[i] = data_[i * channels + c];
        return out;
    }

    void set_channel(std::size_t c, const ScalarField& f) {
        if (f.height() != height_ || f.width() != width_) {
            throw std::invalid_argument("channel dimensions do not match image");
        }
        for (std::size_t i = 0; i < pixel_count(); ++i) data_[i * channels + c] = f[i];
    }

    static ColorImage from_channels(const std::array<ScalarField, 3>& ch) {
        if (!ch[0].same_shape(ch[1]) || !ch[0].same_shape(ch[2])) {
            throw std::invalid_argument("channel dimensions differ");
        }
        ColorImage out(ch[0].height(), ch[0].width());
        for (std::size_t c = 0; c < channels; ++c) out.set_channel(c, ch[c]);
        return out;
    }

    friend bool operator==(const ColorImage&, const ColorImage&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// One map per color channel (r, g, b).
using ChannelMaps = std::array<ScalarField, 3>;

/// Forward differences of a field: dx along columns, dy along rows.
template <typename T>
struct BasicGradientPair {
    BasicField<T> dx;
    BasicField<T> dy;

    BasicGradientPair() = default;
    BasicGradientPair(std::size_t height, std::size_t width, T fill = T{})
        : dx(height, width, fill), dy(height, width, fill) {}
    BasicGradientPair(BasicField<T> x, BasicField<T> y) : dx(std::move(x)), dy(std::move(y)) {
        if (!dx.same_shape(dy)) throw std::invalid_argument("gradient components differ in shape");
    }

    std::size_t height() const noexcept { return dx.height(); }
    std::size_t width() const noexcept { return dx.width(); }

    friend bool operator==(const BasicGradientPair&, const BasicGradientPair&) = default;
};

using GradientPair = BasicGradientPair<double>;

// ---------------------------------------------------------------------------
// Elementwise helpers

template <typename T, typename Fn>
BasicField<T> map(const BasicField<T>& f, Fn&& fn) {
    BasicField<T> out(f.height(), f.width());
    std::transform(f.begin(), f.end(), out.begin(), std::forward<Fn>(fn));
    return out;
}

template <typename T, typename Fn>
BasicField<T> zip(const BasicField<T>& a, const BasicField<T>& b, Fn&& fn) {
    if (!a.same_shape(b)) throw std::invalid_argument("field dimensions differ");
    BasicField<T> out(a.height(), a.width());
    std::transform(a.begin(), a.end(), b.begin(), out.begin(), std::forward<Fn>(fn));
    return out;
}

template <typename T, typename Fn>
BasicGradientPair<T> zip(const BasicGradientPair<T>& a, const BasicGradientPair<T>& b, Fn fn) {
    return {zip(a.dx, b.dx, fn), zip(a.dy, b.dy, fn)};
}

template <typename T, typename Fn>
BasicGradientPair<T> map(const BasicGradientPair<T>& g, Fn fn) {
    return {map(g.dx, fn), map(g.dy, fn)};
}

template <typename T>
BasicField<T> clamp(const BasicField<T>& f, T lo, T hi) {
    if (lo > hi) throw std::invalid_argument("clamp: lo must not exceed hi");
    return map(f, [lo, hi](T v) { return std::clamp(v, lo, hi); });
}

inline ColorImage clamp(const ColorImage& img, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("clamp: lo must not exceed hi");
    ColorImage out = img;
    for (double& v : out.values()) v = std::clamp(v, lo, hi);
    return out;
}

template <typename T>
T dot(const BasicField<T>& a, const BasicField<T>& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("field dimensions differ");
    T acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

template <typename T>
T dot(const BasicGradientPair<T>& a, const BasicGradientPair<T>& b) {
    return dot(a.dx, b.dx) + dot(a.dy, b.dy);
}

template <typename T>
T norm2(const BasicField<T>& f) {
    return std::sqrt(dot(f, f));
}

template <typename T>
T norm2(const BasicGradientPair<T>& g) {
    return std::sqrt(dot(g, g));
}

template <typename T>
T norm1(const BasicField<T>& f) {
    T acc{};
    for (T v : f) acc += std::abs(v);
    return acc;
}

template <typename T>
T norm1(const BasicGradientPair<T>& g) {
    return norm1(g.dx) + norm1(g.dy);
}

template <typename T>
bool all_finite(const BasicField<T>& f) {
    return std::all_of(f.begin(), f.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
bool all_finite(const BasicGradientPair<T>& g) {
    return all_finite(g.dx) && all_finite(g.dy);
}

inline bool all_finite(const ColorImage& img) {
    const auto v = img.values();
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

template <typename T>
std::pair<T, T> min_max(const BasicField<T>& f) {
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    return {*lo, *hi};
}

template <typename T>
T mean(const BasicField<T>& f) {
    T acc{};
    for (T v : f) acc += v;
    return acc / static_cast<T>(f.size());
}

}  // namespace hazefuse
