#pragma once

#include <deque>
#include <stdexcept>

#include "hazefuse/image.hpp"

namespace hazefuse {

namespace detail {

// Running minimum over [i - radius, i + radius] clipped to [0, n), using a
// monotone deque of candidate indices. `get(i)` reads element i, `put(i, v)`
// writes the result.
template <typename Get, typename Put>
void sliding_min_1d(std::size_t n, std::size_t radius, Get get, Put put) {
    std::deque<std::size_t> window;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t hi = std::min(n - 1, i + radius);
        for (; next <= hi; ++next) {
            const auto v = get(next);
            while (!window.empty() && get(window.back()) >= v) window.pop_back();
            window.push_back(next);
        }
        const std::size_t lo = i >= radius ? i - radius : 0;
        while (window.front() < lo) window.pop_front();
        put(i, get(window.front()));
    }
}

}  // namespace detail

/// Minimum over the window x window box centered at each pixel. The box is
/// truncated at the image border: only in-image pixels take part.
template <typename T>
BasicField<T> min_filter(const BasicField<T>& f, std::size_t window) {
    if (window == 0 || window % 2 == 0) {
        throw std::invalid_argument("min_filter window must be odd and positive");
    }
    const std::size_t radius = window / 2;
    if (radius == 0) return f;

    const std::size_t h = f.height(), w = f.width();
    BasicField<T> rows(h, w);
    for (std::size_t i = 0; i < h; ++i) {
        detail::sliding_min_1d(
            w, radius, [&](std::size_t j) { return f(i, j); },
            [&](std::size_t j, T v) { rows(i, j) = v; });
    }
    BasicField<T> out(h, w);
    for (std::size_t j = 0; j < w; ++j) {
        detail::sliding_min_1d(
            h, radius, [&](std::size_t i) { return rows(i, j); },
            [&](std::size_t i, T v) { out(i, j) = v; });
    }
    return out;
}

}  // namespace hazefuse
