#pragma once

#include "hazefuse/image.hpp"

namespace hazefuse {

/// First-order forward differences with periodic wrap:
///   dx(i,j) = f(i, j+1 mod W) - f(i,j),  dy(i,j) = f(i+1 mod H, j) - f(i,j).
template <typename T>
BasicGradientPair<T> gradient(const BasicField<T>& f) {
    const std::size_t h = f.height(), w = f.width();
    BasicGradientPair<T> g(h, w);
    for (std::size_t i = 0; i < h; ++i) {
        const std::size_t down = (i + 1 == h) ? 0 : i + 1;
        for (std::size_t j = 0; j < w; ++j) {
            const std::size_t right = (j + 1 == w) ? 0 : j + 1;
            g.dx(i, j) = f(i, right) - f(i, j);
            g.dy(i, j) = f(down, j) - f(i, j);
        }
    }
    return g;
}

/// Negative adjoint of gradient(): <gradient(f), g> = -<f, divergence(g)>.
/// Backward differences with the same periodic wrap.
template <typename T>
BasicField<T> divergence(const BasicGradientPair<T>& g) {
    const std::size_t h = g.height(), w = g.width();
    BasicField<T> out(h, w);
    for (std::size_t i = 0; i < h; ++i) {
        const std::size_t up = (i == 0) ? h - 1 : i - 1;
        for (std::size_t j = 0; j < w; ++j) {
            const std::size_t left = (j == 0) ? w - 1 : j - 1;
            out(i, j) = (g.dx(i, j) - g.dx(i, left)) + (g.dy(i, j) - g.dy(up, j));
        }
    }
    return out;
}

/// Periodic 5-point Laplacian, equal to divergence(gradient(f)).
template <typename T>
BasicField<T> laplacian(const BasicField<T>& f) {
    return divergence(gradient(f));
}

}  // namespace hazefuse
