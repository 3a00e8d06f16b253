#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance runner. Each one is written from the defining formula with
// plain loops or dense matrices.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dense.hpp"
#include "fixtures.hpp"

namespace hazefuse::testing {

inline ScalarField brute_dark_channel(const ColorImage& img, const AtmosphericLight& a, std::size_t window) {
    const long r = static_cast<long>(window / 2);
    const long h = static_cast<long>(img.height()), w = static_cast<long>(img.width());
    ScalarField out(img.height(), img.width());
    for (long i = 0; i < h; ++i)
        for (long j = 0; j < w; ++j) {
            double m = std::numeric_limits<double>::infinity();
            for (long di = -r; di <= r; ++di)
                for (long dj = -r; dj <= r; ++dj) {
                    const long y = i + di, x = j + dj;
                    if (y < 0 || y >= h || x < 0 || x >= w) continue;
                    for (std::size_t c = 0; c < 3; ++c) m = std::min(m, img(y, x, c) / a[c]);
                }
            out(i, j) = m;
        }
    return out;
}

// Grid-search minimizer of b|x| + (x - a)^2 / 2 over [-10, 10], step 1e-4.
inline double prox_grid_search(double a, double b) {
    double best_x = 0.0, best = std::numeric_limits<double>::infinity();
    for (long k = -100000; k <= 100000; ++k) {
        const double x = k * 1e-4;
        const double v = b * std::abs(x) + 0.5 * (x - a) * (x - a);
        if (v < best) {
            best = v;
            best_x = x;
        }
    }
    return best_x;
}

struct RandomInstance {
    ChannelProblem problem;
    AdmmState state;
};

inline RandomInstance random_instance(std::size_t h, std::size_t w, std::mt19937_64& rng, const RefineParams& params) {
    const ScalarField hazy = random_field(h, w, rng, 0.05, 0.95);
    const ScalarField t_bar = random_field(h, w, rng, 0.05, 1.0);
    RandomInstance r;
    r.problem = make_channel_problem(t_bar, hazy, 0.9, params);
    r.state.t = random_field(h, w, rng, 0.02, 1.0);  // some entries below t_eps
    r.state.j_bar = random_field(h, w, rng, -0.5, 1.5);
    r.state.x = random_pair(h, w, rng);
    r.state.y = random_pair(h, w, rng);
    r.state.z = random_pair(h, w, rng);
    r.state.xi = random_pair(h, w, rng);
    r.state.eta = random_pair(h, w, rng);
    r.state.zeta = random_pair(h, w, rng);
    return r;
}

inline std::vector<double> as_vector(const ScalarField& f) { return {f.begin(), f.end()}; }

// Dense solve of (l1 Id + b2 D^T D) J = l1 I_bar / max(t, eps) + b2 D^T (Y - eta / b2).
inline std::vector<double> dense_jbar(const RandomInstance& r, const RefineParams& p) {
    const std::size_t h = r.state.t.height(), w = r.state.t.width(), n = h * w;
    const DenseMatrix d = dense_gradient(h, w);
    const DenseMatrix dt = d.transpose();
    const DenseMatrix op = p.lambda1 * DenseMatrix::identity(n) + p.beta2 * (dt * d);
    std::vector<double> target(2 * n);
    const auto y = stack(r.state.y);
    const auto eta = stack(r.state.eta);
    for (std::size_t i = 0; i < 2 * n; ++i) target[i] = y[i] - eta[i] / p.beta2;
    const auto back = dt.apply(target);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = p.lambda1 * r.problem.hazy_residual[i] / std::max(r.state.t[i], p.t_eps) + p.beta2 * back[i];
    }
    return dense_solve(op, rhs);
}

// Dense solve of ((l1 + l2) Id + (b1 + b3) D^T D) t = l1 I_bar / J + l2 t_bar + (b1 + b3) D^T psi.
inline std::vector<double> dense_t(const RandomInstance& r, const RefineParams& p) {
    const std::size_t h = r.state.t.height(), w = r.state.t.width(), n = h * w;
    const DenseMatrix d = dense_gradient(h, w);
    const DenseMatrix dt = d.transpose();
    const double pen = p.beta1 + p.beta3;
    const DenseMatrix op = (p.lambda1 + p.lambda2) * DenseMatrix::identity(n) + pen * (dt * d);
    const auto x = stack(r.state.x);
    const auto z = stack(r.state.z);
    const auto xi = stack(r.state.xi);
    const auto zeta = stack(r.state.zeta);
    const auto gi = d.apply(as_vector(r.problem.hazy));
    std::vector<double> psi(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        const double xh = x[i] + gi[i] - xi[i] / p.beta1;
        const double zh = z[i] - zeta[i] / p.beta3;
        psi[i] = (p.beta1 * xh + p.beta3 * zh) / pen;
    }
    const auto back = dt.apply(psi);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        double j = r.state.j_bar[i];
        if (std::abs(j) < p.j_eps) j = j < 0.0 ? -p.j_eps : p.j_eps;
        rhs[i] = p.lambda1 * r.problem.hazy_residual[i] / j + p.lambda2 * r.problem.t_coarse[i] + pen * back[i];
    }
    return dense_solve(op, rhs);
}

}  // namespace hazefuse::testing
