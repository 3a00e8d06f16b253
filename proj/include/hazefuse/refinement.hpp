#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hazefuse/fft.hpp"
#include "hazefuse/gradient.hpp"
#include "hazefuse/image.hpp"

namespace hazefuse {

/// Weights, penalties and loop controls of the variational refinement.
struct RefineParams {
    double lambda1 = 1e-2;  // fidelity of J_bar * t to I_bar
    double lambda2 = 5e-1;  // fidelity of t to the coarse map
    double lambda3 = 5.0;   // weighted edge term |W o (grad t - grad I)|
    double lambda4 = 1.0;   // TV on J_bar
    double lambda5 = 1.0;   // TV on t
    double beta1 = 1.0;
    double beta2 = 1.0;
    double beta3 = 1.0;
    double gamma = 2e2;
    double upsilon = std::numbers::phi;  // (1 + sqrt 5) / 2
    double t_eps = 1e-1;
    double j_eps = 1e-2;
    std::size_t max_iters = 30;
    double rel_tol = 1e-3;

    void validate() const {
        for (double v : {lambda1, lambda2, lambda3, lambda4, lambda5}) {
            if (!(v > 0.0)) throw std::invalid_argument("regularization weights must be positive");
        }
        for (double v : {beta1, beta2, beta3}) {
            if (!(v > 0.0)) throw std::invalid_argument("penalty parameters must be positive");
        }
        if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
        // The golden ratio is computed in floating point; allow its rounding.
        if (!(upsilon >= 0.0 && upsilon <= std::numbers::phi + 1e-12)) {
            throw std::invalid_argument("upsilon must lie in [0, (1+sqrt5)/2]");
        }
        if (!(t_eps > 0.0 && t_eps < 1.0)) throw std::invalid_argument("t_eps must lie in (0, 1)");
        if (!(j_eps > 0.0)) throw std::invalid_argument("j_eps must be positive");
        if (max_iters == 0) throw std::invalid_argument("max_iters must be at least 1");
        if (!(rel_tol >= 0.0)) throw std::invalid_argument("rel_tol must be non-negative");
    }
};

/// Thrown when a refinement step produces NaN or Inf.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string stage, std::size_t iteration)
        : std::runtime_error("non-finite value in " + stage + " at iteration " +
                             std::to_string(iteration)),
          stage_(std::move(stage)),
          iteration_(iteration) {}

    const std::string& stage() const noexcept { return stage_; }
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::string stage_;
    std::size_t iteration_;
};

/// Fixed data of one single-channel refinement problem.
struct ChannelProblem {
    ScalarField hazy;           // I_c
    ScalarField hazy_residual;  // I_bar = A_c - I_c
    ScalarField t_coarse;       // t_bar
    GradientPair hazy_gradient;
    GradientPair weight;        // W, per gradient component
    double airlight = 1.0;
};

/// Splitting variables, multipliers and primal iterates.
struct AdmmState {
    ScalarField t;
    ScalarField j_bar;
    GradientPair x, y, z;
    GradientPair xi, eta, zeta;
    std::size_t iteration = 0;
};

struct Multipliers {
    GradientPair xi, eta, zeta;
};

struct TraceEntry {
    std::size_t iter = 0;
    double objective = 0.0;
    double res_x = 0.0;
    double res_y = 0.0;
    double res_z = 0.0;
    double dt_rel = 0.0;
};

struct RefineResult {
    ScalarField t;  // clamped to [t_eps, 1]
    std::vector<TraceEntry> trace;
    std::size_t iterations = 0;
    bool converged = false;
};

// ---------------------------------------------------------------------------

/// W_d = exp(-gamma (d_d I)^2) for d in {x, y}.
inline GradientPair edge_weight(const ScalarField& hazy_c, double gamma) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("edge_weight: gamma must be non-negative");
    return map(gradient(hazy_c), [gamma](double d) { return std::exp(-gamma * d * d); });
}

/// (a_c - I_c) / max(t_bar, t_eps).
inline ScalarField init_jbar(const ScalarField& hazy_c, double a_c, const ScalarField& t_bar,
                             double t_eps) {
    return zip(hazy_c, t_bar,
               [a_c, t_eps](double i, double t) { return (a_c - i) / std::max(t, t_eps); });
}

/// Soft threshold: the minimizer of b|x| + (x - a)^2 / 2.
inline double shrink(double a, double b) noexcept {
    const double mag = std::max(std::abs(a) - b, 0.0);
    return a > 0.0 ? mag : (a < 0.0 ? -mag : 0.0);
}

inline GradientPair shrink(const GradientPair& a, double threshold) {
    return map(a, [threshold](double v) { return shrink(v, threshold); });
}

inline GradientPair shrink(const GradientPair& a, const GradientPair& threshold) {
    return zip(a, threshold, [](double v, double b) { return shrink(v, b); });
}

inline ChannelProblem make_channel_problem(const ScalarField& t_bar, const ScalarField& hazy_c,
                                           double a_c, const RefineParams& params) {
    if (!t_bar.same_shape(hazy_c)) throw std::invalid_argument("refine: map and channel differ in shape");
    ChannelProblem p;
    p.hazy = hazy_c;
    p.hazy_residual = map(hazy_c, [a_c](double i) { return a_c - i; });
    p.t_coarse = t_bar;
    p.hazy_gradient = gradient(hazy_c);
    p.weight = edge_weight(hazy_c, params.gamma);
    p.airlight = a_c;
    return p;
}

/// t = t_bar, J_bar from init_jbar, all splitting variables and multipliers zero.
inline AdmmState initial_state(const ChannelProblem& p, const RefineParams& params) {
    const std::size_t h = p.hazy.height(), w = p.hazy.width();
    AdmmState s;
    s.t = p.t_coarse;
    s.j_bar = init_jbar(p.hazy, p.airlight, p.t_coarse, params.t_eps);
    s.x = s.y = s.z = GradientPair(h, w);
    s.xi = s.eta = s.zeta = GradientPair(h, w);
    return s;
}

/// X <- shrink(grad t - grad I + xi / beta1, lambda3 W / beta1).
inline GradientPair update_x(const AdmmState& s, const ChannelProblem& p, const RefineParams& params) {
    const GradientPair gt = gradient(s.t);
    GradientPair arg(s.t.height(), s.t.width());
    GradientPair threshold(s.t.height(), s.t.width());
    auto fill = [&](const ScalarField& g, const ScalarField& gi, const ScalarField& xi,
                    const ScalarField& w, ScalarField& a, ScalarField& b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = g[i] - gi[i] + xi[i] / params.beta1;
            b[i] = params.lambda3 * w[i] / params.beta1;
        }
    };
    fill(gt.dx, p.hazy_gradient.dx, s.xi.dx, p.weight.dx, arg.dx, threshold.dx);
    fill(gt.dy, p.hazy_gradient.dy, s.xi.dy, p.weight.dy, arg.dy, threshold.dy);
    return shrink(arg, threshold);
}

/// Y <- shrink(grad J_bar + eta / beta2, lambda4 / beta2).
inline GradientPair update_y(const AdmmState& s, const RefineParams& params) {
    const double inv = 1.0 / params.beta2;
    GradientPair arg = zip(gradient(s.j_bar), s.eta, [inv](double g, double e) { return g + e * inv; });
    return shrink(arg, params.lambda4 * inv);
}

/// Z <- shrink(grad t + zeta / beta3, lambda5 / beta3).
inline GradientPair update_z(const AdmmState& s, const RefineParams& params) {
    const double inv = 1.0 / params.beta3;
    GradientPair arg = zip(gradient(s.t), s.zeta, [inv](double g, double z) { return g + z * inv; });
    return shrink(arg, params.lambda5 * inv);
}

/// Closed-form J_bar step: solves
///   (lambda1 Id + beta2 grad^T grad) J_bar = lambda1 I_bar / t + beta2 grad^T (Y - eta / beta2)
/// with t floored at t_eps in the division.
inline ScalarField update_jbar(const AdmmState& s, const ChannelProblem& p, const RefineParams& params,
                               ScreenedPoissonSolver& solver) {
    const ScalarField ratio = zip(p.hazy_residual, s.t, [eps = params.t_eps](double ib, double t) {
        return ib / std::max(t, eps);
    });
    const GradientPair target =
        zip(s.y, s.eta, [b = params.beta2](double y, double e) { return y - e / b; });
    // grad^T = -divergence.
    const ScalarField div = divergence(target);
    ScalarField rhs(ratio.height(), ratio.width());
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        rhs[i] = params.lambda1 * ratio[i] - params.beta2 * div[i];
    }
    return solver.solve(rhs, params.lambda1, params.beta2);
}

inline ScalarField update_jbar(const AdmmState& s, const ChannelProblem& p, const RefineParams& params) {
    ScreenedPoissonSolver solver(s.t.height(), s.t.width());
    return update_jbar(s, p, params, solver);
}

/// Magnitude floor that keeps the sign (zero counts as positive).
inline double signed_floor(double v, double eps) noexcept {
    return std::abs(v) >= eps ? v : (v < 0.0 ? -eps : eps);
}

/// Blended gradient target psi = (beta1 X_hat + beta3 Z_hat) / (beta1 + beta3),
/// X_hat = X + grad I - xi / beta1, Z_hat = Z - zeta / beta3.
inline GradientPair blended_target(const AdmmState& s, const ChannelProblem& p,
                                   const RefineParams& params) {
    const double b1 = params.beta1, b3 = params.beta3, sum = b1 + b3;
    GradientPair psi(s.t.height(), s.t.width());
    auto fill = [&](const ScalarField& x, const ScalarField& gi, const ScalarField& xi,
                    const ScalarField& z, const ScalarField& zeta, ScalarField& out) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double x_hat = x[i] + gi[i] - xi[i] / b1;
            const double z_hat = z[i] - zeta[i] / b3;
            out[i] = (b1 * x_hat + b3 * z_hat) / sum;
        }
    };
    fill(s.x.dx, p.hazy_gradient.dx, s.xi.dx, s.z.dx, s.zeta.dx, psi.dx);
    fill(s.x.dy, p.hazy_gradient.dy, s.xi.dy, s.z.dy, s.zeta.dy, psi.dy);
    return psi;
}

/// Closed-form t step: solves
///   ((lambda1 + lambda2) Id + (beta1 + beta3) grad^T grad) t
///       = lambda1 I_bar / J_bar + lambda2 t_bar + (beta1 + beta3) grad^T psi
/// with |J_bar| floored at j_eps in the division. The returned t is not clamped.
inline ScalarField update_t(const AdmmState& s, const ChannelProblem& p, const RefineParams& params,
                            ScreenedPoissonSolver& solver) {
    const double penalty = params.beta1 + params.beta3;
    const ScalarField div = divergence(blended_target(s, p, params));
    ScalarField rhs(s.t.height(), s.t.width());
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const double ratio = p.hazy_residual[i] / signed_floor(s.j_bar[i], params.j_eps);
        rhs[i] = params.lambda1 * ratio + params.lambda2 * p.t_coarse[i] - penalty * div[i];
    }
    return solver.solve(rhs, params.lambda1 + params.lambda2, penalty);
}

inline ScalarField update_t(const AdmmState& s, const ChannelProblem& p, const RefineParams& params) {
    ScreenedPoissonSolver solver(s.t.height(), s.t.width());
    return update_t(s, p, params, solver);
}

/// Scaled dual ascent on the three splitting constraints.
inline Multipliers update_multipliers(const AdmmState& s, const ChannelProblem& p,
                                      const RefineParams& params) {
    const double v = params.upsilon;
    const GradientPair gt = gradient(s.t);
    const GradientPair gj = gradient(s.j_bar);
    Multipliers m{s.xi, s.eta, s.zeta};
    auto step = [](ScalarField& mult, double scale, const ScalarField& lhs, const ScalarField& a,
                   const ScalarField* b) {
        for (std::size_t i = 0; i < mult.size(); ++i) {
            const double target = b ? a[i] - (*b)[i] : a[i];
            mult[i] -= scale * (lhs[i] - target);
        }
    };
    step(m.xi.dx, v * params.beta1, s.x.dx, gt.dx, &p.hazy_gradient.dx);
    step(m.xi.dy, v * params.beta1, s.x.dy, gt.dy, &p.hazy_gradient.dy);
    step(m.eta.dx, v * params.beta2, s.y.dx, gj.dx, nullptr);
    step(m.eta.dy, v * params.beta2, s.y.dy, gj.dy, nullptr);
    step(m.zeta.dx, v * params.beta3, s.z.dx, gt.dx, nullptr);
    step(m.zeta.dy, v * params.beta3, s.z.dy, gt.dy, nullptr);
    return m;
}

/// Constraint residuals ||X - (grad t - grad I)||, ||Y - grad J_bar||, ||Z - grad t||.
struct SplittingResiduals {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline SplittingResiduals splitting_residuals(const AdmmState& s, const ChannelProblem& p) {
    const GradientPair gt = gradient(s.t);
    const GradientPair gj = gradient(s.j_bar);
    SplittingResiduals r;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    auto acc = [](double& sum, double v) { sum += v * v; };
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        acc(sx, s.x.dx[i] - (gt.dx[i] - p.hazy_gradient.dx[i]));
        acc(sx, s.x.dy[i] - (gt.dy[i] - p.hazy_gradient.dy[i]));
        acc(sy, s.y.dx[i] - gj.dx[i]);
        acc(sy, s.y.dy[i] - gj.dy[i]);
        acc(sz, s.z.dx[i] - gt.dx[i]);
        acc(sz, s.z.dy[i] - gt.dy[i]);
    }
    r.x = std::sqrt(sx);
    r.y = std::sqrt(sy);
    r.z = std::sqrt(sz);
    return r;
}

/// Value of the hybrid variational energy at (t, J_bar):
///   l1/2 |I_bar - J_bar t|^2 + l2/2 |t - t_bar|^2 + l3 |W o (grad t - grad I)|_1
///   + l4 |grad J_bar|_1 + l5 |grad t|_1
inline double objective(const AdmmState& s, const ChannelProblem& p, const RefineParams& params) {
    double fit = 0.0, prior = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double r = p.hazy_residual[i] - s.j_bar[i] * s.t[i];
        const double d = s.t[i] - p.t_coarse[i];
        fit += r * r;
        prior += d * d;
    }
    const GradientPair gt = gradient(s.t);
    double edge = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        edge += p.weight.dx[i] * std::abs(gt.dx[i] - p.hazy_gradient.dx[i]);
        edge += p.weight.dy[i] * std::abs(gt.dy[i] - p.hazy_gradient.dy[i]);
    }
    return 0.5 * params.lambda1 * fit + 0.5 * params.lambda2 * prior + params.lambda3 * edge +
           params.lambda4 * norm1(gradient(s.j_bar)) + params.lambda5 * norm1(gt);
}

namespace detail {

template <typename F>
void require_finite(const F& value, const char* stage, std::size_t iteration) {
    if (!all_finite(value)) throw NumericalError(stage, iteration);
}

}  // namespace detail

/// One ADMM sweep in fixed order: X, Y, Z from the previous (t, J_bar);
/// then J_bar; then t using the new J_bar; then the multipliers.
inline void admm_iteration(AdmmState& s, const ChannelProblem& p, const RefineParams& params,
                           ScreenedPoissonSolver& solver) {
    const std::size_t k = s.iteration + 1;
    s.x = update_x(s, p, params);
    detail::require_finite(s.x, "X-update", k);
    s.y = update_y(s, params);
    detail::require_finite(s.y, "Y-update", k);
    s.z = update_z(s, params);
    detail::require_finite(s.z, "Z-update", k);
    s.j_bar = update_jbar(s, p, params, solver);
    detail::require_finite(s.j_bar, "J_bar-update", k);
    s.t = update_t(s, p, params, solver);
    detail::require_finite(s.t, "t-update", k);
    Multipliers m = update_multipliers(s, p, params);
    detail::require_finite(m.xi, "multiplier-update", k);
    detail::require_finite(m.eta, "multiplier-update", k);
    detail::require_finite(m.zeta, "multiplier-update", k);
    s.xi = std::move(m.xi);
    s.eta = std::move(m.eta);
    s.zeta = std::move(m.zeta);
    s.iteration = k;
}

/// Refines one channel's coarse transmission. Iterates until the relative
/// change of t drops below rel_tol or max_iters sweeps have run; the result
/// is clamped to [t_eps, 1].
inline RefineResult refine(const ScalarField& t_bar, const ScalarField& hazy_c, double a_c,
                           const RefineParams& params = {}) {
    params.validate();
    if (!all_finite(t_bar) || !all_finite(hazy_c)) throw NumericalError("refine input", 0);
    const ChannelProblem problem = make_channel_problem(t_bar, hazy_c, a_c, params);
    AdmmState state = initial_state(problem, params);
    ScreenedPoissonSolver solver(t_bar.height(), t_bar.width());

    RefineResult result;
    while (state.iteration < params.max_iters) {
        const ScalarField previous = state.t;
        admm_iteration(state, problem, params, solver);

        const double base = norm2(previous);
        const double change = norm2(zip(state.t, previous, std::minus<>{}));
        const double dt_rel = base > 0.0 ? change / base : (change > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        const SplittingResiduals res = splitting_residuals(state, problem);
        result.trace.push_back(
            {state.iteration, objective(state, problem, params), res.x, res.y, res.z, dt_rel});
        if (dt_rel < params.rel_tol) {
            result.converged = true;
            break;
        }
    }
    result.iterations = state.iteration;
    result.t = clamp(state.t, params.t_eps, 1.0);
    return result;
}

}  // namespace hazefuse
