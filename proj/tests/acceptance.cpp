// Acceptance runner: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli_util.hpp"
#include "dense.hpp"
#include "fixtures.hpp"
#include "hazefuse/hazefuse.hpp"
#include "oracles.hpp"

using namespace hazefuse;
namespace ht = hazefuse::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

Outcome prox_oracle() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(-8.0, 8.0), ub(0.0, 4.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double a = ua(rng), b = ub(rng);
        worst = std::max(worst, std::abs(shrink(a, b) - ht::prox_grid_search(a, b)));
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-3 && elapsed < 5.0, "max |error| " + fmt(worst) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome fft_solver_oracle() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> weight(0.1, 3.0);
    double worst = 0.0;
    auto check = [&](std::size_t n) {
        RefineParams p;
        p.lambda1 = weight(rng);
        p.lambda2 = weight(rng);
        p.beta1 = weight(rng);
        p.beta2 = weight(rng);
        p.beta3 = weight(rng);
        const ht::RandomInstance r = ht::random_instance(n, n, rng, p);
        worst = std::max(worst, ht::relative_error(ht::as_vector(update_jbar(r.state, r.problem, p)), ht::dense_jbar(r, p)));
        worst = std::max(worst, ht::relative_error(ht::as_vector(update_t(r.state, r.problem, p)), ht::dense_t(r, p)));
    };
    for (int k = 0; k < 20; ++k) check(4);
    for (int k = 0; k < 5; ++k) check(8);
    const double elapsed = seconds_since(start);
    return {worst <= 1e-8 && elapsed < 10.0, "max relative error " + fmt(worst) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome dark_channel_oracle() {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> dim(1, 32);
    std::uniform_real_distribution<double> ua(0.3, 1.0);
    std::size_t mismatches = 0, cases = 0;
    for (int k = 0; k < 50; ++k) {
        const ColorImage img = ht::random_image(dim(rng), dim(rng), rng);
        const AtmosphericLight a{{ua(rng), ua(rng), ua(rng)}};
        for (std::size_t window : {1, 3, 7, 21}) {
            ++cases;
            if (!(dark_channel(img, a, window) == ht::brute_dark_channel(img, a, window))) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(cases - mismatches) + "/" + std::to_string(cases) + " exact"};
}

Outcome fusion_weight_bounds() {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> lo(-1.0, 0.5), span(1e-3, 2.0);
    double worst_min = 0.0, worst_max = 1.0;
    bool open_interval = true;
    for (int k = 0; k < 100; ++k) {
        const double a = lo(rng);
        const ScalarField t = ht::random_field(16, 16, rng, a, a + span(rng));
        const ScalarField chi = fusion_weight(t);
        const auto [tmin, tmax] = min_max(t);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!(chi[i] > 0.0 && chi[i] < 1.0)) open_interval = false;
            if (t[i] == tmin) worst_min = std::max(worst_min, chi[i]);
            if (t[i] == tmax) worst_max = std::min(worst_max, chi[i]);
        }
    }
    return {worst_min <= 1e-4 && worst_max >= 0.9999 && open_interval,
            "chi(min) <= " + fmt(worst_min) + ", chi(max) >= " + fmt(worst_max, 8) +
                (open_interval ? ", inside (0,1)" : ", outside (0,1)")};
}

Outcome algebraic_round_trip() {
    std::mt19937_64 rng(53);
    const RefineParams defaults;
    std::uniform_real_distribution<double> ua(0.5, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const ColorImage clean = ht::random_image(32, 24, rng);
        const ChannelMaps t{ht::random_field(32, 24, rng, defaults.t_eps, 1.0),
                            ht::random_field(32, 24, rng, defaults.t_eps, 1.0),
                            ht::random_field(32, 24, rng, defaults.t_eps, 1.0)};
        const AtmosphericLight a{{ua(rng), ua(rng), ua(rng)}};
        const ColorImage back = recover(synthesize(clean, t, a), t, a, defaults.t_eps);
        for (std::size_t i = 0; i < clean.values().size(); ++i) {
            worst = std::max(worst, std::abs(back.values()[i] - clean.values()[i]));
        }
    }
    return {worst <= 1e-12, "max |error| " + fmt(worst)};
}

Outcome end_to_end_improvement() {
    ht::ScratchDir dir("accept_e2e");
    write_png(dir / "clean.png", ht::outdoor_scene(256));
    const auto synth = ht::run_cli("synthesize " + ht::quote(dir / "clean.png") + " ramp:0.3:5.0 " +
                                   ht::quote(dir / "hazy.png") + " --airlight 0.8,0.8,0.8");
    if (synth.exit_code != 0) return {false, "synthesize failed: " + synth.output};
    const auto start = std::chrono::steady_clock::now();
    const auto run = ht::run_cli("dehaze " + ht::quote(dir / "hazy.png") + " " + ht::quote(dir / "dehazed.png"));
    const double elapsed = seconds_since(start);
    if (run.exit_code != 0) return {false, "dehaze failed: " + run.output};

    const ColorImage clean = read_image(dir / "clean.png");
    const QualityReport before = evaluate(read_image(dir / "hazy.png"), clean);
    const QualityReport after = evaluate(read_image(dir / "dehazed.png"), clean);
    const bool pass = after.psnr >= before.psnr + 2.0 && after.ssim >= before.ssim + 0.02 && elapsed < 30.0;
    return {pass, "PSNR " + fmt(before.psnr) + " -> " + fmt(after.psnr) + " dB, SSIM " + fmt(before.ssim) + " -> " +
                      fmt(after.ssim) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome admm_convergence() {
    const ColorImage hazy = ht::hazy_outdoor_scene(64);
    const AtmosphericLight a = estimate_airlight(hazy);
    const ChannelMaps coarse = coarse_transmission(hazy, a);
    bool pass = true;
    std::string detail;
    for (std::size_t c = 0; c < 3; ++c) {
        const RefineResult r = refine(coarse[c], hazy.channel(c), a[c]);
        const TraceEntry& first = r.trace.front();
        const TraceEntry& last = r.trace.back();
        const double fx = first.res_x / last.res_x, fy = first.res_y / last.res_y, fz = first.res_z / last.res_z;
        const bool ok = r.converged && fx >= 10.0 && fy >= 10.0 && fz >= 10.0;
        pass = pass && ok;
        detail += std::string(c ? "; " : "") + kChannelNames[c] + ": " + std::to_string(r.iterations) + " iters" +
                  (r.converged ? "" : " (cap)") + ", dt_rel " + fmt(last.dt_rel, 3) + ", residual drop x/y/z " +
                  fmt(fx, 3) + "/" + fmt(fy, 3) + "/" + fmt(fz, 3);
    }
    return {pass, detail};
}

Outcome output_invariants() {
    std::vector<ColorImage> inputs{ht::hazy_outdoor_scene(64), ht::hazy_outdoor_scene(256),
                                   ht::outdoor_scene(64), ht::step_edge_scene(48, 64)};
    std::mt19937_64 rng(97);
    for (int k = 0; k < 20; ++k) inputs.push_back(ht::random_image(40, 40, rng));

    const PipelineConfig cfg;
    std::size_t bad = 0;
    for (const ColorImage& img : inputs) {
        const DehazeResult r = dehaze(img, cfg);
        bool ok = true;
        for (const auto& t : r.transmission)
            for (double v : t) ok = ok && std::isfinite(v) && v >= cfg.refine.t_eps && v <= 1.0;
        for (double v : r.dehazed.values()) ok = ok && std::isfinite(v) && v >= 0.0 && v <= 1.0;
        if (!ok) ++bad;
    }
    return {bad == 0, std::to_string(inputs.size() - bad) + "/" + std::to_string(inputs.size()) + " images clean"};
}

Outcome determinism() {
    ht::ScratchDir dir("accept_det");
    write_png(dir / "hazy.png", ht::hazy_outdoor_scene(64));
    for (const char* tag : {"1", "2"}) {
        const auto r = ht::run_cli("dehaze " + ht::quote(dir / "hazy.png") + " " +
                                   ht::quote(dir / (std::string("out") + tag + ".png")) + " --dump-maps " +
                                   ht::quote(dir / (std::string("maps") + tag)));
        if (r.exit_code != 0) return {false, "dehaze failed: " + r.output};
    }
    std::size_t compared = 1, differing = 0;
    if (ht::file_bytes(dir / "out1.png") != ht::file_bytes(dir / "out2.png")) ++differing;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "maps1")) {
        ++compared;
        const auto other = dir / "maps2" / entry.path().filename();
        if (!std::filesystem::exists(other) || ht::file_bytes(entry.path()) != ht::file_bytes(other)) ++differing;
    }
    return {differing == 0 && compared > 1,
            std::to_string(compared - differing) + "/" + std::to_string(compared) + " files byte-identical"};
}

Outcome metric_sanity() {
    const double p = psnr(ColorImage(32, 32, 0.4), ColorImage(32, 32, 0.5));
    std::mt19937_64 rng(5);
    const ColorImage x = ht::random_image(32, 32, rng);
    const double s = ssim(x, x);
    return {std::abs(p - 20.0) <= 1e-9 && std::abs(s - 1.0) <= 1e-9,
            "psnr " + fmt(p, 15) + " dB, ssim(x,x) " + fmt(s, 15)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"shrinkage matches grid-search prox on 1000 pairs", prox_oracle},
        {"FFT J_bar/t solves match dense normal equations", fft_solver_oracle},
        {"dark channel matches brute force", dark_channel_oracle},
        {"fusion weight saturates at the range ends", fusion_weight_bounds},
        {"synthesize/recover round trip", algebraic_round_trip},
        {"end-to-end dehazing improves PSNR and SSIM", end_to_end_improvement},
        {"ADMM stops within 30 iterations with 10x residual drop", admm_convergence},
        {"transmission and radiance stay in range and finite", output_invariants},
        {"repeated runs are byte-identical", determinism},
        {"metric sanity", metric_sanity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << i + 1 << ". " << criteria[i].first << " (" << o.detail
                  << ")" << std::endl;
    }
    std::cout << criteria.size() - failed << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
