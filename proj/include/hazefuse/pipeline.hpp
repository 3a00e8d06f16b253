#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

#include "hazefuse/airlight.hpp"
#include "hazefuse/coarse_transmission.hpp"
#include "hazefuse/config.hpp"
#include "hazefuse/io.hpp"
#include "hazefuse/recovery.hpp"
#include "hazefuse/refinement.hpp"

namespace hazefuse {

inline constexpr std::array<const char*, 3> kChannelNames{"r", "g", "b"};

struct DehazeResult {
    ColorImage dehazed;
    AtmosphericLight airlight;
    std::optional<CoarseMaps> coarse;  // absent when a transmission map was supplied
    ChannelMaps transmission;           // the maps used for recovery
    std::array<RefineResult, 3> refinement;
};

/// Coarse estimate, per-channel refinement and recovery. With
/// `transmission` set, estimation is skipped and the given maps are used
/// directly. Channels are refined concurrently; each solve is independent,
/// so the output does not depend on scheduling.
inline DehazeResult dehaze(const ColorImage& hazy, const PipelineConfig& cfg,
                           const std::optional<ChannelMaps>& transmission = std::nullopt) {
    cfg.validate();
    if (!all_finite(hazy)) throw NumericalError("input image", 0);

    DehazeResult r;
    r.airlight = cfg.airlight ? *cfg.airlight : estimate_airlight(hazy, cfg.airlight_estimation);

    if (transmission) {
        for (const auto& t : *transmission) {
            if (t.height() != hazy.height() || t.width() != hazy.width()) {
                throw std::invalid_argument("transmission map and image differ in shape");
            }
            if (!all_finite(t)) throw NumericalError("transmission input", 0);
        }
        r.transmission = *transmission;
    } else {
        r.coarse = coarse_transmission_maps(hazy, r.airlight, cfg.fusion);
        for (const auto& t : r.coarse->t_coarse) {
            if (!all_finite(t)) throw NumericalError("coarse transmission", 0);
        }
        std::array<std::future<RefineResult>, 3> jobs;
        for (std::size_t c = 0; c < 3; ++c) {
            jobs[c] = std::async(std::launch::async, [&, c] {
                return refine(r.coarse->t_coarse[c], hazy.channel(c), r.airlight[c], cfg.refine);
            });
        }
        for (std::size_t c = 0; c < 3; ++c) {
            r.refinement[c] = jobs[c].get();
            r.transmission[c] = r.refinement[c].t;
        }
    }

    if (cfg.mono_t) r.transmission = average_channels(r.transmission);
    r.dehazed = recover(hazy, r.transmission, r.airlight, cfg.refine.t_eps);
    if (!all_finite(r.dehazed)) throw NumericalError("recovery", 0);
    return r;
}

/// Writes each map as an 8-bit PNG preview and a PFM. Channel-shared maps:
/// dark, t_dcp, chi. Per-channel maps: t_lum, t_coarse, t_refined, suffixed
/// _r/_g/_b. Returns the written paths.
inline std::vector<std::filesystem::path> dump_maps(const std::filesystem::path& dir, const DehazeResult& r) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& stem, const ScalarField& f) {
        const auto png = dir / (stem + ".png");
        const auto pfm = dir / (stem + ".pfm");
        write_png(png, f);
        write_pfm(pfm, f);
        written.push_back(png);
        written.push_back(pfm);
    };
    if (r.coarse) {
        emit("dark", r.coarse->dark);
        emit("t_dcp", r.coarse->t_dcp);
        emit("chi", r.coarse->chi);
        for (std::size_t c = 0; c < 3; ++c) {
            emit(std::string("t_lum_") + kChannelNames[c], r.coarse->t_lum[c]);
            emit(std::string("t_coarse_") + kChannelNames[c], r.coarse->t_coarse[c]);
        }
    }
    for (std::size_t c = 0; c < 3; ++c) {
        emit(std::string("t_refined_") + kChannelNames[c], r.transmission[c]);
    }
    return written;
}

/// CSV with header iter,objective,res_x,res_y,res_z,dt_rel. Rows of the
/// r, g and b solves follow each other; iter restarts at 1 for each channel.
inline void write_trace(std::ostream& os, const std::array<RefineResult, 3>& refinement) {
    os << "iter,objective,res_x,res_y,res_z,dt_rel\n";
    os << std::setprecision(10);
    for (const auto& channel : refinement) {
        for (const TraceEntry& e : channel.trace) {
            os << e.iter << ',' << e.objective << ',' << e.res_x << ',' << e.res_y << ',' << e.res_z << ','
               << e.dt_rel << '\n';
        }
    }
}

inline void write_trace(const std::filesystem::path& path, const std::array<RefineResult, 3>& refinement) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    write_trace(out, refinement);
}

}  // namespace hazefuse
