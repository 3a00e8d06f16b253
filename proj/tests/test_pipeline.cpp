#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "cli_util.hpp"
#include "fixtures.hpp"
#include "hazefuse/pipeline.hpp"

using namespace hazefuse;
using hazefuse::testing::ScratchDir;

TEST(Dehaze, UnitTransmissionOverrideReturnsInput) {
    const ColorImage hazy = hazefuse::testing::hazy_outdoor_scene(32);
    const ScalarField one(32, 32, 1.0);
    const DehazeResult r = dehaze(hazy, PipelineConfig{}, ChannelMaps{one, one, one});
    EXPECT_FALSE(r.coarse.has_value());
    for (std::size_t i = 0; i < hazy.values().size(); ++i) EXPECT_NEAR(r.dehazed.values()[i], hazy.values()[i], 1e-15);
}

TEST(Dehaze, GivenAirlightIsUsedVerbatim) {
    PipelineConfig cfg;
    cfg.airlight = AtmosphericLight{{0.9, 0.85, 0.8}};
    cfg.refine.max_iters = 2;
    const DehazeResult r = dehaze(hazefuse::testing::hazy_outdoor_scene(32), cfg);
    EXPECT_EQ(r.airlight, *cfg.airlight);
}

TEST(Dehaze, OutputInvariants) {
    PipelineConfig cfg;
    const DehazeResult r = dehaze(hazefuse::testing::hazy_outdoor_scene(48), cfg);
    ASSERT_TRUE(r.coarse.has_value());
    for (const auto& t : r.transmission)
        for (double v : t) {
            EXPECT_GE(v, cfg.refine.t_eps);
            EXPECT_LE(v, 1.0);
        }
    for (double v : r.dehazed.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    for (const auto& rr : r.refinement) EXPECT_EQ(rr.trace.size(), rr.iterations);
}

TEST(Dehaze, MonoTransmissionSharesOneMap) {
    PipelineConfig cfg;
    cfg.mono_t = true;
    cfg.refine.max_iters = 3;
    const DehazeResult r = dehaze(hazefuse::testing::hazy_outdoor_scene(32), cfg);
    EXPECT_EQ(r.transmission[0], r.transmission[1]);
    EXPECT_EQ(r.transmission[1], r.transmission[2]);
}

TEST(Dehaze, RejectsNonFiniteInputAndMismatchedMaps) {
    ColorImage hazy(16, 16, 0.5);
    const ScalarField one(16, 16, 1.0);
    EXPECT_THROW(dehaze(hazy, {}, ChannelMaps{one, one, ScalarField(16, 15, 1.0)}), std::invalid_argument);
    ChannelMaps bad{one, one, one};
    bad[1][7] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(dehaze(hazy, {}, bad), NumericalError);
    hazy(3, 3, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
        dehaze(hazy, {});
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.stage(), "input image");
    }
}

TEST(Dehaze, RepeatableBitForBit) {
    PipelineConfig cfg;
    cfg.refine.max_iters = 5;
    const ColorImage hazy = hazefuse::testing::hazy_outdoor_scene(40);
    EXPECT_EQ(dehaze(hazy, cfg).dehazed, dehaze(hazy, cfg).dehazed);
}

TEST(DumpMaps, WritesEverySharedAndPerChannelMap) {
    ScratchDir dir("dump");
    PipelineConfig cfg;
    cfg.refine.max_iters = 2;
    const DehazeResult r = dehaze(hazefuse::testing::hazy_outdoor_scene(24), cfg);
    const auto written = dump_maps(dir.path(), r);
    EXPECT_EQ(written.size(), 24u);
    std::set<std::string> names;
    for (const auto& p : written) {
        EXPECT_TRUE(std::filesystem::exists(p));
        names.insert(p.filename().string());
    }
    for (const char* n : {"dark.pfm", "t_dcp.png", "chi.pfm", "t_lum_g.pfm", "t_coarse_b.png", "t_refined_r.pfm"}) {
        EXPECT_TRUE(names.count(n)) << n;
    }
    const ScalarField back = read_field(dir / "t_refined_g.pfm");
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i], double(float(r.transmission[1][i])));
}

TEST(DumpMaps, OverrideRunWritesOnlyRefinedMaps) {
    ScratchDir dir("dump_override");
    const ScalarField t(16, 16, 0.7);
    const DehazeResult r = dehaze(ColorImage(16, 16, 0.5), {}, ChannelMaps{t, t, t});
    EXPECT_EQ(dump_maps(dir.path(), r).size(), 6u);
}

TEST(Trace, CsvHasHeaderAndOneRowPerIteration) {
    PipelineConfig cfg;
    cfg.refine.max_iters = 4;
    cfg.refine.rel_tol = 0.0;
    const DehazeResult r = dehaze(hazefuse::testing::hazy_outdoor_scene(24), cfg);
    std::ostringstream os;
    write_trace(os, r.refinement);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "iter,objective,res_x,res_y,res_z,dt_rel");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows[0].substr(0, 2), "1,");
    EXPECT_EQ(rows[4].substr(0, 2), "1,");
    EXPECT_EQ(rows[11].substr(0, 2), "4,");
}
