// hazefuse: batch front end for the dehazing pipeline.
//
//   hazefuse dehaze     INPUT OUTPUT [options]     (INPUT may be a directory)
//   hazefuse dump-maps  INPUT DIR    [options]
//   hazefuse synthesize CLEAN DEPTH OUTPUT --airlight r,g,b [--scatter r,g,b]
//   hazefuse evaluate   RESTORED REFERENCE [--csv FILE]

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "hazefuse/hazefuse.hpp"

namespace fs = std::filesystem;
using namespace hazefuse;

namespace {

/// Command-line values that, when given, override the config file.
struct PipelineFlags {
    std::optional<fs::path> config;
    std::optional<std::string> airlight;
    std::optional<std::string> scatter;
    std::optional<double> airlight_top_fraction;
    std::optional<std::size_t> airlight_patch;
    std::optional<double> tau, omega, percentile;
    std::optional<std::size_t> window;
    std::array<std::optional<double>, 5> lambda;
    std::array<std::optional<double>, 3> beta;
    std::optional<double> gamma, t_eps, j_eps, upsilon, rel_tol;
    std::optional<std::size_t> max_iters;
    std::optional<fs::path> dump_maps, trace, transmission;
    bool mono_t = false;
    bool print_config = false;

    void attach(CLI::App& app, bool with_dump_flag) {
        app.add_option("--config", config, "key = value configuration file")->check(CLI::ExistingFile);
        app.add_option("--airlight", airlight, "atmospheric light r,g,b (skips estimation)");
        app.add_option("--airlight-top-fraction", airlight_top_fraction,
                       "fraction of haziest dark-channel pixels averaged for A");
        app.add_option("--airlight-patch", airlight_patch, "dark-channel patch for A estimation");
        app.add_option("--tau", tau, "luminance depth-range scale");
        app.add_option("--omega", omega, "dark-channel haze strength");
        app.add_option("--window", window, "dark-channel window (odd)");
        app.add_option("--percentile", percentile, "luminance normalization percentile");
        app.add_option("--scatter", scatter, "scattering coefficients r,g,b");
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            app.add_option("--lambda" + std::to_string(i + 1), lambda[i]);
        }
        for (std::size_t i = 0; i < beta.size(); ++i) {
            app.add_option("--beta" + std::to_string(i + 1), beta[i], "ADMM penalty");
        }
        app.add_option("--gamma", gamma, "edge weight sharpness");
        app.add_option("--t-eps", t_eps, "transmission floor");
        app.add_option("--j-eps", j_eps, "|J_bar| floor in the t step");
        app.add_option("--upsilon", upsilon, "multiplier step length");
        app.add_option("--max-iters", max_iters, "ADMM iteration cap");
        app.add_option("--rel-tol", rel_tol, "stop when relative change of t falls below this");
        if (with_dump_flag) app.add_option("--dump-maps", dump_maps, "write intermediate maps here");
        app.add_option("--trace", trace, "per-iteration CSV trace");
        app.add_option("--transmission", transmission, "use this PFM transmission instead of estimating");
        app.add_flag("--mono-t", mono_t, "average the three channel transmissions");
        app.add_flag("--print-config", print_config, "echo the effective configuration");
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg;
        if (config) load_config(cfg, *config);
        auto set = [&](const char* key, const auto& value) {
            if (!value) return;
            std::ostringstream os;
            os << std::setprecision(17) << *value;
            apply_setting(cfg, key, os.str());
        };
        set("airlight", airlight);
        set("scatter", scatter);
        set("airlight-top-fraction", airlight_top_fraction);
        set("airlight-patch", airlight_patch);
        set("tau", tau);
        set("omega", omega);
        set("window", window);
        set("percentile", percentile);
        for (std::size_t i = 0; i < lambda.size(); ++i) set(("lambda" + std::to_string(i + 1)).c_str(), lambda[i]);
        for (std::size_t i = 0; i < beta.size(); ++i) set(("beta" + std::to_string(i + 1)).c_str(), beta[i]);
        set("gamma", gamma);
        set("t-eps", t_eps);
        set("j-eps", j_eps);
        set("upsilon", upsilon);
        set("max-iters", max_iters);
        set("rel-tol", rel_tol);
        if (dump_maps) cfg.dump_dir = *dump_maps;
        if (trace) cfg.trace_file = *trace;
        if (transmission) cfg.transmission = *transmission;
        if (mono_t) cfg.mono_t = true;
        cfg.validate();
        return cfg;
    }
};

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

DehazeResult run_pipeline(const fs::path& input, const PipelineConfig& cfg) {
    const ColorImage hazy = read_image(input);
    std::optional<ChannelMaps> given;
    if (cfg.transmission) given = read_channel_maps(*cfg.transmission);
    return dehaze(hazy, cfg, given);
}

void dehaze_one(const fs::path& input, const fs::path& output, const PipelineConfig& cfg) {
    const DehazeResult r = run_pipeline(input, cfg);
    write_image(output, r.dehazed);
    if (cfg.dump_dir) dump_maps(*cfg.dump_dir, r);
    if (cfg.trace_file) write_trace(*cfg.trace_file, r.refinement);
}

int cmd_dehaze(const fs::path& input, const fs::path& output, const PipelineConfig& cfg, unsigned jobs) {
    if (!fs::is_directory(input)) {
        dehaze_one(input, output, cfg);
        return 0;
    }
    // Directory mode: one task per image, outputs as PNG under `output`.
    fs::create_directories(output);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    std::mutex log;
    auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            const fs::path& in = files[i];
            PipelineConfig local = cfg;
            const std::string stem = in.stem().string();
            if (cfg.dump_dir) local.dump_dir = *cfg.dump_dir / stem;
            if (cfg.trace_file) {
                local.trace_file = cfg.trace_file->parent_path() /
                                   (cfg.trace_file->stem().string() + "_" + stem + ".csv");
            }
            try {
                dehaze_one(in, output / (stem + ".png"), local);
            } catch (const std::exception& e) {
                ++failures;
                std::lock_guard lock(log);
                std::cerr << in.string() << ": " << e.what() << '\n';
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < std::max(1u, jobs); ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return failures == 0 ? 0 : 1;
}

int cmd_dump_maps(const fs::path& input, const fs::path& dir, PipelineConfig cfg) {
    const DehazeResult r = run_pipeline(input, cfg);
    const auto written = dump_maps(dir, r);
    if (cfg.trace_file) write_trace(*cfg.trace_file, r.refinement);
    std::cout << "wrote " << written.size() << " files to " << dir.string() << '\n';
    return 0;
}

/// Depth from a file (PGM/PNG scaled to [0,1], PFM raw) or a preset:
/// "flat:D" or "ramp:NEAR:FAR" (far at the top row).
ScalarField load_depth(const std::string& source, std::size_t height, std::size_t width, double scale) {
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw std::invalid_argument("bad depth preset '" + source + "'");
    };
    if (source.rfind("flat:", 0) == 0) {
        return ScalarField(height, width, number(source.substr(5)));
    }
    if (source.rfind("ramp:", 0) == 0) {
        const std::string rest = source.substr(5);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("ramp preset needs ramp:NEAR:FAR");
        return ramp_depth(height, width, number(rest.substr(0, colon)), number(rest.substr(colon + 1)));
    }
    ScalarField depth = read_field(source);
    if (depth.height() != height || depth.width() != width) {
        throw std::invalid_argument("depth map " + source + " does not match the clean image dimensions");
    }
    return map(depth, [scale](double d) { return d * scale; });
}

int cmd_synthesize(const fs::path& clean_path, const std::string& depth_spec, const fs::path& output,
                   const std::string& airlight_text, const std::optional<std::string>& scatter_text,
                   double depth_scale) {
    const ColorImage clean = read_image(clean_path);
    const AtmosphericLight airlight{parse_triple("airlight", airlight_text)};
    const std::array<double, 3> scatter = scatter_text ? parse_triple("scatter", *scatter_text) : FusionParams{}.beta;
    const ScalarField depth = load_depth(depth_spec, clean.height(), clean.width(), depth_scale);
    const ChannelMaps t = depth_to_transmission(depth, scatter);
    write_image(output, synthesize(clean, t, airlight));

    const fs::path stem = output.parent_path() / output.stem();
    write_pfm(stem.string() + ".t.pfm", ColorImage::from_channels(t));
    std::ofstream sidecar(stem.string() + ".airlight.txt", std::ios::trunc);
    sidecar << std::setprecision(17) << airlight << '\n';
    if (!sidecar) throw IoError("cannot write airlight sidecar");
    return 0;
}

std::string format_db(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

int cmd_evaluate(const fs::path& restored_path, const fs::path& reference_path,
                 const std::optional<fs::path>& csv) {
    const ColorImage restored = read_image(restored_path);
    const ColorImage reference = read_image(reference_path);
    if (!restored.same_shape(reference)) {
        throw std::invalid_argument("restored and reference images differ in size");
    }
    const QualityReport q = evaluate(restored, reference);
    std::ostringstream ssim_text;
    ssim_text << std::fixed << std::setprecision(6) << q.ssim;
    std::cout << std::left << std::setw(40) << "image" << std::setw(12) << "psnr_db" << "ssim\n"
              << std::setw(40) << restored_path.filename().string() << std::setw(12) << format_db(q.psnr)
              << ssim_text.str() << '\n';
    if (csv) {
        std::ofstream out(*csv, std::ios::trunc);
        out << "image,psnr_db,ssim\n"
            << restored_path.string() << ',' << std::setprecision(17) << q.psnr << ',' << q.ssim << '\n';
        if (!out) throw IoError("cannot write " + csv->string());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-image dehazing with fused coarse transmission and ADMM refinement"};
    app.require_subcommand(1);

    PipelineFlags dehaze_flags;
    fs::path dehaze_in, dehaze_out;
    unsigned jobs = 1;
    auto* dehaze_cmd = app.add_subcommand("dehaze", "dehaze an image (or every image in a directory)");
    dehaze_cmd->add_option("input", dehaze_in, "hazy image or directory")->required();
    dehaze_cmd->add_option("output", dehaze_out, "output image or directory")->required();
    dehaze_cmd->add_option("--jobs", jobs, "worker threads in directory mode");
    dehaze_flags.attach(*dehaze_cmd, true);

    PipelineFlags dump_flags;
    fs::path dump_in, dump_dir;
    auto* dump_cmd = app.add_subcommand("dump-maps", "write coarse and refined transmission maps");
    dump_cmd->add_option("input", dump_in, "hazy image")->required();
    dump_cmd->add_option("dir", dump_dir, "output directory")->required();
    dump_flags.attach(*dump_cmd, false);

    fs::path synth_clean, synth_out;
    std::string synth_depth, synth_airlight;
    std::optional<std::string> synth_scatter;
    double depth_scale = 1.0;
    auto* synth_cmd = app.add_subcommand("synthesize", "add haze to a clean image");
    synth_cmd->add_option("clean", synth_clean, "clean image")->required();
    synth_cmd->add_option("depth", synth_depth, "depth map (PGM/PNG/PFM) or preset flat:D | ramp:NEAR:FAR")
        ->required();
    synth_cmd->add_option("output", synth_out, "hazy output image")->required();
    synth_cmd->add_option("--airlight", synth_airlight, "atmospheric light r,g,b")->required();
    synth_cmd->add_option("--scatter", synth_scatter, "scattering coefficients r,g,b");
    synth_cmd->add_option("--depth-scale", depth_scale, "multiplier applied to depth files");

    fs::path eval_restored, eval_reference;
    std::optional<fs::path> eval_csv;
    auto* eval_cmd = app.add_subcommand("evaluate", "PSNR and SSIM against a reference");
    eval_cmd->add_option("restored", eval_restored)->required();
    eval_cmd->add_option("reference", eval_reference)->required();
    eval_cmd->add_option("--csv", eval_csv, "append results as CSV");

    CLI11_PARSE(app, argc, argv);

    const char* stage = "setup";
    try {
        if (dehaze_cmd->parsed()) {
            const PipelineConfig cfg = dehaze_flags.resolve();
            if (dehaze_flags.print_config) std::cout << format_config(cfg);
            stage = "dehaze";
            return cmd_dehaze(dehaze_in, dehaze_out, cfg, jobs);
        }
        if (dump_cmd->parsed()) {
            const PipelineConfig cfg = dump_flags.resolve();
            if (dump_flags.print_config) std::cout << format_config(cfg);
            stage = "dump-maps";
            return cmd_dump_maps(dump_in, dump_dir, cfg);
        }
        if (synth_cmd->parsed()) {
            stage = "synthesize";
            return cmd_synthesize(synth_clean, synth_depth, synth_out, synth_airlight, synth_scatter, depth_scale);
        }
        if (eval_cmd->parsed()) {
            stage = "evaluate";
            return cmd_evaluate(eval_restored, eval_reference, eval_csv);
        }
    } catch (const NumericalError& e) {
        std::cerr << "hazefuse " << stage << ": numerical failure in stage '" << e.stage() << "': " << e.what()
                  << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "hazefuse " << stage << ": " << e.what() << '\n';
        return 2;
    }
    return 1;
}
