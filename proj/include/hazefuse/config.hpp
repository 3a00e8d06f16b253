#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hazefuse/airlight.hpp"
#include "hazefuse/coarse_transmission.hpp"
#include "hazefuse/refinement.hpp"

namespace hazefuse {

/// Every tunable of the dehazing pipeline plus the run options.
struct PipelineConfig {
    FusionParams fusion;
    RefineParams refine;
    AirlightParams airlight_estimation;
    std::optional<AtmosphericLight> airlight;  // overrides estimation when set
    std::optional<std::filesystem::path> dump_dir;
    std::optional<std::filesystem::path> trace_file;
    std::optional<std::filesystem::path> transmission;  // bypasses estimation when set
    bool mono_t = false;

    void validate() const {
        fusion.validate();
        refine.validate();
        if (!(airlight_estimation.top_fraction > 0.0 && airlight_estimation.top_fraction <= 1.0)) {
            throw std::invalid_argument("airlight-top-fraction must lie in (0, 1]");
        }
        if (airlight_estimation.patch == 0 || airlight_estimation.patch % 2 == 0) {
            throw std::invalid_argument("airlight-patch must be odd and >= 1");
        }
        if (airlight) {
            for (double a : airlight->rgb) {
                if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("airlight components must lie in (0, 1]");
            }
        }
    }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (trim(value.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("bad value for '" + key + "': " + value);
}

inline std::size_t parse_count(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (v >= 0 && trim(value.substr(used)).empty()) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("bad value for '" + key + "': " + value);
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("bad value for '" + key + "': " + value);
}

}  // namespace detail

/// Parses "r,g,b".
inline std::array<double, 3> parse_triple(const std::string& key, const std::string& value) {
    std::array<double, 3> out{};
    std::stringstream ss(value);
    std::string part;
    std::size_t n = 0;
    while (std::getline(ss, part, ',')) {
        if (n == 3) throw ConfigError("'" + key + "' expects three comma-separated values");
        out[n++] = detail::parse_real(key, detail::trim(part));
    }
    if (n != 3) throw ConfigError("'" + key + "' expects three comma-separated values");
    return out;
}

/// Applies one `key = value` setting. Keys are the long CLI flag names
/// without the leading dashes; '_' and '-' are interchangeable.
inline void apply_setting(PipelineConfig& cfg, std::string key, const std::string& value) {
    std::replace(key.begin(), key.end(), '_', '-');
    auto real = [&] { return detail::parse_real(key, value); };
    auto count = [&] { return detail::parse_count(key, value); };

    if (key == "omega") cfg.fusion.omega = real();
    else if (key == "window") cfg.fusion.window = count();
    else if (key == "tau") cfg.fusion.tau = real();
    else if (key == "percentile") cfg.fusion.percentile = real();
    else if (key == "scatter") cfg.fusion.beta = parse_triple(key, value);
    else if (key == "lambda1") cfg.refine.lambda1 = real();
    else if (key == "lambda2") cfg.refine.lambda2 = real();
    else if (key == "lambda3") cfg.refine.lambda3 = real();
    else if (key == "lambda4") cfg.refine.lambda4 = real();
    else if (key == "lambda5") cfg.refine.lambda5 = real();
    else if (key == "beta1") cfg.refine.beta1 = real();
    else if (key == "beta2") cfg.refine.beta2 = real();
    else if (key == "beta3") cfg.refine.beta3 = real();
    else if (key == "gamma") cfg.refine.gamma = real();
    else if (key == "upsilon") cfg.refine.upsilon = real();
    else if (key == "t-eps") cfg.refine.t_eps = real();
    else if (key == "j-eps") cfg.refine.j_eps = real();
    else if (key == "max-iters") cfg.refine.max_iters = count();
    else if (key == "rel-tol") cfg.refine.rel_tol = real();
    else if (key == "airlight") cfg.airlight = AtmosphericLight{parse_triple(key, value)};
    else if (key == "airlight-top-fraction") cfg.airlight_estimation.top_fraction = real();
    else if (key == "airlight-patch") cfg.airlight_estimation.patch = count();
    else if (key == "dump-maps") cfg.dump_dir = value;
    else if (key == "trace") cfg.trace_file = value;
    else if (key == "transmission") cfg.transmission = value;
    else if (key == "mono-t") cfg.mono_t = detail::parse_bool(key, value);
    else throw ConfigError("unknown configuration key '" + key + "'");
}

/// Reads `key = value` lines; '#' starts a comment, blank lines are ignored.
inline void load_config(PipelineConfig& cfg, std::istream& in, const std::string& name = "config") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        try {
            apply_setting(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline void load_config(PipelineConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    load_config(cfg, in, path.string());
}

/// Effective configuration in the same `key = value` format load_config reads.
inline std::string format_config(const PipelineConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17);
    auto triple = [&](const std::array<double, 3>& t) { os << t[0] << ',' << t[1] << ',' << t[2]; };
    os << "omega = " << cfg.fusion.omega << '\n'
       << "window = " << cfg.fusion.window << '\n'
       << "tau = " << cfg.fusion.tau << '\n'
       << "percentile = " << cfg.fusion.percentile << '\n'
       << "scatter = ";
    triple(cfg.fusion.beta);
    os << '\n'
       << "lambda1 = " << cfg.refine.lambda1 << '\n'
       << "lambda2 = " << cfg.refine.lambda2 << '\n'
       << "lambda3 = " << cfg.refine.lambda3 << '\n'
       << "lambda4 = " << cfg.refine.lambda4 << '\n'
       << "lambda5 = " << cfg.refine.lambda5 << '\n'
       << "beta1 = " << cfg.refine.beta1 << '\n'
       << "beta2 = " << cfg.refine.beta2 << '\n'
       << "beta3 = " << cfg.refine.beta3 << '\n'
       << "gamma = " << cfg.refine.gamma << '\n'
       << "upsilon = " << cfg.refine.upsilon << '\n'
       << "t-eps = " << cfg.refine.t_eps << '\n'
       << "j-eps = " << cfg.refine.j_eps << '\n'
       << "max-iters = " << cfg.refine.max_iters << '\n'
       << "rel-tol = " << cfg.refine.rel_tol << '\n'
       << "airlight-top-fraction = " << cfg.airlight_estimation.top_fraction << '\n'
       << "airlight-patch = " << cfg.airlight_estimation.patch << '\n';
    if (cfg.airlight) {
        os << "airlight = ";
        triple(cfg.airlight->rgb);
        os << '\n';
    }
    if (cfg.dump_dir) os << "dump-maps = " << cfg.dump_dir->string() << '\n';
    if (cfg.trace_file) os << "trace = " << cfg.trace_file->string() << '\n';
    if (cfg.transmission) os << "transmission = " << cfg.transmission->string() << '\n';
    os << "mono-t = " << (cfg.mono_t ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace hazefuse
