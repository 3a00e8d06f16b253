#pragma once

// Image interchange: 8-bit PNG (libpng), binary/ASCII PPM and PGM, and PFM
// float maps. Pixel values are carried as doubles in [0,1]; 8-bit data is
// scaled by 1/255 on load and rounded on save.

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hazefuse/image.hpp"

namespace hazefuse {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::uint8_t quantize8(double v) noexcept {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    if (v >= 1.0) return 255;
    return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

// Netpbm-style header tokenizer: whitespace separated, '#' comments to EOL.
class HeaderReader {
public:
    HeaderReader(const std::vector<unsigned char>& bytes, std::string name)
        : bytes_(bytes), name_(std::move(name)) {}

    std::string token() {
        skip_space_and_comments();
        std::string out;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
            out.push_back(static_cast<char>(bytes_[pos_++]));
        }
        if (out.empty()) throw IoError(name_ + ": truncated header");
        return out;
    }

    long integer() {
        const std::string t = token();
        try {
            std::size_t used = 0;
            const long v = std::stol(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw IoError(name_ + ": bad header value '" + t + "'");
        }
    }

    double real() {
        const std::string t = token();
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw IoError(name_ + ": bad header value '" + t + "'");
        }
    }

    // Exactly one whitespace byte separates the header from raster data.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw IoError(name_ + ": malformed header terminator");
        }
        return pos_ + 1;
    }

    std::size_t position() const noexcept { return pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::string name_;
    std::size_t pos_ = 0;
};

inline void check_dims(long w, long h, const std::string& name) {
    if (w <= 0 || h <= 0 || w > (1L << 16) || h > (1L << 16)) {
        throw IoError(name + ": invalid dimensions");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PNG

inline ColorImage read_png(const std::filesystem::path& path) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw IoError(path.string() + ": " + img.message);
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError(path.string() + ": " + msg);
    }
    ColorImage out(img.height, img.width);
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = buffer[i] / 255.0;
    return out;
}

namespace detail {

inline void write_png_buffer(const std::filesystem::path& path, std::size_t height, std::size_t width,
                             png_uint_32 format, const std::vector<png_byte>& buffer) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(width);
    img.height = static_cast<png_uint_32>(height);
    img.format = format;
    if (!png_image_write_to_file(&img, path.c_str(), 0, buffer.data(), 0, nullptr)) {
        throw IoError(path.string() + ": " + img.message);
    }
}

}  // namespace detail

inline void write_png(const std::filesystem::path& path, const ColorImage& image) {
    std::vector<png_byte> buffer(image.values().size());
    std::transform(image.values().begin(), image.values().end(), buffer.begin(), quantize8);
    detail::write_png_buffer(path, image.height(), image.width(), PNG_FORMAT_RGB, buffer);
}

/// Grayscale preview of a map assumed to lie in [0,1].
inline void write_png(const std::filesystem::path& path, const ScalarField& field) {
    std::vector<png_byte> buffer(field.size());
    std::transform(field.begin(), field.end(), buffer.begin(), quantize8);
    detail::write_png_buffer(path, field.height(), field.width(), PNG_FORMAT_GRAY, buffer);
}

// ---------------------------------------------------------------------------
// PPM / PGM

/// Decoded Netpbm raster with 1 (PGM) or 3 (PPM) channels, values in [0,1].
struct NetpbmImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> data;
};

inline NetpbmImage decode_netpbm(const std::vector<unsigned char>& bytes, const std::string& name) {
    detail::HeaderReader header(bytes, name);
    const std::string magic = header.token();
    const bool ascii = magic == "P2" || magic == "P3";
    const bool binary = magic == "P5" || magic == "P6";
    if (!ascii && !binary) throw IoError(name + ": not a PGM/PPM file");
    const std::size_t channels = (magic == "P3" || magic == "P6") ? 3 : 1;
    const long w = header.integer();
    const long h = header.integer();
    detail::check_dims(w, h, name);
    const long maxval = header.integer();
    if (maxval <= 0 || maxval > 65535) throw IoError(name + ": invalid maxval");

    NetpbmImage out{std::size_t(h), std::size_t(w), channels, {}};
    const std::size_t count = out.height * out.width * channels;
    out.data.resize(count);
    if (ascii) {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = header.integer();
            if (v < 0 || v > maxval) throw IoError(name + ": sample out of range");
            out.data[i] = double(v) / double(maxval);
        }
        return out;
    }
    const std::size_t start = header.raster_start();
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (bytes.size() < start + count * bps) throw IoError(name + ": truncated raster");
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned v = bps == 1 ? bytes[start + i]
                                    : (unsigned(bytes[start + 2 * i]) << 8) | bytes[start + 2 * i + 1];
        out.data[i] = double(std::min<unsigned>(v, unsigned(maxval))) / double(maxval);
    }
    return out;
}

inline void write_ppm(const std::filesystem::path& path, const ColorImage& image) {
    std::string bytes = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) +
                        "\n255\n";
    for (double v : image.values()) bytes.push_back(static_cast<char>(quantize8(v)));
    detail::write_file(path, bytes);
}

inline void write_pgm(const std::filesystem::path& path, const ScalarField& field) {
    std::string bytes = "P5\n" + std::to_string(field.width()) + " " + std::to_string(field.height()) +
                        "\n255\n";
    for (double v : field) bytes.push_back(static_cast<char>(quantize8(v)));
    detail::write_file(path, bytes);
}

// ---------------------------------------------------------------------------
// PFM: "Pf" (1 channel) or "PF" (3 channels), "<width> <height>", then a
// scale whose sign gives the byte order (negative = little-endian). Rows are
// stored bottom-to-top as 32-bit IEEE floats.

struct PfmImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> data;  // top-to-bottom, interleaved

    ScalarField channel(std::size_t c) const {
        ScalarField out(height, width);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = data[i * channels + c];
        return out;
    }
};

inline PfmImage decode_pfm(const std::vector<unsigned char>& bytes, const std::string& name) {
    detail::HeaderReader header(bytes, name);
    const std::string magic = header.token();
    if (magic != "Pf" && magic != "PF") throw IoError(name + ": not a PFM file");
    const std::size_t channels = magic == "PF" ? 3 : 1;
    const long w = header.integer();
    const long h = header.integer();
    detail::check_dims(w, h, name);
    const double scale = header.real();
    if (scale == 0.0 || !std::isfinite(scale)) throw IoError(name + ": invalid scale");
    const bool little = scale < 0.0;
    const std::size_t start = header.raster_start();

    PfmImage out{std::size_t(h), std::size_t(w), channels, {}};
    const std::size_t row_len = out.width * channels;
    const std::size_t count = out.height * row_len;
    if (bytes.size() < start + count * 4) throw IoError(name + ": truncated raster");
    out.data.resize(count);
    for (std::size_t r = 0; r < out.height; ++r) {
        const std::size_t file_row = out.height - 1 - r;
        for (std::size_t k = 0; k < row_len; ++k) {
            const unsigned char* p = bytes.data() + start + 4 * (file_row * row_len + k);
            std::uint32_t u = little ? (std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                                        std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24)
                                     : (std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 |
                                        std::uint32_t(p[1]) << 16 | std::uint32_t(p[0]) << 24);
            out.data[r * row_len + k] = std::bit_cast<float>(u);
        }
    }
    return out;
}

inline PfmImage read_pfm(const std::filesystem::path& path) {
    return decode_pfm(detail::read_file(path), path.string());
}

namespace detail {

inline std::string encode_pfm(std::size_t height, std::size_t width, std::size_t channels,
                              const std::span<const double> data) {
    std::string bytes = std::string(channels == 3 ? "PF" : "Pf") + "\n" + std::to_string(width) + " " +
                        std::to_string(height) + "\n-1.0\n";
    const std::size_t row_len = width * channels;
    bytes.reserve(bytes.size() + data.size() * 4);
    for (std::size_t r = height; r-- > 0;) {
        for (std::size_t k = 0; k < row_len; ++k) {
            const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(data[r * row_len + k]));
            for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFFu));
        }
    }
    return bytes;
}

}  // namespace detail

inline void write_pfm(const std::filesystem::path& path, const ScalarField& field) {
    detail::write_file(path, detail::encode_pfm(field.height(), field.width(), 1, field.values()));
}

inline void write_pfm(const std::filesystem::path& path, const ColorImage& image) {
    detail::write_file(path, detail::encode_pfm(image.height(), image.width(), 3, image.values()));
}

/// Reads one transmission map per channel. A single-channel file is
/// replicated to all three channels.
inline ChannelMaps read_channel_maps(const std::filesystem::path& path) {
    const PfmImage pfm = read_pfm(path);
    if (pfm.channels == 1) {
        const ScalarField f = pfm.channel(0);
        return {f, f, f};
    }
    return {pfm.channel(0), pfm.channel(1), pfm.channel(2)};
}

// ---------------------------------------------------------------------------

/// Loads PNG, PPM/PGM (grayscale replicated to RGB) or a 3-channel PFM,
/// detected from the file's magic bytes.
inline ColorImage read_image(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (bytes.size() >= 8 && std::equal(std::begin(png_sig), std::end(png_sig), bytes.begin())) {
        return read_png(path);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P') {
        if (bytes[1] == 'F' || bytes[1] == 'f') {
            const PfmImage pfm = decode_pfm(bytes, path.string());
            ColorImage out(pfm.height, pfm.width);
            auto v = out.values();
            for (std::size_t i = 0; i < out.pixel_count(); ++i) {
                for (std::size_t c = 0; c < 3; ++c) {
                    v[3 * i + c] = pfm.data[i * pfm.channels + (pfm.channels == 3 ? c : 0)];
                }
            }
            return out;
        }
        const NetpbmImage pnm = decode_netpbm(bytes, path.string());
        ColorImage out(pnm.height, pnm.width);
        auto v = out.values();
        for (std::size_t i = 0; i < out.pixel_count(); ++i) {
            for (std::size_t c = 0; c < 3; ++c) {
                v[3 * i + c] = pnm.data[i * pnm.channels + (pnm.channels == 3 ? c : 0)];
            }
        }
        return out;
    }
    throw IoError(path.string() + ": unrecognized image format");
}

/// Loads a single-channel field: PFM channel 0 as raw floats, otherwise the
/// first color channel scaled to [0,1].
inline ScalarField read_field(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == 'f' || bytes[1] == 'F')) {
        return decode_pfm(bytes, path.string()).channel(0);
    }
    return read_image(path).channel(0);
}

/// Writes by extension: .png, .ppm, .pfm.
inline void write_image(const std::filesystem::path& path, const ColorImage& image) {
    const std::string ext = path.extension().string();
    if (ext == ".png") {
        write_png(path, image);
    } else if (ext == ".ppm") {
        write_ppm(path, image);
    } else if (ext == ".pfm") {
        write_pfm(path, image);
    } else {
        throw IoError(path.string() + ": unsupported output extension (use .png, .ppm or .pfm)");
    }
}

}  // namespace hazefuse
