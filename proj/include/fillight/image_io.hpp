#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fillight/raster.hpp"

namespace fillight {

using Bytes = std::vector<std::uint8_t>;

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Nearest 8-bit code for a value in [0,1] (clamped).
std::uint8_t quantize_unit(double v) noexcept;

/// 8-bit PNG decoded to 3-channel float in [0,1]. Gray is replicated, alpha dropped.
ImageF decode_png_rgb(std::span<const std::uint8_t> bytes);

/// 8-bit PNG decoded to one channel of raw codes. Color inputs use their first channel.
Raster<std::uint8_t> decode_png_gray(std::span<const std::uint8_t> bytes);

/// 1- or 3-channel float raster in [0,1] encoded as an 8-bit PNG.
Bytes encode_png(const ImageF& image);
Bytes encode_png(const Raster<std::uint8_t>& image);

/// Portable float map. Accepts either byte order on read; writes little-endian
/// (negative scale) with the conventional bottom-to-top row order.
Raster<float> decode_pfm(std::span<const std::uint8_t> bytes);
Bytes encode_pfm(const Raster<float>& image);

template <typename To, typename From>
Raster<To> raster_cast(const Raster<From>& src) {
    Raster<To> out(src.width(), src.height(), src.channels());
    auto s = src.values();
    auto d = out.values();
    for (std::size_t i = 0; i < s.size(); ++i) {
        d[i] = static_cast<To>(s[i]);
    }
    return out;
}

}  // namespace fillight
