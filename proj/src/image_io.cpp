#include "fillight/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

namespace fillight {

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

std::uint8_t quantize_unit(double v) noexcept {
    if (!(v > 0.0)) {
        return 0;
    }
    if (v >= 1.0) {
        return 255;
    }
    return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

namespace {

struct PngImage {
    png_image image{};

    PngImage() {
        image.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&image); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> decode_png(std::span<const std::uint8_t> bytes, png_uint_32 format, int& width,
                                     int& height) {
    PngImage png;
    if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
        throw DecodeError(std::string("PNG decode failed: ") + png.image.message);
    }
    png.image.format = format;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png.image));
    if (!png_image_finish_read(&png.image, nullptr, pixels.data(), 0, nullptr)) {
        throw DecodeError(std::string("PNG decode failed: ") + png.image.message);
    }
    width = static_cast<int>(png.image.width);
    height = static_cast<int>(png.image.height);
    return pixels;
}

Bytes encode_png_raw(const std::uint8_t* pixels, int width, int height, int channels) {
    PngImage png;
    png.image.width = static_cast<png_uint_32>(width);
    png.image.height = static_cast<png_uint_32>(height);
    png.image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, pixels, 0, nullptr)) {
        throw std::runtime_error(std::string("PNG encode failed: ") + png.image.message);
    }
    Bytes out(size);
    if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, pixels, 0, nullptr)) {
        throw std::runtime_error(std::string("PNG encode failed: ") + png.image.message);
    }
    out.resize(size);
    return out;
}

}  // namespace

ImageF decode_png_rgb(std::span<const std::uint8_t> bytes) {
    int w = 0;
    int h = 0;
    const auto pixels = decode_png(bytes, PNG_FORMAT_RGB, w, h);
    ImageF out(w, h, 3);
    auto dst = out.values();
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        dst[i] = static_cast<float>(pixels[i] / 255.0);
    }
    return out;
}

Raster<std::uint8_t> decode_png_gray(std::span<const std::uint8_t> bytes) {
    // Read as RGB so color masks keep their raw first-channel codes instead of
    // going through libpng's colorimetric gray conversion.
    int w = 0;
    int h = 0;
    const auto pixels = decode_png(bytes, PNG_FORMAT_RGB, w, h);
    Raster<std::uint8_t> out(w, h, 1);
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = pixels[3 * i];
    }
    return out;
}

Bytes encode_png(const ImageF& image) {
    if (image.channels() != 1 && image.channels() != 3) {
        throw ContractError("PNG encoding supports 1 or 3 channels, got " + image.shape());
    }
    std::vector<std::uint8_t> pixels(image.values().size());
    std::transform(image.values().begin(), image.values().end(), pixels.begin(),
                   [](float v) { return quantize_unit(v); });
    return encode_png_raw(pixels.data(), image.width(), image.height(), image.channels());
}

Bytes encode_png(const Raster<std::uint8_t>& image) {
    if (image.channels() != 1 && image.channels() != 3) {
        throw ContractError("PNG encoding supports 1 or 3 channels, got " + image.shape());
    }
    return encode_png_raw(image.values().data(), image.width(), image.height(), image.channels());
}

Raster<float> decode_pfm(std::span<const std::uint8_t> bytes) {
    std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        const std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        return std::string(text.substr(start, pos - start));
    };

    const std::string magic = next_token();
    int channels = 0;
    if (magic == "PF") {
        channels = 3;
    } else if (magic == "Pf") {
        channels = 1;
    } else {
        throw DecodeError("PFM: bad magic '" + magic + "'");
    }
    int width = 0;
    int height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token());
        height = std::stoi(next_token());
        scale = std::stod(next_token());
    } catch (const std::exception&) {
        throw DecodeError("PFM: malformed header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0 || !std::isfinite(scale)) {
        throw DecodeError("PFM: invalid dimensions or scale");
    }
    ++pos;  // single whitespace byte after the scale
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (pos > bytes.size() || bytes.size() - pos < count * 4) {
        throw DecodeError("PFM: truncated pixel data");
    }
    const bool little = scale < 0.0;
    const bool swap = little != (std::endian::native == std::endian::little);

    Raster<float> out(width, height, channels);
    const std::uint8_t* src = bytes.data() + pos;
    for (int row = 0; row < height; ++row) {
        const int dst_row = height - 1 - row;
        for (int i = 0; i < width * channels; ++i) {
            std::uint8_t b[4];
            std::memcpy(b, src, 4);
            src += 4;
            if (swap) {
                std::swap(b[0], b[3]);
                std::swap(b[1], b[2]);
            }
            float v;
            std::memcpy(&v, b, 4);
            out.values()[out.index(i / channels, dst_row, i % channels)] = v;
        }
    }
    return out;
}

Bytes encode_pfm(const Raster<float>& image) {
    if (image.channels() != 1 && image.channels() != 3) {
        throw ContractError("PFM supports 1 or 3 channels, got " + image.shape());
    }
    std::ostringstream header;
    header << (image.channels() == 3 ? "PF" : "Pf") << '\n'
           << image.width() << ' ' << image.height() << '\n'
           << "-1.0\n";
    const std::string h = header.str();
    Bytes out(h.begin(), h.end());
    out.reserve(out.size() + image.values().size() * 4);
    const std::size_t row_len = static_cast<std::size_t>(image.width()) * image.channels();
    for (int row = image.height() - 1; row >= 0; --row) {
        const float* src = image.values().data() + static_cast<std::size_t>(row) * row_len;
        for (std::size_t i = 0; i < row_len; ++i) {
            std::uint8_t b[4];
            std::memcpy(b, &src[i], 4);
            if constexpr (std::endian::native == std::endian::big) {
                std::swap(b[0], b[3]);
                std::swap(b[1], b[2]);
            }
            out.insert(out.end(), b, b + 4);
        }
    }
    return out;
}

}  // namespace fillight
