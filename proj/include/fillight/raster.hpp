#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fillight/errors.hpp"

namespace fillight {

/// Interleaved row-major H×W×C raster. Row 0 is the top of the image.
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, T fill = T{})
        : width_(width), height_(height), channels_(channels) {
        if (width < 0 || height < 0 || channels <= 0) {
            throw ContractError("raster dimensions must be non-negative with at least one channel");
        }
        data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t index(int x, int y, int c = 0) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    T& operator()(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
    const T& operator()(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    template <typename U>
    bool same_size(const Raster<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    std::string shape() const {
        return std::to_string(height_) + "x" + std::to_string(width_) + "x" + std::to_string(channels_);
    }

    bool operator==(const Raster&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

using ImageF = Raster<float>;
using MaskRaster = Raster<std::uint8_t>;

template <typename A, typename B>
void require_same_size(const Raster<A>& a, const Raster<B>& b, const char* what) {
    if (!a.same_size(b)) {
        throw ContractError(std::string(what) + ": dimension mismatch " + a.shape() + " vs " + b.shape());
    }
}

}  // namespace fillight
