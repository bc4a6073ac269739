#pragma once

#include <cstdint>
#include <vector>

#include "fillight/raster.hpp"
#include "fillight/vec.hpp"

namespace fillight {

struct VisibilityConfig {
    int steps = 24;
    double jitter_amplitude = 0.5;   // fraction of one step
    double occlusion_softness = 4.0; // depth units (pixels)
    double bias = 0.5;               // depth units (pixels)
    std::uint64_t seed = 0;
    // Evaluate visibility on every k-th emitter sample and reuse it for the
    // spatially nearest skipped samples. 1 disables the approximation.
    int emitter_stride = 1;

    void validate() const;
};

/// Single-channel depth map. Depth grows away from the lamp, so a surface of
/// depth d sits at height -d along the lamp axis.
class DepthRaster {
public:
    DepthRaster() = default;
    explicit DepthRaster(Raster<float> depth);

    int width() const noexcept { return depth_.width(); }
    int height() const noexcept { return depth_.height(); }
    const Raster<float>& raster() const noexcept { return depth_; }
    float at(int x, int y) const noexcept { return depth_(x, y); }

    /// Largest surface height (-min depth) anywhere in the raster.
    double max_height() const noexcept { return max_height_; }

    /// Bilinear depth at continuous pixel coordinates where pixel centers sit
    /// on integers. Returns false outside [0, w-1] x [0, h-1].
    bool sample(double x, double y, double& depth) const noexcept;

private:
    Raster<float> depth_;
    double max_height_ = 0.0;
};

/// Both endpoints are (column, row, height) with height = -depth. The emitter
/// must not sit below the shaded point. jitter_key identifies the
/// (pixel, emitter sample) pair so the jitter is reproducible under any
/// execution order.
double soft_visibility(const Vec3& pixel, const Vec3& emitter, const DepthRaster& depth,
                       const VisibilityConfig& cfg, std::uint64_t jitter_key);

/// Stateless 64-bit mix used to derive per-ray jitter.
std::uint64_t mix_bits(std::uint64_t x) noexcept;

}  // namespace fillight
