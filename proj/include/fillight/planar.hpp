#pragma once

#include <cstddef>
#include <cstdint>

#include "fillight/lightgeom.hpp"
#include "fillight/raster.hpp"
#include "fillight/shading.hpp"

namespace fillight {

struct PlanarConfig {
    int resolution = 64;
    double window = 4096.0;  // side of the square plane region, pixels
    std::size_t n_samples = 512;
    double exposure = 0.214;
    double reference_distance = 2048.0;
    DiskSampling sampling = DiskSampling::kFibonacci;
    std::uint64_t sampling_seed = 0;
    int threads = 0;

    void validate() const;
};

/// Flat-plane supervision pair: RGB irradiance (3 channels) and the unit
/// direction from the lamp-center projection to each plane point (2 channels).
/// Held in double precision; persisted as 32-bit PFM.
struct PlanarTargets {
    Raster<double> irradiance;
    Raster<double> direction;
    int resolution = 0;
};

/// Plane-space position of pixel (col, row), origin at the window center.
inline Vec3 plane_position(int col, int row, const PlanarConfig& cfg) {
    const double cell = cfg.window / cfg.resolution;
    return {(col + 0.5) * cell - 0.5 * cfg.window, (row + 0.5) * cell - 0.5 * cfg.window, 0.0};
}

PlanarTargets render_planar_targets(const LightParams& params, const PlanarConfig& cfg);

/// H×W×6 tensor [r, g, b, ux, uy, 0]. The last channel doubles as the z
/// component of a 3D direction encoding; both readings give the same values.
Raster<double> concat_target(const PlanarTargets& targets);

/// Direction field widened to 3 channels with z = 0 (PFM layout).
Raster<double> direction_as_rgb(const PlanarTargets& targets);

}  // namespace fillight
