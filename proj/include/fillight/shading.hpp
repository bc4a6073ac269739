#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "fillight/colorspace.hpp"
#include "fillight/lightgeom.hpp"
#include "fillight/raster.hpp"
#include "fillight/visibility.hpp"

namespace fillight {

/// Per-image geometry and material rasters. Color rasters hold display-encoded
/// sRGB in [0,1]; normals are unit vectors in the lamp frame (x right, y down,
/// z toward the lamp); the mask holds 0 or 1.
struct SceneAssets {
    std::string id;
    ImageF image;
    DepthRaster depth;
    ImageF normals;
    ImageF albedo;
    ImageF specular;
    MaskRaster face_mask;
    // Zero-length normals replaced at ingestion.
    std::size_t normal_fallbacks = 0;

    int width() const noexcept { return image.width(); }
    int height() const noexcept { return image.height(); }

    /// Throws ContractError on any shape or value-range violation.
    void validate() const;
};

enum class DiskSampling {
    kFibonacci,
    kUniformRandom,
};

struct RenderConfig {
    std::size_t n_samples = 2048;
    double shininess = 32.0;
    double epsilon = 1e-4;
    VisibilityConfig visibility;
    bool specular_enabled = true;
    bool visibility_enabled = true;
    // Output scale: an on-axis unit-luminance point light at distance
    // reference_distance irradiates a facing surface with `exposure`.
    // reference_distance <= 0 uses the image height.
    double exposure = 0.214;
    double reference_distance = 0.0;
    DiskSampling sampling = DiskSampling::kFibonacci;
    std::uint64_t sampling_seed = 0;
    int threads = 0;  // 0 = OpenMP default

    void validate() const;
};

/// Linear-light irradiance rasters (H×W×3).
struct IrradianceMaps {
    ImageF diffuse;
    ImageF specular;
};

struct FillResidual {
    ImageF linear;
    ImageF srgb;
};

/// Center-relative position of pixel (col, row) in an image of the given size.
inline Vec3 pixel_position(int col, int row, int width, int height, double depth) {
    return {col + 0.5 - 0.5 * width, row + 0.5 - 0.5 * height, depth};
}

/// Normalized Blinn-Phong lobe for one light direction, viewer along +z.
double blinn_phong(const Vec3& normal, const Vec3& light_dir, double shininess);

/// Diffuse and specular irradiance in one pass over the emitter samples.
/// light overrides the temperature-derived color (tests use it to check
/// linearity in the light color).
IrradianceMaps render_irradiance(const SceneAssets& scene, const LightParams& params, const RenderConfig& cfg,
                                 std::optional<LinearRGB> light = std::nullopt);

ImageF diffuse_irradiance(const SceneAssets& scene, const LightParams& params, const RenderConfig& cfg);
ImageF specular_irradiance(const SceneAssets& scene, const LightParams& params, const RenderConfig& cfg);

struct NormalizedPair {
    LinearRGB albedo;
    LinearRGB specular;
    double alpha;
};

NormalizedPair normalize_reflectance(const LinearRGB& albedo, const LinearRGB& specular, double epsilon);

struct NormalizedReflectance {
    ImageF albedo;
    ImageF specular;
    Raster<float> alpha;
};

/// Inputs are linear-light rasters.
NormalizedReflectance normalize_reflectance(const ImageF& albedo_lin, const ImageF& specular_lin, double epsilon);

ImageF compose_residual(const ImageF& diffuse, const ImageF& specular, const ImageF& albedo_norm,
                        const ImageF& specular_norm, const MaskRaster& mask);

ImageF residual_to_srgb(const ImageF& residual_linear);

/// gamma * image + 0.6 * residual, per channel.
ImageF compose_target(const ImageF& image, const ImageF& residual_srgb, double gamma);

/// Channel-wise sRGB decoding of a whole raster.
ImageF decode_srgb(const ImageF& encoded);

FillResidual render_fill_light(const SceneAssets& scene, const LightParams& params, const RenderConfig& cfg);

}  // namespace fillight
