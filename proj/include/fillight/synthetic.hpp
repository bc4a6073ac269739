#pragma once

#include <cstdint>
#include <filesystem>

#include "fillight/shading.hpp"

namespace fillight {

/// Procedural portrait stand-in: an ellipsoidal "face" bulging toward the
/// lamp from a flat background, with uniform skin albedo inside the mask.
struct SyntheticFaceOptions {
    int width = 256;
    int height = 256;
    double semi_axis_x = 0.30;  // fraction of width
    double semi_axis_y = 0.40;  // fraction of height
    double relief = 0.35;       // bulge height as a fraction of the x semi-axis
    double mask_shrink = 0.95;  // mask ellipse relative to the bulge outline
    double albedo[3] = {0.78, 0.60, 0.52};
    double specular = 0.25;
    double ambient = 0.35;  // baked illumination of the source image
};

SceneAssets make_synthetic_face(const SyntheticFaceOptions& opts = {});

/// Face i of a small deterministic family with varied proportions and tones.
SceneAssets make_synthetic_face(int index, int width, int height);

/// Flat plane at the given depth, normals facing the lamp, fully masked.
SceneAssets make_flat_scene(int width, int height, double depth = 0.0, double albedo = 0.8,
                            double specular = 0.0);

/// Writes the six assets using the on-disk ingestion layout.
void write_scene(const SceneAssets& scene, const std::filesystem::path& dir);

}  // namespace fillight
