#include "fillight/synthetic.hpp"

#include <cmath>

#include "fillight/image_io.hpp"

namespace fillight {

namespace {

float snap8(double v) { return static_cast<float>(quantize_unit(v) / 255.0); }

}  // namespace

SceneAssets make_synthetic_face(const SyntheticFaceOptions& o) {
    const int w = o.width;
    const int h = o.height;
    const double a = o.semi_axis_x * w;
    const double b = o.semi_axis_y * h;
    const double c = o.relief * a;

    SceneAssets s;
    s.id = "synthetic";
    s.image = ImageF(w, h, 3);
    s.normals = ImageF(w, h, 3);
    s.albedo = ImageF(w, h, 3);
    s.specular = ImageF(w, h, 3);
    s.face_mask = MaskRaster(w, h, 1);
    Raster<float> depth(w, h, 1);

    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            const Vec3 p = pixel_position(col, row, w, h, 0.0);
            const double e = (p.x / a) * (p.x / a) + (p.y / b) * (p.y / b);
            Vec3 n{0.0, 0.0, 1.0};
            double height = 0.0;
            if (e < 1.0) {
                height = c * std::sqrt(1.0 - e);
                n = normalized(Vec3{p.x / (a * a), p.y / (b * b), height / (c * c)});
            }
            depth(col, row) = static_cast<float>(-height);
            s.normals(col, row, 0) = static_cast<float>(n.x);
            s.normals(col, row, 1) = static_cast<float>(n.y);
            s.normals(col, row, 2) = static_cast<float>(n.z);

            const bool face = e < o.mask_shrink * o.mask_shrink;
            s.face_mask(col, row) = face ? 1 : 0;
            const double shade = o.ambient * (0.4 + 0.6 * n.z);
            for (int ch = 0; ch < 3; ++ch) {
                const double albedo = face ? o.albedo[ch] : 0.45;
                s.albedo(col, row, ch) = snap8(albedo);
                s.specular(col, row, ch) = snap8(face ? o.specular : 0.0);
                const double lin = srgb_to_linear(static_cast<double>(s.albedo(col, row, ch))) * shade;
                s.image(col, row, ch) = snap8(linear_to_srgb(lin));
            }
        }
    }
    s.depth = DepthRaster(std::move(depth));
    return s;
}

SceneAssets make_synthetic_face(int index, int width, int height) {
    SyntheticFaceOptions o;
    o.width = width;
    o.height = height;
    // Small deterministic variations per index.
    const double t = static_cast<double>(index);
    o.semi_axis_x = 0.26 + 0.02 * std::fmod(t * 0.618034, 3.0);
    o.semi_axis_y = 0.36 + 0.015 * std::fmod(t * 0.414214, 4.0);
    o.relief = 0.30 + 0.04 * std::fmod(t * 0.732051, 2.0);
    o.albedo[0] = 0.70 + 0.03 * std::fmod(t, 4.0);
    o.albedo[1] = 0.52 + 0.025 * std::fmod(t, 3.0);
    o.albedo[2] = 0.44 + 0.02 * std::fmod(t, 5.0);
    o.ambient = 0.25 + 0.05 * std::fmod(t, 3.0);
    SceneAssets s = make_synthetic_face(o);
    s.id = "face_" + std::to_string(index);
    return s;
}

SceneAssets make_flat_scene(int width, int height, double depth, double albedo, double specular) {
    SceneAssets s;
    s.id = "flat";
    s.image = ImageF(width, height, 3, snap8(0.5));
    s.normals = ImageF(width, height, 3);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            s.normals(x, y, 2) = 1.0f;
        }
    }
    s.albedo = ImageF(width, height, 3, snap8(albedo));
    s.specular = ImageF(width, height, 3, snap8(specular));
    s.face_mask = MaskRaster(width, height, 1, 1);
    s.depth = DepthRaster(Raster<float>(width, height, 1, static_cast<float>(depth)));
    return s;
}

void write_scene(const SceneAssets& scene, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "image.png", encode_png(scene.image));
    write_file(dir / "depth.pfm", encode_pfm(scene.depth.raster()));
    write_file(dir / "normal.pfm", encode_pfm(scene.normals));
    write_file(dir / "albedo.png", encode_png(scene.albedo));
    write_file(dir / "specular.png", encode_png(scene.specular));
    MaskRaster mask(scene.face_mask.width(), scene.face_mask.height(), 1);
    for (std::size_t i = 0; i < mask.values().size(); ++i) {
        mask.values()[i] = scene.face_mask.values()[i] ? 255 : 0;
    }
    write_file(dir / "mask.png", encode_png(mask));
}

}  // namespace fillight
