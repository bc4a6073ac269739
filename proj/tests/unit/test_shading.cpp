#include <doctest.h>

#include <cmath>
#include <random>

#include "fillight/errors.hpp"
#include "fillight/shading.hpp"
#include "fillight/synthetic.hpp"

using namespace fillight;

namespace {

constexpr LinearRGB kWhite{1.0, 1.0, 1.0};

// Midpoint quadrature of the disk integral for a flat plane facing the lamp.
double disk_quadrature(const Vec3& pos, const LightParams& p, int radial, int angular) {
    const double exponent = std::log(0.5) / std::log(std::cos(p.theta_hp_rad));
    const double radius = 0.5 * p.d_lamp;
    double sum = 0.0;
    double area = 0.0;
    for (int i = 0; i < radial; ++i) {
        const double r = (i + 0.5) / radial * radius;
        const double dr = radius / radial;
        for (int j = 0; j < angular; ++j) {
            const double a = (j + 0.5) / angular * 2.0 * kPi;
            const double da = 2.0 * kPi / angular;
            const Vec3 v{p.dx + r * std::cos(a) - pos.x, p.dy + r * std::sin(a) - pos.y, p.z0 + pos.z};
            const double r2 = dot(v, v);
            const double c = v.z / std::sqrt(r2);
            sum += std::pow(c, exponent) * c / r2 * r * dr * da;
            area += r * dr * da;
        }
    }
    return sum / area;
}

SceneAssets flat(int size) { return make_flat_scene(size, size, 0.0, 0.8, 0.0); }

}  // namespace

TEST_CASE("render config validation") {
    RenderConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.n_samples = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = {};
    cfg.shininess = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = {};
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
}

TEST_CASE("normals facing away receive no light") {
    SceneAssets s = flat(16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            s.normals(x, y, 2) = -1.0f;
        }
    }
    RenderConfig cfg;
    cfg.n_samples = 64;
    const IrradianceMaps maps = render_irradiance(s, LightParams{}, cfg);
    for (float v : maps.diffuse.values()) {
        CHECK(v == 0.0f);
    }
    for (float v : maps.specular.values()) {
        CHECK(v == 0.0f);
    }
}

TEST_CASE("point-light limit matches the inverse-square and cosine laws") {
    const int size = 32;
    const SceneAssets s = flat(size);
    LightParams p;
    p.d_lamp = 1.0;
    p.z0 = 1000.0;
    p.dx = 150.0;
    p.dy = -90.0;
    p.theta_hp_rad = degrees_to_radians(30.0);
    RenderConfig cfg;
    cfg.n_samples = 16;
    cfg.exposure = 1.0;
    cfg.reference_distance = 1000.0;
    const ImageF e = render_irradiance(s, p, cfg, kWhite).diffuse;
    const double exponent = emission_exponent(p.theta_hp_rad);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const Vec3 pos = pixel_position(x, y, size, size, 0.0);
            const Vec3 v{p.dx - pos.x, p.dy - pos.y, p.z0};
            const double r2 = dot(v, v);
            const double c = p.z0 / std::sqrt(r2);
            const double oracle = 1000.0 * 1000.0 * std::pow(c, exponent) * c / r2;
            CHECK(e(x, y, 0) == doctest::Approx(oracle).epsilon(0.01));
        }
    }

    LightParams far = p;
    far.z0 = 2000.0;
    far.dx = 0.0;
    far.dy = 0.0;
    LightParams near = far;
    near.z0 = 1000.0;
    const ImageF e_near = render_irradiance(s, near, cfg, kWhite).diffuse;
    const ImageF e_far = render_irradiance(s, far, cfg, kWhite).diffuse;
    CHECK(e_near(16, 16, 1) / e_far(16, 16, 1) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("specular lobe examples") {
    const double n = 32.0;
    CHECK(blinn_phong({0, 0, 1}, {0, 0, 1}, n) == doctest::Approx((n + 2) / (2 * kPi)));
    // h = normalize((1,0,0) + (0,0,1)); a normal perpendicular to it.
    const Vec3 perp = normalized(Vec3{1.0, 0.0, -1.0});
    CHECK(blinn_phong(perp, {1, 0, 0}, n) == 0.0);
    const Vec3 tilted = normalized(Vec3{0.05, 0.0, 1.0});
    CHECK(blinn_phong(tilted, {0, 0, 1}, 1e5) < 1e-20);

    // Single on-axis sample with unit weighting reproduces the lobe value.
    SceneAssets one = make_flat_scene(1, 1);
    LightParams p;
    p.d_lamp = 1e-6;
    p.z0 = 500.0;
    RenderConfig cfg;
    cfg.n_samples = 1;
    cfg.shininess = n;
    cfg.exposure = 1.0;
    cfg.reference_distance = 500.0;
    const ImageF spec = specular_irradiance(one, p, cfg);
    const double scale = luminance(light_color(ColorTemperature(p.temperature_k)));
    CHECK(scale == doctest::Approx(1.0));
    const LinearRGB c = light_color(ColorTemperature(p.temperature_k));
    CHECK(spec(0, 0, 0) == doctest::Approx(c.r * (n + 2) / (2 * kPi)).epsilon(1e-5));
    CHECK(spec(0, 0, 2) == doctest::Approx(c.b * (n + 2) / (2 * kPi)).epsilon(1e-5));
}

TEST_CASE("diffuse and specular helpers agree with the combined pass") {
    const SceneAssets s = make_synthetic_face(2, 48, 48);
    LightParams p;
    p.dx = 200.0;
    RenderConfig cfg;
    cfg.n_samples = 64;
    const IrradianceMaps both = render_irradiance(s, p, cfg);
    CHECK(diffuse_irradiance(s, p, cfg) == both.diffuse);
    CHECK(specular_irradiance(s, p, cfg) == both.specular);
}

TEST_CASE("irradiance is linear in the light color") {
    const SceneAssets s = make_synthetic_face(1, 40, 40);
    LightParams p;
    p.dx = -300.0;
    p.z0 = 600.0;
    RenderConfig cfg;
    cfg.n_samples = 128;
    const LinearRGB c = light_color(ColorTemperature(4000.0));
    const IrradianceMaps a = render_irradiance(s, p, cfg, c);
    const IrradianceMaps b = render_irradiance(s, p, cfg, c * 2.0);
    for (std::size_t i = 0; i < a.diffuse.values().size(); ++i) {
        CHECK(b.diffuse.values()[i] == 2.0f * a.diffuse.values()[i]);
        CHECK(b.specular.values()[i] == 2.0f * a.specular.values()[i]);
    }
}

TEST_CASE("normalize_reflectance examples") {
    const NormalizedPair half = normalize_reflectance(LinearRGB{0.25, 0.25, 0.25}, LinearRGB{0.25, 0.25, 0.25}, 1e-4);
    CHECK(half.alpha == 1.0);
    const NormalizedPair full = normalize_reflectance(LinearRGB{1, 1, 1}, LinearRGB{1, 1, 1}, 1e-4);
    CHECK(full.alpha == doctest::Approx(1.0 / 2.0001).epsilon(1e-12));
    CHECK(luminance(full.albedo) + luminance(full.specular) == doctest::Approx(2.0 / 2.0001).epsilon(1e-12));
    const NormalizedPair zero = normalize_reflectance(LinearRGB{0, 0, 0}, LinearRGB{0, 0, 0}, 1e-4);
    CHECK(zero.alpha == 1.0);
    CHECK(zero.albedo == LinearRGB{0, 0, 0});
    CHECK_THROWS_AS(normalize_reflectance(LinearRGB{1, 1, 1}, LinearRGB{1, 1, 1}, 0.0), DomainError);
}

TEST_CASE("energy cap and ratio preservation on random pairs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        const LinearRGB a{u(rng), u(rng), u(rng)};
        const LinearRGB s{u(rng), u(rng), u(rng)};
        const NormalizedPair n = normalize_reflectance(a, s, 1e-4);
        REQUIRE(luminance(n.albedo) + luminance(n.specular) <= 1.0);
        if (a.g > 0.0) {
            CHECK(std::abs(n.albedo.r / n.albedo.g - a.r / a.g) <= 1e-12 * std::max(1.0, a.r / a.g));
        }
    }
}

TEST_CASE("compose_residual examples") {
    const int w = 4;
    const int h = 3;
    ImageF e(w, h, 3, 0.37f);
    ImageF s(w, h, 3, 0.11f);
    ImageF ones(w, h, 3, 1.0f);
    ImageF zeros(w, h, 3, 0.0f);
    MaskRaster none(w, h, 1, 0);
    MaskRaster all(w, h, 1, 1);
    const ImageF masked = compose_residual(e, s, ones, ones, none);
    for (float v : masked.values()) {
        CHECK(v == 0.0f);
    }
    CHECK(compose_residual(e, s, ones, zeros, all) == e);
    const ImageF mixed = compose_residual(e, s, ImageF(w, h, 3, 0.5f), ImageF(w, h, 3, 0.25f), all);
    CHECK(mixed(1, 1, 1) == doctest::Approx(0.5 * 0.37 + 0.25 * 0.11));
    CHECK_THROWS_AS(compose_residual(e, ImageF(w + 1, h, 3), ones, ones, all), ContractError);
}

TEST_CASE("compose_target examples") {
    ImageF img(1, 1, 3, 0.5f);
    ImageF res(1, 1, 3, 0.2f);
    CHECK(compose_target(img, res, 0.3)(0, 0, 0) == doctest::Approx(0.27));
    const ImageF zero_res = compose_target(img, ImageF(1, 1, 3, 0.0f), 0.3);
    CHECK(zero_res(0, 0, 2) == static_cast<float>(0.3 * 0.5f));
    CHECK(compose_target(ImageF(1, 1, 3, 1.0f), ImageF(1, 1, 3, 1.0f), 0.4)(0, 0, 1) == 1.0f);
    CHECK_THROWS_AS(compose_target(img, res, 0.19), DomainError);
    CHECK_THROWS_AS(compose_target(img, res, 0.41), DomainError);
}

TEST_CASE("residual_to_srgb inherits transfer examples") {
    ImageF lin(3, 1, 1);
    lin(0, 0) = 0.0f;
    lin(1, 0) = 1.0f;
    lin(2, 0) = 2.0f;
    const ImageF enc = residual_to_srgb(lin);
    CHECK(enc(0, 0) == 0.0f);
    CHECK(enc(1, 0) == 1.0f);
    CHECK(enc(2, 0) == 1.0f);
}

TEST_CASE("flat on-axis render matches dense quadrature and peaks at the center") {
    const int size = 64;
    const SceneAssets s = flat(size);
    LightParams p;
    p.d_lamp = 400.0;
    p.z0 = 300.0;
    p.theta_hp_rad = degrees_to_radians(40.0);
    RenderConfig cfg;
    cfg.n_samples = 2048;
    cfg.exposure = 1.0;
    cfg.reference_distance = 300.0;
    const ImageF e = render_irradiance(s, p, cfg, kWhite).diffuse;
    for (const auto [x, y] : {std::pair{31, 31}, {0, 0}, {63, 20}, {45, 10}}) {
        const double oracle =
            300.0 * 300.0 * disk_quadrature(pixel_position(x, y, size, size, 0.0), p, 320, 320);
        CHECK(e(x, y, 0) == doctest::Approx(oracle).epsilon(0.01));
    }

    const FillResidual r = render_fill_light(s, p, cfg);
    const float center = r.linear(31, 31, 1);
    for (int d = 1; d < 31; ++d) {
        CHECK(r.linear(31 - d, 31, 1) <= r.linear(31 - d + 1, 31, 1));
        CHECK(r.linear(31, 31 - d, 1) <= r.linear(31, 31 - d + 1, 1));
        CHECK(r.linear(31 - d, 31 - d, 1) < center);
    }
}

TEST_CASE("offset lamp displaces the bright region toward the offset") {
    const int size = 64;
    const SceneAssets s = flat(size);
    RenderConfig cfg;
    cfg.n_samples = 256;
    for (const auto [dx, dy] : {std::pair{200.0, 0.0}, {0.0, -200.0}, {-150.0, 150.0}}) {
        LightParams p;
        p.z0 = 150.0;
        p.dx = dx;
        p.dy = dy;
        const FillResidual r = render_fill_light(s, p, cfg);
        double sx = 0.0;
        double sy = 0.0;
        double total = 0.0;
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const double v = luminance({r.linear(x, y, 0), r.linear(x, y, 1), r.linear(x, y, 2)});
                const Vec3 pos = pixel_position(x, y, size, size, 0.0);
                sx += v * pos.x;
                sy += v * pos.y;
                total += v;
            }
        }
        sx /= total;
        sy /= total;
        CHECK(sx * dx + sy * dy > 0.0);
        CHECK(std::abs(sx * dy - sy * dx) < 0.2 * std::hypot(sx, sy) * std::hypot(dx, dy));
    }
}

TEST_CASE("residual is zero outside the mask, non-negative, deterministic") {
    const SceneAssets s = make_synthetic_face(3, 64, 64);
    LightParams p;
    p.dx = 250.0;
    p.dy = -120.0;
    p.z0 = 500.0;
    RenderConfig cfg;
    cfg.n_samples = 128;
    cfg.visibility.seed = 17;
    const FillResidual a = render_fill_light(s, p, cfg);
    cfg.threads = 1;
    const FillResidual b = render_fill_light(s, p, cfg);
    CHECK(a.linear == b.linear);
    CHECK(a.srgb == b.srgb);
    bool lit = false;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            for (int c = 0; c < 3; ++c) {
                CHECK(a.linear(x, y, c) >= 0.0f);
                CHECK(a.srgb(x, y, c) >= 0.0f);
                CHECK(a.srgb(x, y, c) <= 1.0f);
                if (s.face_mask(x, y) == 0) {
                    CHECK(a.linear(x, y, c) == 0.0f);
                    CHECK(a.srgb(x, y, c) == 0.0f);
                } else {
                    lit = lit || a.linear(x, y, c) > 0.0f;
                }
            }
        }
    }
    CHECK(lit);
}

TEST_CASE("emitter stride reuses visibility and stays close") {
    const SceneAssets s = make_synthetic_face(0, 48, 48);
    LightParams p;
    p.dx = 400.0;
    p.z0 = 300.0;
    RenderConfig cfg;
    cfg.n_samples = 256;
    const ImageF exact = render_irradiance(s, p, cfg).diffuse;
    cfg.visibility.emitter_stride = 4;
    const ImageF approx = render_irradiance(s, p, cfg).diffuse;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < exact.values().size(); ++i) {
        num += std::abs(exact.values()[i] - approx.values()[i]);
        den += exact.values()[i];
    }
    CHECK(num / den < 0.05);
}

TEST_CASE("scene validation") {
    SceneAssets s = flat(8);
    CHECK_NOTHROW(s.validate());
    s.albedo(0, 0, 0) = 1.5f;
    CHECK_THROWS_AS(s.validate(), ContractError);
    s = flat(8);
    s.normals(1, 1, 2) = 0.5f;
    CHECK_THROWS_AS(s.validate(), ContractError);
    s = flat(8);
    s.face_mask(0, 0) = 2;
    CHECK_THROWS_AS(s.validate(), ContractError);
    s = flat(8);
    s.albedo = ImageF(9, 8, 3);
    CHECK_THROWS_AS(s.validate(), ContractError);
}
