#include <doctest.h>

#include <cmath>

#include "fillight/colorspace.hpp"
#include "fillight/errors.hpp"

using namespace fillight;

namespace {

// Kang et al. 2002 chromaticity, evaluated independently of the library.
double kang_x(double t) {
    if (t <= 4000.0) {
        return -0.2661239e9 / (t * t * t) - 0.2343589e6 / (t * t) + 0.8776956e3 / t + 0.179910;
    }
    return -3.0258469e9 / (t * t * t) + 2.1070379e6 / (t * t) + 0.2226347e3 / t + 0.240390;
}

}  // namespace

TEST_CASE("srgb_to_linear examples") {
    CHECK(srgb_to_linear(0.0) == 0.0);
    CHECK(srgb_to_linear(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(srgb_to_linear(0.04045) == doctest::Approx(0.04045 / 12.92).epsilon(1e-12));
    CHECK(srgb_to_linear(0.5) == doctest::Approx(std::pow((0.5 + 0.055) / 1.055, 2.4)).epsilon(1e-12));
}

TEST_CASE("srgb_to_linear rejects out-of-range input") {
    CHECK_THROWS_AS(srgb_to_linear(-0.01), DomainError);
    CHECK_THROWS_AS(srgb_to_linear(1.01), DomainError);
    CHECK_THROWS_AS(srgb_to_linear(std::nan("")), DomainError);
}

TEST_CASE("linear_to_srgb examples") {
    CHECK(linear_to_srgb(0.0031308) == doctest::Approx(0.04045).epsilon(1e-4));
    CHECK(linear_to_srgb(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(linear_to_srgb(2.0) == 1.0);
    CHECK_THROWS_AS(linear_to_srgb(-1e-9), DomainError);
}

TEST_CASE("transfer functions are monotone and invert each other") {
    double prev_lin = -1.0;
    double prev_enc = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = i / 10000.0;
        const double lin = srgb_to_linear(x);
        const double enc = linear_to_srgb(x);
        CHECK(lin > prev_lin);
        CHECK(enc > prev_enc);
        prev_lin = lin;
        prev_enc = enc;
        REQUIRE(std::abs(linear_to_srgb(lin) - x) < 1e-9);
    }
}

TEST_CASE("triple forms apply channel-wise") {
    const LinearRGB lin = srgb_to_linear(SrgbColor{0.2, 0.5, 0.9});
    CHECK(lin.r == srgb_to_linear(0.2));
    CHECK(lin.g == srgb_to_linear(0.5));
    CHECK(lin.b == srgb_to_linear(0.9));
    const SrgbColor back = linear_to_srgb(LinearRGB{lin.r, lin.g, 3.0});
    CHECK(back.r == doctest::Approx(0.2));
    CHECK(back.b == 1.0);
}

TEST_CASE("luminance examples and linearity") {
    CHECK(luminance({1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(luminance({1, 0, 0}) == 0.2126);
    CHECK(luminance({0, 0, 0}) == 0.0);
    const LinearRGB c1{0.3, 0.7, 0.1};
    const LinearRGB c2{2.0, 0.25, 5.0};
    const double a = 1.7;
    const double b = 0.4;
    CHECK(std::abs(luminance(c1 * a + c2 * b) - (a * luminance(c1) + b * luminance(c2))) < 1e-12);
}

TEST_CASE("ColorTemperature validity range") {
    CHECK_NOTHROW(ColorTemperature(1667.0));
    CHECK_NOTHROW(ColorTemperature(25000.0));
    CHECK_THROWS_AS(ColorTemperature(1666.0), DomainError);
    CHECK_THROWS_AS(ColorTemperature(25001.0), DomainError);
    CHECK_THROWS_AS(ColorTemperature(std::nan("")), DomainError);
}

TEST_CASE("cct_to_xyz examples") {
    const Chromaticity d65 = cct_to_chromaticity(ColorTemperature(6504.0));
    CHECK(std::abs(d65.x - 0.3127) < 0.01);
    CHECK(std::abs(d65.y - 0.3290) < 0.01);
    CHECK(d65.x == doctest::Approx(kang_x(6504.0)).epsilon(1e-12));
    CHECK(cct_to_chromaticity(ColorTemperature(3000.0)).x == doctest::Approx(kang_x(3000.0)).epsilon(1e-12));

    double prev = 1.0;
    for (double t = 3000.0; t <= 8000.0; t += 10.0) {
        const double x = cct_to_chromaticity(ColorTemperature(t)).x;
        CHECK(x < prev);
        prev = x;
    }
    for (double t : {1667.0, 2500.0, 4000.0, 4001.0, 9000.0, 25000.0}) {
        const XyzColor xyz = cct_to_xyz(ColorTemperature(t));
        CHECK(xyz.y == 1.0);
        const Chromaticity c = cct_to_chromaticity(ColorTemperature(t));
        CHECK(c.x > 0.0);
        CHECK(c.y > 0.0);
        CHECK(c.x + c.y < 1.0);
        CHECK(xyz.x == doctest::Approx(c.x / c.y));
        CHECK(xyz.z == doctest::Approx((1.0 - c.x - c.y) / c.y));
    }
}

TEST_CASE("xyz_to_linear_rgb examples") {
    const LinearRGB white = xyz_to_linear_rgb({0.9505, 1.0, 1.089});
    CHECK(std::abs(white.r - 1.0) < 1e-3);
    CHECK(std::abs(white.g - 1.0) < 1e-3);
    CHECK(std::abs(white.b - 1.0) < 1e-3);
    const LinearRGB zero = xyz_to_linear_rgb({0, 0, 0});
    CHECK(zero == LinearRGB{0, 0, 0});
    const LinearRGB warm = xyz_to_linear_rgb(cct_to_xyz(ColorTemperature(3000.0)));
    CHECK(warm.r > warm.b);
    // Saturated green lies outside the gamut on the red side.
    const LinearRGB clamped = xyz_to_linear_rgb({0.1, 1.0, 0.1});
    CHECK(clamped.r == 0.0);
}

TEST_CASE("R/B ratio decreases from warm to cool") {
    double prev = std::numeric_limits<double>::infinity();
    for (double t = 2500.0; t <= 9000.0; t += 25.0) {
        const LinearRGB c = xyz_to_linear_rgb(cct_to_xyz(ColorTemperature(t)));
        const double ratio = c.r / c.b;
        CHECK(ratio < prev);
        prev = ratio;
    }
}

TEST_CASE("light_color has unit luminance") {
    for (double t : {2700.0, 4571.0, 5500.0, 7545.0, 12000.0}) {
        const LinearRGB c = light_color(ColorTemperature(t));
        CHECK(luminance(c) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.r >= 0.0);
        CHECK(c.g >= 0.0);
        CHECK(c.b >= 0.0);
    }
}
