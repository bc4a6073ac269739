#include "fillight/colorspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fillight/errors.hpp"

namespace fillight {

namespace {

void require_unit_interval(double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("sRGB channel outside [0,1]: " + std::to_string(v));
    }
}

}  // namespace

ColorTemperature::ColorTemperature(double kelvin) : kelvin_(kelvin) {
    if (!(kelvin >= kMinKelvin && kelvin <= kMaxKelvin)) {
        throw DomainError("color temperature " + std::to_string(kelvin) + " K outside [1667, 25000] K");
    }
}

double srgb_to_linear(double encoded) {
    require_unit_interval(encoded);
    if (encoded <= 0.04045) {
        return encoded / 12.92;
    }
    return std::pow((encoded + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double linear) {
    if (!(linear >= 0.0)) {
        throw DomainError("negative or NaN linear channel: " + std::to_string(linear));
    }
    if (linear >= 1.0) {
        return 1.0;
    }
    // 0.04045 / 12.92, the image of the encoded-domain threshold.
    constexpr double kLinearThreshold = 0.04045 / 12.92;
    if (linear <= kLinearThreshold) {
        return linear * 12.92;
    }
    return std::min(1.0, 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055);
}

LinearRGB srgb_to_linear(const SrgbColor& c) {
    return {srgb_to_linear(c.r), srgb_to_linear(c.g), srgb_to_linear(c.b)};
}

SrgbColor linear_to_srgb(const LinearRGB& c) {
    return {linear_to_srgb(c.r), linear_to_srgb(c.g), linear_to_srgb(c.b)};
}

Chromaticity cct_to_chromaticity(ColorTemperature t) {
    const double k = t.kelvin();
    const double k2 = k * k;
    const double k3 = k2 * k;

    double x;
    if (k <= 4000.0) {
        x = -0.2661239e9 / k3 - 0.2343589e6 / k2 + 0.8776956e3 / k + 0.179910;
    } else {
        x = -3.0258469e9 / k3 + 2.1070379e6 / k2 + 0.2226347e3 / k + 0.240390;
    }

    const double x2 = x * x;
    const double x3 = x2 * x;
    double y;
    if (k <= 2222.0) {
        y = -1.1063814 * x3 - 1.34811020 * x2 + 2.18555832 * x - 0.20219683;
    } else if (k <= 4000.0) {
        y = -0.9549476 * x3 - 1.37418593 * x2 + 2.09137015 * x - 0.16748867;
    } else {
        y = 3.0817580 * x3 - 5.87338670 * x2 + 3.75112997 * x - 0.37001483;
    }
    return {x, y};
}

XyzColor cct_to_xyz(ColorTemperature t) {
    const Chromaticity c = cct_to_chromaticity(t);
    return {c.x / c.y, 1.0, (1.0 - c.x - c.y) / c.y};
}

LinearRGB xyz_to_linear_rgb(const XyzColor& c) {
    const double r = 3.2404542 * c.x - 1.5371385 * c.y - 0.4985314 * c.z;
    const double g = -0.9692660 * c.x + 1.8760108 * c.y + 0.0415560 * c.z;
    const double b = 0.0556434 * c.x - 0.2040259 * c.y + 1.0572252 * c.z;
    return {std::max(r, 0.0), std::max(g, 0.0), std::max(b, 0.0)};
}

LinearRGB light_color(ColorTemperature t) {
    const LinearRGB rgb = xyz_to_linear_rgb(cct_to_xyz(t));
    return rgb * (1.0 / luminance(rgb));
}

}  // namespace fillight
