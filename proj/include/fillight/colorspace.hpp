#pragma once

namespace fillight {

struct LinearRGB {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    constexpr LinearRGB operator+(const LinearRGB& o) const { return {r + o.r, g + o.g, b + o.b}; }
    constexpr LinearRGB operator*(double s) const { return {r * s, g * s, b * s}; }
    constexpr LinearRGB operator*(const LinearRGB& o) const { return {r * o.r, g * o.g, b * o.b}; }
    constexpr bool operator==(const LinearRGB&) const = default;
};

struct SrgbColor {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    constexpr bool operator==(const SrgbColor&) const = default;
};

struct XyzColor {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct Chromaticity {
    double x = 0.0;
    double y = 0.0;
};

/// Correlated color temperature in kelvin, restricted to the range where the
/// Kang et al. (2002) chromaticity polynomials are defined.
class ColorTemperature {
public:
    static constexpr double kMinKelvin = 1667.0;
    static constexpr double kMaxKelvin = 25000.0;

    explicit ColorTemperature(double kelvin);

    double kelvin() const noexcept { return kelvin_; }

private:
    double kelvin_;
};

// sRGB transfer functions. The scalar forms operate on a single channel.
double srgb_to_linear(double encoded);
double linear_to_srgb(double linear);
LinearRGB srgb_to_linear(const SrgbColor& c);
SrgbColor linear_to_srgb(const LinearRGB& c);

/// Rec. 709 luminance of a linear-RGB triple.
constexpr double luminance(const LinearRGB& c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }

Chromaticity cct_to_chromaticity(ColorTemperature t);

/// XYZ with Y = 1 for the given temperature.
XyzColor cct_to_xyz(ColorTemperature t);

/// IEC 61966-2-1 XYZ to linear sRGB (D65). Negative channels are clamped to 0.
LinearRGB xyz_to_linear_rgb(const XyzColor& c);

/// Linear-RGB light color for a temperature, normalized to luminance 1.
LinearRGB light_color(ColorTemperature t);

}  // namespace fillight
