#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fillight/vec.hpp"

namespace fillight {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double degrees_to_radians(double deg) { return deg * kPi / 180.0; }
constexpr double radians_to_degrees(double rad) { return rad * 180.0 / kPi; }

/// Six-parameter lamp description. Lengths share the pixel unit of the depth map.
///
/// The lamp is a disk parallel to the image plane, centered at (dx, dy)
/// relative to the image center and lifted z0 toward the viewer from the
/// zero-depth reference plane. Its axis points at the subject.
struct LightParams {
    double temperature_k = 5500.0;
    double theta_hp_rad = degrees_to_radians(45.0);
    double z0 = 1000.0;
    double d_lamp = 400.0;
    double dx = 0.0;
    double dy = 0.0;

    bool operator==(const LightParams&) const = default;
};

struct FieldError {
    std::string field;
    std::string message;
};

/// Field-level diagnostics; empty when the parameters are valid.
std::vector<FieldError> check_fields(const LightParams& params);

/// Throws DomainError naming the first invalid field.
void validate(const LightParams& params);

/// Point on the emitter disk relative to its center, in pixels.
struct DiskSample {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const DiskSample&) const = default;
};

/// Fibonacci-spiral point set on a disk of diameter d_lamp.
std::vector<DiskSample> sample_disk(double d_lamp, std::size_t n);

/// Area-uniform i.i.d. points on the same disk. Used for variance studies of
/// the Monte Carlo estimator; the renderer defaults to the Fibonacci set.
std::vector<DiskSample> sample_disk_random(double d_lamp, std::size_t n, std::uint64_t seed);

struct IncidentRay {
    Vec3 direction;     // unit vector from the shaded point toward the emitter sample
    double distance;    // pixels
    double emit_angle;  // radians between the disk axis and the emission direction
};

/// Shaded point is (x, y, depth) with x, y relative to the image center
/// (x right, y down) and depth increasing away from the lamp.
IncidentRay incident_ray(const Vec3& pixel, const DiskSample& sample, const LightParams& params);

/// Cosine-lobe exponent that halves the intensity at theta_hp.
double emission_exponent(double theta_hp_rad);

double emission_weight(double emit_angle, double theta_hp_rad);

/// Lobe weight from cos(emit_angle) and a precomputed exponent.
inline double emission_weight_cos(double cos_angle, double exponent) {
    if (cos_angle <= 0.0) {
        return 0.0;
    }
    return std::pow(cos_angle, exponent);
}

}  // namespace fillight
