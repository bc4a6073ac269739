#include "fillight/lightgeom.hpp"

#include <algorithm>
#include <random>

#include "fillight/colorspace.hpp"
#include "fillight/errors.hpp"

namespace fillight {

std::vector<FieldError> check_fields(const LightParams& p) {
    std::vector<FieldError> errors;
    auto finite = [](double v) { return std::isfinite(v); };

    if (!(p.temperature_k >= ColorTemperature::kMinKelvin && p.temperature_k <= ColorTemperature::kMaxKelvin)) {
        errors.push_back({"temperature_k", "must lie in [1667, 25000] K"});
    }
    if (!(p.theta_hp_rad > 0.0 && p.theta_hp_rad < kPi / 2.0)) {
        errors.push_back({"theta_hp_deg", "must lie strictly between 0 and 90 degrees"});
    }
    if (!(p.z0 > 0.0) || !finite(p.z0)) {
        errors.push_back({"z0_px", "must be positive and finite"});
    }
    if (!(p.d_lamp > 0.0) || !finite(p.d_lamp)) {
        errors.push_back({"d_lamp_px", "must be positive and finite"});
    }
    if (!finite(p.dx)) {
        errors.push_back({"dx_px", "must be finite"});
    }
    if (!finite(p.dy)) {
        errors.push_back({"dy_px", "must be finite"});
    }
    return errors;
}

void validate(const LightParams& params) {
    const auto errors = check_fields(params);
    if (!errors.empty()) {
        throw DomainError("invalid light parameter " + errors.front().field + ": " + errors.front().message);
    }
}

std::vector<DiskSample> sample_disk(double d_lamp, std::size_t n) {
    if (n == 0) {
        throw DomainError("disk sample count must be at least 1");
    }
    if (!(d_lamp > 0.0)) {
        throw DomainError("disk diameter must be positive");
    }
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    const double radius = 0.5 * d_lamp;
    const double count = static_cast<double>(n);

    std::vector<DiskSample> samples(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double kd = static_cast<double>(k);
        const double r = radius * std::sqrt((kd + 0.5) / count);
        const double theta = kd * golden_angle;
        samples[k] = {r * std::cos(theta), r * std::sin(theta)};
    }
    return samples;
}

std::vector<DiskSample> sample_disk_random(double d_lamp, std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw DomainError("disk sample count must be at least 1");
    }
    if (!(d_lamp > 0.0)) {
        throw DomainError("disk diameter must be positive");
    }
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = 0.5 * d_lamp;

    std::vector<DiskSample> samples(n);
    for (auto& s : samples) {
        const double r = radius * std::sqrt(unit(engine));
        const double theta = 2.0 * kPi * unit(engine);
        s = {r * std::cos(theta), r * std::sin(theta)};
    }
    return samples;
}

IncidentRay incident_ray(const Vec3& pixel, const DiskSample& sample, const LightParams& params) {
    const Vec3 v{params.dx + sample.x - pixel.x, params.dy + sample.y - pixel.y, params.z0 + pixel.z};
    const double distance = length(v);
    if (!(distance > 0.0)) {
        throw GeometryError("emitter sample coincides with the shaded point");
    }
    const Vec3 direction = v / distance;
    return {direction, distance, std::acos(std::clamp(direction.z, -1.0, 1.0))};
}

double emission_exponent(double theta_hp_rad) {
    if (!(theta_hp_rad > 0.0 && theta_hp_rad < kPi / 2.0)) {
        throw DomainError("half-peak angle must lie in (0, pi/2)");
    }
    return std::log(0.5) / std::log(std::cos(theta_hp_rad));
}

double emission_weight(double emit_angle, double theta_hp_rad) {
    const double p = emission_exponent(theta_hp_rad);
    if (emit_angle >= kPi / 2.0) {
        return 0.0;
    }
    return emission_weight_cos(std::cos(emit_angle), p);
}

}  // namespace fillight
