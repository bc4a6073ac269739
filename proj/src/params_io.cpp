#include "fillight/params_io.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace fillight {

namespace {

std::string summarize(const std::vector<FieldError>& errors) {
    std::string text = "invalid light parameters:";
    for (const auto& e : errors) {
        text += " " + e.field + " (" + e.message + ")";
    }
    return text;
}

}  // namespace

ParamsError::ParamsError(std::vector<FieldError> errors)
    : std::runtime_error(summarize(errors)), errors_(std::move(errors)) {}

nlohmann::json params_to_json(const LightParams& p) {
    return {
        {"temperature_k", p.temperature_k}, {"theta_hp_deg", radians_to_degrees(p.theta_hp_rad)},
        {"z0_px", p.z0},                    {"d_lamp_px", p.d_lamp},
        {"dx_px", p.dx},                    {"dy_px", p.dy},
    };
}

LightParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ParamsError(std::vector<FieldError>{{"params", "must be a JSON object"}});
    }
    std::vector<FieldError> errors;
    auto number = [&](const char* field, double fallback) {
        if (!j.contains(field)) {
            errors.push_back({field, "is required"});
            return fallback;
        }
        const auto& v = j.at(field);
        if (!v.is_number()) {
            errors.push_back({field, "must be a number"});
            return fallback;
        }
        return v.get<double>();
    };

    const LightParams defaults;
    LightParams p;
    p.temperature_k = number("temperature_k", defaults.temperature_k);
    p.theta_hp_rad = degrees_to_radians(number("theta_hp_deg", radians_to_degrees(defaults.theta_hp_rad)));
    p.z0 = number("z0_px", defaults.z0);
    p.d_lamp = number("d_lamp_px", defaults.d_lamp);
    p.dx = number("dx_px", defaults.dx);
    p.dy = number("dy_px", defaults.dy);

    // Range checks only for fields that parsed.
    for (auto& e : check_fields(p)) {
        const bool already = std::any_of(errors.begin(), errors.end(),
                                         [&](const FieldError& prior) { return prior.field == e.field; });
        if (!already) {
            errors.push_back(std::move(e));
        }
    }
    if (!errors.empty()) {
        throw ParamsError(std::move(errors));
    }
    return p;
}

}  // namespace fillight
