#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fillight/lightgeom.hpp"

namespace fillight {

/// Rejected parameter document, with one entry per offending field.
class ParamsError : public std::runtime_error {
public:
    explicit ParamsError(std::vector<FieldError> errors);

    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    std::vector<FieldError> errors_;
};

/// Light parameters as they appear in files and requests; theta_hp is in degrees.
///
///   {"temperature_k": 5500, "theta_hp_deg": 45, "z0_px": 1800,
///    "d_lamp_px": 400, "dx_px": 0, "dy_px": 1800}
nlohmann::json params_to_json(const LightParams& params);

/// Missing, non-numeric and out-of-range fields are all reported together.
LightParams params_from_json(const nlohmann::json& j);

}  // namespace fillight
