#include "fillight/planar.hpp"

#include <cmath>

#include <omp.h>

#include "emitter.hpp"

namespace fillight {

void PlanarConfig::validate() const {
    if (resolution < 8) {
        throw ContractError("planar resolution must be at least 8");
    }
    if (!(window > 0.0)) {
        throw ContractError("planar window must be positive");
    }
    if (n_samples < 1) {
        throw ContractError("planar n_samples must be at least 1");
    }
    if (!(reference_distance > 0.0)) {
        throw ContractError("planar reference distance must be positive");
    }
}

PlanarTargets render_planar_targets(const LightParams& params, const PlanarConfig& cfg) {
    cfg.validate();
    const auto emitters = detail::EmitterSet::build(params, cfg.n_samples, cfg.sampling, cfg.sampling_seed);
    const LinearRGB color = light_color(ColorTemperature(params.temperature_k));
    const double scale =
        cfg.exposure * cfg.reference_distance * cfg.reference_distance / static_cast<double>(emitters.samples.size());

    const int res = cfg.resolution;
    PlanarTargets out{Raster<double>(res, res, 3), Raster<double>(res, res, 2), res};
    const int team = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
    for (int row = 0; row < res; ++row) {
        for (int col = 0; col < res; ++col) {
            const Vec3 p = plane_position(col, row, cfg);
            // Facing normal (0,0,1) and full visibility: the cosine term is l.z.
            double sum = 0.0;
            for (const DiskSample& s : emitters.samples) {
                const Vec3 v{params.dx + s.x - p.x, params.dy + s.y - p.y, params.z0};
                const double r2 = dot(v, v);
                const double lz = v.z / std::sqrt(r2);
                sum += emission_weight_cos(lz, emitters.exponent) * lz / r2;
            }
            sum *= scale;
            out.irradiance(col, row, 0) = color.r * sum;
            out.irradiance(col, row, 1) = color.g * sum;
            out.irradiance(col, row, 2) = color.b * sum;

            const double ux = p.x - params.dx;
            const double uy = p.y - params.dy;
            const double len = std::sqrt(ux * ux + uy * uy);
            if (len > 0.0) {
                out.direction(col, row, 0) = ux / len;
                out.direction(col, row, 1) = uy / len;
            }
        }
    }
    return out;
}

Raster<double> concat_target(const PlanarTargets& t) {
    require_same_size(t.irradiance, t.direction, "concat_target");
    Raster<double> out(t.irradiance.width(), t.irradiance.height(), 6);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                out(x, y, c) = t.irradiance(x, y, c);
            }
            out(x, y, 3) = t.direction(x, y, 0);
            out(x, y, 4) = t.direction(x, y, 1);
        }
    }
    return out;
}

Raster<double> direction_as_rgb(const PlanarTargets& t) {
    Raster<double> out(t.direction.width(), t.direction.height(), 3);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out(x, y, 0) = t.direction(x, y, 0);
            out(x, y, 1) = t.direction(x, y, 1);
        }
    }
    return out;
}

}  // namespace fillight
