#include "fillight/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fillight {

void VisibilityConfig::validate() const {
    if (steps < 2) {
        throw ContractError("visibility steps must be at least 2");
    }
    if (!(jitter_amplitude >= 0.0 && jitter_amplitude < 1.0)) {
        throw ContractError("visibility jitter amplitude must lie in [0, 1)");
    }
    if (!(occlusion_softness > 0.0)) {
        throw ContractError("occlusion softness must be positive");
    }
    if (!(bias >= 0.0)) {
        throw ContractError("visibility bias must be non-negative");
    }
    if (emitter_stride < 1) {
        throw ContractError("emitter stride must be at least 1");
    }
}

DepthRaster::DepthRaster(Raster<float> depth) : depth_(std::move(depth)) {
    if (depth_.channels() != 1) {
        throw ContractError("depth raster must have exactly one channel");
    }
    float min_depth = std::numeric_limits<float>::infinity();
    for (float d : depth_.values()) {
        if (!std::isfinite(d)) {
            throw ContractError("depth raster contains non-finite values");
        }
        min_depth = std::min(min_depth, d);
    }
    max_height_ = depth_.empty() ? 0.0 : -static_cast<double>(min_depth);
}

bool DepthRaster::sample(double x, double y, double& depth) const noexcept {
    const int w = depth_.width();
    const int h = depth_.height();
    if (!(x >= 0.0 && y >= 0.0 && x <= w - 1 && y <= h - 1)) {
        return false;
    }
    const int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
    const int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = depth_(x0, y0) + (depth_(x1, y0) - depth_(x0, y0)) * fx;
    const double bottom = depth_(x0, y1) + (depth_(x1, y1) - depth_(x0, y1)) * fx;
    depth = top + (bottom - top) * fy;
    return true;
}

std::uint64_t mix_bits(std::uint64_t x) noexcept {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

double smoothstep01(double u) {
    if (u <= 0.0) {
        return 0.0;
    }
    if (u >= 1.0) {
        return 1.0;
    }
    return u * u * (3.0 - 2.0 * u);
}

// Largest t in [0, 1] such that the xy-projection of from + t*(to - from)
// stays inside [0, w-1] x [0, h-1]. The start point is assumed inside.
double exit_parameter(double x0, double y0, double dx, double dy, int w, int h) {
    double t = 1.0;
    auto clip = [&t](double start, double delta, double hi) {
        if (delta > 0.0) {
            t = std::min(t, (hi - start) / delta);
        } else if (delta < 0.0) {
            t = std::min(t, (0.0 - start) / delta);
        }
    };
    clip(x0, dx, w - 1);
    clip(y0, dy, h - 1);
    return std::max(t, 0.0);
}

}  // namespace

double soft_visibility(const Vec3& pixel, const Vec3& emitter, const DepthRaster& depth,
                       const VisibilityConfig& cfg, std::uint64_t jitter_key) {
    const double rise = emitter.z - pixel.z;
    if (!(rise >= 0.0)) {
        throw ContractError("emitter must not lie below the shaded point");
    }
    // No march sample can sit under a surface higher than the ray.
    const double occluding_height = depth.max_height() - cfg.bias;
    if (pixel.z >= occluding_height) {
        return 1.0;
    }
    const double dx = emitter.x - pixel.x;
    const double dy = emitter.y - pixel.y;
    if (!(pixel.x >= 0.0 && pixel.y >= 0.0 && pixel.x <= depth.width() - 1 && pixel.y <= depth.height() - 1)) {
        return 1.0;
    }
    const double t_end = exit_parameter(pixel.x, pixel.y, dx, dy, depth.width(), depth.height());
    if (t_end <= 0.0) {
        return 1.0;
    }

    const double slots = static_cast<double>(cfg.steps + 1);
    const std::uint64_t key = mix_bits(jitter_key ^ mix_bits(cfg.seed));
    double transmittance = 1.0;
    for (int i = 0; i < cfg.steps; ++i) {
        const double u = static_cast<double>(mix_bits(key + static_cast<std::uint64_t>(i)) >> 11) * 0x1.0p-53;
        const double t = t_end * (i + 1 + cfg.jitter_amplitude * (u - 0.5)) / slots;
        const double ray_height = pixel.z + t * rise;
        if (ray_height >= occluding_height) {
            break;  // the ray only rises from here on
        }
        double scene_depth;
        if (!depth.sample(pixel.x + t * dx, pixel.y + t * dy, scene_depth)) {
            continue;
        }
        // ray depth minus scene depth, with depth = -height
        const double advantage = (-ray_height) - scene_depth - cfg.bias;
        const double occlusion = smoothstep01(advantage / cfg.occlusion_softness);
        transmittance *= 1.0 - occlusion;
        if (transmittance <= 0.0) {
            return 0.0;
        }
    }
    return std::clamp(transmittance, 0.0, 1.0);
}

}  // namespace fillight
