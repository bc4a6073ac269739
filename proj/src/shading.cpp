#include "fillight/shading.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>

#include <omp.h>

#include "emitter.hpp"

namespace fillight {

void SceneAssets::validate() const {
    if (image.channels() != 3 || albedo.channels() != 3 || specular.channels() != 3 || normals.channels() != 3) {
        throw ContractError("image, normals, albedo and specular rasters must have 3 channels");
    }
    require_same_size(image, depth.raster(), "depth");
    require_same_size(image, normals, "normals");
    require_same_size(image, albedo, "albedo");
    require_same_size(image, specular, "specular");
    require_same_size(image, face_mask, "face mask");
    for (const ImageF* r : {&image, &albedo, &specular}) {
        for (float v : r->values()) {
            if (!(v >= 0.0f && v <= 1.0f)) {
                throw ContractError("color raster value outside [0,1]");
            }
        }
    }
    for (std::uint8_t m : face_mask.values()) {
        if (m > 1) {
            throw ContractError("face mask values must be 0 or 1");
        }
    }
    for (int y = 0; y < normals.height(); ++y) {
        for (int x = 0; x < normals.width(); ++x) {
            const Vec3 n{normals(x, y, 0), normals(x, y, 1), normals(x, y, 2)};
            if (std::abs(length(n) - 1.0) > 1e-3) {
                throw ContractError("normals must be unit length");
            }
        }
    }
}

void RenderConfig::validate() const {
    if (n_samples < 1) {
        throw ContractError("n_samples must be at least 1");
    }
    if (!(shininess > 0.0)) {
        throw ContractError("shininess must be positive");
    }
    if (!(epsilon > 0.0)) {
        throw ContractError("epsilon must be positive");
    }
    if (!(exposure >= 0.0)) {
        throw ContractError("exposure must be non-negative");
    }
    visibility.validate();
}

double blinn_phong(const Vec3& normal, const Vec3& light_dir, double shininess) {
    const Vec3 sum = light_dir + Vec3{0.0, 0.0, 1.0};
    const double len = length(sum);
    if (!(len > 0.0)) {
        return 0.0;
    }
    const double cos_h = dot(normal, sum) / len;
    if (cos_h <= 0.0) {
        return 0.0;
    }
    return (shininess + 2.0) / (2.0 * kPi) * std::pow(cos_h, shininess);
}

namespace detail {

EmitterSet EmitterSet::build(const LightParams& params, std::size_t n, DiskSampling sampling, std::uint64_t seed) {
    validate(params);
    EmitterSet set;
    set.params = params;
    set.exponent = emission_exponent(params.theta_hp_rad);
    set.samples = sampling == DiskSampling::kFibonacci ? sample_disk(params.d_lamp, n)
                                                       : sample_disk_random(params.d_lamp, n, seed);
    return set;
}

std::vector<std::size_t> nearest_representatives(const std::vector<DiskSample>& samples, int stride) {
    std::vector<std::size_t> rep_of(samples.size());
    const std::size_t s = static_cast<std::size_t>(stride);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (k % s == 0) {
            rep_of[k] = k / s;
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < samples.size(); r += s) {
            const double ddx = samples[k].x - samples[r].x;
            const double ddy = samples[k].y - samples[r].y;
            const double d2 = ddx * ddx + ddy * ddy;
            if (d2 < best) {
                best = d2;
                rep_of[k] = r / s;
            }
        }
    }
    return rep_of;
}

}  // namespace detail

namespace {

// Runs body(row) for every row, forwarding the first exception.
template <typename Body>
void parallel_rows(int rows, int threads, Body&& body) {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
    for (int row = 0; row < rows; ++row) {
        try {
            body(row);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace

IrradianceMaps render_irradiance(const SceneAssets& scene, const LightParams& params, const RenderConfig& cfg,
                                 std::optional<LinearRGB> light) {
    cfg.validate();
    const int width = scene.width();
    const int height = scene.height();
    require_same_size(scene.image, scene.depth.raster(), "depth");
    require_same_size(scene.image, scene.normals, "normals");
    require_same_size(scene.image, scene.face_mask, "face mask");

    const detail::EmitterSet emitters =
        detail::EmitterSet::build(params, cfg.n_samples, cfg.sampling, cfg.sampling_seed);
    const LinearRGB color = light.value_or(light_color(ColorTemperature(params.temperature_k)));
    const double reference = cfg.reference_distance > 0.0 ? cfg.reference_distance : static_cast<double>(height);
    const double scale = cfg.exposure * reference * reference / static_cast<double>(emitters.samples.size());

    const int stride = cfg.visibility.emitter_stride;
    const std::vector<std::size_t> rep_of =
        stride > 1 ? detail::nearest_representatives(emitters.samples, stride) : std::vector<std::size_t>{};
    const std::size_t rep_count = (emitters.samples.size() + stride - 1) / stride;

    IrradianceMaps maps{ImageF(width, height, 3), ImageF(width, height, 3)};
    const double emitter_col_offset = 0.5 * width - 0.5;
    const double emitter_row_offset = 0.5 * height - 0.5;
    const std::size_t n = emitters.samples.size();

    parallel_rows(height, cfg.threads, [&](int row) {
        std::vector<double> rep_visibility(stride > 1 ? rep_count : 0);
        for (int col = 0; col < width; ++col) {
            if (scene.face_mask(col, row) == 0) {
                continue;
            }
            const double depth = scene.depth.at(col, row);
            const Vec3 pos = pixel_position(col, row, width, height, depth);
            const Vec3 normal{scene.normals(col, row, 0), scene.normals(col, row, 1), scene.normals(col, row, 2)};
            const Vec3 march_start{static_cast<double>(col), static_cast<double>(row), -depth};
            const std::uint64_t pixel_key = static_cast<std::uint64_t>(row) * width + col;
            std::fill(rep_visibility.begin(), rep_visibility.end(), -1.0);

            double diffuse = 0.0;
            double specular = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const DiskSample& s = emitters.samples[k];
                const Vec3 v{params.dx + s.x - pos.x, params.dy + s.y - pos.y, params.z0 + depth};
                const double r2 = dot(v, v);
                if (!(r2 > 0.0)) {
                    throw GeometryError("emitter sample coincides with the shaded point");
                }
                const Vec3 l = v / std::sqrt(r2);
                const double w = emission_weight_cos(l.z, emitters.exponent);
                if (w == 0.0) {
                    continue;
                }
                const double cos_n = std::max(0.0, dot(normal, l));
                const double lobe = cfg.specular_enabled ? blinn_phong(normal, l, cfg.shininess) : 0.0;
                if (cos_n == 0.0 && lobe == 0.0) {
                    continue;
                }
                double vis = 1.0;
                if (cfg.visibility_enabled) {
                    auto trace = [&](std::size_t idx) {
                        const DiskSample& e = emitters.samples[idx];
                        const Vec3 target{params.dx + e.x + emitter_col_offset, params.dy + e.y + emitter_row_offset,
                                          params.z0};
                        return soft_visibility(march_start, target, scene.depth, cfg.visibility,
                                               (pixel_key << 32) ^ static_cast<std::uint64_t>(idx));
                    };
                    if (stride > 1) {
                        double& cached = rep_visibility[rep_of[k]];
                        if (cached < 0.0) {
                            cached = trace(rep_of[k] * stride);
                        }
                        vis = cached;
                    } else {
                        vis = trace(k);
                    }
                }
                const double g = w * vis / r2;
                diffuse += g * cos_n;
                specular += g * lobe;
            }
            diffuse *= scale;
            specular *= scale;
            maps.diffuse(col, row, 0) = static_cast<float>(color.r * diffuse);
            maps.diffuse(col, row, 1) = static_cast<float>(color.g * diffuse);
            maps.diffuse(col, row, 2) = static_cast<float>(color.b * diffuse);
            maps.specular(col, row, 0) = static_cast<float>(color.r * specular);
            maps.specular(col, row, 1) = static_cast<float>(color.g * specular);
            maps.specular(col, row, 2) = static_cast<float>(color.b * specular);
        }
    });
    return maps;
}

ImageF diffuse_irradiance(const SceneAssets& scene, const LightParams& params, const RenderConfig& cfg) {
    RenderConfig diffuse_only = cfg;
    diffuse_only.specular_enabled = false;
    return render_irradiance(scene, params, diffuse_only).diffuse;
}

ImageF specular_irradiance(const SceneAssets& scene, const LightParams& params, const RenderConfig& cfg) {
    RenderConfig with_specular = cfg;
    with_specular.specular_enabled = true;
    return render_irradiance(scene, params, with_specular).specular;
}

NormalizedPair normalize_reflectance(const LinearRGB& albedo, const LinearRGB& specular, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw DomainError("epsilon must be positive");
    }
    const double alpha = std::min(1.0, 1.0 / (luminance(albedo) + luminance(specular) + epsilon));
    return {albedo * alpha, specular * alpha, alpha};
}

NormalizedReflectance normalize_reflectance(const ImageF& albedo_lin, const ImageF& specular_lin, double epsilon) {
    require_same_size(albedo_lin, specular_lin, "normalize_reflectance");
    NormalizedReflectance out{ImageF(albedo_lin.width(), albedo_lin.height(), 3),
                              ImageF(albedo_lin.width(), albedo_lin.height(), 3),
                              Raster<float>(albedo_lin.width(), albedo_lin.height(), 1)};
    for (int y = 0; y < albedo_lin.height(); ++y) {
        for (int x = 0; x < albedo_lin.width(); ++x) {
            const LinearRGB a{albedo_lin(x, y, 0), albedo_lin(x, y, 1), albedo_lin(x, y, 2)};
            const LinearRGB s{specular_lin(x, y, 0), specular_lin(x, y, 1), specular_lin(x, y, 2)};
            const NormalizedPair n = normalize_reflectance(a, s, epsilon);
            out.albedo(x, y, 0) = static_cast<float>(n.albedo.r);
            out.albedo(x, y, 1) = static_cast<float>(n.albedo.g);
            out.albedo(x, y, 2) = static_cast<float>(n.albedo.b);
            out.specular(x, y, 0) = static_cast<float>(n.specular.r);
            out.specular(x, y, 1) = static_cast<float>(n.specular.g);
            out.specular(x, y, 2) = static_cast<float>(n.specular.b);
            out.alpha(x, y) = static_cast<float>(n.alpha);
        }
    }
    return out;
}

ImageF compose_residual(const ImageF& diffuse, const ImageF& specular, const ImageF& albedo_norm,
                        const ImageF& specular_norm, const MaskRaster& mask) {
    require_same_size(diffuse, specular, "compose_residual");
    require_same_size(diffuse, albedo_norm, "compose_residual");
    require_same_size(diffuse, specular_norm, "compose_residual");
    require_same_size(diffuse, mask, "compose_residual");
    ImageF out(diffuse.width(), diffuse.height(), 3);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            if (mask(x, y) == 0) {
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                const double v = static_cast<double>(albedo_norm(x, y, c)) * diffuse(x, y, c) +
                                 static_cast<double>(specular_norm(x, y, c)) * specular(x, y, c);
                out(x, y, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

ImageF residual_to_srgb(const ImageF& residual_linear) {
    ImageF out(residual_linear.width(), residual_linear.height(), residual_linear.channels());
    auto src = residual_linear.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<float>(linear_to_srgb(src[i]));
    }
    return out;
}

ImageF decode_srgb(const ImageF& encoded) {
    ImageF out(encoded.width(), encoded.height(), encoded.channels());
    auto src = encoded.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<float>(srgb_to_linear(src[i]));
    }
    return out;
}

ImageF compose_target(const ImageF& image, const ImageF& residual_srgb, double gamma) {
    if (!(gamma >= 0.2 && gamma <= 0.4)) {
        throw DomainError("carrier gamma must lie in [0.2, 0.4]");
    }
    require_same_size(image, residual_srgb, "compose_target");
    if (image.channels() != residual_srgb.channels()) {
        throw ContractError("compose_target: channel mismatch");
    }
    ImageF out(image.width(), image.height(), image.channels());
    auto a = image.values();
    auto r = residual_srgb.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        dst[i] = static_cast<float>(gamma * a[i] + 0.6 * r[i]);
    }
    return out;
}

FillResidual render_fill_light(const SceneAssets& scene, const LightParams& params, const RenderConfig& cfg) {
    scene.validate();
    const IrradianceMaps maps = render_irradiance(scene, params, cfg);
    const NormalizedReflectance refl =
        normalize_reflectance(decode_srgb(scene.albedo), decode_srgb(scene.specular), cfg.epsilon);
    FillResidual out;
    out.linear = compose_residual(maps.diffuse, maps.specular, refl.albedo, refl.specular, scene.face_mask);
    out.srgb = residual_to_srgb(out.linear);
    return out;
}

}  // namespace fillight
