#include "fillight/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "fillight/digest.hpp"
#include "fillight/params_io.hpp"

namespace fs = std::filesystem;

namespace fillight {

namespace {

std::string dims(int w, int h) { return std::to_string(h) + "x" + std::to_string(w); }

template <typename T>
void require_dims(const Raster<T>& r, const ImageF& image, const char* asset) {
    if (!r.same_size(image)) {
        throw AssetError(AssetErrorCode::kDimensionMismatch, asset,
                         std::string(asset) + " is " + dims(r.width(), r.height()) + " but image is " +
                             dims(image.width(), image.height()));
    }
}

const Bytes& require_asset(const AssetBundle& bundle, const char* name) {
    const auto it = bundle.find(name);
    if (it == bundle.end()) {
        throw AssetError(AssetErrorCode::kMissingFile, name, std::string("missing asset: ") + name);
    }
    return it->second;
}

template <typename Fn>
auto decode_asset(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const DecodeError& e) {
        throw AssetError(AssetErrorCode::kUndecodable, name, std::string(name) + ": " + e.what());
    }
}

}  // namespace

SceneAssets decode_scene(const AssetBundle& bundle, std::string id, const LoadOptions& opts) {
    if (!(opts.depth_scale > 0.0) || !std::isfinite(opts.depth_scale)) {
        throw ContractError("depth scale must be positive and finite");
    }
    for (const auto& slot : kAssetSlots) {
        require_asset(bundle, slot.name);
    }

    SceneAssets s;
    s.id = std::move(id);
    s.image = decode_asset("image", [&] { return decode_png_rgb(require_asset(bundle, "image")); });
    s.albedo = decode_asset("albedo", [&] { return decode_png_rgb(require_asset(bundle, "albedo")); });
    s.specular = decode_asset("specular", [&] { return decode_png_rgb(require_asset(bundle, "specular")); });
    const auto mask_codes = decode_asset("mask", [&] { return decode_png_gray(require_asset(bundle, "mask")); });
    auto depth = decode_asset("depth", [&] { return decode_pfm(require_asset(bundle, "depth")); });
    auto normals = decode_asset("normal", [&] { return decode_pfm(require_asset(bundle, "normal")); });

    if (depth.channels() != 1) {
        throw AssetError(AssetErrorCode::kUndecodable, "depth", "depth map must be a 1-channel PFM");
    }
    if (normals.channels() != 3) {
        throw AssetError(AssetErrorCode::kUndecodable, "normal", "normal map must be a 3-channel PFM");
    }
    require_dims(depth, s.image, "depth");
    require_dims(normals, s.image, "normal");
    require_dims(s.albedo, s.image, "albedo");
    require_dims(s.specular, s.image, "specular");
    require_dims(mask_codes, s.image, "mask");

    for (float& d : depth.values()) {
        if (!std::isfinite(d)) {
            throw AssetError(AssetErrorCode::kUndecodable, "depth", "depth map contains non-finite values");
        }
        d = static_cast<float>(d * opts.depth_scale);
    }
    s.depth = DepthRaster(std::move(depth));

    for (int y = 0; y < normals.height(); ++y) {
        for (int x = 0; x < normals.width(); ++x) {
            const Vec3 n{normals(x, y, 0), normals(x, y, 1), normals(x, y, 2)};
            const double len = length(n);
            Vec3 unit{0.0, 0.0, 1.0};
            if (len > 1e-12 && std::isfinite(len)) {
                unit = n / len;
            } else {
                ++s.normal_fallbacks;
            }
            normals(x, y, 0) = static_cast<float>(unit.x);
            normals(x, y, 1) = static_cast<float>(unit.y);
            normals(x, y, 2) = static_cast<float>(unit.z);
        }
    }
    s.normals = std::move(normals);

    s.face_mask = MaskRaster(mask_codes.width(), mask_codes.height(), 1);
    for (std::size_t i = 0; i < mask_codes.values().size(); ++i) {
        s.face_mask.values()[i] = mask_codes.values()[i] > 127 ? 1 : 0;
    }
    return s;
}

SceneAssets load_scene(const fs::path& root, const std::string& image_id, const LoadOptions& opts) {
    const fs::path dir = root / image_id;
    AssetBundle bundle;
    for (const auto& slot : kAssetSlots) {
        const fs::path file = dir / slot.file;
        if (!fs::is_regular_file(file)) {
            throw AssetError(AssetErrorCode::kMissingFile, slot.name, "missing asset file " + file.string());
        }
        bundle[slot.name] = read_file(file);
    }
    return decode_scene(bundle, image_id, opts);
}

const char* to_string(QualityReason reason) {
    switch (reason) {
        case QualityReason::kOk:
            return "ok";
        case QualityReason::kFailedSegmentation:
            return "failed-segmentation";
        case QualityReason::kInvalidRender:
            return "invalid-render";
        case QualityReason::kResidualTooDark:
            return "residual-too-dark";
        case QualityReason::kResidualTooBright:
            return "residual-too-bright";
        case QualityReason::kLoadError:
            return "load-error";
        case QualityReason::kRenderError:
            return "render-error";
    }
    return "unknown";
}

nlohmann::json to_json(const QualityReport& r) {
    return {
        {"verdict", r.pass ? "pass" : "fail"},
        {"reason", to_string(r.reason)},
        {"mask_coverage", r.mask_coverage},
        {"residual_energy", r.residual_energy},
        {"nan_count", r.nan_count},
        {"normal_fallbacks", r.normal_fallbacks},
    };
}

double mask_coverage(const MaskRaster& mask) {
    if (mask.pixel_count() == 0) {
        return 0.0;
    }
    const auto on = std::count_if(mask.values().begin(), mask.values().end(), [](std::uint8_t m) { return m != 0; });
    return static_cast<double>(on) / static_cast<double>(mask.pixel_count());
}

QualityReport quality_check(const SceneAssets& scene, const FillResidual& residual,
                            const QualityThresholds& thresholds) {
    QualityReport r;
    r.mask_coverage = mask_coverage(scene.face_mask);
    r.normal_fallbacks = scene.normal_fallbacks;

    for (const ImageF* raster : {&residual.linear, &residual.srgb}) {
        r.nan_count += static_cast<std::size_t>(
            std::count_if(raster->values().begin(), raster->values().end(), [](float v) { return !std::isfinite(v); }));
    }

    double energy = 0.0;
    std::size_t masked = 0;
    if (residual.linear.same_size(scene.face_mask) && residual.linear.channels() == 3) {
        for (int y = 0; y < residual.linear.height(); ++y) {
            for (int x = 0; x < residual.linear.width(); ++x) {
                if (scene.face_mask(x, y) == 0) {
                    continue;
                }
                const LinearRGB c{residual.linear(x, y, 0), residual.linear(x, y, 1), residual.linear(x, y, 2)};
                if (std::isfinite(c.r) && std::isfinite(c.g) && std::isfinite(c.b)) {
                    energy += luminance(c);
                }
                ++masked;
            }
        }
    } else {
        ++r.nan_count;  // unusable render
    }
    r.residual_energy = masked > 0 ? energy / static_cast<double>(masked) : 0.0;

    if (r.mask_coverage < thresholds.min_coverage) {
        r.reason = QualityReason::kFailedSegmentation;
    } else if (r.nan_count > 0) {
        r.reason = QualityReason::kInvalidRender;
    } else if (r.residual_energy < thresholds.energy_floor) {
        r.reason = QualityReason::kResidualTooDark;
    } else if (r.residual_energy > thresholds.energy_ceiling) {
        r.reason = QualityReason::kResidualTooBright;
    } else {
        r.reason = QualityReason::kOk;
    }
    r.pass = r.reason == QualityReason::kOk;
    return r;
}

PairedRecord generate_pair(const SceneAssets& scene, const LightParams& params, double gamma,
                           const RenderConfig& cfg, Provenance provenance, const QualityThresholds& thresholds) {
    PairedRecord rec;
    rec.residual = render_fill_light(scene, params, cfg);
    rec.target_image = compose_target(scene.image, rec.residual.srgb, gamma);
    rec.input_image = scene.image;
    rec.params = params;
    rec.gamma = gamma;
    if (provenance.image_id.empty()) {
        provenance.image_id = scene.id;
    }
    rec.provenance = std::move(provenance);
    rec.quality = quality_check(scene, rec.residual, thresholds);
    return rec;
}

nlohmann::json record_metadata(const PairedRecord& rec) {
    return {
        {"params", params_to_json(rec.params)},
        {"gamma", rec.gamma},
        {"provenance",
         {
             {"image_id", rec.provenance.image_id},
             {"variant", rec.provenance.variant},
             {"seed", rec.provenance.seed},
             {"stream", rec.provenance.stream},
             {"policy_hash", rec.provenance.policy_hash},
             {"renderer_version", rec.provenance.renderer_version},
         }},
        {"quality", to_json(rec.quality)},
    };
}

void write_record(const PairedRecord& rec, const fs::path& dir, bool darken) {
    fs::create_directories(dir);
    write_file(dir / "input.png", encode_png(rec.input_image));
    write_file(dir / "target.png", encode_png(rec.target_image));
    write_file(dir / "residual.png", encode_png(rec.residual.srgb));
    write_file(dir / "residual.pfm", encode_pfm(rec.residual.linear));
    if (darken) {
        ImageF dark(rec.input_image.width(), rec.input_image.height(), rec.input_image.channels());
        for (std::size_t i = 0; i < dark.values().size(); ++i) {
            dark.values()[i] = static_cast<float>(rec.gamma * rec.input_image.values()[i]);
        }
        write_file(dir / "input_darkened.png", encode_png(dark));
    }
    const std::string meta = record_metadata(rec).dump(2) + "\n";
    write_file(dir / "params.json", std::span(reinterpret_cast<const std::uint8_t*>(meta.data()), meta.size()));
}

nlohmann::json to_json(const DatasetSummary& s) {
    return {{"attempted", s.attempted}, {"passed", s.passed}, {"failed", s.failed}, {"by_reason", s.by_reason}};
}

std::uint64_t record_stream(const std::string& image_id, Variant variant) {
    const std::string digest = sha256_hex(image_id);
    const std::uint64_t id_bits = std::stoull(digest.substr(0, 16), nullptr, 16);
    return mix_bits(id_bits + static_cast<std::uint64_t>(variant));
}

namespace {

std::vector<std::string> list_images(const fs::path& root) {
    if (!fs::is_directory(root)) {
        throw ContractError("input root is not a directory: " + root.string());
    }
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) {
            ids.push_back(entry.path().filename().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Writes per-image manifest blocks in image order regardless of completion order.
class OrderedAppender {
public:
    OrderedAppender(const fs::path& path, std::size_t count) : out_(path, std::ios::trunc), pending_(count) {
        if (!out_) {
            throw std::runtime_error("cannot write manifest " + path.string());
        }
    }

    void submit(std::size_t index, std::vector<std::string> lines) {
        std::lock_guard lock(mutex_);
        pending_[index] = std::move(lines);
        while (next_ < pending_.size() && pending_[next_]) {
            for (const auto& line : *pending_[next_]) {
                out_ << line << '\n';
            }
            pending_[next_].reset();
            ++next_;
        }
        out_.flush();
    }

private:
    std::mutex mutex_;
    std::ofstream out_;
    std::vector<std::optional<std::vector<std::string>>> pending_;
    std::size_t next_ = 0;
};

struct Outcome {
    nlohmann::json line;
    bool pass = false;
    std::string reason;
};

Outcome failure_line(const std::string& image_id, Variant v, std::uint64_t seed, std::uint64_t stream,
                     QualityReason reason, const std::string& detail) {
    Outcome o;
    o.reason = to_string(reason);
    o.line = {{"image_id", image_id}, {"variant", to_string(v)}, {"verdict", "fail"}, {"reason", o.reason},
              {"detail", detail},     {"seed", seed},            {"stream", stream}};
    return o;
}

}  // namespace

DatasetSummary run_dataset(const DatasetOptions& opts) {
    opts.policy.validate();
    opts.render.validate();
    if (opts.variants.empty()) {
        throw ContractError("at least one variant is required");
    }
    const auto ids = list_images(opts.input_root);
    fs::create_directories(opts.output_root);
    const std::string policy_hash = opts.policy.hash();
    const int workers = std::max(1, opts.workers);

    RenderConfig base = opts.render;
    if (base.threads <= 0) {
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        base.threads = std::max(1, static_cast<int>(hw) / workers);
    }

    OrderedAppender appender(opts.output_root / "manifest.jsonl", ids.size());
    std::mutex summary_mutex;
    DatasetSummary summary;
    std::atomic<std::size_t> next{0};

    auto process = [&](std::size_t index) {
        const std::string& id = ids[index];
        std::vector<Outcome> outcomes;
        std::optional<SceneAssets> scene;
        std::string load_error;
        try {
            scene = load_scene(opts.input_root, id, opts.load);
        } catch (const std::exception& e) {
            load_error = e.what();
        }

        for (Variant v : opts.variants) {
            const std::uint64_t stream = record_stream(id, v);
            if (!scene) {
                outcomes.push_back(failure_line(id, v, opts.seed, stream, QualityReason::kLoadError, load_error));
                continue;
            }
            SeededRng rng(opts.seed, stream);
            const LightParams params = sample_params(opts.policy, v, rng);
            const double gamma = rng.uniform(0.2, 0.4);

            Outcome o;
            o.line = {{"image_id", id},        {"variant", to_string(v)},          {"seed", opts.seed},
                      {"stream", stream},      {"params", params_to_json(params)}, {"gamma", gamma}};

            if (mask_coverage(scene->face_mask) < opts.thresholds.min_coverage) {
                QualityReport precheck;
                precheck.mask_coverage = mask_coverage(scene->face_mask);
                precheck.normal_fallbacks = scene->normal_fallbacks;
                precheck.reason = QualityReason::kFailedSegmentation;
                o.line["quality"] = to_json(precheck);
                o.reason = to_string(precheck.reason);
                o.line["verdict"] = "fail";
                o.line["reason"] = o.reason;
                outcomes.push_back(std::move(o));
                continue;
            }

            RenderConfig cfg = base;
            cfg.visibility.seed = mix_bits(opts.seed ^ stream);
            Provenance prov{id, to_string(v), opts.seed, stream, policy_hash, kRendererVersion};
            try {
                PairedRecord rec = generate_pair(*scene, params, gamma, cfg, prov, opts.thresholds);
                o.line["quality"] = to_json(rec.quality);
                o.pass = rec.quality.pass;
                o.reason = to_string(rec.quality.reason);
                if (o.pass) {
                    const fs::path rel = fs::path(id) / to_string(v);
                    write_record(rec, opts.output_root / rel, opts.darken);
                    o.line["path"] = rel.generic_string();
                    if (opts.on_record) {
                        opts.on_record(rec);
                    }
                }
            } catch (const std::exception& e) {
                o = failure_line(id, v, opts.seed, stream, QualityReason::kRenderError, e.what());
                o.line["params"] = params_to_json(params);
                o.line["gamma"] = gamma;
            }
            o.line["verdict"] = o.pass ? "pass" : "fail";
            o.line["reason"] = o.reason;
            outcomes.push_back(std::move(o));
        }

        std::vector<std::string> lines;
        {
            std::lock_guard lock(summary_mutex);
            for (const auto& o : outcomes) {
                ++summary.attempted;
                ++(o.pass ? summary.passed : summary.failed);
                ++summary.by_reason[o.reason];
                lines.push_back(o.line.dump());
            }
        }
        appender.submit(index, std::move(lines));
    };

    auto worker = [&] {
        for (std::size_t i = next++; i < ids.size(); i = next++) {
            process(i);
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        worker();
    }

    nlohmann::json summary_json = to_json(summary);
    summary_json["seed"] = opts.seed;
    summary_json["policy_hash"] = policy_hash;
    summary_json["renderer_version"] = kRendererVersion;
    const std::string text = summary_json.dump(2) + "\n";
    write_file(opts.output_root / "summary.json",
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    return summary;
}

}  // namespace fillight
