#include "fillight/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "fillight/digest.hpp"
#include "fillight/params_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fillight {

namespace {

// Overlap of source cells with each destination cell along one axis.
struct Footprint {
    int first;
    std::vector<double> weights;
};

std::vector<Footprint> footprints(int src, int dst) {
    std::vector<Footprint> out(dst);
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
        const double lo = i * scale;
        const double hi = (i + 1) * scale;
        Footprint& f = out[i];
        f.first = static_cast<int>(std::floor(lo));
        const int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
        for (int s = f.first; s <= last; ++s) {
            const double w = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
            f.weights.push_back(std::max(0.0, w) / scale);
        }
    }
    return out;
}

Raster<double> area_resample(const Raster<double>& src, int w, int h) {
    const auto fx = footprints(src.width(), w);
    const auto fy = footprints(src.height(), h);
    Raster<double> out(w, h, src.channels());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < src.channels(); ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < fy[y].weights.size(); ++j) {
                    for (std::size_t i = 0; i < fx[x].weights.size(); ++i) {
                        acc += fy[y].weights[j] * fx[x].weights[i] *
                               src(fx[x].first + static_cast<int>(i), fy[y].first + static_cast<int>(j), c);
                    }
                }
                out(x, y, c) = acc;
            }
        }
    }
    return out;
}

template <typename T>
Raster<double> widen(const Raster<T>& r) {
    return raster_cast<double>(r);
}

ImageF snapped(const Raster<double>& r) {
    ImageF out(r.width(), r.height(), r.channels());
    for (std::size_t i = 0; i < out.values().size(); ++i) {
        out.values()[i] = static_cast<float>(quantize_unit(r.values()[i]) / 255.0);
    }
    return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

json field_errors(const std::vector<FieldError>& errors) {
    json fields = json::array();
    for (const auto& e : errors) {
        fields.push_back({{"field", e.field}, {"message", e.message}});
    }
    return fields;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_image(httplib::Response& res, const Bytes& bytes, const char* type) {
    res.status = 200;
    res.set_content(reinterpret_cast<const char*>(bytes.data()), bytes.size(), type);
}

}  // namespace

SceneAssets downsample_scene(const SceneAssets& scene, int max_side) {
    const int w = scene.width();
    const int h = scene.height();
    if (max_side <= 0) {
        throw ContractError("pyramid level must be positive");
    }
    if (std::max(w, h) <= max_side) {
        return scene;
    }
    const double s = static_cast<double>(max_side) / std::max(w, h);
    const int lw = std::max(1, static_cast<int>(std::lround(w * s)));
    const int lh = std::max(1, static_cast<int>(std::lround(h * s)));
    const double depth_factor = static_cast<double>(lw) / w;

    SceneAssets out;
    out.id = scene.id;
    out.image = snapped(area_resample(widen(scene.image), lw, lh));
    out.albedo = snapped(area_resample(widen(scene.albedo), lw, lh));
    out.specular = snapped(area_resample(widen(scene.specular), lw, lh));

    const auto depth = area_resample(widen(scene.depth.raster()), lw, lh);
    Raster<float> d(lw, lh, 1);
    for (std::size_t i = 0; i < d.values().size(); ++i) {
        d.values()[i] = static_cast<float>(depth.values()[i] * depth_factor);
    }
    out.depth = DepthRaster(std::move(d));

    const auto normals = area_resample(widen(scene.normals), lw, lh);
    out.normals = ImageF(lw, lh, 3);
    for (int y = 0; y < lh; ++y) {
        for (int x = 0; x < lw; ++x) {
            const Vec3 n{normals(x, y, 0), normals(x, y, 1), normals(x, y, 2)};
            const double len = length(n);
            const Vec3 u = len > 1e-12 ? n / len : Vec3{0.0, 0.0, 1.0};
            out.normals(x, y, 0) = static_cast<float>(u.x);
            out.normals(x, y, 1) = static_cast<float>(u.y);
            out.normals(x, y, 2) = static_cast<float>(u.z);
        }
    }

    const auto mask = area_resample(widen(scene.face_mask), lw, lh);
    out.face_mask = MaskRaster(lw, lh, 1);
    for (std::size_t i = 0; i < mask.values().size(); ++i) {
        out.face_mask.values()[i] = mask.values()[i] >= 0.5 ? 1 : 0;
    }
    return out;
}

const SceneAssets& SceneHandle::level(int lvl) const {
    const auto it = pyramid.find(lvl);
    return it == pyramid.end() ? full : it->second;
}

RenderRequest parse_render_request(const json& body) {
    if (!body.is_object()) {
        throw ParamsError(std::vector<FieldError>{{"body", "must be a JSON object"}});
    }
    std::vector<FieldError> errors;
    RenderRequest req;

    if (!body.contains("params")) {
        errors.push_back({"params", "is required"});
    } else {
        try {
            req.params = params_from_json(body.at("params"));
        } catch (const ParamsError& e) {
            for (const auto& fe : e.errors()) {
                errors.push_back({"params." + fe.field, fe.message});
            }
        }
    }

    if (body.contains("quality")) {
        const auto& q = body.at("quality");
        if (q == "preview") {
            req.quality = Quality::kPreview;
        } else if (q == "full") {
            req.quality = Quality::kFull;
        } else {
            errors.push_back({"quality", "must be \"preview\" or \"full\""});
        }
    }
    if (body.contains("gamma") && !body.at("gamma").is_null()) {
        const auto& g = body.at("gamma");
        if (!g.is_number()) {
            errors.push_back({"gamma", "must be a number"});
        } else if (g.get<double>() < 0.2 || g.get<double>() > 0.4) {
            errors.push_back({"gamma", "must lie in [0.2, 0.4]"});
        } else {
            req.gamma = g.get<double>();
        }
    }
    if (body.contains("strength")) {
        const auto& s = body.at("strength");
        if (!s.is_number()) {
            errors.push_back({"strength", "must be a number"});
        } else if (!(s.get<double>() >= 0.0) || !std::isfinite(s.get<double>())) {
            errors.push_back({"strength", "must be finite and >= 0"});
        } else {
            req.strength = s.get<double>();
        }
    }
    if (body.contains("seed")) {
        const auto& s = body.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            errors.push_back({"seed", "must be a non-negative integer"});
        } else {
            req.seed = s.get<std::uint64_t>();
        }
    }
    if (!errors.empty()) {
        throw ParamsError(std::move(errors));
    }
    return req;
}

std::string scene_id(const AssetBundle& bundle) {
    std::string material;
    for (const auto& slot : kAssetSlots) {
        const auto it = bundle.find(slot.name);
        material += slot.name;
        material += ':';
        if (it != bundle.end()) {
            material += std::to_string(it->second.size()) + ':';
            material.append(reinterpret_cast<const char*>(it->second.data()), it->second.size());
        }
        material += ';';
    }
    return sha256_hex(material).substr(0, 32);
}

SceneStore::SceneStore(std::size_t capacity, fs::path spill_dir, int preview_level)
    : capacity_(std::max<std::size_t>(1, capacity)), spill_dir_(std::move(spill_dir)), preview_level_(preview_level) {
    if (!spill_dir_.empty()) {
        fs::create_directories(spill_dir_);
    }
}

std::shared_ptr<const SceneHandle> SceneStore::build(const AssetBundle& bundle, const std::string& id) const {
    auto handle = std::make_shared<SceneHandle>();
    handle->id = id;
    handle->full = decode_scene(bundle, id);
    for (int lvl : {128, 256, preview_level_}) {
        handle->pyramid.emplace(lvl, downsample_scene(handle->full, lvl));
    }
    return handle;
}

std::shared_ptr<const SceneHandle> SceneStore::insert(std::shared_ptr<const SceneHandle> handle) {
    std::unique_lock lock(mutex_);
    auto& slot = entries_[handle->id];
    if (!slot) {
        slot = std::make_unique<Entry>();
        slot->handle = std::move(handle);
    }
    slot->last_used = ++clock_;
    auto result = slot->handle;
    while (entries_.size() > capacity_) {
        auto victim = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
            return a.second->last_used.load() < b.second->last_used.load();
        });
        entries_.erase(victim);
    }
    return result;
}

std::string SceneStore::put(const AssetBundle& bundle) {
    const std::string id = scene_id(bundle);
    {
        std::shared_lock lock(mutex_);
        if (const auto it = entries_.find(id); it != entries_.end()) {
            it->second->last_used = ++clock_;
            return id;
        }
    }
    auto handle = build(bundle, id);
    if (!spill_dir_.empty()) {
        for (const auto& slot : kAssetSlots) {
            write_file(spill_dir_ / id / slot.file, bundle.at(slot.name));
        }
    }
    insert(std::move(handle));
    return id;
}

std::shared_ptr<const SceneHandle> SceneStore::get(const std::string& id) {
    {
        std::shared_lock lock(mutex_);
        if (const auto it = entries_.find(id); it != entries_.end()) {
            it->second->last_used = ++clock_;
            return it->second->handle;
        }
    }
    if (spill_dir_.empty() || id.empty() || id.find_first_not_of("0123456789abcdef") != std::string::npos ||
        !fs::is_directory(spill_dir_ / id)) {
        throw UnknownScene("unknown scene: " + id);
    }
    AssetBundle bundle;
    for (const auto& slot : kAssetSlots) {
        bundle[slot.name] = read_file(spill_dir_ / id / slot.file);
    }
    return insert(build(bundle, id));
}

std::size_t SceneStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

namespace {

std::ptrdiff_t slot_count(int requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

PreviewService::PreviewService(ServiceConfig cfg)
    : cfg_(std::move(cfg)),
      store_(cfg_.max_scenes, cfg_.spill_dir, cfg_.preview_level),
      slots_(slot_count(cfg_.render_slots)) {
    cfg_.full_render.validate();
    if (cfg_.preview_samples == 0) {
        throw ContractError("preview sample count must be positive");
    }
}

std::string PreviewService::register_scene(const AssetBundle& bundle) { return store_.put(bundle); }

FillResidual PreviewService::render_residual(const SceneAssets& level, const SceneAssets& full,
                                             const RenderRequest& req, RenderedImage& out) {
    const double s = static_cast<double>(level.width()) / full.width();
    LightParams p = req.params;
    p.dx *= s;
    p.dy *= s;
    p.z0 *= s;
    p.d_lamp *= s;

    RenderConfig cfg = cfg_.full_render;
    if (req.quality == Quality::kPreview) {
        cfg.n_samples = cfg_.preview_samples;
    }
    cfg.visibility.seed = req.seed;
    cfg.sampling_seed = req.seed;

    out.params_echo = params_to_json(req.params);
    out.level_width = level.width();
    out.level_height = level.height();

    const auto start = std::chrono::steady_clock::now();
    slots_.acquire();
    FillResidual residual;
    try {
        residual = render_fill_light(level, p, cfg);
    } catch (...) {
        slots_.release();
        throw;
    }
    slots_.release();
    out.render_ms = elapsed_ms(start);
    return residual;
}

RenderedImage PreviewService::render(const std::string& id, const RenderRequest& req) {
    const auto handle = store_.get(id);
    const SceneAssets& level = req.quality == Quality::kPreview ? handle->level(cfg_.preview_level) : handle->full;
    RenderedImage out;
    const FillResidual residual = render_residual(level, handle->full, req, out);

    // Composite in display space; with a gamma the "after" image of a training pair is shown.
    const double base_gain = req.gamma.value_or(1.0);
    const double gain = req.gamma ? 0.6 * req.strength : req.strength;
    out.image = ImageF(level.width(), level.height(), 3);
    for (std::size_t i = 0; i < out.image.values().size(); ++i) {
        const float base = req.gamma ? static_cast<float>(base_gain * level.image.values()[i]) : level.image.values()[i];
        const float v = base + static_cast<float>(gain) * residual.srgb.values()[i];
        out.image.values()[i] = std::clamp(v, 0.0f, 1.0f);
    }
    return out;
}

RenderedImage PreviewService::residual(const std::string& id, const RenderRequest& req) {
    const auto handle = store_.get(id);
    const SceneAssets& level = req.quality == Quality::kPreview ? handle->level(cfg_.preview_level) : handle->full;
    RenderedImage out;
    FillResidual residual = render_residual(level, handle->full, req, out);
    out.image = std::move(residual.srgb);
    out.linear = std::move(residual.linear);
    return out;
}

ImageF PreviewService::original(const std::string& id, int lvl) { return store_.get(id)->level(lvl).image; }

void PreviewService::mount(httplib::Server& server) {
    server.set_payload_max_length(cfg_.max_payload_bytes);

    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}, {"renderer_version", kRendererVersion}});
    });

    server.Post("/scenes", [this](const httplib::Request& req, httplib::Response& res) {
        if (!req.is_multipart_form_data()) {
            send_json(res, 400, {{"error", "expected multipart/form-data with the six scene assets"}});
            return;
        }
        AssetBundle bundle;
        std::size_t total = 0;
        for (const auto& slot : kAssetSlots) {
            if (!req.has_file(slot.name)) {
                send_json(res, 400,
                          {{"error", std::string("missing asset: ") + slot.name},
                           {"asset", slot.name},
                           {"code", to_string(AssetErrorCode::kMissingFile)}});
                return;
            }
            const auto part = req.get_file_value(slot.name);
            total += part.content.size();
            bundle[slot.name] = Bytes(part.content.begin(), part.content.end());
        }
        if (total > cfg_.max_payload_bytes) {
            send_json(res, 413, {{"error", "payload too large"}});
            return;
        }
        try {
            const std::string id = register_scene(bundle);
            const auto handle = store_.get(id);
            send_json(res, 201,
                      {{"scene_id", id}, {"width", handle->full.width()}, {"height", handle->full.height()}});
        } catch (const AssetError& e) {
            send_json(res, 400, {{"error", e.what()}, {"asset", e.asset()}, {"code", to_string(e.code())}});
        } catch (const std::exception& e) {
            send_json(res, 400, {{"error", e.what()}});
        }
    });

    auto with_scene_errors = [](httplib::Response& res, auto&& fn) {
        try {
            fn();
        } catch (const UnknownScene& e) {
            send_json(res, 404, {{"error", e.what()}});
        } catch (const ParamsError& e) {
            send_json(res, 422, {{"error", "invalid parameters"}, {"fields", field_errors(e.errors())}});
        } catch (const DomainError& e) {
            send_json(res, 422, {{"error", e.what()}, {"fields", json::array()}});
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", e.what()}});
        }
    };

    auto set_render_headers = [](httplib::Response& res, const RenderedImage& img) {
        res.set_header("X-Render-Ms", std::to_string(img.render_ms));
        res.set_header("X-Params", img.params_echo.dump());
        res.set_header("X-Level-Size", std::to_string(img.level_width) + "x" + std::to_string(img.level_height));
    };

    server.Post(R"(/scenes/([0-9A-Za-z]+)/render)", [=, this](const httplib::Request& req, httplib::Response& res) {
        with_scene_errors(res, [&] {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::parse_error&) {
                throw ParamsError(std::vector<FieldError>{{"body", "is not valid JSON"}});
            }
            const std::string id = req.matches[1];
            store_.get(id);  // 404 takes precedence over parameter errors
            const RenderedImage img = render(id, parse_render_request(body));
            set_render_headers(res, img);
            send_image(res, encode_png(img.image), "image/png");
        });
    });

    server.Get(R"(/scenes/([0-9A-Za-z]+)/residual)", [=, this](const httplib::Request& req, httplib::Response& res) {
        with_scene_errors(res, [&] {
            const std::string id = req.matches[1];
            store_.get(id);
            json body{{"params", json::object()}};
            std::vector<FieldError> errors;
            for (const char* field : {"temperature_k", "theta_hp_deg", "z0_px", "d_lamp_px", "dx_px", "dy_px"}) {
                if (!req.has_param(field)) {
                    continue;  // reported as missing by the parser
                }
                const std::string text = req.get_param_value(field);
                try {
                    std::size_t used = 0;
                    const double v = std::stod(text, &used);
                    if (used != text.size()) {
                        throw std::invalid_argument(text);
                    }
                    body["params"][field] = v;
                } catch (const std::exception&) {
                    body["params"][field] = text;
                }
            }
            if (req.has_param("quality")) {
                body["quality"] = req.get_param_value("quality");
            }
            if (req.has_param("seed")) {
                try {
                    body["seed"] = std::stoull(req.get_param_value("seed"));
                } catch (const std::exception&) {
                    body["seed"] = req.get_param_value("seed");
                }
            }
            const std::string format = req.has_param("format") ? req.get_param_value("format") : "png";
            if (format != "png" && format != "pfm") {
                throw ParamsError(std::vector<FieldError>{{"format", "must be \"png\" or \"pfm\""}});
            }
            const RenderedImage img = residual(id, parse_render_request(body));
            set_render_headers(res, img);
            if (format == "pfm") {
                send_image(res, encode_pfm(img.linear), "application/octet-stream");
            } else {
                send_image(res, encode_png(img.image), "image/png");
            }
        });
    });

    server.Get(R"(/scenes/([0-9A-Za-z]+)/original)", [=, this](const httplib::Request& req, httplib::Response& res) {
        with_scene_errors(res, [&] {
            int lvl = 0;
            if (req.has_param("level")) {
                const std::string text = req.get_param_value("level");
                if (text == "full") {
                    lvl = 0;
                } else if (text == "128" || text == "256") {
                    lvl = std::stoi(text);
                } else {
                    throw ParamsError(std::vector<FieldError>{{"level", "must be 128, 256 or full"}});
                }
            }
            send_image(res, encode_png(original(req.matches[1], lvl)), "image/png");
        });
    });
}

}  // namespace fillight
