#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "fillight/pipeline.hpp"

namespace httplib {
class Server;
}

namespace fillight {

/// Area-averaged copy of a scene whose longer side is at most max_side.
/// Depth is rescaled with the image so it stays in pixel units.
SceneAssets downsample_scene(const SceneAssets& scene, int max_side);

struct SceneHandle {
    std::string id;
    SceneAssets full;
    std::map<int, SceneAssets> pyramid;  // keyed by level (128, 256)

    /// The pyramid level, or the full scene when level is 0 or not present.
    const SceneAssets& level(int level) const;
};

enum class Quality { kPreview, kFull };

struct RenderRequest {
    LightParams params;  // full-resolution pixel units
    Quality quality = Quality::kPreview;
    std::optional<double> gamma;
    double strength = 1.0;
    std::uint64_t seed = 0;
};

/// Parses a JSON body {"params": {...}, "quality", "gamma", "strength", "seed"}.
/// Throws ParamsError listing every offending field.
RenderRequest parse_render_request(const nlohmann::json& body);

struct ServiceConfig {
    std::size_t max_scenes = 16;
    std::filesystem::path spill_dir;  // empty disables spilling
    int preview_level = 128;
    std::size_t preview_samples = 256;
    RenderConfig full_render;
    std::size_t max_payload_bytes = 256u << 20;
    int render_slots = 0;  // concurrent renders; 0 = core count
};

struct RenderedImage {
    ImageF image;       // sRGB, 3 channels
    ImageF linear;      // linear residual (residual requests only)
    nlohmann::json params_echo;
    double render_ms = 0.0;
    int level_width = 0;
    int level_height = 0;
};

class UnknownScene : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// In-memory scene store with least-recently-used eviction. Evicted scenes
/// are reloaded from the spill directory when one is configured.
class SceneStore {
public:
    SceneStore(std::size_t capacity, std::filesystem::path spill_dir, int preview_level);

    std::string put(const AssetBundle& bundle);
    std::shared_ptr<const SceneHandle> get(const std::string& id);
    std::size_t size() const;

private:
    struct Entry {
        std::shared_ptr<const SceneHandle> handle;
        std::atomic<std::uint64_t> last_used{0};
    };

    std::shared_ptr<const SceneHandle> build(const AssetBundle& bundle, const std::string& id) const;
    std::shared_ptr<const SceneHandle> insert(std::shared_ptr<const SceneHandle> handle);

    std::size_t capacity_;
    std::filesystem::path spill_dir_;
    int preview_level_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::unique_ptr<Entry>> entries_;
    std::atomic<std::uint64_t> clock_{0};
};

/// Content hash used as the scene id.
std::string scene_id(const AssetBundle& bundle);

class PreviewService {
public:
    explicit PreviewService(ServiceConfig cfg);

    std::string register_scene(const AssetBundle& bundle);
    RenderedImage render(const std::string& id, const RenderRequest& req);
    RenderedImage residual(const std::string& id, const RenderRequest& req);
    ImageF original(const std::string& id, int level);

    /// Routes all endpoints onto server and sets its payload limit.
    void mount(httplib::Server& server);

    const ServiceConfig& config() const noexcept { return cfg_; }

private:
    FillResidual render_residual(const SceneAssets& level, const SceneAssets& full, const RenderRequest& req,
                                 RenderedImage& out);

    ServiceConfig cfg_;
    SceneStore store_;
    std::counting_semaphore<> slots_;
};

}  // namespace fillight
