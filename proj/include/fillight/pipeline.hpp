#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fillight/image_io.hpp"
#include "fillight/sampling.hpp"
#include "fillight/shading.hpp"

namespace fillight {

inline constexpr const char* kRendererVersion = "fillight-1.0.0";

/// Asset names and their file names inside a scene directory.
struct AssetSlot {
    const char* name;
    const char* file;
};
inline constexpr std::array<AssetSlot, 6> kAssetSlots{{
    {"image", "image.png"},
    {"depth", "depth.pfm"},
    {"normal", "normal.pfm"},
    {"albedo", "albedo.png"},
    {"specular", "specular.png"},
    {"mask", "mask.png"},
}};

struct LoadOptions {
    double depth_scale = 1.0;  // multiplies stored depth into pixel units
};

/// Raw encoded assets keyed by slot name.
using AssetBundle = std::map<std::string, Bytes>;

SceneAssets decode_scene(const AssetBundle& bundle, std::string id, const LoadOptions& opts = {});

/// Reads <root>/<image_id>/{image.png, depth.pfm, normal.pfm, albedo.png, specular.png, mask.png}.
SceneAssets load_scene(const std::filesystem::path& root, const std::string& image_id, const LoadOptions& opts = {});

enum class QualityReason {
    kOk,
    kFailedSegmentation,
    kInvalidRender,
    kResidualTooDark,
    kResidualTooBright,
    kLoadError,
    kRenderError,
};

const char* to_string(QualityReason reason);

struct QualityThresholds {
    double min_coverage = 0.02;
    double energy_floor = 1e-6;
    double energy_ceiling = 4.0;
};

struct QualityReport {
    double mask_coverage = 0.0;
    double residual_energy = 0.0;  // mean luminance of the linear residual over the mask
    std::size_t nan_count = 0;
    std::size_t normal_fallbacks = 0;
    bool pass = false;
    QualityReason reason = QualityReason::kOk;
};

nlohmann::json to_json(const QualityReport& report);

double mask_coverage(const MaskRaster& mask);

QualityReport quality_check(const SceneAssets& scene, const FillResidual& residual,
                            const QualityThresholds& thresholds = {});

struct Provenance {
    std::string image_id;
    std::string variant;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string policy_hash;
    std::string renderer_version = kRendererVersion;
};

struct PairedRecord {
    ImageF input_image;   // untouched source image
    ImageF target_image;  // gamma * input + 0.6 * residual (sRGB)
    FillResidual residual;
    LightParams params;
    double gamma = 0.3;
    Provenance provenance;
    QualityReport quality;
};

PairedRecord generate_pair(const SceneAssets& scene, const LightParams& params, double gamma,
                           const RenderConfig& cfg, Provenance provenance = {},
                           const QualityThresholds& thresholds = {});

/// Writes input.png, target.png, residual.png, residual.pfm and params.json
/// (plus input_darkened.png when darken is set).
void write_record(const PairedRecord& record, const std::filesystem::path& dir, bool darken = false);

nlohmann::json record_metadata(const PairedRecord& record);

struct DatasetOptions {
    std::filesystem::path input_root;
    std::filesystem::path output_root;
    SamplingPolicy policy;
    std::uint64_t seed = 0;
    std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};
    RenderConfig render;
    QualityThresholds thresholds;
    LoadOptions load;
    int workers = 1;
    bool darken = false;
    // Invoked from worker threads for every record that passed quality control.
    std::function<void(const PairedRecord&)> on_record;
};

struct DatasetSummary {
    std::size_t attempted = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::map<std::string, std::size_t> by_reason;
};

nlohmann::json to_json(const DatasetSummary& summary);

/// Deterministic per-record stream id for (image, variant).
std::uint64_t record_stream(const std::string& image_id, Variant variant);

/// Renders every (image, variant) under input_root. Writes manifest.jsonl
/// (one line per attempt, in image order) and summary.json to output_root.
/// Per-image failures are recorded, never thrown.
DatasetSummary run_dataset(const DatasetOptions& opts);

}  // namespace fillight
