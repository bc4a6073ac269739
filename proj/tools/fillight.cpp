// fillight: command-line front end for rendering, dataset synthesis,
// planar targets and the preview server.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "fillight/params_io.hpp"
#include "fillight/pipeline.hpp"
#include "fillight/planar.hpp"
#include "fillight/service.hpp"
#include "fillight/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fillight;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailures = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot read " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
}

LightParams read_params(const fs::path& path) {
    try {
        return params_from_json(read_json(path));
    } catch (const ParamsError& e) {
        throw UsageError(e.what());
    }
}

int default_workers() {
    if (const char* env = std::getenv("FILLIGHT_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                return n;
            }
        } catch (const std::exception&) {
        }
        std::cerr << "ignoring invalid FILLIGHT_WORKERS=" << env << "\n";
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<Variant> parse_variants(const std::string& list) {
    std::vector<Variant> out;
    std::stringstream ss(list);
    for (std::string name; std::getline(ss, name, ',');) {
        const auto v = parse_variant(name);
        if (!v) {
            throw UsageError("unknown variant '" + name + "' (expected warm, white or cool)");
        }
        out.push_back(*v);
    }
    if (out.empty()) {
        throw UsageError("--variants must name at least one variant");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fillight: virtual fill-light renderer"};
    app.require_subcommand(1);

    // render
    auto* render = app.add_subcommand("render", "Render one scene with one parameter file");
    fs::path scene_dir, params_path, render_out;
    std::size_t render_samples = 2048;
    double gamma = 0.3;
    std::uint64_t render_seed = 0;
    double depth_scale = 1.0;
    bool render_darken = false;
    render->add_option("--scene", scene_dir, "Scene directory with the six assets")->required();
    render->add_option("--params", params_path, "Light parameter JSON")->required();
    render->add_option("--out", render_out, "Output directory")->required();
    render->add_option("--samples", render_samples, "Emitter samples")->capture_default_str();
    render->add_option("--gamma", gamma, "Carrier scale in [0.2, 0.4]")->capture_default_str();
    render->add_option("--seed", render_seed, "Visibility jitter seed")->capture_default_str();
    render->add_option("--depth-scale", depth_scale, "Multiplier applied to stored depth")->capture_default_str();
    render->add_flag("--darken", render_darken, "Also write the gamma-scaled input");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Render paired records for a directory of scenes");
    fs::path input_root, out_root, policy_path;
    std::uint64_t dataset_seed = 0;
    std::string variants = "warm,white,cool";
    std::size_t dataset_samples = 2048;
    int workers = 0;
    bool darken = false;
    dataset->add_option("--input-root", input_root, "Directory of <image_id>/ scene folders")->required();
    dataset->add_option("--out-root", out_root, "Output directory")->required();
    dataset->add_option("--policy", policy_path, "Sampling policy JSON (defaults if omitted)");
    dataset->add_option("--seed", dataset_seed, "Global seed")->capture_default_str();
    dataset->add_option("--variants", variants, "Comma-separated temperature variants")->capture_default_str();
    dataset->add_option("--samples", dataset_samples, "Emitter samples")->capture_default_str();
    dataset->add_option("--workers", workers, "Image-level workers (default: $FILLIGHT_WORKERS or core count)");
    dataset->add_option("--depth-scale", depth_scale, "Multiplier applied to stored depth");
    dataset->add_flag("--darken", darken, "Also write gamma-scaled inputs");

    // planar
    auto* planar = app.add_subcommand("planar", "Render planar irradiance and direction targets");
    fs::path planar_params, planar_out;
    int size = 64;
    std::size_t planar_samples = 512;
    planar->add_option("--params", planar_params, "Light parameter JSON")->required();
    planar->add_option("--size", size, "Target resolution")->capture_default_str();
    planar->add_option("--out", planar_out, "Output directory")->required();
    planar->add_option("--samples", planar_samples, "Emitter samples")->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP preview service");
    std::string host = "0.0.0.0";
    int port = 8080;
    fs::path assets_dir;
    std::size_t max_scenes = 16;
    std::size_t preview_samples = 256;
    std::size_t full_samples = 2048;
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--assets-dir", assets_dir, "Spill directory for evicted scenes");
    serve->add_option("--max-scenes", max_scenes)->capture_default_str();
    serve->add_option("--preview-samples", preview_samples)->capture_default_str();
    serve->add_option("--full-samples", full_samples)->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Write synthetic face scenes in the ingestion layout");
    fs::path synth_out;
    int count = 10;
    int synth_size = 256;
    synth->add_option("--out", synth_out, "Output root")->required();
    synth->add_option("--count", count)->capture_default_str();
    synth->add_option("--size", synth_size)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*render) {
            LoadOptions load;
            load.depth_scale = depth_scale;
            const SceneAssets scene = load_scene(scene_dir.parent_path(), scene_dir.filename().string(), load);
            RenderConfig cfg;
            cfg.n_samples = render_samples;
            cfg.visibility.seed = render_seed;
            Provenance prov;
            prov.seed = render_seed;
            const PairedRecord rec = generate_pair(scene, read_params(params_path), gamma, cfg, prov);
            write_record(rec, render_out, render_darken);
            std::cout << to_json(rec.quality).dump() << "\n";
            return rec.quality.pass ? kExitOk : kExitFailures;
        }
        if (*dataset) {
            DatasetOptions opts;
            opts.input_root = input_root;
            opts.output_root = out_root;
            if (!policy_path.empty()) {
                try {
                    opts.policy = read_json(policy_path).get<SamplingPolicy>();
                    opts.policy.validate();
                } catch (const UsageError&) {
                    throw;
                } catch (const std::exception& e) {
                    throw UsageError("invalid policy: " + std::string(e.what()));
                }
            }
            opts.seed = dataset_seed;
            opts.variants = parse_variants(variants);
            opts.render.n_samples = dataset_samples;
            opts.workers = workers > 0 ? workers : default_workers();
            opts.load.depth_scale = depth_scale;
            opts.darken = darken;
            if (!fs::is_directory(input_root)) {
                throw UsageError("input root is not a directory: " + input_root.string());
            }
            const DatasetSummary summary = run_dataset(opts);
            std::cout << to_json(summary).dump() << "\n";
            return summary.failed == 0 ? kExitOk : kExitFailures;
        }
        if (*planar) {
            PlanarConfig cfg;
            cfg.resolution = size;
            cfg.n_samples = planar_samples;
            const PlanarTargets t = render_planar_targets(read_params(planar_params), cfg);
            fs::create_directories(planar_out);
            write_file(planar_out / "irradiance.pfm", encode_pfm(raster_cast<float>(t.irradiance)));
            write_file(planar_out / "direction.pfm", encode_pfm(raster_cast<float>(direction_as_rgb(t))));
            return kExitOk;
        }
        if (*serve) {
            ServiceConfig cfg;
            cfg.max_scenes = max_scenes;
            cfg.spill_dir = assets_dir;
            cfg.preview_samples = preview_samples;
            cfg.full_render.n_samples = full_samples;
            PreviewService service(cfg);
            httplib::Server server;
            service.mount(server);
            std::cerr << "listening on " << host << ":" << port << "\n";
            if (!server.listen(host, port)) {
                std::cerr << "cannot bind " << host << ":" << port << "\n";
                return kExitUsage;
            }
            return kExitOk;
        }
        if (*synth) {
            for (int i = 0; i < count; ++i) {
                const SceneAssets s = make_synthetic_face(i, synth_size, synth_size);
                write_scene(s, synth_out / s.id);
            }
            return kExitOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
