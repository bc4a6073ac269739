#include <doctest.h>

#include <cmath>
#include <future>
#include <thread>

#include <httplib.h>

#include "fillight/params_io.hpp"
#include "fillight/service.hpp"
#include "fillight/synthetic.hpp"
#include "temp_dir.hpp"

using namespace fillight;
using nlohmann::json;

namespace {

AssetBundle bundle_of(const SceneAssets& s) {
    testing::TempDir dir("bundle");
    write_scene(s, dir.path());
    AssetBundle b;
    for (const auto& slot : kAssetSlots) {
        b[slot.name] = read_file(dir / slot.file);
    }
    return b;
}

httplib::MultipartFormDataItems form_of(const AssetBundle& b) {
    httplib::MultipartFormDataItems items;
    for (const auto& [name, bytes] : b) {
        items.push_back({name, std::string(bytes.begin(), bytes.end()), name, "application/octet-stream"});
    }
    return items;
}

// Serves a PreviewService on an ephemeral port for the lifetime of the object.
class Harness {
public:
    explicit Harness(ServiceConfig cfg) : service(std::move(cfg)) {
        service.mount(server);
        port = server.bind_to_any_port("127.0.0.1");
        worker = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~Harness() {
        server.stop();
        worker.join();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(120, 0);
        return c;
    }

    std::string add(const SceneAssets& s) {
        auto res = client().Post("/scenes", form_of(bundle_of(s)));
        REQUIRE(res);
        REQUIRE(res->status == 201);
        return json::parse(res->body).at("scene_id");
    }

    PreviewService service;
    httplib::Server server;
    int port = 0;
    std::thread worker;
};

ServiceConfig test_config() {
    ServiceConfig cfg;
    cfg.full_render.n_samples = 256;
    return cfg;
}

json request(double dx, double dy, double strength = 1.0) {
    return {{"params",
             {{"temperature_k", 5000}, {"theta_hp_deg", 50}, {"z0_px", 500}, {"d_lamp_px", 300}, {"dx_px", dx},
              {"dy_px", dy}}},
            {"quality", "preview"},
            {"strength", strength}};
}

std::string query(double dx, double dy, const std::string& extra) {
    return "?temperature_k=5000&theta_hp_deg=50&z0_px=500&d_lamp_px=300&dx_px=" + std::to_string(dx) +
           "&dy_px=" + std::to_string(dy) + extra;
}

ImageF png(const std::string& body) { return decode_png_rgb(Bytes(body.begin(), body.end())); }
Raster<float> pfm(const std::string& body) { return decode_pfm(Bytes(body.begin(), body.end())); }

std::pair<double, double> bright_centroid(const ImageF& img, const MaskRaster& mask) {
    float peak = 0.0f;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (mask(x, y)) {
                peak = std::max(peak, img(x, y, 1));
            }
        }
    }
    double sx = 0.0;
    double sy = 0.0;
    double n = 0.0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (mask(x, y) && img(x, y, 1) >= 0.9f * peak) {
                sx += (x + 0.5) / img.width();
                sy += (y + 0.5) / img.height();
                n += 1.0;
            }
        }
    }
    return {sx / n, sy / n};
}

}  // namespace

TEST_CASE("downsample_scene keeps units and invariants") {
    const SceneAssets s = make_synthetic_face(0, 256, 192);
    const SceneAssets l = downsample_scene(s, 128);
    CHECK(l.width() == 128);
    CHECK(l.height() == 96);
    CHECK_NOTHROW(l.validate());
    // Area average of a 2x2 block, rescaled by the 0.5 resize factor.
    const double block = (s.depth.at(100, 80) + s.depth.at(101, 80) + s.depth.at(100, 81) + s.depth.at(101, 81)) / 4;
    CHECK(l.depth.at(50, 40) == doctest::Approx(0.5 * block).epsilon(1e-5));
    for (float v : l.image.values()) {
        CHECK(v * 255.0f == doctest::Approx(std::round(v * 255.0f)).epsilon(1e-5));
    }
    const SceneAssets same = downsample_scene(s, 512);
    CHECK(same.image == s.image);
}

TEST_CASE("parse_render_request") {
    const RenderRequest r = parse_render_request(request(100, -50, 0.5));
    CHECK(r.params.dx == 100.0);
    CHECK(r.params.theta_hp_rad == doctest::Approx(degrees_to_radians(50.0)));
    CHECK(r.strength == 0.5);
    CHECK(r.quality == Quality::kPreview);
    CHECK_FALSE(r.gamma.has_value());

    json bad = request(0, 0);
    bad["params"]["theta_hp_deg"] = 95;
    bad["params"].erase("z0_px");
    bad["strength"] = -1;
    bad["quality"] = "ultra";
    try {
        parse_render_request(bad);
        FAIL("expected ParamsError");
    } catch (const ParamsError& e) {
        std::set<std::string> fields;
        for (const auto& f : e.errors()) {
            fields.insert(f.field);
        }
        CHECK(fields == std::set<std::string>{"params.theta_hp_deg", "params.z0_px", "strength", "quality"});
    }
}

TEST_CASE("registration") {
    ServiceConfig cfg = test_config();
    Harness h(cfg);
    auto c = h.client();
    auto health = c.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);

    const SceneAssets s = make_synthetic_face(0, 64, 64);
    const std::string id = h.add(s);
    CHECK(id.size() == 32);
    CHECK(h.add(s) == id);
    CHECK(h.add(make_synthetic_face(1, 64, 64)) != id);

    AssetBundle partial = bundle_of(s);
    partial.erase("mask");
    auto missing = c.Post("/scenes", form_of(partial));
    REQUIRE(missing);
    CHECK(missing->status == 400);
    CHECK(json::parse(missing->body).at("asset") == "mask");

    AssetBundle corrupt = bundle_of(s);
    corrupt["depth"] = Bytes{'P', 'f'};
    auto bad = c.Post("/scenes", form_of(corrupt));
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body).at("code") == "undecodable");

    AssetBundle mismatched = bundle_of(s);
    mismatched["albedo"] = encode_png(ImageF(10, 10, 3));
    auto mm = c.Post("/scenes", form_of(mismatched));
    REQUIRE(mm);
    CHECK(mm->status == 400);
    CHECK(json::parse(mm->body).at("code") == "dimension-mismatch");

    auto not_form = c.Post("/scenes", "{}", "application/json");
    REQUIRE(not_form);
    CHECK(not_form->status == 400);
}

TEST_CASE("oversize payloads are rejected") {
    ServiceConfig cfg = test_config();
    cfg.max_payload_bytes = 4096;
    Harness h(cfg);
    auto res = h.client().Post("/scenes", form_of(bundle_of(make_synthetic_face(0, 64, 64))));
    REQUIRE(res);
    CHECK(res->status == 413);
}

TEST_CASE("render endpoint") {
    Harness h(test_config());
    auto c = h.client();
    const SceneAssets s = make_synthetic_face(0, 256, 256);
    const std::string id = h.add(s);

    auto res = c.Post("/scenes/" + id + "/render", request(200, -100).dump(), "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "image/png");
    CHECK(std::stod(res->get_header_value("X-Render-Ms")) >= 0.0);
    const json echo = json::parse(res->get_header_value("X-Params"));
    CHECK(echo.at("dx_px") == 200.0);
    CHECK(echo.at("theta_hp_deg") == doctest::Approx(50.0));
    const ImageF preview = png(res->body);
    CHECK(preview.width() == 128);

    auto zero = c.Post("/scenes/" + id + "/render", request(200, -100, 0.0).dump(), "application/json");
    auto original = c.Get("/scenes/" + id + "/original?level=128");
    REQUIRE(zero);
    REQUIRE(original);
    CHECK(zero->body == original->body);
    CHECK(png(original->body) == downsample_scene(s, 128).image);
    auto full_original = c.Get("/scenes/" + id + "/original");
    CHECK(png(full_original->body) == s.image);

    auto unknown = c.Post("/scenes/0123abcd/render", request(0, 0).dump(), "application/json");
    REQUIRE(unknown);
    CHECK(unknown->status == 404);

    json invalid = request(0, 0);
    invalid["params"]["z0_px"] = -5;
    invalid["params"]["temperature_k"] = "hot";
    auto bad = c.Post("/scenes/" + id + "/render", invalid.dump(), "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 422);
    const json fields = json::parse(bad->body).at("fields");
    CHECK(fields.size() == 2);

    auto garbage = c.Post("/scenes/" + id + "/render", "{nope", "application/json");
    REQUIRE(garbage);
    CHECK(garbage->status == 422);

    json with_gamma = request(200, -100);
    with_gamma["gamma"] = 0.3;
    auto target = c.Post("/scenes/" + id + "/render", with_gamma.dump(), "application/json");
    REQUIRE(target);
    CHECK(target->status == 200);
    const ImageF tgt = png(target->body);
    const SceneAssets level = downsample_scene(s, 128);
    // Background shows the gamma-scaled carrier only.
    CHECK(tgt(0, 0, 0) == static_cast<float>(quantize_unit(0.3 * level.image(0, 0, 0)) / 255.0));
}

TEST_CASE("mirror-consistent previews on the symmetric face") {
    Harness h(test_config());
    auto c = h.client();
    const std::string id = h.add(make_synthetic_face(0, 256, 256));
    auto a = c.Get("/scenes/" + id + "/residual" + query(300, 80, "&format=pfm"));
    auto b = c.Get("/scenes/" + id + "/residual" + query(-300, 80, "&format=pfm"));
    REQUIRE(a);
    REQUIRE(b);
    const Raster<float> ra = pfm(a->body);
    const Raster<float> rb = pfm(b->body);
    double diff = 0.0;
    double total = 0.0;
    for (int y = 0; y < ra.height(); ++y) {
        for (int x = 0; x < ra.width(); ++x) {
            for (int ch = 0; ch < 3; ++ch) {
                diff += std::abs(ra(x, y, ch) - rb(ra.width() - 1 - x, y, ch));
                total += ra(x, y, ch);
            }
        }
    }
    CHECK(total > 0.0);
    CHECK(diff / total < 0.03);
}

TEST_CASE("residual endpoint") {
    Harness h(test_config());
    auto c = h.client();
    const std::string id = h.add(make_synthetic_face(2, 128, 128));
    auto as_png = c.Get("/scenes/" + id + "/residual" + query(150, 0, ""));
    auto as_pfm = c.Get("/scenes/" + id + "/residual" + query(150, 0, "&format=pfm"));
    REQUIRE(as_png);
    REQUIRE(as_pfm);
    CHECK(as_pfm->get_header_value("Content-Type") == "application/octet-stream");
    const ImageF enc = png(as_png->body);
    const Raster<float> lin = pfm(as_pfm->body);
    REQUIRE(enc.same_size(lin));
    for (std::size_t i = 0; i < enc.values().size(); ++i) {
        CHECK(std::abs(linear_to_srgb(lin.values()[i]) - enc.values()[i]) <= 0.5 / 255.0 + 1e-6);
    }

    SceneAssets dark = make_synthetic_face(2, 64, 64);
    dark.face_mask = MaskRaster(64, 64, 1, 0);
    const std::string dark_id = h.add(dark);
    auto zero = c.Get("/scenes/" + dark_id + "/residual" + query(0, 0, "&format=pfm"));
    REQUIRE(zero);
    const Raster<float> zeros = pfm(zero->body);
    for (float v : zeros.values()) {
        CHECK(v == 0.0f);
    }

    auto unknown = c.Get("/scenes/ffff/residual" + query(0, 0, ""));
    REQUIRE(unknown);
    CHECK(unknown->status == 404);
    auto bad_number = c.Get("/scenes/" + id + "/residual?temperature_k=abc");
    REQUIRE(bad_number);
    CHECK(bad_number->status == 422);
    auto bad_format = c.Get("/scenes/" + id + "/residual" + query(0, 0, "&format=tiff"));
    REQUIRE(bad_format);
    CHECK(bad_format->status == 422);
}

TEST_CASE("concurrent identical requests match the serial result") {
    Harness h(test_config());
    const std::string id = h.add(make_synthetic_face(3, 256, 256));
    const std::string body = request(-250, 120).dump();
    auto serial = h.client().Post("/scenes/" + id + "/render", body, "application/json");
    REQUIRE(serial);
    std::vector<std::future<std::string>> jobs;
    for (int i = 0; i < 6; ++i) {
        jobs.push_back(std::async(std::launch::async, [&] {
            auto r = h.client().Post("/scenes/" + id + "/render", body, "application/json");
            return r ? r->body : std::string();
        }));
    }
    for (auto& j : jobs) {
        CHECK(j.get() == serial->body);
    }
}

TEST_CASE("preview and full renders agree on the brightest region") {
    Harness h(test_config());
    const SceneAssets s = make_synthetic_face(0, 256, 256);
    const std::string id = h.add(s);
    for (const auto [dx, dy] : {std::pair{300.0, 0.0}, {-200.0, 250.0}, {0.0, -300.0}}) {
        RenderRequest req = parse_render_request(request(dx, dy));
        const RenderedImage preview = h.service.residual(id, req);
        req.quality = Quality::kFull;
        const RenderedImage full = h.service.residual(id, req);
        CHECK(full.level_width == 256);
        const auto [px, py] = bright_centroid(preview.image, downsample_scene(s, 128).face_mask);
        const auto [fx, fy] = bright_centroid(full.image, s.face_mask);
        CHECK(std::hypot(px - fx, py - fy) < 0.05 * std::sqrt(2.0));
    }
}

TEST_CASE("LRU eviction and spill reload") {
    testing::TempDir spill("spill");
    ServiceConfig cfg = test_config();
    cfg.max_scenes = 1;
    cfg.spill_dir = spill.path();
    PreviewService with_spill(cfg);
    const std::string a = with_spill.register_scene(bundle_of(make_synthetic_face(0, 32, 32)));
    const std::string b = with_spill.register_scene(bundle_of(make_synthetic_face(1, 32, 32)));
    CHECK(a != b);
    CHECK(with_spill.original(a, 0).width() == 32);
    CHECK(with_spill.original(b, 0).width() == 32);

    cfg.spill_dir.clear();
    PreviewService no_spill(cfg);
    const std::string c = no_spill.register_scene(bundle_of(make_synthetic_face(0, 32, 32)));
    no_spill.register_scene(bundle_of(make_synthetic_face(1, 32, 32)));
    CHECK_THROWS_AS(no_spill.original(c, 0), UnknownScene);
}
