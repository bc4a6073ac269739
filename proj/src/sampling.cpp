#include "fillight/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "fillight/colorspace.hpp"
#include "fillight/digest.hpp"
#include "fillight/errors.hpp"
#include "fillight/visibility.hpp"

namespace fillight {

const char* to_string(Variant v) {
    switch (v) {
        case Variant::kWarm:
            return "warm";
        case Variant::kWhite:
            return "white";
        case Variant::kCool:
            return "cool";
    }
    return "unknown";
}

std::optional<Variant> parse_variant(const std::string& name) {
    for (Variant v : kAllVariants) {
        if (name == to_string(v)) {
            return v;
        }
    }
    return std::nullopt;
}

void SamplingPolicy::validate() const {
    auto check_range = [](const Range& r, const std::string& name) {
        if (!(std::isfinite(r.min) && std::isfinite(r.max) && r.min < r.max)) {
            throw ContractError("policy range " + name + " must satisfy min < max");
        }
    };
    auto check_fraction = [](double f, const std::string& name) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw ContractError("policy " + name + " must lie in [0, 1]");
        }
    };
    for (Variant v : kAllVariants) {
        const Range& r = temperature(v);
        check_range(r, std::string("temp_ranges.") + to_string(v));
        if (r.min < ColorTemperature::kMinKelvin || r.max > ColorTemperature::kMaxKelvin) {
            throw ContractError(std::string("policy temp_ranges.") + to_string(v) + " leaves [1667, 25000] K");
        }
    }
    check_range(theta_hp_deg, "theta_hp_deg");
    if (theta_hp_deg.min <= 0.0 || theta_hp_deg.max >= 90.0) {
        throw ContractError("policy theta_hp_deg must lie inside (0, 90)");
    }
    check_range(z0, "z0");
    if (z0.min <= 0.0) {
        throw ContractError("policy z0 must be positive");
    }
    check_range(d_lamp, "d_lamp");
    if (d_lamp.min <= 0.0) {
        throw ContractError("policy d_lamp must be positive");
    }
    if (!(offset_core_sigma >= 0.0)) {
        throw ContractError("policy offset_core_sigma must be non-negative");
    }
    if (!(offset_tail_range >= 0.0)) {
        throw ContractError("policy offset_tail_range must be non-negative");
    }
    check_fraction(offset_tail_fraction, "offset_tail_fraction");
    check_fraction(longtail_param_fraction, "longtail_param_fraction");
    if (!(longtail_widen >= 0.0)) {
        throw ContractError("policy longtail_widen must be non-negative");
    }
}

std::string SamplingPolicy::hash() const {
    const nlohmann::json j = *this;
    return sha256_hex(j.dump()).substr(0, 16);
}

namespace {

nlohmann::json range_json(const Range& r) { return nlohmann::json::array({r.min, r.max}); }

Range range_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw ContractError("policy ranges are [min, max] arrays");
    }
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

void to_json(nlohmann::json& j, const SamplingPolicy& p) {
    nlohmann::json temps = nlohmann::json::object();
    for (Variant v : kAllVariants) {
        temps[to_string(v)] = range_json(p.temperature(v));
    }
    j = nlohmann::json{
        {"schema_version", SamplingPolicy::kSchemaVersion},
        {"temp_ranges", temps},
        {"offset_core_sigma", p.offset_core_sigma},
        {"offset_tail_fraction", p.offset_tail_fraction},
        {"offset_tail_range", p.offset_tail_range},
        {"theta_hp_range", range_json(p.theta_hp_deg)},
        {"z0_range", range_json(p.z0)},
        {"d_lamp_range", range_json(p.d_lamp)},
        {"longtail_param_fraction", p.longtail_param_fraction},
        {"longtail_widen", p.longtail_widen},
    };
}

void from_json(const nlohmann::json& j, SamplingPolicy& p) {
    const int version = j.value("schema_version", SamplingPolicy::kSchemaVersion);
    if (version != SamplingPolicy::kSchemaVersion) {
        throw ContractError("unsupported policy schema_version " + std::to_string(version));
    }
    SamplingPolicy out;
    if (j.contains("temp_ranges")) {
        for (const auto& [name, value] : j.at("temp_ranges").items()) {
            const auto v = parse_variant(name);
            if (!v) {
                throw ContractError("unknown temperature variant '" + name + "'");
            }
            out.temp_ranges[static_cast<int>(*v)] = range_from(value);
        }
    }
    out.offset_core_sigma = j.value("offset_core_sigma", out.offset_core_sigma);
    out.offset_tail_fraction = j.value("offset_tail_fraction", out.offset_tail_fraction);
    out.offset_tail_range = j.value("offset_tail_range", out.offset_tail_range);
    if (j.contains("theta_hp_range")) out.theta_hp_deg = range_from(j.at("theta_hp_range"));
    if (j.contains("z0_range")) out.z0 = range_from(j.at("z0_range"));
    if (j.contains("d_lamp_range")) out.d_lamp = range_from(j.at("d_lamp_range"));
    out.longtail_param_fraction = j.value("longtail_param_fraction", out.longtail_param_fraction);
    out.longtail_widen = j.value("longtail_widen", out.longtail_widen);
    out.validate();
    p = out;
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix_bits(seed ^ mix_bits(stream + 0x632be59bd9b4e019ULL))) {}

double SeededRng::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

double SeededRng::normal(double mean, double sigma) { return std::normal_distribution<double>(mean, sigma)(engine_); }

bool SeededRng::bernoulli(double p) { return uniform() < p; }

std::pair<double, double> sample_offset(const SamplingPolicy& policy, SeededRng& rng) {
    if (rng.bernoulli(policy.offset_tail_fraction)) {
        const double r = policy.offset_tail_range * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        return {r * std::cos(phi), r * std::sin(phi)};
    }
    if (policy.offset_core_sigma == 0.0) {
        return {0.0, 0.0};
    }
    // Isotropic Gaussian core; its angle is uniform by symmetry.
    return {rng.normal(0.0, policy.offset_core_sigma), rng.normal(0.0, policy.offset_core_sigma)};
}

namespace {

double draw(const Range& range, double widen, double floor, double ceiling, bool longtail, SeededRng& rng) {
    Range r = range;
    if (longtail) {
        const double pad = widen * (range.max - range.min);
        r = {std::max(range.min - pad, std::min(floor, range.min)),
             std::min(range.max + pad, std::max(ceiling, range.max))};
    }
    return rng.uniform(r.min, r.max);
}

}  // namespace

LightParams sample_params(const SamplingPolicy& policy, Variant variant, SeededRng& rng) {
    constexpr int kMaxAttempts = 64;
    constexpr double kHuge = 1e12;
    LightParams p;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const Range& t = policy.temperature(variant);
        p.temperature_k = rng.uniform(t.min, t.max);
        const bool longtail = rng.bernoulli(policy.longtail_param_fraction);
        const double theta_deg = draw(policy.theta_hp_deg, policy.longtail_widen, 1.0, 89.0, longtail, rng);
        p.theta_hp_rad = degrees_to_radians(theta_deg);
        p.z0 = draw(policy.z0, policy.longtail_widen, 1.0, kHuge, longtail, rng);
        p.d_lamp = draw(policy.d_lamp, policy.longtail_widen, 1.0, kHuge, longtail, rng);
        std::tie(p.dx, p.dy) = sample_offset(policy, rng);
        if (check_fields(p).empty()) {
            return p;
        }
    }
    throw ContractError("sampling policy failed to produce valid light parameters");
}

}  // namespace fillight
