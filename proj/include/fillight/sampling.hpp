#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <json.hpp>

#include "fillight/lightgeom.hpp"

namespace fillight {

enum class Variant { kWarm = 0, kWhite = 1, kCool = 2 };

inline constexpr std::array<Variant, 3> kAllVariants{Variant::kWarm, Variant::kWhite, Variant::kCool};

const char* to_string(Variant v);
std::optional<Variant> parse_variant(const std::string& name);

struct Range {
    double min = 0.0;
    double max = 0.0;

    bool contains(double v) const noexcept { return v >= min && v <= max; }
    bool operator==(const Range&) const = default;
};

/// Randomized lamp-parameter distribution for dataset rendering. Serialized
/// as JSON (schema_version 1).
struct SamplingPolicy {
    static constexpr int kSchemaVersion = 1;

    std::array<Range, 3> temp_ranges{Range{2700.0, 4200.0}, Range{4200.0, 5800.0}, Range{5800.0, 8500.0}};
    double offset_core_sigma = 600.0;
    double offset_tail_fraction = 0.15;
    double offset_tail_range = 2400.0;
    Range theta_hp_deg{15.0, 70.0};
    Range z0{800.0, 4000.0};
    Range d_lamp{200.0, 1600.0};
    double longtail_param_fraction = 0.05;
    // Long-tail draws use each range widened by this fraction of its width on
    // both sides, clipped to physical validity.
    double longtail_widen = 0.5;

    const Range& temperature(Variant v) const { return temp_ranges[static_cast<int>(v)]; }

    /// Throws ContractError describing the first violated constraint.
    void validate() const;

    /// Short hex digest of the canonical JSON form.
    std::string hash() const;

    bool operator==(const SamplingPolicy&) const = default;
};

void to_json(nlohmann::json& j, const SamplingPolicy& p);
void from_json(const nlohmann::json& j, SamplingPolicy& p);

/// Deterministic generator keyed by (seed, stream).
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    double uniform(double lo = 0.0, double hi = 1.0);
    double normal(double mean = 0.0, double sigma = 1.0);
    bool bernoulli(double p);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

std::pair<double, double> sample_offset(const SamplingPolicy& policy, SeededRng& rng);

LightParams sample_params(const SamplingPolicy& policy, Variant variant, SeededRng& rng);

}  // namespace fillight
