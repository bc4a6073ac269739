#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fillight/lightgeom.hpp"
#include "fillight/shading.hpp"

namespace fillight::detail {

// Validated lamp with its sample set and lobe exponent, shared read-only by
// all pixel workers of one render.
struct EmitterSet {
    LightParams params;
    std::vector<DiskSample> samples;
    double exponent = 1.0;

    static EmitterSet build(const LightParams& params, std::size_t n, DiskSampling sampling, std::uint64_t seed);
};

// For each sample, the index (in units of stride) of the nearest sample whose
// index is a multiple of stride.
std::vector<std::size_t> nearest_representatives(const std::vector<DiskSample>& samples, int stride);

}  // namespace fillight::detail
