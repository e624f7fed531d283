#pragma once

#include <cstdint>

#include "somefs/dataset.hpp"

namespace somefs {

/// Two-class benchmark of four Gaussian blobs. The first two dimensions
/// carry an XOR arrangement of blob centers (class = corner parity),
/// dimensions 2-4 carry per-blob offsets, everything past the first five
/// dimensions is pure N(0,1) noise. dims must be >= 5.
Dataset make_blob_benchmark(std::size_t n, std::size_t dims, std::uint64_t seed);

}  // namespace somefs
