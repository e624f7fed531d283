#include "somefs/synthetic.hpp"

#include <array>

#include "somefs/errors.hpp"
#include "somefs/rng.hpp"

namespace somefs {

Dataset make_blob_benchmark(std::size_t n, std::size_t dims, std::uint64_t seed) {
    if (dims < 5) throw ConfigError("make_blob_benchmark: dims must be >= 5");
    if (n < 4) throw ConfigError("make_blob_benchmark: n must be >= 4");

    constexpr double kCorner = 2.0;
    constexpr double kBlobSigma = 0.5;
    // XOR corners in dims 0-1; class 0 on the main diagonal
    constexpr std::array<std::array<double, 2>, 4> corners = {
        {{+kCorner, +kCorner}, {-kCorner, -kCorner}, {+kCorner, -kCorner}, {-kCorner, +kCorner}}};
    // per-blob offsets in dims 2-4; both classes average to zero in every
    // dimension, so the class is carried by blob identity, never by a
    // single linear direction
    constexpr std::array<std::array<double, 3>, 4> offsets = {
        {{+1.0, +1.0, +1.0}, {-1.0, -1.0, -1.0}, {+1.0, -1.0, -1.0}, {-1.0, +1.0, +1.0}}};

    Dataset ds;
    ds.features = Matrix(n, dims);
    ds.labels.resize(n);
    for (std::size_t d = 0; d < dims; ++d)
        ds.feature_names.push_back("x" + std::to_string(d));
    ds.class_names = {"neg", "pos"};

    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t blob = i % 4;
        ds.labels[i] = blob < 2 ? 0 : 1;
        auto row = ds.features.row(i);
        row[0] = corners[blob][0] + kBlobSigma * gauss(rng);
        row[1] = corners[blob][1] + kBlobSigma * gauss(rng);
        for (std::size_t d = 2; d < 5; ++d)
            row[d] = offsets[blob][d - 2] + kBlobSigma * gauss(rng);
        for (std::size_t d = 5; d < dims; ++d) row[d] = gauss(rng);
    }
    return ds;
}

}  // namespace somefs
