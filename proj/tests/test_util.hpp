#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "figlearn/graph.hpp"
#include "figlearn/matrix.hpp"
#include "figlearn/rng.hpp"

namespace testutil {

using figlearn::Matrix;

inline Matrix random_symmetric(std::size_t n, figlearn::Rng& rng, double scale = 1.0) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = rng.uniform(-scale, scale);
            a(i, j) = v;
            a(j, i) = v;
        }
    return a;
}

inline figlearn::UpperTriWeights random_weights(std::size_t n, figlearn::Rng& rng) {
    figlearn::UpperTriWeights w{n, std::vector<double>(figlearn::num_edge_slots(n))};
    for (double& v : w.w) v = rng.uniform01();
    return w;
}

/// Random symmetric zero-row-sum perturbation, i.e. a direction that stays
/// inside the Laplacian constraint set.
inline Matrix random_laplacian_direction(std::size_t n, figlearn::Rng& rng) {
    figlearn::UpperTriWeights dw{n, std::vector<double>(figlearn::num_edge_slots(n))};
    for (double& v : dw.w) v = rng.uniform(-1.0, 1.0);
    return figlearn::weights_to_laplacian(dw).m;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Scratch directory unique to the test binary run.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("figlearn_test_" + tag);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testutil
