#include "lgf/sage.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace lgf {

SageLayerParams SageLayerParams::init(std::size_t in_dim, std::size_t out_dim, int layer_index, Rng rng) {
    SageLayerParams p;
    p.layer_index = layer_index;
    p.in_dim = in_dim;
    p.out_dim = out_dim;
    const std::size_t rows = 2 * in_dim;
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + out_dim));
    std::vector<double> v(rows * out_dim);
    for (double& x : v) x = rng.uniform(-bound, bound);
    p.weight = Tensor::matrix(rows, out_dim, std::move(v));
    return p;
}

void watch_sage(Tape& tape, SageLayerParams& layer) { tape.watch(layer.weight); }

void watch_sage(Tape& tape, std::vector<SageLayerParams>& layers) {
    for (SageLayerParams& l : layers) watch_sage(tape, l);
}

Tensor mean_aggregator(Tape& tape, std::span<const double> adjacency, std::size_t n) {
    if (adjacency.size() != n * n) {
        throw DimensionError("mean_aggregator: adjacency size " + std::to_string(adjacency.size()) +
                             " does not match node count " + std::to_string(n));
    }
    std::vector<double> p(n * n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t degree = 0;
        for (std::size_t u = 0; u < n; ++u) {
            if (u != v && adjacency[v * n + u] != 0.0) ++degree;
        }
        if (degree == 0) continue;
        const double inv = 1.0 / static_cast<double>(degree);
        for (std::size_t u = 0; u < n; ++u) {
            if (u != v && adjacency[v * n + u] != 0.0) p[v * n + u] = inv;
        }
    }
    return tape.constant({n, n}, std::move(p));
}

Tensor sage_layer(Tape& tape, const SageLayerParams& params, const Tensor& features,
                  std::span<const double> adjacency) {
    const std::size_t n = features.rows();
    if (features.cols() != params.in_dim) {
        throw DimensionError("sage_layer " + std::to_string(params.layer_index) + ": feature width " +
                             std::to_string(features.cols()) + " does not match in_dim " +
                             std::to_string(params.in_dim));
    }
    if (!tape.owns(params.weight)) {
        throw ContractError("sage_layer " + std::to_string(params.layer_index) + ": weight is not on this tape");
    }
    const Tensor agg = tape.matmul(mean_aggregator(tape, adjacency, n), features);
    const Tensor combined = tape.concat_cols(features, agg);
    return tape.relu(tape.matmul(combined, params.weight));
}

Tensor encode_spatial(Tape& tape, std::vector<SageLayerParams>& layers, const Tensor& features,
                      const GraphSnapshot& snapshot) {
    if (layers.empty()) throw ConfigError("encode_spatial: need at least one layer");
    std::size_t width = features.cols();
    for (const SageLayerParams& l : layers) {
        if (l.in_dim != width) {
            throw ConfigError("encode_spatial: layer " + std::to_string(l.layer_index) + " expects input width " +
                              std::to_string(l.in_dim) + ", chain provides " + std::to_string(width));
        }
        width = l.out_dim;
    }
    Tensor h = features;
    for (SageLayerParams& l : layers) {
        if (!tape.owns(l.weight)) watch_sage(tape, l);
        h = sage_layer(tape, l, h, snapshot.adjacency);
    }
    return h;
}

}  // namespace lgf
