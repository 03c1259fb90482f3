#pragma once

#include "lgf/graph.hpp"
#include "lgf/rng.hpp"
#include "lgf/tensor.hpp"

namespace lgf {

// One GraphSAGE mean-aggregation layer. weight is (2*in_dim) x out_dim: the
// first in_dim rows multiply a node's own features, the last in_dim rows the
// unweighted mean of its neighbors' features.
struct SageLayerParams {
    Tensor weight;
    int layer_index = 0;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;

    static SageLayerParams init(std::size_t in_dim, std::size_t out_dim, int layer_index, Rng rng);
};

// Row-normalized neighbor-mean operator for a dense adjacency (n x n,
// row-major): row v holds 1/|N(v)| at v's neighbors. Neighbors are the
// off-diagonal nonzero entries; a node with no neighbors gets a zero row, so
// its aggregate is the zero vector. The operator depends on the sparsity
// pattern only and is recorded as a constant.
Tensor mean_aggregator(Tape& tape, std::span<const double> adjacency, std::size_t n);

// out_v = ReLU(W^T concat(h_v, mean of neighbor h)); features must align with
// the adjacency's node order.
Tensor sage_layer(Tape& tape, const SageLayerParams& params, const Tensor& features,
                  std::span<const double> adjacency);

// Sequential application over the snapshot graph; returns the N x d feature
// matrix fed to both the pooling and the global-feature paths.
Tensor encode_spatial(Tape& tape, std::vector<SageLayerParams>& layers, const Tensor& features,
                      const GraphSnapshot& snapshot);

// Attach layer weights to the tape (gradients readable afterwards).
void watch_sage(Tape& tape, std::vector<SageLayerParams>& layers);
void watch_sage(Tape& tape, SageLayerParams& layer);

}  // namespace lgf
