#pragma once

#include <optional>

#include "lgf/sage.hpp"

namespace lgf {

// Parameters of one pooling level: the assignment GNN produces one logit
// column per super-node; embed_gnn (present on the last level only) is the
// post-pool GraphSAGE layer that turns the coarsest graph into H^L.
struct PoolLevelParams {
    SageLayerParams assign_gnn;
    std::optional<SageLayerParams> embed_gnn;
    std::size_t supernodes = 0;

    static PoolLevelParams init(std::size_t feature_dim, std::size_t supernodes, int level, bool with_embed, Rng rng);
};

// Result of one coarsening: features H' = S^T H, adjacency A' = S^T A S, and
// the assignment that produced them. All three stay on the tape.
struct CoarsenedGraph {
    Tensor features;
    Tensor adjacency;
    Tensor assignment;
};

// Soft cluster assignment: softmax over the assignment GNN's output rows.
// Rows are nonnegative and sum to 1.
Tensor assign(Tape& tape, PoolLevelParams& params, const Tensor& features, const Tensor& adjacency);

// Eq-style coarsening, differentiable through S, H and A.
CoarsenedGraph coarsen(Tape& tape, const Tensor& assignment, const Tensor& features, const Tensor& adjacency);

struct PoolAuxLoss {
    Tensor link;     // ||A - S S^T||_F / n_l^2
    Tensor entropy;  // mean over rows of the Shannon entropy of S
};

PoolAuxLoss pool_aux_loss(Tape& tape, const Tensor& assignment, const Tensor& adjacency);

struct PoolForwardResult {
    Tensor coarse_features;  // H^L, n_L x d
    Tensor link_loss;        // summed over levels
    Tensor entropy_loss;     // summed over levels
    std::vector<Tensor> assignments;
};

// assign -> coarsen per level, then the final level's embed_gnn on the
// coarsest graph. The input adjacency is the snapshot's thresholded matrix;
// coarsened adjacencies stay dense and real-valued.
PoolForwardResult pool_forward(Tape& tape, std::vector<PoolLevelParams>& levels, const Tensor& features,
                               const GraphSnapshot& snapshot);

}  // namespace lgf
