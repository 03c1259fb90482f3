#include "lgf/pool.hpp"

#include <string>

namespace lgf {

PoolLevelParams PoolLevelParams::init(std::size_t feature_dim, std::size_t supernodes, int level, bool with_embed,
                                      Rng rng) {
    if (supernodes == 0) throw ConfigError("pool level " + std::to_string(level) + ": supernodes must be positive");
    PoolLevelParams p;
    p.supernodes = supernodes;
    p.assign_gnn = SageLayerParams::init(feature_dim, supernodes, level, rng.derive("pool.assign"));
    if (with_embed) {
        p.embed_gnn = SageLayerParams::init(feature_dim, feature_dim, level, rng.derive("pool.embed"));
    }
    return p;
}

Tensor assign(Tape& tape, PoolLevelParams& params, const Tensor& features, const Tensor& adjacency) {
    if (adjacency.rows() != features.rows() || adjacency.cols() != features.rows()) {
        throw ConfigError("assign: adjacency " + adjacency.shape_str() + " does not match feature rows " +
                          std::to_string(features.rows()));
    }
    if (!tape.owns(params.assign_gnn.weight)) watch_sage(tape, params.assign_gnn);
    const Tensor logits = sage_layer(tape, params.assign_gnn, features, adjacency.values);
    return tape.softmax_rows(logits);
}

CoarsenedGraph coarsen(Tape& tape, const Tensor& assignment, const Tensor& features, const Tensor& adjacency) {
    if (assignment.rows() != features.rows() || adjacency.rows() != features.rows() ||
        adjacency.cols() != features.rows()) {
        throw DimensionError("coarsen: S " + assignment.shape_str() + ", H " + features.shape_str() + ", A " +
                             adjacency.shape_str() + " do not agree on node count");
    }
    CoarsenedGraph out;
    const Tensor st = tape.transpose(assignment);
    out.features = tape.matmul(st, features);
    out.adjacency = tape.matmul(tape.matmul(st, adjacency), assignment);
    out.assignment = assignment;
    return out;
}

PoolAuxLoss pool_aux_loss(Tape& tape, const Tensor& assignment, const Tensor& adjacency) {
    const std::size_t n = assignment.rows();
    if (adjacency.rows() != n || adjacency.cols() != n) {
        throw DimensionError("pool_aux_loss: S " + assignment.shape_str() + " and A " + adjacency.shape_str() +
                             " do not agree on node count");
    }
    PoolAuxLoss out;
    const Tensor sst = tape.matmul(assignment, tape.transpose(assignment));
    const Tensor neg_one = tape.constant_scalar(-1.0);
    const Tensor diff = tape.add(adjacency, tape.scale(sst, neg_one));
    const Tensor norm = tape.sqrt_scalar(tape.frobenius_sq(diff));
    out.link = tape.scale(norm, tape.constant_scalar(1.0 / static_cast<double>(n * n)));
    out.entropy = tape.row_entropy_mean(assignment);
    return out;
}

PoolForwardResult pool_forward(Tape& tape, std::vector<PoolLevelParams>& levels, const Tensor& features,
                               const GraphSnapshot& snapshot) {
    if (levels.empty()) throw ConfigError("pool_forward: need at least one pooling level");
    if (!levels.back().embed_gnn.has_value()) {
        throw ConfigError("pool_forward: last pooling level is missing its embed layer");
    }

    PoolForwardResult result;
    Tensor h = features;
    Tensor a = tape.constant({snapshot.node_count, snapshot.node_count}, snapshot.adjacency);
    Tensor link_sum, entropy_sum;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        Tensor s = assign(tape, levels[l], h, a);
        const PoolAuxLoss aux = pool_aux_loss(tape, s, a);
        link_sum = l == 0 ? aux.link : tape.add(link_sum, aux.link);
        entropy_sum = l == 0 ? aux.entropy : tape.add(entropy_sum, aux.entropy);
        CoarsenedGraph cg = coarsen(tape, s, h, a);
        h = cg.features;
        a = cg.adjacency;
        result.assignments.push_back(std::move(s));
    }
    PoolLevelParams& last = levels.back();
    if (!tape.owns(last.embed_gnn->weight)) watch_sage(tape, *last.embed_gnn);
    result.coarse_features = sage_layer(tape, *last.embed_gnn, h, a.values);
    result.link_loss = link_sum;
    result.entropy_loss = entropy_sum;
    return result;
}

}  // namespace lgf
