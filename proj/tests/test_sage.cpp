#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lgf/sage.hpp"
#include "testutil.hpp"

using lgf::GraphSnapshot;
using lgf::SageLayerParams;
using lgf::Tape;
using lgf::Tensor;

namespace {

GraphSnapshot snapshot_from_adjacency(std::size_t n, std::vector<double> adj) {
    GraphSnapshot s;
    s.node_count = n;
    s.adjacency = std::move(adj);
    s.segments.variable_count = n;
    s.segments.window_length = 2;
    s.segments.segment.assign(2 * n, 0.0);
    s.segments.label = 1;
    return s;
}

SageLayerParams layer_with_weight(std::size_t in, std::size_t out, std::vector<double> w) {
    SageLayerParams p = SageLayerParams::init(in, out, 0, lgf::Rng(0));
    p.weight = Tensor::matrix(2 * in, out, std::move(w));
    return p;
}

// Direct per-node evaluation of the update rule, written with plain loops.
std::vector<double> sage_oracle(const std::vector<double>& features, const std::vector<double>& adj,
                                const std::vector<double>& weight, std::size_t n, std::size_t din, std::size_t dout) {
    std::vector<double> out(n * dout, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        std::vector<double> cat(2 * din, 0.0);
        for (std::size_t f = 0; f < din; ++f) cat[f] = features[v * din + f];
        std::size_t deg = 0;
        for (std::size_t u = 0; u < n; ++u) {
            if (u != v && adj[v * n + u] != 0.0) {
                ++deg;
                for (std::size_t f = 0; f < din; ++f) cat[din + f] += features[u * din + f];
            }
        }
        if (deg > 0) {
            for (std::size_t f = 0; f < din; ++f) cat[din + f] /= static_cast<double>(deg);
        }
        for (std::size_t o = 0; o < dout; ++o) {
            double acc = 0.0;
            for (std::size_t f = 0; f < 2 * din; ++f) acc += cat[f] * weight[f * dout + o];
            out[v * dout + o] = std::max(0.0, acc);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("edgeless graph: neighbor half contributes nothing") {
    // W = [I; I] stacked: output would double under any neighbor signal.
    SageLayerParams p = layer_with_weight(2, 2, {1, 0, 0, 1, 1, 0, 0, 1});
    const GraphSnapshot s = snapshot_from_adjacency(3, std::vector<double>(9, 0.0));
    Tape tape;
    lgf::watch_sage(tape, p);
    const Tensor h = tape.constant(Tensor::matrix(3, 2, {1, -2, 3, 4, -5, 6}));
    const Tensor out = lgf::sage_layer(tape, p, h, s.adjacency);
    CHECK(out.values == std::vector<double>{1, 0, 3, 4, 0, 6});  // ReLU(h_v)
}

TEST_CASE("two-node complete graph: neighbor selector reads the other node") {
    // Weight selects only the neighbor half as identity.
    SageLayerParams p = layer_with_weight(2, 2, {0, 0, 0, 0, 1, 0, 0, 1});
    const GraphSnapshot s = snapshot_from_adjacency(2, {0, 0.9, 0.9, 0});
    Tape tape;
    lgf::watch_sage(tape, p);
    const Tensor h = tape.constant(Tensor::matrix(2, 2, {1, 3, 3, 5}));
    const Tensor out = lgf::sage_layer(tape, p, h, s.adjacency);
    CHECK(out.at(0, 0) == 3.0);
    CHECK(out.at(0, 1) == 5.0);
    CHECK(out.at(1, 0) == 1.0);
    CHECK(out.at(1, 1) == 3.0);
}

TEST_CASE("sage_layer matches the per-node oracle on random graphs") {
    lgf::Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(6), din = 1 + rng.below(4), dout = 1 + rng.below(4);
        Tensor features = testutil::random_tensor({n, din}, rng);
        std::vector<double> adj(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (rng.uniform() < 0.5) {
                    const double w = rng.uniform(-1.0, 1.0);
                    adj[i * n + j] = w;
                    adj[j * n + i] = w;
                }
            }
        SageLayerParams p = SageLayerParams::init(din, dout, 0, rng.derive("w", trial));
        Tape tape;
        lgf::watch_sage(tape, p);
        const Tensor out = lgf::sage_layer(tape, p, tape.constant(features), adj);
        const auto want = sage_oracle(features.values, adj, p.weight.values, n, din, dout);
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(out.values[i] == doctest::Approx(want[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("permutation equivariance of sage_layer") {
    lgf::Rng rng(67);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng.below(6);  // n <= 8
        const std::size_t d = 2 + rng.below(3);
        Tensor features = testutil::random_tensor({n, d}, rng);
        std::vector<double> adj(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.uniform() < 0.6) {
                    const double w = rng.uniform(-1.0, 1.0);
                    adj[i * n + j] = w;
                    adj[j * n + i] = w;
                }
        SageLayerParams p = SageLayerParams::init(d, d, 0, rng.derive("w", trial));

        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);

        Tensor pfeat = Tensor::zeros({n, d});
        std::vector<double> padj(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < d; ++f) pfeat.at(i, f) = features.at(perm[i], f);
            for (std::size_t j = 0; j < n; ++j) padj[i * n + j] = adj[perm[i] * n + perm[j]];
        }

        Tape t1, t2;
        SageLayerParams p1 = p, p2 = p;
        lgf::watch_sage(t1, p1);
        lgf::watch_sage(t2, p2);
        const Tensor base = lgf::sage_layer(t1, p1, t1.constant(features), adj);
        const Tensor permuted = lgf::sage_layer(t2, p2, t2.constant(pfeat), padj);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t f = 0; f < d; ++f) {
                CHECK(std::abs(permuted.at(i, f) - base.at(perm[i], f)) <= 1e-12);
            }
    }
}

TEST_CASE("locality: one layer only sees itself and direct neighbors") {
    lgf::Rng rng(71);
    const std::size_t n = 6, d = 3;
    std::vector<double> adj(n * n, 0.0);
    auto link = [&](std::size_t a, std::size_t b) {
        adj[a * n + b] = 0.8;
        adj[b * n + a] = 0.8;
    };
    link(0, 1);
    link(1, 2);
    link(3, 4);
    SageLayerParams p = SageLayerParams::init(d, d, 0, rng);
    Tensor features = testutil::random_tensor({n, d}, rng);

    auto run = [&](const Tensor& f) {
        Tape t;
        SageLayerParams pc = p;
        lgf::watch_sage(t, pc);
        return lgf::sage_layer(t, pc, t.constant(f), adj).values;
    };
    const auto base = run(features);
    for (std::size_t u = 0; u < n; ++u) {
        Tensor bumped = features;
        for (std::size_t f = 0; f < d; ++f) bumped.at(u, f) += 0.5;
        const auto out = run(bumped);
        for (std::size_t v = 0; v < n; ++v) {
            const bool reachable = (u == v) || adj[v * n + u] != 0.0;
            bool changed = false;
            for (std::size_t f = 0; f < d; ++f) changed |= out[v * d + f] != base[v * d + f];
            if (!reachable) CHECK_FALSE(changed);
        }
    }
}

TEST_CASE("encode_spatial composes layers and validates the chain") {
    lgf::Rng rng(73);
    const auto snap = snapshot_from_adjacency(4, {0, 0.7, 0, 0, 0.7, 0, 0.7, 0, 0, 0.7, 0, 0.7, 0, 0, 0.7, 0});

    SUBCASE("single layer reduces to sage_layer") {
        std::vector<SageLayerParams> layers{SageLayerParams::init(3, 2, 0, rng)};
        Tensor features = testutil::random_tensor({4, 3}, rng);
        Tape t1;
        const Tensor via_encode = lgf::encode_spatial(t1, layers, t1.constant(features), snap);
        Tape t2;
        SageLayerParams solo = layers[0];
        lgf::watch_sage(t2, solo);
        const Tensor direct = lgf::sage_layer(t2, solo, t2.constant(features), snap.adjacency);
        CHECK(via_encode.values == direct.values);
    }

    SUBCASE("zero weights in the last layer zero the output") {
        std::vector<SageLayerParams> layers{SageLayerParams::init(3, 3, 0, rng), SageLayerParams::init(3, 2, 1, rng)};
        std::fill(layers[1].weight.values.begin(), layers[1].weight.values.end(), 0.0);
        Tensor features = testutil::random_tensor({4, 3}, rng);
        Tape t;
        const Tensor out = lgf::encode_spatial(t, layers, t.constant(features), snap);
        for (double v : out.values) CHECK(v == 0.0);
    }

    SUBCASE("all outputs are nonnegative (final ReLU)") {
        std::vector<SageLayerParams> layers{SageLayerParams::init(3, 3, 0, rng), SageLayerParams::init(3, 3, 1, rng)};
        Tensor features = testutil::random_tensor({4, 3}, rng);
        Tape t;
        const Tensor out = lgf::encode_spatial(t, layers, t.constant(features), snap);
        for (double v : out.values) CHECK(v >= 0.0);
    }

    SUBCASE("chain width mismatch is a config error naming the layer") {
        std::vector<SageLayerParams> layers{SageLayerParams::init(3, 2, 0, rng), SageLayerParams::init(3, 2, 1, rng)};
        Tensor features = testutil::random_tensor({4, 3}, rng);
        Tape t;
        CHECK_THROWS_AS(lgf::encode_spatial(t, layers, t.constant(features), snap), lgf::ConfigError);
    }
}

TEST_CASE("two-layer path graph matches a hand-unrolled two-hop computation") {
    // 4-node path 0-1-2-3, d = 1 throughout, hand-set weights.
    const std::size_t n = 4;
    std::vector<double> adj(n * n, 0.0);
    adj[0 * n + 1] = adj[1 * n + 0] = 0.9;
    adj[1 * n + 2] = adj[2 * n + 1] = 0.9;
    adj[2 * n + 3] = adj[3 * n + 2] = 0.9;

    // Layer 1: out = ReLU(2*own + 1*mean); layer 2: out = ReLU(1*own - 1*mean).
    SageLayerParams l1 = layer_with_weight(1, 1, {2.0, 1.0});
    l1.layer_index = 0;
    SageLayerParams l2 = layer_with_weight(1, 1, {1.0, -1.0});
    l2.layer_index = 1;

    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};

    // Hand unroll, node by node.
    std::vector<double> h1(n), h2(n);
    h1[0] = std::max(0.0, 2 * x[0] + x[1]);
    h1[1] = std::max(0.0, 2 * x[1] + (x[0] + x[2]) / 2);
    h1[2] = std::max(0.0, 2 * x[2] + (x[1] + x[3]) / 2);
    h1[3] = std::max(0.0, 2 * x[3] + x[2]);
    h2[0] = std::max(0.0, h1[0] - h1[1]);
    h2[1] = std::max(0.0, h1[1] - (h1[0] + h1[2]) / 2);
    h2[2] = std::max(0.0, h1[2] - (h1[1] + h1[3]) / 2);
    h2[3] = std::max(0.0, h1[3] - h1[2]);

    GraphSnapshot snap = snapshot_from_adjacency(n, adj);
    std::vector<SageLayerParams> layers{l1, l2};
    Tape tape;
    const Tensor out = lgf::encode_spatial(tape, layers, tape.constant(Tensor::matrix(n, 1, x)), snap);
    for (std::size_t v = 0; v < n; ++v) CHECK(out.values[v] == doctest::Approx(h2[v]).epsilon(1e-14));
}
