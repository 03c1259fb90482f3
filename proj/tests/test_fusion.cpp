#include <doctest.h>

#include <cmath>

#include "lgf/fusion.hpp"
#include "testutil.hpp"

using lgf::MlpParams;
using lgf::Tape;
using lgf::Tensor;

TEST_CASE("mlp_forward: identity single layer is the identity map") {
    MlpParams p = MlpParams::init({3, 3}, lgf::Rng(0));
    std::fill(p.layers[0].weight.values.begin(), p.layers[0].weight.values.end(), 0.0);
    std::fill(p.layers[0].bias.values.begin(), p.layers[0].bias.values.end(), 0.0);
    for (std::size_t i = 0; i < 3; ++i) p.layers[0].weight.at(i, i) = 1.0;
    lgf::Rng rng(1);
    const Tensor x = testutil::random_tensor({2, 3}, rng);
    Tape tape;
    const Tensor y = lgf::mlp_forward(tape, p, tape.constant(x));
    CHECK(y.values == x.values);
}

TEST_CASE("mlp_forward: zero weights yield the bias on every row") {
    MlpParams p = MlpParams::init({3, 2}, lgf::Rng(0));
    std::fill(p.layers[0].weight.values.begin(), p.layers[0].weight.values.end(), 0.0);
    p.layers[0].bias = Tensor::matrix(1, 2, {0.4, -1.3});
    lgf::Rng rng(2);
    const Tensor x = testutil::random_tensor({4, 3}, rng);
    Tape tape;
    const Tensor y = lgf::mlp_forward(tape, p, tape.constant(x));
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(y.at(r, 0) == 0.4);
        CHECK(y.at(r, 1) == -1.3);
    }
}

TEST_CASE("two-layer mlp matches a hand-computed composition") {
    MlpParams p = MlpParams::init({2, 2, 1}, lgf::Rng(0));
    p.layers[0].weight = Tensor::matrix(2, 2, {1.0, -1.0, 0.5, 2.0});
    p.layers[0].bias = Tensor::matrix(1, 2, {0.1, -0.2});
    p.layers[1].weight = Tensor::matrix(2, 1, {2.0, -3.0});
    p.layers[1].bias = Tensor::matrix(1, 1, {0.05});
    const double x0 = 0.7, x1 = -0.4;
    // Hidden pre-activations, ReLU, then the affine output, by hand.
    const double h0 = std::max(0.0, x0 * 1.0 + x1 * 0.5 + 0.1);
    const double h1 = std::max(0.0, x0 * -1.0 + x1 * 2.0 - 0.2);
    const double want = 2.0 * h0 - 3.0 * h1 + 0.05;
    Tape tape;
    const Tensor y = lgf::mlp_forward(tape, p, tape.constant(Tensor::matrix(1, 2, {x0, x1})));
    CHECK(y.values[0] == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("mlp_forward rejects width mismatches naming the layer") {
    MlpParams p = MlpParams::init({3, 2}, lgf::Rng(0));
    Tape tape;
    const Tensor x = tape.constant(Tensor::matrix(1, 2, {1, 2}));
    CHECK_THROWS_AS(lgf::mlp_forward(tape, p, x), lgf::DimensionError);
}

TEST_CASE("vectorize flattens row-major and stays differentiable") {
    Tape tape;
    const Tensor m = tape.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    const Tensor v = lgf::vectorize(tape, m);
    CHECK(v.shape == std::vector<std::size_t>{1, 6});
    CHECK(v.values == std::vector<double>{1, 2, 3, 4, 5, 6});

    lgf::Rng rng(3);
    Tensor x = testutil::random_tensor({3, 2}, rng);
    auto fn = [](Tape& t, std::vector<Tensor>& in) {
        t.watch(in[0]);
        return t.frobenius_sq(lgf::vectorize(t, in[0]));
    };
    CHECK(testutil::fd_max_rel_error(fn, {x}) <= 1e-6);
}

TEST_CASE("fuse_and_predict: identity gf makes the fused vector an exact concat") {
    // gf = single identity layer, so fused = concat(vec(H^L), vec(H^0)).
    MlpParams gf = MlpParams::init({2, 2}, lgf::Rng(0));
    std::fill(gf.layers[0].weight.values.begin(), gf.layers[0].weight.values.end(), 0.0);
    std::fill(gf.layers[0].bias.values.begin(), gf.layers[0].bias.values.end(), 0.0);
    gf.layers[0].weight.at(0, 0) = 1.0;
    gf.layers[0].weight.at(1, 1) = 1.0;
    MlpParams head = MlpParams::init({10, 4, 3}, lgf::Rng(9));

    const Tensor local = Tensor::matrix(2, 2, {9, 8, 7, 6});   // H^L
    const Tensor global = Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6});  // H^0
    Tape tape;
    const lgf::FusePrediction fp =
        lgf::fuse_and_predict(tape, tape.constant(local), tape.constant(global), gf, head);
    CHECK(fp.fused.values == std::vector<double>{9, 8, 7, 6, 1, 2, 3, 4, 5, 6});
    CHECK(fp.logits.shape == std::vector<std::size_t>{1, 3});
}

TEST_CASE("constant head logits tie-break toward the lowest class") {
    MlpParams gf = MlpParams::init({2, 2}, lgf::Rng(0));
    MlpParams head = MlpParams::init({8, 3}, lgf::Rng(0));
    std::fill(head.layers[0].weight.values.begin(), head.layers[0].weight.values.end(), 0.0);
    head.layers[0].bias = Tensor::matrix(1, 3, {0.7, 0.7, 0.7});
    Tape tape;
    const lgf::FusePrediction fp = lgf::fuse_and_predict(
        tape, tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4})), tape.constant(Tensor::matrix(2, 2, {5, 6, 7, 8})),
        gf, head);
    for (double v : fp.logits.values) CHECK(v == 0.7);
    CHECK(lgf::argmax_class(fp.logits) == 1);
}

TEST_CASE("full fuse path matches an independently scripted forward evaluation") {
    lgf::Rng rng(44);
    MlpParams gf = MlpParams::init({2, 2, 2}, rng.derive("gf"));
    MlpParams head = MlpParams::init({8, 3, 2}, rng.derive("head"));
    Tensor local = testutil::random_tensor({2, 2}, rng);
    Tensor global = testutil::random_tensor({2, 2}, rng);

    // Plain-loop re-implementation of the whole path.
    auto mlp_ref = [](const MlpParams& p, std::vector<double> row) {
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            const Tensor& w = p.layers[l].weight;
            std::vector<double> next(w.cols(), 0.0);
            for (std::size_t o = 0; o < w.cols(); ++o) {
                for (std::size_t i = 0; i < w.rows(); ++i) next[o] += row[i] * w.at(i, o);
                next[o] += p.layers[l].bias.values[o];
                if (l + 1 < p.layers.size()) next[o] = std::max(0.0, next[o]);
            }
            row = std::move(next);
        }
        return row;
    };
    // gf is applied row-wise; fused = [vec(local), vec(gf(global))].
    std::vector<double> fused_ref;
    for (double v : local.values) fused_ref.push_back(v);
    std::vector<double> gf_rows;
    for (std::size_t r = 0; r < 2; ++r) {
        const auto t = mlp_ref(gf, {global.at(r, 0), global.at(r, 1)});
        gf_rows.insert(gf_rows.end(), t.begin(), t.end());
    }
    fused_ref.insert(fused_ref.end(), gf_rows.begin(), gf_rows.end());
    const std::vector<double> logits_ref = mlp_ref(head, fused_ref);

    Tape tape;
    const lgf::FusePrediction fp =
        lgf::fuse_and_predict(tape, tape.constant(local), tape.constant(global), gf, head);
    REQUIRE(fp.logits.size() == logits_ref.size());
    for (std::size_t i = 0; i < logits_ref.size(); ++i) {
        CHECK(fp.logits.values[i] == doctest::Approx(logits_ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("cross_entropy closed forms") {
    SUBCASE("uniform logits over 20 classes cost ln 20") {
        Tape tape;
        const Tensor logits = tape.constant(Tensor::zeros({1, 20}));
        const Tensor loss = tape.cross_entropy(logits, 7);
        CHECK(loss.values[0] == doctest::Approx(std::log(20.0)).epsilon(1e-14));
    }
    SUBCASE("a saturated correct class costs nearly nothing") {
        Tape tape;
        Tensor z = Tensor::zeros({1, 5});
        z.values[2] = 50.0;
        const Tensor loss = tape.cross_entropy(tape.constant(z), 3);
        CHECK(loss.values[0] <= 1e-9);
    }
    SUBCASE("logits [1,2,3] with label 3") {
        Tape tape;
        const Tensor loss = tape.cross_entropy(tape.constant(Tensor::matrix(1, 3, {1, 2, 3})), 3);
        const double want = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 3.0;
        CHECK(loss.values[0] == doctest::Approx(want).epsilon(1e-14));
    }
    SUBCASE("label out of range is a contract error") {
        Tape tape;
        const Tensor logits = tape.constant(Tensor::zeros({1, 4}));
        CHECK_THROWS_AS(tape.cross_entropy(logits, 0), lgf::ContractError);
        CHECK_THROWS_AS(tape.cross_entropy(logits, 5), lgf::ContractError);
    }
}

TEST_CASE("cross_entropy is shift invariant and its gradient is softmax minus one-hot") {
    lgf::Rng rng(46);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng.below(6);
        Tensor z = testutil::random_tensor({1, k}, rng, -3.0, 3.0);
        const int label = 1 + static_cast<int>(rng.below(k));
        const double c = rng.uniform(-100.0, 100.0);

        Tape t1;
        const double base = t1.cross_entropy(t1.constant(z), label).values[0];
        Tensor shifted = z;
        for (double& v : shifted.values) v += c;
        Tape t2;
        const double moved = t2.cross_entropy(t2.constant(shifted), label).values[0];
        CHECK(std::abs(base - moved) <= 1e-12);

        // Analytic identity for the logit gradient.
        Tape t3;
        Tensor zw = z;
        t3.watch(zw);
        const Tensor loss = t3.cross_entropy(zw, label);
        t3.backward(loss);
        const auto g = t3.grad(zw);
        double mx = z.values[0];
        for (double v : z.values) mx = std::max(mx, v);
        double sum = 0.0;
        for (double v : z.values) sum += std::exp(v - mx);
        for (std::size_t j = 0; j < k; ++j) {
            const double softmax_j = std::exp(z.values[j] - mx) / sum;
            const double want = softmax_j - (static_cast<int>(j) + 1 == label ? 1.0 : 0.0);
            CHECK(std::abs(g[j] - want) <= 1e-10);
        }

        // argmax can be read off the logits directly.
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (z.values[j] > z.values[best]) best = j;
        CHECK(lgf::argmax_class(z) == static_cast<int>(best) + 1);
    }
}
