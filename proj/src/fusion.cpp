#include "lgf/fusion.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace lgf {

MlpParams MlpParams::init(const std::vector<std::size_t>& dims, Rng rng) {
    if (dims.size() < 2) throw ConfigError("mlp init: need at least input and output dims");
    MlpParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Rng lr = rng.derive("mlp.layer", l);
        const std::size_t in = dims[l], out = dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        std::vector<double> w(in * out);
        for (double& x : w) x = lr.uniform(-bound, bound);
        // Biases start slightly positive: an all-zero input row would otherwise
        // put the hidden preactivation exactly on the ReLU kink.
        Tensor bias = Tensor::zeros({1, out});
        for (double& b : bias.values) b = 0.01;
        p.layers.push_back({Tensor::matrix(in, out, std::move(w)), std::move(bias)});
    }
    return p;
}

void watch_mlp(Tape& tape, MlpParams& params) {
    for (MlpParams::Layer& l : params.layers) {
        tape.watch(l.weight);
        tape.watch(l.bias);
    }
}

Tensor mlp_forward(Tape& tape, MlpParams& params, const Tensor& input) {
    if (params.layers.empty()) throw ConfigError("mlp_forward: empty parameter set");
    if (!tape.owns(params.layers.front().weight)) watch_mlp(tape, params);
    Tensor x = input;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        MlpParams::Layer& layer = params.layers[l];
        if (x.cols() != layer.weight.rows()) {
            throw DimensionError("mlp_forward: layer " + std::to_string(l) + " expects width " +
                                 std::to_string(layer.weight.rows()) + ", input is " + x.shape_str());
        }
        // Bias broadcast over rows via a constant ones column.
        const Tensor ones = tape.constant({x.rows(), 1}, std::vector<double>(x.rows(), 1.0));
        x = tape.add(tape.matmul(x, layer.weight), tape.matmul(ones, layer.bias));
        if (l + 1 < params.layers.size()) x = tape.relu(x);
    }
    return x;
}

Tensor vectorize(Tape& tape, const Tensor& m) {
    const std::size_t r = m.rows();
    if (r == 1) return m;
    std::vector<Tensor> rows;
    rows.reserve(r);
    for (std::size_t i = 0; i < r; ++i) {
        std::vector<double> sel(r, 0.0);
        sel[i] = 1.0;
        rows.push_back(tape.matmul(tape.constant({1, r}, std::move(sel)), m));
    }
    return tape.concat_cols(rows);
}

FusePrediction fuse_and_predict(Tape& tape, const Tensor& local_features, const Tensor& global_features,
                                MlpParams& gf_params, MlpParams& head_params) {
    const Tensor transformed = mlp_forward(tape, gf_params, global_features);
    FusePrediction out;
    out.fused = tape.concat_cols(vectorize(tape, local_features), vectorize(tape, transformed));
    out.logits = mlp_forward(tape, head_params, out.fused);
    return out;
}

int argmax_class(const Tensor& logits) {
    if (logits.values.empty()) throw ContractError("argmax_class: empty logits");
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.values.size(); ++j) {
        if (logits.values[j] > logits.values[best]) best = j;
    }
    return static_cast<int>(best) + 1;
}

}  // namespace lgf
