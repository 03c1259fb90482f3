#pragma once

#include "lgf/rng.hpp"
#include "lgf/tensor.hpp"

namespace lgf {

// Plain MLP: affine + ReLU per hidden layer, affine output. Softmax is never
// applied here; the classifier keeps it inside the cross-entropy loss.
struct MlpParams {
    struct Layer {
        Tensor weight;  // in x out
        Tensor bias;    // 1 x out
    };
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.front().weight.rows(); }
    std::size_t output_dim() const { return layers.back().weight.cols(); }

    // dims = {in, hidden..., out}; at least one layer.
    static MlpParams init(const std::vector<std::size_t>& dims, Rng rng);
};

void watch_mlp(Tape& tape, MlpParams& params);

// Applies the MLP row-wise to a (rows x input_dim) matrix.
Tensor mlp_forward(Tape& tape, MlpParams& params, const Tensor& input);

// Row-major flattening of a tape tensor into a 1 x (rows*cols) row, built
// from constant row selectors so it stays differentiable.
Tensor vectorize(Tape& tape, const Tensor& m);

struct FusePrediction {
    Tensor logits;  // 1 x K, softmax deliberately not applied
    Tensor fused;   // the concat fed to the classifier head
};

// H~0 = gf(H0) row-wise; logits = head(concat(vec(H^L), vec(H~0))).
FusePrediction fuse_and_predict(Tape& tape, const Tensor& local_features, const Tensor& global_features,
                                MlpParams& gf_params, MlpParams& head_params);

// Ties broken toward the lowest class index; returns a 1-based class.
int argmax_class(const Tensor& logits);

}  // namespace lgf
