#pragma once

#include <optional>
#include <string>

#include "lgf/fusion.hpp"
#include "lgf/lstm.hpp"
#include "lgf/pool.hpp"

namespace lgf {

// Model composition variants used by the ablation study. "full" is the
// complete local-global fusion network; the others rewire or drop stages.
enum class Variant { full, no_gf, no_lstm, sage_only, sage_lstm };

Variant variant_from_string(const std::string& s);
const char* to_string(Variant v);

struct TrainConfig {
    std::size_t window_length = 100;
    std::size_t stride = 1;
    double corr_threshold = 0.5;
    std::size_t lstm_hidden = 64;  // F
    std::size_t sage_dim = 64;     // d
    std::size_t sage_layers = 2;   // G
    std::size_t supernodes = 8;
    std::size_t pool_levels = 1;
    double alpha_pool = 0.1;
    double lr = 0.003;
    std::size_t batch = 32;
    std::size_t epochs = 0;  // required for training; deliberately no default
    std::uint64_t seed = 42;
    Variant ablation = Variant::full;
    std::size_t gf_dim = 0;  // width of the global-feature MLP output; 0 = sage_dim
    std::size_t head_hidden = 128;
    std::size_t threads = 1;

    // Data-derived dimensions, filled in when training starts and persisted in
    // checkpoints so evaluation can rebuild the exact model.
    std::size_t variables = 0;  // N
    std::size_t classes = 0;    // K

    std::size_t effective_gf_dim() const { return gf_dim == 0 ? sage_dim : gf_dim; }
    // Super-node count at pooling level l (halving below the configured count,
    // never under 2).
    std::size_t supernodes_at(std::size_t level) const;
    std::size_t final_supernodes() const { return supernodes_at(pool_levels - 1); }
    void validate() const;
};

// Affine projection of a node's raw length-w segment to an F-vector; stands in
// for the LSTM in the no_lstm and sage_only variants.
struct InputProjParams {
    Tensor weight;  // w x F
    Tensor bias;    // 1 x F

    static InputProjParams init(std::size_t window_length, std::size_t out_dim, Rng rng);
};

// The complete trainable parameter set. Which components exist depends on the
// variant; the registry lists every trainable tensor exactly once, in a stable
// order with stable names.
struct ModelParameters {
    Variant variant = Variant::full;
    std::optional<LstmParams> lstm;
    std::optional<InputProjParams> input_proj;
    std::vector<SageLayerParams> sage;
    std::vector<PoolLevelParams> pool;
    std::optional<MlpParams> gf_mlp;
    MlpParams head_mlp;

    static ModelParameters init(const TrainConfig& config);

    ParamRegistry registry();
    // Registry restricted to names sharing the given top-level prefix
    // ("lstm", "sage", "pool", "gf_mlp", "head_mlp", "input_proj").
    std::vector<std::string> group_names() const;
};

struct ForwardResult {
    Tensor logits;        // 1 x K
    Tensor link_loss;     // scalar; zero constant for variants without pooling
    Tensor entropy_loss;  // scalar
    Tensor fused;         // the representation fed to the classifier head
    std::vector<Tensor> assignments;
};

// Forward pass on a prebuilt snapshot (the snapshot carries its window).
ForwardResult forward_on_snapshot(Tape& tape, ModelParameters& params, const GraphSnapshot& snapshot,
                                  const TrainConfig& config);

// Convenience path: builds the snapshot from the window first.
ForwardResult forward_sample(Tape& tape, ModelParameters& params, const WindowedSample& window,
                             const TrainConfig& config);

}  // namespace lgf
