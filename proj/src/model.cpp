#include "lgf/model.hpp"

#include <algorithm>
#include <cmath>

namespace lgf {

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "no_gf") return Variant::no_gf;
    if (s == "no_lstm") return Variant::no_lstm;
    if (s == "sage_only") return Variant::sage_only;
    if (s == "sage_lstm") return Variant::sage_lstm;
    throw ConfigError("unknown ablation variant '" + s + "' (expected full, no_gf, no_lstm, sage_only, sage_lstm)");
}

const char* to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_gf: return "no_gf";
        case Variant::no_lstm: return "no_lstm";
        case Variant::sage_only: return "sage_only";
        case Variant::sage_lstm: return "sage_lstm";
    }
    return "?";
}

std::size_t TrainConfig::supernodes_at(std::size_t level) const {
    std::size_t count = supernodes;
    for (std::size_t l = 0; l < level; ++l) count = std::max<std::size_t>(2, count / 2);
    return std::max<std::size_t>(1, count);
}

void TrainConfig::validate() const {
    if (window_length < 2) throw ConfigError("window_length must be at least 2");
    if (stride == 0) throw ConfigError("stride must be positive");
    if (corr_threshold < 0.0 || corr_threshold >= 1.0) throw ConfigError("corr_threshold must lie in [0, 1)");
    if (lstm_hidden == 0 || sage_dim == 0 || sage_layers == 0 || supernodes == 0 || pool_levels == 0) {
        throw ConfigError("model dimensions must be positive");
    }
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (batch == 0) throw ConfigError("batch must be positive");
    if (alpha_pool < 0.0) throw ConfigError("alpha_pool must be nonnegative");
    if (threads != 1) throw ConfigError("threads must be 1 (single-threaded execution)");
}

InputProjParams InputProjParams::init(std::size_t window_length, std::size_t out_dim, Rng rng) {
    InputProjParams p;
    const double bound = std::sqrt(6.0 / static_cast<double>(window_length + out_dim));
    std::vector<double> w(window_length * out_dim);
    for (double& x : w) x = rng.uniform(-bound, bound);
    p.weight = Tensor::matrix(window_length, out_dim, std::move(w));
    p.bias = Tensor::zeros({1, out_dim});
    return p;
}

namespace {

bool uses_lstm(Variant v) { return v == Variant::full || v == Variant::no_gf || v == Variant::sage_lstm; }
bool uses_pool(Variant v) { return v == Variant::full || v == Variant::no_gf || v == Variant::no_lstm; }
bool uses_gf(Variant v) { return v == Variant::full || v == Variant::no_lstm; }

std::size_t head_input_width(const TrainConfig& c) {
    switch (c.ablation) {
        case Variant::full:
        case Variant::no_lstm: return c.final_supernodes() * c.sage_dim + c.variables * c.effective_gf_dim();
        case Variant::no_gf: return c.final_supernodes() * c.sage_dim;
        case Variant::sage_only:
        case Variant::sage_lstm: return c.sage_dim;
    }
    return 0;
}

}  // namespace

ModelParameters ModelParameters::init(const TrainConfig& config) {
    config.validate();
    if (config.variables == 0 || config.classes < 2) {
        throw ConfigError("model init: variables and classes must be set (derived from data)");
    }
    Rng rng(config.seed);
    ModelParameters p;
    p.variant = config.ablation;

    if (uses_lstm(p.variant)) {
        p.lstm = LstmParams::init(config.lstm_hidden, rng.derive("init.lstm"));
    } else {
        p.input_proj = InputProjParams::init(config.window_length, config.lstm_hidden, rng.derive("init.proj"));
    }

    std::size_t width = config.lstm_hidden;
    for (std::size_t g = 0; g < config.sage_layers; ++g) {
        p.sage.push_back(
            SageLayerParams::init(width, config.sage_dim, static_cast<int>(g), rng.derive("init.sage", g)));
        width = config.sage_dim;
    }

    if (uses_pool(p.variant)) {
        for (std::size_t l = 0; l < config.pool_levels; ++l) {
            const bool last = l + 1 == config.pool_levels;
            p.pool.push_back(PoolLevelParams::init(config.sage_dim, config.supernodes_at(l), static_cast<int>(l),
                                                   last, rng.derive("init.pool", l)));
        }
    }

    if (uses_gf(p.variant)) {
        p.gf_mlp = MlpParams::init({config.sage_dim, config.sage_dim, config.effective_gf_dim()},
                                   rng.derive("init.gf_mlp"));
    }

    p.head_mlp = MlpParams::init({head_input_width(config), config.head_hidden, config.classes},
                                 rng.derive("init.head"));
    return p;
}

ParamRegistry ModelParameters::registry() {
    ParamRegistry reg;
    if (lstm.has_value()) {
        LstmParams& l = *lstm;
        reg.emplace_back("lstm.w_i", &l.w_input);
        reg.emplace_back("lstm.u_i", &l.u_input);
        reg.emplace_back("lstm.b_i", &l.b_input);
        reg.emplace_back("lstm.w_f", &l.w_forget);
        reg.emplace_back("lstm.u_f", &l.u_forget);
        reg.emplace_back("lstm.b_f", &l.b_forget);
        reg.emplace_back("lstm.w_o", &l.w_output);
        reg.emplace_back("lstm.u_o", &l.u_output);
        reg.emplace_back("lstm.b_o", &l.b_output);
        reg.emplace_back("lstm.w_g", &l.w_cand);
        reg.emplace_back("lstm.u_g", &l.u_cand);
        reg.emplace_back("lstm.b_g", &l.b_cand);
    }
    if (input_proj.has_value()) {
        reg.emplace_back("input_proj.weight", &input_proj->weight);
        reg.emplace_back("input_proj.bias", &input_proj->bias);
    }
    for (std::size_t g = 0; g < sage.size(); ++g) {
        reg.emplace_back("sage." + std::to_string(g) + ".weight", &sage[g].weight);
    }
    for (std::size_t l = 0; l < pool.size(); ++l) {
        reg.emplace_back("pool." + std::to_string(l) + ".assign.weight", &pool[l].assign_gnn.weight);
        if (pool[l].embed_gnn.has_value()) {
            reg.emplace_back("pool." + std::to_string(l) + ".embed.weight", &pool[l].embed_gnn->weight);
        }
    }
    if (gf_mlp.has_value()) {
        for (std::size_t l = 0; l < gf_mlp->layers.size(); ++l) {
            reg.emplace_back("gf_mlp." + std::to_string(l) + ".weight", &gf_mlp->layers[l].weight);
            reg.emplace_back("gf_mlp." + std::to_string(l) + ".bias", &gf_mlp->layers[l].bias);
        }
    }
    for (std::size_t l = 0; l < head_mlp.layers.size(); ++l) {
        reg.emplace_back("head_mlp." + std::to_string(l) + ".weight", &head_mlp.layers[l].weight);
        reg.emplace_back("head_mlp." + std::to_string(l) + ".bias", &head_mlp.layers[l].bias);
    }
    return reg;
}

std::vector<std::string> ModelParameters::group_names() const {
    std::vector<std::string> groups;
    if (lstm.has_value()) groups.push_back("lstm");
    if (input_proj.has_value()) groups.push_back("input_proj");
    if (!sage.empty()) groups.push_back("sage");
    if (!pool.empty()) groups.push_back("pool");
    if (gf_mlp.has_value()) groups.push_back("gf_mlp");
    groups.push_back("head_mlp");
    return groups;
}

namespace {

// Node-major view of the window (N x w): row v is variable v's segment.
Tensor node_segments(Tape& tape, const WindowedSample& window) {
    const std::size_t n = window.variable_count, w = window.window_length;
    std::vector<double> v(n * w);
    for (std::size_t node = 0; node < n; ++node)
        for (std::size_t s = 0; s < w; ++s) v[node * w + s] = window.at(s, node);
    return tape.constant({n, w}, std::move(v));
}

Tensor mean_readout(Tape& tape, const Tensor& features) {
    const std::size_t n = features.rows();
    return tape.matmul(tape.constant({1, n}, std::vector<double>(n, 1.0 / static_cast<double>(n))), features);
}

}  // namespace

ForwardResult forward_on_snapshot(Tape& tape, ModelParameters& params, const GraphSnapshot& snapshot,
                                  const TrainConfig& config) {
    const WindowedSample& window = snapshot.segments;
    if (window.variable_count != config.variables) {
        throw ContractError("forward: window has " + std::to_string(window.variable_count) +
                            " variables, model was built for " + std::to_string(config.variables));
    }

    // Temporal features, N x F.
    Tensor temporal;
    if (params.lstm.has_value()) {
        LstmHandles handles = watch_lstm(tape, *params.lstm);
        temporal = encode_window(tape, handles, window);
    } else {
        InputProjParams& proj = *params.input_proj;
        tape.watch(proj.weight);
        tape.watch(proj.bias);
        const Tensor raw = node_segments(tape, window);
        const Tensor ones = tape.constant({raw.rows(), 1}, std::vector<double>(raw.rows(), 1.0));
        temporal = tape.add(tape.matmul(raw, proj.weight), tape.matmul(ones, proj.bias));
    }

    // Spatial features over the snapshot graph, N x d.
    const Tensor h0 = encode_spatial(tape, params.sage, temporal, snapshot);

    ForwardResult result;
    if (!params.pool.empty()) {
        PoolForwardResult pooled = pool_forward(tape, params.pool, h0, snapshot);
        result.link_loss = pooled.link_loss;
        result.entropy_loss = pooled.entropy_loss;
        result.assignments = std::move(pooled.assignments);
        if (params.gf_mlp.has_value()) {
            FusePrediction fp = fuse_and_predict(tape, pooled.coarse_features, h0, *params.gf_mlp, params.head_mlp);
            result.fused = fp.fused;
            result.logits = fp.logits;
        } else {
            result.fused = vectorize(tape, pooled.coarse_features);
            result.logits = mlp_forward(tape, params.head_mlp, result.fused);
        }
    } else {
        result.link_loss = tape.constant_scalar(0.0);
        result.entropy_loss = tape.constant_scalar(0.0);
        result.fused = mean_readout(tape, h0);
        result.logits = mlp_forward(tape, params.head_mlp, result.fused);
    }
    return result;
}

ForwardResult forward_sample(Tape& tape, ModelParameters& params, const WindowedSample& window,
                             const TrainConfig& config) {
    const GraphSnapshot snapshot = build_snapshot(window, config.corr_threshold);
    return forward_on_snapshot(tape, params, snapshot, config);
}

}  // namespace lgf
