#include "lgf/trainer.hpp"

#include <bit>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <set>

#include <json.hpp>

#include "lgf/graph.hpp"

namespace lgf {

namespace {

using nlohmann::json;

json config_to_json(const TrainConfig& c) {
    json j;
    j["window_length"] = c.window_length;
    j["stride"] = c.stride;
    j["corr_threshold"] = c.corr_threshold;
    j["lstm_hidden"] = c.lstm_hidden;
    j["sage_dim"] = c.sage_dim;
    j["sage_layers"] = c.sage_layers;
    j["supernodes"] = c.supernodes;
    j["pool_levels"] = c.pool_levels;
    j["alpha_pool"] = c.alpha_pool;
    j["lr"] = c.lr;
    j["batch"] = c.batch;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    j["ablation"] = to_string(c.ablation);
    j["gf_dim"] = c.gf_dim;
    j["head_hidden"] = c.head_hidden;
    j["threads"] = c.threads;
    j["variables"] = c.variables;
    j["classes"] = c.classes;
    return j;
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.window_length = j.at("window_length").get<std::size_t>();
    c.stride = j.at("stride").get<std::size_t>();
    c.corr_threshold = j.at("corr_threshold").get<double>();
    c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
    c.sage_dim = j.at("sage_dim").get<std::size_t>();
    c.sage_layers = j.at("sage_layers").get<std::size_t>();
    c.supernodes = j.at("supernodes").get<std::size_t>();
    c.pool_levels = j.at("pool_levels").get<std::size_t>();
    c.alpha_pool = j.at("alpha_pool").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch = j.at("batch").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.ablation = variant_from_string(j.at("ablation").get<std::string>());
    c.gf_dim = j.at("gf_dim").get<std::size_t>();
    c.head_hidden = j.at("head_hidden").get<std::size_t>();
    c.threads = j.at("threads").get<std::size_t>();
    c.variables = j.at("variables").get<std::size_t>();
    c.classes = j.at("classes").get<std::size_t>();
    return c;
}

void append_le_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_le_double(std::string& out, double d) { append_le_u64(out, std::bit_cast<std::uint64_t>(d)); }

std::uint64_t read_le_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

TrainResult train(TrainConfig config, const std::vector<WindowedSample>& windows) {
    if (windows.empty()) throw ContractError("train: empty window set");

    // Derive N and K from the data; every class 1..K must be represented.
    const std::size_t n = windows.front().variable_count;
    int k = 0;
    for (const WindowedSample& w : windows) k = std::max(k, w.label);
    std::set<int> seen;
    for (const WindowedSample& w : windows) {
        if (w.variable_count != n) throw ContractError("train: windows disagree on variable count");
        if (w.label < 1) throw ContractError("train: labels must be 1-based");
        seen.insert(w.label);
    }
    for (int c = 1; c <= k; ++c) {
        if (!seen.count(c)) {
            throw ContractError("train: class " + std::to_string(c) + " has no windows (classes must cover 1..K)");
        }
    }
    if (config.variables != 0 && config.variables != n) {
        throw ConfigError("train: config.variables disagrees with the data");
    }
    if (config.classes != 0 && config.classes != static_cast<std::size_t>(k)) {
        throw ConfigError("train: config.classes disagrees with the data");
    }
    config.variables = n;
    config.classes = static_cast<std::size_t>(k);

    TrainResult result;
    result.params = ModelParameters::init(config);
    result.config = config;
    if (config.epochs == 0) return result;

    // Snapshots are pure functions of the windows; build them once.
    std::vector<GraphSnapshot> snapshots;
    snapshots.reserve(windows.size());
    for (const WindowedSample& w : windows) snapshots.push_back(build_snapshot(w, config.corr_threshold));

    ParamRegistry registry = result.params.registry();
    AdamState adam = AdamState::init(registry);
    const Rng base(config.seed);

    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        // Shuffling draws from its own stream so init and shuffle order stay
        // independently reproducible.
        Rng shuffle_rng = base.derive("train.shuffle", epoch);
        shuffle_rng.shuffle(order);

        double ce_sum = 0.0, pool_sum = 0.0;
        std::size_t correct = 0;

        for (std::size_t start = 0; start < order.size(); start += config.batch) {
            const std::size_t end = std::min(order.size(), start + config.batch);
            const double inv_batch = 1.0 / static_cast<double>(end - start);

            GradMap accum;
            for (const auto& [name, t] : registry) accum.emplace(name, std::vector<double>(t->size(), 0.0));

            for (std::size_t i = start; i < end; ++i) {
                const std::size_t idx = order[i];
                Tape tape;
                ForwardResult fwd = forward_on_snapshot(tape, result.params, snapshots[idx], config);
                const Tensor ce = tape.cross_entropy(fwd.logits, windows[idx].label);
                const Tensor pool_total = tape.add(fwd.link_loss, fwd.entropy_loss);
                const Tensor loss =
                    tape.add(ce, tape.scale(pool_total, tape.constant_scalar(config.alpha_pool)));
                if (!std::isfinite(loss.values[0])) {
                    throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(start / config.batch) + " (ce=" + std::to_string(ce.values[0]) +
                                       ", pool=" + std::to_string(pool_total.values[0]) + ")");
                }
                tape.backward(loss);
                for (const auto& [name, t] : registry) {
                    auto g = tape.grad(*t);
                    std::vector<double>& a = accum[name];
                    for (std::size_t e = 0; e < a.size(); ++e) a[e] += g[e];
                }
                ce_sum += ce.values[0];
                pool_sum += pool_total.values[0];
                if (argmax_class(fwd.logits) == windows[idx].label) ++correct;
            }

            for (auto& [name, g] : accum) {
                (void)name;
                for (double& v : g) v *= inv_batch;
            }
            adam_step(registry, accum, adam, config.lr);
        }

        const double m = static_cast<double>(windows.size());
        EpochRecord rec;
        rec.epoch = epoch;
        rec.ce_loss = ce_sum / m;
        rec.pool_loss = pool_sum / m;
        rec.total_loss = rec.ce_loss + config.alpha_pool * rec.pool_loss;
        rec.train_accuracy = static_cast<double>(correct) / m;
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.epochs.push_back(rec);
    }
    result.adam_steps = adam.step_count;
    return result;
}

Tensor predict_logits(ModelParameters& params, const TrainConfig& config, const WindowedSample& window) {
    Tape tape;
    return forward_sample(tape, params, window, config).logits;
}

std::vector<int> predict(ModelParameters& params, const TrainConfig& config,
                         const std::vector<WindowedSample>& windows) {
    std::vector<int> preds;
    preds.reserve(windows.size());
    for (const WindowedSample& w : windows) preds.push_back(argmax_class(predict_logits(params, config, w)));
    return preds;
}

void save_checkpoint(ModelParameters& params, const TrainConfig& config, const std::string& path,
                     const std::optional<NormStats>& norm_stats) {
    ParamRegistry registry = params.registry();
    json manifest;
    manifest["config"] = config_to_json(config);
    json plist = json::array();
    for (const auto& [name, t] : registry) {
        plist.push_back(json{{"name", name}, {"shape", t->shape}});
    }
    manifest["parameters"] = plist;
    if (norm_stats.has_value()) {
        manifest["norm_stats"] = json{{"mean", norm_stats->mean}, {"std", norm_stats->std}};
    }
    const std::string manifest_str = manifest.dump();

    std::string blob;
    blob += "LGFM";
    blob.push_back(0x01);
    append_le_u64(blob, manifest_str.size());
    blob += manifest_str;
    for (const auto& [name, t] : registry) {
        (void)name;
        for (double v : t->values) append_le_double(blob, v);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint '" + path + "'");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("failed while writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (blob.size() < 13 || blob.compare(0, 4, "LGFM") != 0) {
        throw FormatError("checkpoint '" + path + "': bad magic");
    }
    if (blob[4] != 0x01) throw FormatError("checkpoint '" + path + "': unsupported version");
    const std::uint64_t manifest_len = read_le_u64(reinterpret_cast<const unsigned char*>(blob.data()) + 5);
    if (13 + manifest_len > blob.size()) throw IntegrityError("checkpoint '" + path + "': truncated manifest");

    json manifest;
    try {
        manifest = json::parse(blob.substr(13, manifest_len));
    } catch (const json::exception& e) {
        throw FormatError("checkpoint '" + path + "': manifest is not valid JSON (" + e.what() + ")");
    }

    Checkpoint ck{ModelParameters{}, TrainConfig{}, std::nullopt};
    try {
        ck.config = config_from_json(manifest.at("config"));
    } catch (const json::exception& e) {
        throw FormatError("checkpoint '" + path + "': bad config section (" + e.what() + ")");
    }
    ck.params = ModelParameters::init(ck.config);
    if (manifest.contains("norm_stats")) {
        NormStats ns;
        ns.mean = manifest["norm_stats"].at("mean").get<std::vector<double>>();
        ns.std = manifest["norm_stats"].at("std").get<std::vector<double>>();
        ck.norm_stats = std::move(ns);
    }

    ParamRegistry registry = ck.params.registry();
    const json& plist = manifest.at("parameters");
    if (plist.size() != registry.size()) {
        throw IntegrityError("checkpoint '" + path + "': manifest lists " + std::to_string(plist.size()) +
                             " parameters, model has " + std::to_string(registry.size()));
    }
    std::size_t offset = 13 + manifest_len;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        auto& [name, t] = registry[i];
        const std::string mname = plist[i].at("name").get<std::string>();
        const auto mshape = plist[i].at("shape").get<std::vector<std::size_t>>();
        if (mname != name) {
            throw IntegrityError("checkpoint '" + path + "': parameter " + std::to_string(i) + " is '" + mname +
                                 "', model expects '" + name + "'");
        }
        if (mshape != t->shape) {
            throw IntegrityError("checkpoint '" + path + "': shape mismatch for parameter '" + name + "'");
        }
        const std::size_t bytes = t->size() * 8;
        if (offset + bytes > blob.size()) {
            throw IntegrityError("checkpoint '" + path + "': truncated parameter data at '" + name + "'");
        }
        for (std::size_t e = 0; e < t->size(); ++e) {
            t->values[e] = std::bit_cast<double>(
                read_le_u64(reinterpret_cast<const unsigned char*>(blob.data()) + offset + e * 8));
        }
        offset += bytes;
    }
    if (offset != blob.size()) {
        throw IntegrityError("checkpoint '" + path + "': trailing bytes after parameter data");
    }
    return ck;
}

}  // namespace lgf
