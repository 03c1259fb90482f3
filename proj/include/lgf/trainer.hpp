#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lgf/dataset.hpp"
#include "lgf/model.hpp"

namespace lgf {

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double total_loss = 0.0;
    double ce_loss = 0.0;
    double pool_loss = 0.0;
    double train_accuracy = 0.0;
    double wall_seconds = 0.0;  // informational; excluded from determinism checks
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    ModelParameters params;
    TrainConfig config;  // with variables/classes filled in
    TrainHistory history;
    long adam_steps = 0;
};

// One pass of the training procedure: seeded init, per epoch a seeded shuffle
// into batches, mean batch loss = mean CE + alpha * mean pooling loss, one
// Adam step per batch. Deterministic for a fixed seed (single-threaded).
// Graph snapshots are built once per window up front and reused every epoch.
TrainResult train(TrainConfig config, const std::vector<WindowedSample>& windows);

// Forward passes with no parameter updates.
Tensor predict_logits(ModelParameters& params, const TrainConfig& config, const WindowedSample& window);
std::vector<int> predict(ModelParameters& params, const TrainConfig& config,
                         const std::vector<WindowedSample>& windows);

// Checkpoint file: magic "LGFM", version byte 0x01, 8-byte little-endian
// manifest length, UTF-8 JSON manifest {config, parameters: [{name, shape}]},
// then raw 64-bit little-endian floats concatenated in manifest order.
// Round-trips are bitwise exact.
void save_checkpoint(ModelParameters& params, const TrainConfig& config, const std::string& path,
                     const std::optional<NormStats>& norm_stats = std::nullopt);

struct Checkpoint {
    ModelParameters params;
    TrainConfig config;
    std::optional<NormStats> norm_stats;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace lgf
