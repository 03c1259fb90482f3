#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgf/error.hpp"

namespace lgf {

// Multivariate time series split into simulation runs. values is Z x N
// row-major; run r spans rows [run_boundaries[r], next boundary or Z) and
// carries the fault class run_labels[r] (classes are 1-based).
struct TimeSeriesDataset {
    std::vector<double> values;  // Z x N row-major
    std::size_t sample_count = 0;
    std::size_t variable_count = 0;
    std::vector<std::string> variable_names;
    std::vector<int> run_labels;
    std::vector<std::size_t> run_boundaries;  // start row of each run

    std::size_t run_count() const { return run_boundaries.size(); }
    std::size_t run_begin(std::size_t r) const { return run_boundaries[r]; }
    std::size_t run_end(std::size_t r) const {
        return r + 1 < run_boundaries.size() ? run_boundaries[r + 1] : sample_count;
    }
    std::size_t run_length(std::size_t r) const { return run_end(r) - run_begin(r); }
    double at(std::size_t row, std::size_t col) const { return values[row * variable_count + col]; }
    int max_label() const;
};

// Per-variable z-score statistics, fit on training data only.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<std::size_t> zero_variance_columns;  // columns where std fell back to 1
};

// One sliding-window segment: w x N values (row-major), its fault label, and
// where it came from (run index plus end-time index within the run).
struct WindowedSample {
    std::vector<double> segment;  // w x N row-major
    std::size_t window_length = 0;
    std::size_t variable_count = 0;
    int label = 0;
    std::size_t run_index = 0;
    std::size_t end_time = 0;  // index of the window's last row within its run

    double at(std::size_t row, std::size_t col) const { return segment[row * variable_count + col]; }
    // One variable's segment as a contiguous vector (column of the window).
    std::vector<double> variable_series(std::size_t col) const;
};

// Column mapping for CSV ingestion. When variable_columns is empty every
// column that is not the label, run, or an ignored column becomes a variable,
// in file order. Defaults follow the common TEP export layout.
struct CsvSchema {
    std::string label_column = "faultNumber";
    std::string run_column = "simulationRun";
    std::vector<std::string> ignore_columns = {"sample"};
    std::vector<std::string> variable_columns;
};

TimeSeriesDataset load_csv(const std::string& path, const CsvSchema& schema);

// z-score per column. With stats absent they are fit on all rows of the input
// (across all classes) and returned; with stats present they are applied
// unchanged (the test-time path). Zero-variance columns fall back to std=1 and
// are recorded in the returned stats.
std::pair<TimeSeriesDataset, NormStats> normalize(const TimeSeriesDataset& dataset,
                                                  const std::optional<NormStats>& stats = std::nullopt);

// Sliding windows of length w with the given stride. Windows never cross run
// boundaries; each is labeled by its source run's fault class.
std::vector<WindowedSample> make_windows(const TimeSeriesDataset& dataset, std::size_t w, std::size_t stride);

struct SynthConfig {
    int classes = 4;
    int variables = 10;
    int runs_per_class = 6;
    int run_length = 60;
    std::uint64_t seed = 42;
};

// Synthetic stand-in for plant data: per class, a distinct random partition of
// variables into groups sharing an AR(1) latent driver (class-specific
// correlation structure) plus a class-specific AR coefficient, with
// observation noise sigma=0.1. Deterministic for a fixed seed.
TimeSeriesDataset synth_generate(const SynthConfig& config);

// The group id of each variable, per class, as drawn by synth_generate for
// the same config (useful for inspecting the planted correlation structure).
std::vector<std::vector<int>> synth_partitions(const SynthConfig& config);

// Write a dataset as CSV in the default schema (faultNumber, simulationRun,
// sample, then variables), so it round-trips through load_csv.
void write_csv(const TimeSeriesDataset& dataset, const std::string& path);

}  // namespace lgf
