#include "lgf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "lgf/rng.hpp"

namespace lgf {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // Trim surrounding whitespace and a possible trailing \r.
        std::size_t b = cell.find_first_not_of(" \t\r\n");
        std::size_t e = cell.find_last_not_of(" \t\r\n");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_numeric(const std::string& cell, std::size_t row, const std::string& column) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || cell.empty()) {
        throw ParseError("non-numeric cell '" + cell + "' at data row " + std::to_string(row) + ", column '" + column +
                         "'");
    }
    if (std::isnan(v)) {
        throw ParseError("NaN cell at data row " + std::to_string(row) + ", column '" + column + "'");
    }
    return v;
}

}  // namespace

int TimeSeriesDataset::max_label() const {
    int k = 0;
    for (int l : run_labels) k = std::max(k, l);
    return k;
}

std::vector<double> WindowedSample::variable_series(std::size_t col) const {
    std::vector<double> out(window_length);
    for (std::size_t s = 0; s < window_length; ++s) out[s] = segment[s * variable_count + col];
    return out;
}

TimeSeriesDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file '" + path + "'");

    std::string header_line;
    if (!std::getline(in, header_line)) throw ParseError("empty CSV file '" + path + "'");
    const std::vector<std::string> header = split_csv_line(header_line);

    auto column_index = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("CSV file '" + path + "' is missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };

    const std::size_t label_idx = column_index(schema.label_column);
    const std::size_t run_idx = column_index(schema.run_column);

    std::vector<std::size_t> var_idx;
    std::vector<std::string> var_names;
    if (!schema.variable_columns.empty()) {
        for (const std::string& name : schema.variable_columns) {
            var_idx.push_back(column_index(name));
            var_names.push_back(name);
        }
    } else {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == label_idx || i == run_idx) continue;
            if (std::find(schema.ignore_columns.begin(), schema.ignore_columns.end(), header[i]) !=
                schema.ignore_columns.end()) {
                continue;
            }
            var_idx.push_back(i);
            var_names.push_back(header[i]);
        }
    }
    if (var_idx.size() < 2) {
        throw SchemaError("CSV file '" + path + "' must provide at least 2 variable columns, found " +
                          std::to_string(var_idx.size()));
    }

    // Rows grouped per run in first-appearance order. Run identity is the
    // (run id, label) pair: TEP exports reuse run ids across fault classes.
    struct RunBucket {
        int label;
        std::vector<double> rows;  // flattened
        std::size_t row_count = 0;
    };
    std::vector<RunBucket> runs;
    std::map<std::pair<long long, int>, std::size_t> run_lookup;

    const std::size_t n_vars = var_idx.size();
    std::string line;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        ++data_row;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("data row " + std::to_string(data_row) + " has " + std::to_string(cells.size()) +
                             " cells, header has " + std::to_string(header.size()));
        }
        const double label_raw = parse_numeric(cells[label_idx], data_row, schema.label_column);
        const int label = static_cast<int>(std::llround(label_raw));
        if (label < 1) {
            throw ParseError("fault label " + std::to_string(label) + " at data row " + std::to_string(data_row) +
                             " is out of range (classes are 1-based; filter normal-operation rows out first)");
        }
        const long long run_id = std::llround(parse_numeric(cells[run_idx], data_row, schema.run_column));

        const auto key = std::make_pair(run_id, label);
        auto it = run_lookup.find(key);
        std::size_t bucket;
        if (it == run_lookup.end()) {
            bucket = runs.size();
            runs.push_back(RunBucket{label, {}, 0});
            run_lookup.emplace(key, bucket);
        } else {
            bucket = it->second;
        }
        RunBucket& rb = runs[bucket];
        for (std::size_t v = 0; v < n_vars; ++v) {
            rb.rows.push_back(parse_numeric(cells[var_idx[v]], data_row, var_names[v]));
        }
        rb.row_count += 1;
    }
    if (data_row == 0) throw ParseError("CSV file '" + path + "' contains no data rows");

    TimeSeriesDataset ds;
    ds.variable_count = n_vars;
    ds.variable_names = std::move(var_names);
    ds.sample_count = data_row;
    ds.values.reserve(data_row * n_vars);
    for (const RunBucket& rb : runs) {
        ds.run_boundaries.push_back(ds.values.size() / n_vars);
        ds.run_labels.push_back(rb.label);
        ds.values.insert(ds.values.end(), rb.rows.begin(), rb.rows.end());
    }
    return ds;
}

std::pair<TimeSeriesDataset, NormStats> normalize(const TimeSeriesDataset& dataset,
                                                  const std::optional<NormStats>& stats) {
    const std::size_t n = dataset.variable_count;
    const std::size_t z = dataset.sample_count;
    NormStats out_stats;
    if (stats.has_value()) {
        if (stats->mean.size() != n || stats->std.size() != n) {
            throw DimensionError("normalize: stats have " + std::to_string(stats->mean.size()) +
                                 " entries, dataset has " + std::to_string(n) + " variables");
        }
        out_stats = *stats;
    } else {
        out_stats.mean.assign(n, 0.0);
        out_stats.std.assign(n, 0.0);
        for (std::size_t r = 0; r < z; ++r)
            for (std::size_t c = 0; c < n; ++c) out_stats.mean[c] += dataset.at(r, c);
        for (std::size_t c = 0; c < n; ++c) out_stats.mean[c] /= static_cast<double>(z);
        for (std::size_t r = 0; r < z; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                const double d = dataset.at(r, c) - out_stats.mean[c];
                out_stats.std[c] += d * d;
            }
        for (std::size_t c = 0; c < n; ++c) {
            // Sample standard deviation; zero-variance columns fall back to 1
            // so the variable count (and graph size) stays fixed.
            out_stats.std[c] = z > 1 ? std::sqrt(out_stats.std[c] / static_cast<double>(z - 1)) : 0.0;
            if (out_stats.std[c] <= 0.0) {
                out_stats.std[c] = 1.0;
                out_stats.zero_variance_columns.push_back(c);
                std::cerr << "warning: variable '"
                          << (c < dataset.variable_names.size() ? dataset.variable_names[c] : std::to_string(c))
                          << "' has zero variance; std set to 1\n";
            }
        }
    }

    TimeSeriesDataset out = dataset;
    for (std::size_t r = 0; r < z; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            out.values[r * n + c] = (dataset.at(r, c) - out_stats.mean[c]) / out_stats.std[c];
        }
    return {std::move(out), std::move(out_stats)};
}

std::vector<WindowedSample> make_windows(const TimeSeriesDataset& dataset, std::size_t w, std::size_t stride) {
    if (w < 2) throw ContractError("make_windows: window length must be at least 2");
    if (stride == 0) throw ContractError("make_windows: stride must be positive");
    std::vector<WindowedSample> windows;
    const std::size_t n = dataset.variable_count;
    for (std::size_t r = 0; r < dataset.run_count(); ++r) {
        const std::size_t len = dataset.run_length(r);
        if (len < w) {
            throw ContractError("make_windows: run " + std::to_string(r) + " has " + std::to_string(len) +
                                " rows, shorter than window length " + std::to_string(w));
        }
        const std::size_t begin = dataset.run_begin(r);
        const std::size_t count = (len - w) / stride + 1;
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t t0 = k * stride;
            WindowedSample ws;
            ws.window_length = w;
            ws.variable_count = n;
            ws.label = dataset.run_labels[r];
            ws.run_index = r;
            ws.end_time = t0 + w - 1;
            ws.segment.assign(dataset.values.begin() + static_cast<std::ptrdiff_t>((begin + t0) * n),
                              dataset.values.begin() + static_cast<std::ptrdiff_t>((begin + t0 + w) * n));
            windows.push_back(std::move(ws));
        }
    }
    return windows;
}

namespace {

// Partition variables into groups, as even as possible, after a seeded shuffle.
std::vector<int> random_partition(int variables, int groups, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(variables));
    for (int i = 0; i < variables; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    std::vector<int> group_of(static_cast<std::size_t>(variables), 0);
    for (int i = 0; i < variables; ++i) {
        group_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i % groups;
    }
    return group_of;
}

}  // namespace

namespace {

void validate_synth(const SynthConfig& config) {
    if (config.classes < 2 || config.variables < 4 || config.runs_per_class < 1 || config.run_length < 4) {
        throw ConfigError("synth_generate: need classes >= 2, variables >= 4, runs_per_class >= 1, run_length >= 4");
    }
}

}  // namespace

std::vector<std::vector<int>> synth_partitions(const SynthConfig& config) {
    validate_synth(config);
    const int k = config.classes;
    const int n = config.variables;
    Rng base(config.seed);
    std::vector<std::vector<int>> partitions;
    for (int c = 0; c < k; ++c) {
        Rng prng = base.derive("synth.partition", static_cast<std::uint64_t>(c));
        const int max_groups = std::min(4, n / 2);
        std::vector<int> part;
        bool distinct = false;
        for (int attempt = 0; attempt < 1000 && !distinct; ++attempt) {
            const int groups = prng.uniform_int(2, max_groups);
            part = random_partition(n, groups, prng);
            distinct = std::none_of(partitions.begin(), partitions.end(),
                                    [&](const std::vector<int>& p) { return p == part; });
        }
        if (!distinct) {
            throw ConfigError("synth_generate: could not draw distinct per-class partitions; raise variables");
        }
        partitions.push_back(std::move(part));
    }
    return partitions;
}

TimeSeriesDataset synth_generate(const SynthConfig& config) {
    validate_synth(config);
    const int k = config.classes;
    const int n = config.variables;
    const double sigma = 0.1;
    Rng base(config.seed);

    const std::vector<std::vector<int>> partitions = synth_partitions(config);
    std::vector<int> group_counts;
    for (const std::vector<int>& part : partitions) {
        group_counts.push_back(1 + *std::max_element(part.begin(), part.end()));
    }

    // Per-variable loading magnitudes (positive, so within-group correlation
    // stays positive); class-specific AR coefficients spread over [0.15, 0.9].
    std::vector<double> ar_coeff(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        ar_coeff[static_cast<std::size_t>(c)] = k == 1 ? 0.5 : 0.15 + 0.75 * static_cast<double>(c) / (k - 1);
    }

    TimeSeriesDataset ds;
    ds.variable_count = static_cast<std::size_t>(n);
    for (int v = 0; v < n; ++v) ds.variable_names.push_back("var_" + std::to_string(v + 1));

    const std::size_t zr = static_cast<std::size_t>(config.run_length);
    for (int c = 0; c < k; ++c) {
        const std::vector<int>& group_of = partitions[static_cast<std::size_t>(c)];
        const int groups = group_counts[static_cast<std::size_t>(c)];
        const double phi = ar_coeff[static_cast<std::size_t>(c)];
        const double drive_std = std::sqrt(1.0 - phi * phi);  // stationary unit variance

        Rng lrng = base.derive("synth.loadings", static_cast<std::uint64_t>(c));
        std::vector<double> loading(static_cast<std::size_t>(n));
        for (int v = 0; v < n; ++v) loading[static_cast<std::size_t>(v)] = lrng.uniform(0.7, 1.3);

        for (int r = 0; r < config.runs_per_class; ++r) {
            Rng rrng = base.derive("synth.run", static_cast<std::uint64_t>(c) * 100003ULL + static_cast<std::uint64_t>(r));
            ds.run_boundaries.push_back(ds.values.size() / static_cast<std::size_t>(n));
            ds.run_labels.push_back(c + 1);
            std::vector<double> driver(static_cast<std::size_t>(groups), 0.0);
            for (int g = 0; g < groups; ++g) driver[static_cast<std::size_t>(g)] = rrng.normal();
            for (std::size_t t = 0; t < zr; ++t) {
                if (t > 0) {
                    for (int g = 0; g < groups; ++g) {
                        driver[static_cast<std::size_t>(g)] =
                            phi * driver[static_cast<std::size_t>(g)] + drive_std * rrng.normal();
                    }
                }
                for (int v = 0; v < n; ++v) {
                    const double z = driver[static_cast<std::size_t>(group_of[static_cast<std::size_t>(v)])];
                    ds.values.push_back(loading[static_cast<std::size_t>(v)] * z + sigma * rrng.normal());
                }
            }
        }
    }
    ds.sample_count = ds.values.size() / static_cast<std::size_t>(n);
    return ds;
}

void write_csv(const TimeSeriesDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV file '" + path + "'");
    out << "faultNumber,simulationRun,sample";
    for (const std::string& name : dataset.variable_names) out << ',' << name;
    out << '\n';
    out.precision(17);
    // Per-class run numbering matches the TEP export convention.
    std::map<int, int> runs_seen;
    for (std::size_t r = 0; r < dataset.run_count(); ++r) {
        const int label = dataset.run_labels[r];
        const int run_no = ++runs_seen[label];
        for (std::size_t row = dataset.run_begin(r); row < dataset.run_end(r); ++row) {
            out << label << ',' << run_no << ',' << (row - dataset.run_begin(r) + 1);
            for (std::size_t c = 0; c < dataset.variable_count; ++c) out << ',' << dataset.at(row, c);
            out << '\n';
        }
    }
    if (!out) throw IoError("failed while writing CSV file '" + path + "'");
}

}  // namespace lgf
