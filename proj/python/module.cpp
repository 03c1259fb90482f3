#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lgf/config.hpp"
#include "lgf/graph.hpp"
#include "lgf/metrics.hpp"
#include "lgf/trainer.hpp"

namespace py = pybind11;

namespace {

std::vector<std::vector<double>> as_matrix(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[i][j] = flat[i * cols + j];
    return out;
}

lgf::WindowedSample window_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.size() < 2) throw lgf::ContractError("window needs at least 2 rows");
    lgf::WindowedSample w;
    w.window_length = rows.size();
    w.variable_count = rows[0].size();
    w.label = 1;
    w.segment.reserve(w.window_length * w.variable_count);
    for (const auto& row : rows) {
        if (row.size() != w.variable_count) throw lgf::DimensionError("window rows differ in length");
        w.segment.insert(w.segment.end(), row.begin(), row.end());
    }
    return w;
}

py::dict dataset_to_dict(const lgf::TimeSeriesDataset& ds) {
    py::dict out;
    out["values"] = as_matrix(ds.values, ds.sample_count, ds.variable_count);
    out["variable_names"] = ds.variable_names;
    out["run_labels"] = ds.run_labels;
    out["run_boundaries"] = ds.run_boundaries;
    return out;
}

py::dict report_to_dict(const lgf::DiagnosisReport& report) {
    py::dict out;
    out["confusion"] = report.confusion;
    py::list per_class;
    for (const auto& cm : report.per_class) {
        py::dict row;
        row["class"] = cm.fault_class;
        row["fdr"] = cm.fdr;
        row["precision"] = cm.precision;
        row["f1"] = cm.f1;
        row["flags"] = cm.flags;
        per_class.append(row);
    }
    out["per_class"] = per_class;
    py::dict averages;
    averages["fdr"] = report.avg_fdr;
    averages["precision"] = report.avg_precision;
    averages["f1"] = report.avg_f1;
    out["averages"] = averages;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-level temporal graph network for fault diagnosis: core operations";

    py::register_exception<lgf::Error>(m, "LgfError");

    m.def(
        "pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) { return lgf::pearson(x, y); },
        py::arg("x"), py::arg("y"), "Pearson correlation of two equal-length series");

    m.def(
        "correlation_adjacency",
        [](const std::vector<std::vector<double>>& window, double delta) {
            const lgf::GraphSnapshot snap = lgf::build_snapshot(window_from_rows(window), delta);
            return as_matrix(snap.adjacency, snap.node_count, snap.node_count);
        },
        py::arg("window"), py::arg("delta") = 0.5,
        "Thresholded correlation adjacency for one window (rows = timesteps, columns = variables)");

    m.def(
        "synth_dataset",
        [](int classes, int variables, int runs_per_class, int run_length, std::uint64_t seed) {
            lgf::SynthConfig cfg{classes, variables, runs_per_class, run_length, seed};
            return dataset_to_dict(lgf::synth_generate(cfg));
        },
        py::arg("classes") = 4, py::arg("variables") = 10, py::arg("runs_per_class") = 6, py::arg("run_length") = 60,
        py::arg("seed") = 42, "Generate the synthetic correlated-group dataset");

    m.def(
        "class_metrics",
        [](const std::vector<std::vector<long>>& confusion) { return report_to_dict(lgf::class_metrics(confusion)); },
        py::arg("confusion"), "Per-class FDR/precision/F1 plus macro averages from a confusion matrix");

    m.def(
        "cross_entropy",
        [](const std::vector<double>& logits, int label) {
            lgf::Tape tape;
            return tape.cross_entropy(tape.constant(lgf::Tensor::row(logits)), label).values[0];
        },
        py::arg("logits"), py::arg("label"), "Cross-entropy of 1-based label under the given logits");

    m.def(
        "gradcheck_max_error",
        [](double step) {
            lgf::TrainConfig tc;
            tc.window_length = 8;
            tc.lstm_hidden = 3;
            tc.sage_dim = 3;
            tc.sage_layers = 1;
            tc.supernodes = 2;
            tc.head_hidden = 4;
            tc.variables = 4;
            tc.classes = 2;
            lgf::SynthConfig sc{2, 4, 1, 16, 5};
            const lgf::TimeSeriesDataset ds = lgf::synth_generate(sc);
            const auto [normed, stats] = lgf::normalize(ds);
            const auto windows = lgf::make_windows(normed, tc.window_length, tc.stride);
            const lgf::GraphSnapshot snap = lgf::build_snapshot(windows.front(), tc.corr_threshold);
            lgf::ModelParameters params = lgf::ModelParameters::init(tc);
            lgf::ParamRegistry reg = params.registry();
            auto fn = [&](lgf::Tape& tape) {
                lgf::ForwardResult fwd = lgf::forward_on_snapshot(tape, params, snap, tc);
                const lgf::Tensor ce = tape.cross_entropy(fwd.logits, windows.front().label);
                const lgf::Tensor pool = tape.add(fwd.link_loss, fwd.entropy_loss);
                return tape.add(ce, tape.scale(pool, tape.constant_scalar(tc.alpha_pool)));
            };
            return lgf::finite_diff_check(fn, reg, step).max_rel_error;
        },
        py::arg("step") = 1e-5, "Finite-difference check of the full loss on a tiny seeded model");

    m.def(
        "train_synthetic",
        [](int classes, int variables, int runs_per_class, int run_length, std::size_t window_length,
           std::size_t epochs, std::uint64_t seed, const std::string& ablation) {
            lgf::SynthConfig sc{classes, variables, runs_per_class, run_length, seed};
            const lgf::TimeSeriesDataset ds = lgf::synth_generate(sc);
            const auto [normed, stats] = lgf::normalize(ds);
            lgf::TrainConfig tc;
            tc.window_length = window_length;
            tc.stride = window_length / 2 == 0 ? 1 : window_length / 2;
            tc.lstm_hidden = 8;
            tc.sage_dim = 8;
            tc.sage_layers = 2;
            tc.supernodes = 2;
            tc.head_hidden = 16;
            tc.batch = 16;
            tc.epochs = epochs;
            tc.seed = seed;
            tc.ablation = lgf::variant_from_string(ablation);
            const auto windows = lgf::make_windows(normed, tc.window_length, tc.stride);
            lgf::TrainResult result = lgf::train(tc, windows);
            const auto preds = lgf::predict(result.params, result.config, windows);
            std::vector<int> labels;
            for (const auto& w : windows) labels.push_back(w.label);
            const auto report =
                lgf::class_metrics(lgf::confusion(preds, labels, static_cast<int>(result.config.classes)));
            py::dict out;
            py::list losses, accs;
            for (const auto& e : result.history.epochs) {
                losses.append(e.total_loss);
                accs.append(e.train_accuracy);
            }
            out["loss"] = losses;
            out["train_accuracy"] = accs;
            out["windows"] = windows.size();
            out["report"] = report_to_dict(report);
            return out;
        },
        py::arg("classes") = 2, py::arg("variables") = 6, py::arg("runs_per_class") = 2, py::arg("run_length") = 24,
        py::arg("window_length") = 8, py::arg("epochs") = 10, py::arg("seed") = 42, py::arg("ablation") = "full",
        "Train on a small synthetic dataset and report history plus training-set metrics");

    m.attr("__version__") = "0.1.0";
}
