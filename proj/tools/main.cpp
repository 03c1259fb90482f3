#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "lgf/config.hpp"
#include "lgf/graph.hpp"
#include "lgf/metrics.hpp"
#include "lgf/trainer.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Config file (key=value lines, '#' comments)");
    cmd->add_option("--set", args.overrides, "Override a config key, e.g. --set lr=0.003")->take_all();
    cmd->add_option("--out-dir", args.out_dir, "Output directory (default: out)");
    cmd->add_option("--seed", args.seed, "Shorthand for --set seed=N");
}

lgf::CliConfig resolve(const CommonArgs& args) {
    std::vector<std::string> overrides = args.overrides;
    if (!args.seed.empty()) overrides.push_back("seed=" + args.seed);
    if (!args.out_dir.empty()) overrides.push_back("out_dir=" + args.out_dir);
    return lgf::parse_config(args.config_path, overrides);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw lgf::IoError("cannot write '" + path.string() + "'");
    out << content;
}

// Every successful run leaves a config snapshot that reproduces it.
fs::path prepare_out_dir(const lgf::CliConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_file(dir / "resolved_config.txt", cfg.resolved_text());
    return dir;
}

std::string history_csv(const lgf::TrainHistory& history) {
    std::string out = "epoch,total_loss,ce_loss,pool_loss,train_accuracy,wall_seconds\n";
    char buf[256];
    for (const lgf::EpochRecord& r : history.epochs) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.6f\n", r.epoch, r.total_loss, r.ce_loss,
                      r.pool_loss, r.train_accuracy, r.wall_seconds);
        out += buf;
    }
    return out;
}

struct LabeledWindows {
    std::vector<lgf::WindowedSample> windows;
    lgf::NormStats stats;
};

LabeledWindows load_windows(const std::string& path, const lgf::CliConfig& cfg,
                            const std::optional<lgf::NormStats>& stats) {
    const lgf::TimeSeriesDataset raw = lgf::load_csv(path, cfg.schema);
    auto [normed, used_stats] = lgf::normalize(raw, stats);
    LabeledWindows out;
    out.windows = lgf::make_windows(normed, cfg.train.window_length, cfg.train.stride);
    out.stats = std::move(used_stats);
    return out;
}

int cmd_synth(const CommonArgs& args) {
    const lgf::CliConfig cfg = resolve(args);
    cfg.train.validate();
    lgf::SynthConfig synth = cfg.synth;
    synth.seed = cfg.train.seed;
    const lgf::TimeSeriesDataset ds = lgf::synth_generate(synth);
    const fs::path dir = prepare_out_dir(cfg);
    const fs::path csv = dir / "synth.csv";
    lgf::write_csv(ds, csv.string());
    std::cout << "wrote " << csv.string() << " (" << ds.sample_count << " rows, " << ds.variable_count
              << " variables, " << ds.run_count() << " runs)\n";
    return 0;
}

int cmd_train(const CommonArgs& args, const std::string& data) {
    if (data.empty()) throw lgf::ConfigError("missing required flag --data");
    const lgf::CliConfig cfg = resolve(args);
    if (cfg.train.epochs == 0) throw lgf::ConfigError("key 'epochs' must be set for training");
    cfg.train.validate();
    const fs::path dir = prepare_out_dir(cfg);

    LabeledWindows lw = load_windows(data, cfg, std::nullopt);
    lgf::TrainResult result = lgf::train(cfg.train, lw.windows);
    const fs::path ckpt = dir / "checkpoint.lgfm";
    lgf::save_checkpoint(result.params, result.config, ckpt.string(), lw.stats);
    write_file(dir / "history.csv", history_csv(result.history));
    const lgf::EpochRecord& last = result.history.epochs.back();
    std::cout << "trained " << to_string(result.config.ablation) << " variant: " << lw.windows.size()
              << " windows, " << result.config.epochs << " epochs, final loss " << last.total_loss
              << ", train accuracy " << last.train_accuracy << "\n";
    std::cout << "wrote " << ckpt.string() << "\n";
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& checkpoint, const std::string& data,
             bool export_assignments, bool export_embeddings) {
    if (checkpoint.empty()) throw lgf::ConfigError("missing required flag --checkpoint");
    if (data.empty()) throw lgf::ConfigError("missing required flag --data");
    const lgf::CliConfig cfg = resolve(args);
    const fs::path dir = prepare_out_dir(cfg);

    lgf::Checkpoint ck = lgf::load_checkpoint(checkpoint);
    if (!ck.norm_stats.has_value()) {
        throw lgf::IntegrityError("checkpoint '" + checkpoint + "' carries no normalization stats");
    }
    lgf::CliConfig eval_cfg = cfg;
    eval_cfg.train = ck.config;  // evaluation follows the checkpoint's configuration
    LabeledWindows lw = load_windows(data, eval_cfg, ck.norm_stats);

    const std::vector<int> preds = lgf::predict(ck.params, ck.config, lw.windows);
    std::vector<int> labels;
    labels.reserve(lw.windows.size());
    for (const auto& w : lw.windows) labels.push_back(w.label);
    const auto conf = lgf::confusion(preds, labels, static_cast<int>(ck.config.classes));
    const lgf::DiagnosisReport report = lgf::class_metrics(conf);

    write_file(dir / "report.json", lgf::report_to_json(report));
    write_file(dir / "report.csv", lgf::report_to_csv(report));
    if (export_assignments) {
        lgf::export_assignments(ck.params, ck.config, lw.windows, (dir / "assignments.csv").string());
    }
    if (export_embeddings) {
        lgf::export_embeddings(ck.params, ck.config, lw.windows, (dir / "embeddings.csv").string());
    }
    std::cout << "evaluated " << lw.windows.size() << " windows: avg FDR " << lgf::format_percent(report.avg_fdr)
              << "%, avg precision " << lgf::format_percent(report.avg_precision) << "%, avg F1 "
              << lgf::format_percent(report.avg_f1) << "%\n";
    std::cout << "wrote " << (dir / "report.json").string() << " and " << (dir / "report.csv").string() << "\n";
    return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& data, const std::string& eval_data) {
    if (data.empty()) throw lgf::ConfigError("missing required flag --data");
    if (eval_data.empty()) throw lgf::ConfigError("missing required flag --eval-data");
    const lgf::CliConfig cfg = resolve(args);
    if (cfg.train.epochs == 0) throw lgf::ConfigError("key 'epochs' must be set for training");
    cfg.train.validate();
    const fs::path dir = prepare_out_dir(cfg);

    LabeledWindows train_lw = load_windows(data, cfg, std::nullopt);
    LabeledWindows eval_lw = load_windows(eval_data, cfg, train_lw.stats);
    std::vector<int> labels;
    for (const auto& w : eval_lw.windows) labels.push_back(w.label);

    const std::vector<lgf::Variant> variants{lgf::Variant::sage_only, lgf::Variant::sage_lstm, lgf::Variant::no_gf,
                                             lgf::Variant::no_lstm, lgf::Variant::full};
    std::vector<lgf::DiagnosisReport> reports;
    for (lgf::Variant v : variants) {
        lgf::TrainConfig tc = cfg.train;  // shared seed across variants
        tc.ablation = v;
        lgf::TrainResult result = lgf::train(tc, train_lw.windows);
        const std::vector<int> preds = lgf::predict(result.params, result.config, eval_lw.windows);
        reports.push_back(lgf::class_metrics(lgf::confusion(preds, labels, static_cast<int>(result.config.classes))));
        std::cout << to_string(v) << ": avg FDR " << lgf::format_percent(reports.back().avg_fdr) << "%, avg F1 "
                  << lgf::format_percent(reports.back().avg_f1) << "%\n";
    }

    std::string csv = "Class";
    for (lgf::Variant v : variants) {
        const std::string name = to_string(v);
        csv += "," + name + "_FDR," + name + "_P," + name + "_F1";
    }
    csv += "\n";
    const std::size_t k = reports.front().per_class.size();
    for (std::size_t c = 0; c < k; ++c) {
        csv += std::to_string(c + 1);
        for (const lgf::DiagnosisReport& r : reports) {
            csv += "," + lgf::format_percent(r.per_class[c].fdr) + "," + lgf::format_percent(r.per_class[c].precision) +
                   "," + lgf::format_percent(r.per_class[c].f1);
        }
        csv += "\n";
    }
    csv += "Average";
    for (const lgf::DiagnosisReport& r : reports) {
        csv += "," + lgf::format_percent(r.avg_fdr) + "," + lgf::format_percent(r.avg_precision) + "," +
               lgf::format_percent(r.avg_f1);
    }
    csv += "\n";
    write_file(dir / "ablation.csv", csv);
    std::cout << "wrote " << (dir / "ablation.csv").string() << "\n";
    return 0;
}

int cmd_gradcheck(const CommonArgs& args, double tolerance) {
    lgf::CliConfig cfg = resolve(args);
    prepare_out_dir(cfg);
    // Desk-scale verification configuration; small enough that central
    // differences over every parameter finish in seconds.
    lgf::TrainConfig tc = cfg.train;
    tc.window_length = 8;
    tc.stride = 1;
    tc.lstm_hidden = 4;
    tc.sage_dim = 4;
    tc.sage_layers = 2;
    tc.supernodes = 2;
    tc.pool_levels = 1;
    tc.head_hidden = 8;
    tc.gf_dim = 0;
    tc.variables = 6;
    tc.classes = 2;

    lgf::SynthConfig sc;
    sc.classes = 2;
    sc.variables = 6;
    sc.runs_per_class = 1;
    sc.run_length = 16;
    sc.seed = tc.seed;
    const lgf::TimeSeriesDataset ds = lgf::synth_generate(sc);
    const auto [normed, stats] = lgf::normalize(ds);
    const auto windows = lgf::make_windows(normed, tc.window_length, tc.stride);
    const lgf::WindowedSample& window = windows.front();
    const lgf::GraphSnapshot snapshot = lgf::build_snapshot(window, tc.corr_threshold);

    lgf::ModelParameters params = lgf::ModelParameters::init(tc);
    lgf::ParamRegistry registry = params.registry();
    auto loss_fn = [&](lgf::Tape& tape) {
        lgf::ForwardResult fwd = lgf::forward_on_snapshot(tape, params, snapshot, tc);
        const lgf::Tensor ce = tape.cross_entropy(fwd.logits, window.label);
        const lgf::Tensor pool_total = tape.add(fwd.link_loss, fwd.entropy_loss);
        return tape.add(ce, tape.scale(pool_total, tape.constant_scalar(tc.alpha_pool)));
    };
    const lgf::FdCheckResult res = lgf::finite_diff_check(loss_fn, registry, 1e-5);

    std::map<std::string, double> group_max;
    for (const auto& [name, err] : res.per_param) {
        group_max[name.substr(0, name.find('.'))] = std::max(group_max[name.substr(0, name.find('.'))], err);
    }
    for (const auto& [group, err] : group_max) {
        std::cout << "group " << group << ": max relative error " << err << "\n";
    }
    std::cout << "overall max relative error " << res.max_rel_error << " (tolerance " << tolerance << ")\n";
    return res.max_rel_error <= tolerance ? 0 : 1;
}

int cmd_inspect_graph(const CommonArgs& args, const std::string& data, std::size_t window_index) {
    if (data.empty()) throw lgf::ConfigError("missing required flag --data");
    const lgf::CliConfig cfg = resolve(args);
    cfg.train.validate();
    const fs::path dir = prepare_out_dir(cfg);

    LabeledWindows lw = load_windows(data, cfg, std::nullopt);
    if (window_index >= lw.windows.size()) {
        throw lgf::ConfigError("window index " + std::to_string(window_index) + " out of range (have " +
                               std::to_string(lw.windows.size()) + " windows)");
    }
    const lgf::GraphSnapshot snap = lgf::build_snapshot(lw.windows[window_index], cfg.train.corr_threshold);

    std::string adjacency;
    char buf[64];
    for (std::size_t i = 0; i < snap.node_count; ++i) {
        for (std::size_t j = 0; j < snap.node_count; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", snap.adj(i, j));
            adjacency += buf;
            adjacency += (j + 1 < snap.node_count) ? "," : "\n";
        }
    }
    write_file(dir / "graph_adjacency.csv", adjacency);

    std::string edges = "i,j,weight\n";
    std::size_t edge_count = 0;
    for (std::size_t i = 0; i < snap.node_count; ++i)
        for (std::size_t j = i + 1; j < snap.node_count; ++j)
            if (snap.adj(i, j) != 0.0) {
                std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g\n", i, j, snap.adj(i, j));
                edges += buf;
                ++edge_count;
            }
    write_file(dir / "graph_edges.csv", edges);
    std::cout << "window " << window_index << ": " << snap.node_count << " nodes, " << edge_count << " edges\n";
    std::cout << "wrote " << (dir / "graph_adjacency.csv").string() << " and " << (dir / "graph_edges.csv").string()
              << "\n";
    return 0;
}

const char* kUsage =
    "usage: lgfmltg <command> [options]\n"
    "commands: synth, train, eval, ablate, gradcheck, inspect-graph\n"
    "run 'lgfmltg <command> --help' for command options\n";

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> known{"synth", "train", "eval", "ablate", "gradcheck", "inspect-graph"};
    if (argc < 2) {
        std::cerr << kUsage;
        return 2;
    }
    const std::string command = argv[1];
    if (std::find(known.begin(), known.end(), command) == known.end() && command != "--help" && command != "-h") {
        std::cerr << "error: unknown command '" << command << "'\n" << kUsage;
        return 2;
    }

    CLI::App app{"Multi-level temporal graph network for industrial fault diagnosis"};
    app.require_subcommand(1);

    CommonArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset CSV");
    add_common(synth, synth_args);

    CommonArgs train_args;
    std::string train_data;
    CLI::App* train = app.add_subcommand("train", "Train a model and write a checkpoint");
    add_common(train, train_args);
    train->add_option("--data", train_data, "Training dataset CSV");

    CommonArgs eval_args;
    std::string eval_checkpoint, eval_data;
    bool export_assignments = false, export_embeddings = false;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint and write diagnosis reports");
    add_common(eval, eval_args);
    eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint file");
    eval->add_option("--data", eval_data, "Evaluation dataset CSV");
    eval->add_flag("--export-assignments", export_assignments, "Write per-window soft assignments");
    eval->add_flag("--export-embeddings", export_embeddings, "Write pre-classifier fused representations");

    CommonArgs ablate_args;
    std::string ablate_data, ablate_eval_data;
    CLI::App* ablate = app.add_subcommand("ablate", "Train and evaluate all five model variants");
    add_common(ablate, ablate_args);
    ablate->add_option("--data", ablate_data, "Training dataset CSV");
    ablate->add_option("--eval-data", ablate_eval_data, "Evaluation dataset CSV");

    CommonArgs gradcheck_args;
    double tolerance = 1e-4;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of all parameter groups");
    add_common(gradcheck, gradcheck_args);
    gradcheck->add_option("--tolerance", tolerance, "Maximum allowed relative error (default 1e-4)");

    CommonArgs inspect_args;
    std::string inspect_data;
    std::size_t window_index = 0;
    CLI::App* inspect = app.add_subcommand("inspect-graph", "Export one window's correlation graph");
    add_common(inspect, inspect_args);
    inspect->add_option("--data", inspect_data, "Dataset CSV");
    inspect->add_option("--window-index", window_index, "Which window to export (default 0)");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(synth_args);
        if (train->parsed()) return cmd_train(train_args, train_data);
        if (eval->parsed()) return cmd_eval(eval_args, eval_checkpoint, eval_data, export_assignments,
                                            export_embeddings);
        if (ablate->parsed()) return cmd_ablate(ablate_args, ablate_data, ablate_eval_data);
        if (gradcheck->parsed()) return cmd_gradcheck(gradcheck_args, tolerance);
        if (inspect->parsed()) return cmd_inspect_graph(inspect_args, inspect_data, window_index);
        std::cerr << kUsage;
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const lgf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
