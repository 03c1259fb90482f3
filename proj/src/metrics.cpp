#include "lgf/metrics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace lgf {

std::vector<std::vector<long>> confusion(const std::vector<int>& preds, const std::vector<int>& labels, int k) {
    if (preds.size() != labels.size()) {
        throw ContractError("confusion: preds and labels differ in length");
    }
    std::vector<std::vector<long>> m(static_cast<std::size_t>(k), std::vector<long>(static_cast<std::size_t>(k), 0));
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] < 1 || labels[i] > k || preds[i] < 1 || preds[i] > k) {
            throw ContractError("confusion: class out of range 1.." + std::to_string(k) + " at index " +
                                std::to_string(i));
        }
        m[static_cast<std::size_t>(labels[i] - 1)][static_cast<std::size_t>(preds[i] - 1)] += 1;
    }
    return m;
}

DiagnosisReport class_metrics(const std::vector<std::vector<long>>& confusion) {
    const std::size_t k = confusion.size();
    if (k == 0) throw ContractError("class_metrics: empty confusion matrix");
    for (const auto& row : confusion) {
        if (row.size() != k) throw DimensionError("class_metrics: confusion matrix is not square");
        for (long v : row) {
            if (v < 0) throw ContractError("class_metrics: negative count in confusion matrix");
        }
    }

    DiagnosisReport report;
    report.confusion = confusion;
    for (std::size_t c = 0; c < k; ++c) {
        ClassMetrics cm;
        cm.fault_class = static_cast<int>(c) + 1;
        long tp = confusion[c][c];
        long row_sum = 0, col_sum = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row_sum += confusion[c][j];
            col_sum += confusion[j][c];
        }
        const long fn = row_sum - tp;
        const long fp = col_sum - tp;

        if (tp + fn == 0) {
            cm.fdr = 0.0;
            cm.flags.push_back("fdr_undefined");
        } else {
            cm.fdr = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
        }
        if (tp + fp == 0) {
            cm.precision = 0.0;
            cm.flags.push_back("precision_undefined");
        } else {
            cm.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
        }
        if (cm.fdr + cm.precision == 0.0) {
            cm.f1 = 0.0;
            if (tp + fn != 0 && tp + fp != 0) cm.flags.push_back("f1_undefined");
        } else {
            cm.f1 = 2.0 * cm.fdr * cm.precision / (cm.fdr + cm.precision);
        }
        report.per_class.push_back(std::move(cm));
    }

    for (const ClassMetrics& cm : report.per_class) {
        report.avg_fdr += cm.fdr;
        report.avg_precision += cm.precision;
        report.avg_f1 += cm.f1;
    }
    const double kd = static_cast<double>(k);
    report.avg_fdr /= kd;
    report.avg_precision /= kd;
    report.avg_f1 /= kd;
    return report;
}

std::string format_percent(double value) {
    // Half-up at one decimal (printf would round half-to-even).
    const double scaled = std::floor(value * 10.0 + 0.5) / 10.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", scaled);
    return buf;
}

std::string report_to_json(const DiagnosisReport& report) {
    nlohmann::json j;
    j["confusion"] = report.confusion;
    nlohmann::json per_class = nlohmann::json::array();
    for (const ClassMetrics& cm : report.per_class) {
        per_class.push_back(nlohmann::json{{"class", cm.fault_class},
                                           {"fdr", cm.fdr},
                                           {"precision", cm.precision},
                                           {"f1", cm.f1},
                                           {"flags", cm.flags}});
    }
    j["per_class"] = per_class;
    j["averages"] = nlohmann::json{{"fdr", report.avg_fdr}, {"precision", report.avg_precision}, {"f1", report.avg_f1}};
    return j.dump(2);
}

std::string report_to_csv(const DiagnosisReport& report) {
    std::string out = "Fault,FDR,P,F1\n";
    for (const ClassMetrics& cm : report.per_class) {
        out += std::to_string(cm.fault_class) + "," + format_percent(cm.fdr) + "," + format_percent(cm.precision) +
               "," + format_percent(cm.f1) + "\n";
    }
    out += "Average," + format_percent(report.avg_fdr) + "," + format_percent(report.avg_precision) + "," +
           format_percent(report.avg_f1) + "\n";
    return out;
}

void export_embeddings(ModelParameters& params, const TrainConfig& config,
                       const std::vector<WindowedSample>& windows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write embeddings file '" + path + "'");
    out.precision(17);
    bool header_done = false;
    for (const WindowedSample& w : windows) {
        Tape tape;
        const ForwardResult fwd = forward_sample(tape, params, w, config);
        if (!header_done) {
            out << "label";
            for (std::size_t i = 0; i < fwd.fused.size(); ++i) out << ",e" << i;
            out << '\n';
            header_done = true;
        }
        out << w.label;
        for (double v : fwd.fused.values) out << ',' << v;
        out << '\n';
    }
    if (!out) throw IoError("failed while writing embeddings file '" + path + "'");
}

void export_assignments(ModelParameters& params, const TrainConfig& config,
                        const std::vector<WindowedSample>& windows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write assignments file '" + path + "'");
    out.precision(17);
    bool header_done = false;
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        Tape tape;
        const ForwardResult fwd = forward_sample(tape, params, windows[wi], config);
        if (fwd.assignments.empty()) {
            throw ContractError("export_assignments: variant '" + std::string(to_string(params.variant)) +
                                "' has no pooling assignments");
        }
        const Tensor& s = fwd.assignments.front();
        if (!header_done) {
            out << "window,node";
            for (std::size_t c = 0; c < s.cols(); ++c) out << ",s" << c;
            out << '\n';
            header_done = true;
        }
        for (std::size_t node = 0; node < s.rows(); ++node) {
            out << wi << ',' << node;
            for (std::size_t c = 0; c < s.cols(); ++c) out << ',' << s.at(node, c);
            out << '\n';
        }
    }
    if (!out) throw IoError("failed while writing assignments file '" + path + "'");
}

}  // namespace lgf
