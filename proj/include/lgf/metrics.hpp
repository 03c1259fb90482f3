#pragma once

#include <string>
#include <vector>

#include "lgf/dataset.hpp"
#include "lgf/model.hpp"

namespace lgf {

// Per-class diagnosis quality. Metric values are percentages in [0, 100] at
// full precision; rounding happens only in the formatting layer. flags mark
// metrics whose denominator was zero (reported as 0.0 but distinguishable
// from a true zero).
struct ClassMetrics {
    int fault_class = 0;
    double fdr = 0.0;        // recall, TP/(TP+FN)
    double precision = 0.0;  // TP/(TP+FP)
    double f1 = 0.0;
    std::vector<std::string> flags;
};

struct DiagnosisReport {
    std::vector<std::vector<long>> confusion;  // rows = true class, cols = predicted
    std::vector<ClassMetrics> per_class;
    double avg_fdr = 0.0;
    double avg_precision = 0.0;
    double avg_f1 = 0.0;
};

// Confusion counts; preds and labels are 1-based classes.
std::vector<std::vector<long>> confusion(const std::vector<int>& preds, const std::vector<int>& labels, int k);

DiagnosisReport class_metrics(const std::vector<std::vector<long>>& confusion);

// Percent formatting used in reports: half-up to one decimal.
std::string format_percent(double value);

std::string report_to_json(const DiagnosisReport& report);
// Table layout: header "Fault,FDR,P,F1", one row per class, then the average.
std::string report_to_csv(const DiagnosisReport& report);

// One row per window: label then the fused pre-classifier representation.
void export_embeddings(ModelParameters& params, const TrainConfig& config,
                       const std::vector<WindowedSample>& windows, const std::string& path);

// Per-window soft assignments (level 0): window index, node, then one weight
// per super-node.
void export_assignments(ModelParameters& params, const TrainConfig& config,
                        const std::vector<WindowedSample>& windows, const std::string& path);

}  // namespace lgf
