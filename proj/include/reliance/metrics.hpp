#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reliance::eval {

// Positive class = fake (label 1).
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
    void add(int truth, int predicted) {
        if (truth == 1)
            (predicted == 1 ? tp : fn) += 1;
        else
            (predicted == 1 ? fp : tn) += 1;
    }
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    bool degenerate = false;  // some 0/0 was defined as 0
};

// Fractions in [0, 1]; throws EmptyEvaluationError when the matrix is empty.
Metrics compute_metrics(const ConfusionMatrix& confusion);

// Reference accuracy targets of the six in-repo models (percent), used for
// the comparison column in reports.
double reference_accuracy(const std::string& model_name);

struct ReferenceRow {
    std::string name;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> accuracy;
};

// Published external baselines plus this pipeline's reference row, verbatim
// including the duplicated study entry; missing cells stay absent.
std::vector<ReferenceRow> baseline_table();

// Published per-model reference metrics (percent): P, R, F1, Acc.
struct ModelReference {
    std::string name;
    double precision;
    double recall;
    double f1;
    double accuracy;
};
std::vector<ModelReference> model_reference_table();

}  // namespace reliance::eval
