#include "reliance/metrics.hpp"

#include "reliance/errors.hpp"

namespace reliance::eval {

Metrics compute_metrics(const ConfusionMatrix& confusion) {
    if (confusion.total() == 0) throw EmptyEvaluationError("compute_metrics: nothing scored");

    Metrics m;
    const double tp = static_cast<double>(confusion.tp);
    const double fp = static_cast<double>(confusion.fp);
    const double fn = static_cast<double>(confusion.fn);
    const double tn = static_cast<double>(confusion.tn);

    if (tp + fp > 0.0)
        m.precision = tp / (tp + fp);
    else
        m.degenerate = true;
    if (tp + fn > 0.0)
        m.recall = tp / (tp + fn);
    else
        m.degenerate = true;
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else
        m.degenerate = true;
    m.accuracy = (tp + tn) / (tp + fp + fn + tn);
    return m;
}

std::vector<ModelReference> model_reference_table() {
    return {
        {"BiLSTM", 71.0, 77.0, 74.0, 73.57},
        {"LR", 87.0, 89.0, 88.0, 87.58},
        {"SVM", 91.0, 88.0, 89.0, 89.29},
        {"Random Forest", 77.0, 85.0, 81.0, 80.54},
        {"Naive Bayes", 82.0, 93.0, 87.0, 86.00},
        {"Ensemble", 92.0, 94.0, 93.0, 92.43},
    };
}

double reference_accuracy(const std::string& model_name) {
    for (const auto& row : model_reference_table())
        if (row.name == model_name) return row.accuracy;
    return 0.0;
}

std::vector<ReferenceRow> baseline_table() {
    std::vector<ReferenceRow> rows;
    rows.push_back({"Ghanem et al.", std::nullopt, std::nullopt, 48.80, std::nullopt});
    rows.push_back({"Singh et al.", 86.00, 90.00, 88.00, 87.00});
    rows.push_back({"Ahmed et al.", std::nullopt, std::nullopt, std::nullopt, 89.00});
    rows.push_back({"Ruchansky et al.", std::nullopt, std::nullopt, 89.40, 89.20});
    rows.push_back({"Ahmed et al.", std::nullopt, std::nullopt, std::nullopt, 92.00});
    rows.push_back({"Yang et al.", 92.20, 92.77, 92.10, std::nullopt});
    rows.push_back({"Ensemble (this work)", 92.49, 93.88, 92.75, 92.43});
    return rows;
}

}  // namespace reliance::eval
