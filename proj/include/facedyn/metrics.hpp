// Classification metrics: balanced accuracy, weighted F1, Cohen's kappa,
// per-class precision/recall/F1, and a row-normalized confusion matrix.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "facedyn/common.hpp"

namespace facedyn {

struct EvalReport {
    double balanced_accuracy = 0.0;
    double weighted_f1 = 0.0;
    double kappa = 0.0;
    std::vector<double> precision;      // per class
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::vector<double>> confusion;  // row-normalized, percent
    std::vector<std::size_t> support;   // true count per class
};

inline EvalReport eval_metrics(const std::vector<int>& predictions,
                               const std::vector<int>& labels, int n_classes) {
    if (predictions.size() != labels.size())
        throw InvalidParams("predictions/labels length mismatch");
    if (predictions.empty()) throw EmptyInput("eval_metrics on empty inputs");

    std::vector<std::vector<std::size_t>> counts(
        n_classes, std::vector<std::size_t>(n_classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes || predictions[i] < 0 ||
            predictions[i] >= n_classes)
            throw InvalidParams("class index outside [0, n_classes)");
        ++counts[labels[i]][predictions[i]];
    }

    EvalReport rep;
    rep.precision.assign(n_classes, 0.0);
    rep.recall.assign(n_classes, 0.0);
    rep.f1.assign(n_classes, 0.0);
    rep.support.assign(n_classes, 0);
    rep.confusion.assign(n_classes, std::vector<double>(n_classes, 0.0));

    const double n = static_cast<double>(labels.size());
    double recall_sum = 0.0;
    int classes_present = 0;
    double f1_weighted = 0.0;
    double po = 0.0, pe = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        std::size_t row_total = 0, col_total = 0;
        for (int j = 0; j < n_classes; ++j) {
            row_total += counts[c][j];
            col_total += counts[j][c];
        }
        rep.support[c] = row_total;
        const double tp = static_cast<double>(counts[c][c]);
        if (row_total > 0) {
            rep.recall[c] = tp / static_cast<double>(row_total);
            recall_sum += rep.recall[c];
            ++classes_present;
            for (int j = 0; j < n_classes; ++j)
                rep.confusion[c][j] = 100.0 * static_cast<double>(counts[c][j]) /
                                      static_cast<double>(row_total);
        }
        if (col_total > 0)
            rep.precision[c] = tp / static_cast<double>(col_total);
        const double pr = rep.precision[c] + rep.recall[c];
        rep.f1[c] = pr > 0.0 ? 2.0 * rep.precision[c] * rep.recall[c] / pr : 0.0;
        f1_weighted += rep.f1[c] * static_cast<double>(row_total) / n;
        po += tp / n;
        pe += (static_cast<double>(row_total) / n) *
              (static_cast<double>(col_total) / n);
    }
    rep.balanced_accuracy =
        classes_present > 0 ? recall_sum / classes_present : 0.0;
    rep.weighted_f1 = f1_weighted;
    rep.kappa = pe < 1.0 ? (po - pe) / (1.0 - pe) : 1.0;
    return rep;
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // sample sd (ddof = 1); 0 for a single value
    std::size_t n = 0;
};

inline MeanSd mean_sd(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInput("mean_sd of no values");
    MeanSd out;
    out.n = values.size();
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(out.n);
    if (out.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(out.n - 1));
    }
    return out;
}

}  // namespace facedyn
