#include "fourierfed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fourierfed {
namespace {

void check_labels(std::span<const int> values, std::size_t classes, const char* what) {
    for (int v : values) {
        if (v < 0 || static_cast<std::size_t>(v) >= classes) {
            throw Error(ErrorCode::kInvalidInput, std::string(what) + " value out of range");
        }
    }
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
    if (predictions.size() != labels.size()) {
        throw Error(ErrorCode::kInvalidInput, "predictions and labels differ in length");
    }
    if (labels.empty()) throw Error(ErrorCode::kInvalidInput, "metrics need at least one sample");
    if (classes == 0) throw Error(ErrorCode::kInvalidInput, "class count must be positive");
    check_labels(predictions, classes, "prediction");
    check_labels(labels, classes, "label");
    ConfusionMatrix cm(classes, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) ++cm[labels[i]][predictions[i]];
    return cm;
}

std::vector<ClassScores> class_scores(const ConfusionMatrix& cm) {
    const std::size_t k = cm.size();
    std::vector<ClassScores> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = cm[c][c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c) continue;
            fp += cm[o][c];
            fn += cm[c][o];
        }
        auto& s = out[c];
        s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        // 2PR/(P+R) written over counts.
        const std::size_t denom = 2 * tp + fp + fn;
        s.f1 = denom ? static_cast<double>(2 * tp) / static_cast<double>(denom) : 0.0;
    }
    return out;
}

double macro_f1(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
    const auto scores = class_scores(confusion_matrix(predictions, labels, classes));
    double sum = 0.0;
    for (const auto& s : scores) sum += s.f1;
    return sum / static_cast<double>(classes);
}

double binary_auc(std::span<const double> scores, std::span<const int> labels, int positive_class) {
    if (scores.size() != labels.size()) throw Error(ErrorCode::kInvalidInput, "scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Mid-ranks (1-based, doubled to stay integral) summed over positives.
    std::size_t n_pos = 0;
    std::size_t doubled_rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const std::size_t doubled_mid = i + 1 + j;  // 2 * (i+1 + j)/2
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == positive_class) {
                ++n_pos;
                doubled_rank_sum += doubled_mid;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::numeric_limits<double>::quiet_NaN();
    // 2U = 2*R - P(P+1); counts of wins + half ties, doubled.
    const std::size_t doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double macro_auc(const RealMatrix& scores, std::span<const int> labels, std::size_t classes) {
    if (scores.rows() != labels.size()) throw Error(ErrorCode::kInvalidInput, "scores and labels differ in length");
    if (scores.cols() != classes) throw Error(ErrorCode::kInvalidInput, "score columns do not match class count");
    check_labels(labels, classes, "label");
    std::vector<double> column(labels.size());
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < labels.size(); ++i) column[i] = scores(i, c);
        const double auc = binary_auc(column, labels, static_cast<int>(c));
        if (std::isnan(auc)) continue;
        sum += auc;
        ++used;
    }
    if (used == 0) throw Error(ErrorCode::kUndefinedMetric, "no class has both positive and negative samples");
    return sum / static_cast<double>(used);
}

std::vector<int> argmax_rows(const RealMatrix& probs) {
    std::vector<int> out(probs.rows());
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        auto row = probs.row(r);
        out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

EvalResult evaluate(const RealMatrix& probs, std::span<const int> labels, std::size_t classes) {
    EvalResult r;
    const auto preds = argmax_rows(probs);
    r.confusion = confusion_matrix(preds, labels, classes);
    r.per_class = class_scores(r.confusion);
    double sum = 0.0;
    for (const auto& s : r.per_class) sum += s.f1;
    r.macro_f1 = sum / static_cast<double>(classes);
    try {
        r.macro_auc = macro_auc(probs, labels, classes);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kUndefinedMetric) throw;
        r.macro_auc = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

}  // namespace fourierfed
