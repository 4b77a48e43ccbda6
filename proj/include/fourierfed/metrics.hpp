#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fourierfed/numerics.hpp"

namespace fourierfed {

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;  // [true][predicted]

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalResult {
    double macro_f1 = 0.0;
    double macro_auc = 0.0;  // NaN when no class has both positives and negatives
    std::vector<ClassScores> per_class;
    ConfusionMatrix confusion;
};

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels, std::size_t classes);

/// Per-class precision/recall/F1 from a confusion matrix. Zero denominators give 0.
std::vector<ClassScores> class_scores(const ConfusionMatrix& cm);

/// Unweighted mean of per-class F1; a class with no true and no predicted samples counts as 0.
double macro_f1(std::span<const int> predictions, std::span<const int> labels, std::size_t classes);

/// One-vs-rest Mann-Whitney AUC (ties count 1/2), averaged over classes that have at least
/// one positive and one negative. Throws kUndefinedMetric when no class qualifies.
double macro_auc(const RealMatrix& scores, std::span<const int> labels, std::size_t classes);

/// One-vs-rest AUC of a single score column for `positive_class`; NaN when positives or
/// negatives are absent.
double binary_auc(std::span<const double> scores, std::span<const int> labels, int positive_class);

std::vector<int> argmax_rows(const RealMatrix& probs);

/// Full report for probability rows. macro_auc is NaN instead of throwing when undefined.
EvalResult evaluate(const RealMatrix& probs, std::span<const int> labels, std::size_t classes);

}  // namespace fourierfed
