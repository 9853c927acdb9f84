#pragma once
// Stratified shuffle-split cross-validation, threshold classification and
// ranking metrics. Failure (label 1) is the positive class.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/parallel.hpp"
#include "json.hpp"

namespace alarmrisk {

class StratificationError : public InputError {
public:
    using InputError::InputError;
};

struct Split {
    std::vector<std::size_t> train, test;  // ascending
};

// Counter-based: fold f depends only on (seed, f).
std::uint64_t fold_seed(std::uint64_t seed, std::uint64_t fold);

// Test size round(test_fraction * n), allotted to classes by floor plus largest
// remainder. Every class must land on both sides.
Split stratified_shuffle_split_fold(std::span<const int> labels, double test_fraction, std::uint64_t seed,
                                    std::uint64_t fold);
std::vector<Split> stratified_shuffle_split(std::span<const int> labels, std::size_t folds, double test_fraction,
                                            std::uint64_t seed);

// Sized so the mean test set is about 82 rows, clamped to [0.1, 0.5].
double default_test_fraction(std::size_t n);

// Mann-Whitney formulation with midranks; ties count half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
    double tn = 0, fp = 0, fn = 0, tp = 0;
    double total() const { return tn + fp + fn + tp; }
    double accuracy() const;
    double precision() const;  // 0 when nothing is predicted positive
    double recall() const;     // 0 when there are no positives
    double f1() const;
};

Confusion confusion_at(std::span<const double> p_failure, std::span<const int> labels, double threshold);

// Returns p(failure) for split.test, in that order.
using FoldScorer = std::function<std::vector<double>(const Split&)>;

struct EvalOptions {
    std::size_t folds = 1000;
    std::optional<double> test_fraction;  // default_test_fraction when unset
    double threshold = 0.5;
    std::uint64_t seed = 0;
    Execution exec = Execution::Serial;
};

struct MeanSd {
    double mean = 0, sd = 0;
};

struct EvalReport {
    std::size_t folds = 0;
    std::size_t evaluated_folds = 0;
    std::size_t skipped_single_class = 0;
    std::size_t failed_folds = 0;
    std::string first_failure;
    double threshold = 0.5;
    std::uint64_t seed = 0;
    double test_fraction = 0;
    double mean_test_size = 0;
    Confusion averaged;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;  // from the averaged matrix
    double auc_fold_mean = 0;
    double auc_pooled = 0;
    MeanSd fold_accuracy, fold_precision, fold_recall, fold_f1, fold_auc;
};

EvalReport evaluate(std::span<const int> labels, const FoldScorer& scorer, const EvalOptions& options);

nlohmann::json to_json(const EvalReport& r);
std::string render_text(const EvalReport& r, const std::string& title);

}  // namespace alarmrisk
