#include "alarmrisk/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "alarmrisk/io_util.hpp"

namespace alarmrisk {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r < limit) return r % bound;
    }
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(rng, i)]);
}

MeanSd mean_sd(const std::vector<double>& v) {
    MeanSd out;
    if (v.empty()) return out;
    out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return out;
}

}  // namespace

std::uint64_t fold_seed(std::uint64_t seed, std::uint64_t fold) { return splitmix64(splitmix64(seed) ^ fold); }

Split stratified_shuffle_split_fold(std::span<const int> labels, double test_fraction, std::uint64_t seed,
                                    std::uint64_t fold) {
    if (!(test_fraction > 0 && test_fraction < 1)) throw ContractError("test_fraction must lie in (0, 1)");
    std::vector<std::vector<std::size_t>> members(2);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw ContractError("labels must be 0 or 1");
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    if (members[0].empty() || members[1].empty()) throw StratificationError("both classes must be present");

    const auto n = static_cast<double>(labels.size());
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * n));
    std::array<std::size_t, 2> take{};
    std::array<double, 2> rem{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        const double share = static_cast<double>(n_test) * static_cast<double>(members[c].size()) / n;
        take[c] = static_cast<std::size_t>(std::floor(share));
        rem[c] = share - static_cast<double>(take[c]);
        assigned += take[c];
    }
    if (assigned < n_test) take[rem[1] > rem[0] ? 1 : 0] += 1;  // class 0 wins ties
    for (std::size_t c = 0; c < 2; ++c)
        if (take[c] == 0 || take[c] >= members[c].size())
            throw StratificationError("class " + std::to_string(c) + " has " + std::to_string(members[c].size()) +
                                      " rows; cannot place it on both sides of a test set of " +
                                      std::to_string(n_test));

    std::mt19937_64 rng(fold_seed(seed, fold));
    Split s;
    for (std::size_t c = 0; c < 2; ++c) {
        auto idx = members[c];
        shuffle(idx, rng);
        s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<long>(take[c]));
        s.train.insert(s.train.end(), idx.begin() + static_cast<long>(take[c]), idx.end());
    }
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
    return s;
}

std::vector<Split> stratified_shuffle_split(std::span<const int> labels, std::size_t folds, double test_fraction,
                                            std::uint64_t seed) {
    std::vector<Split> out;
    out.reserve(folds);
    for (std::size_t f = 0; f < folds; ++f) out.push_back(stratified_shuffle_split_fold(labels, test_fraction, seed, f));
    return out;
}

double default_test_fraction(std::size_t n) {
    if (n == 0) return 0.5;
    return std::clamp(82.0 / static_cast<double>(n), 0.1, 0.5);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ContractError("roc_auc: scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    double rank_sum = 0, pos = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) {
                rank_sum += mid;
                pos += 1;
            }
        i = j;
    }
    const double neg = static_cast<double>(scores.size()) - pos;
    if (pos == 0 || neg == 0) throw ContractError("roc_auc is undefined with a single class");
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

double Confusion::accuracy() const { return total() > 0 ? (tn + tp) / total() : 0.0; }
double Confusion::precision() const { return tp + fp > 0 ? tp / (tp + fp) : 0.0; }
double Confusion::recall() const { return tp + fn > 0 ? tp / (tp + fn) : 0.0; }
double Confusion::f1() const {
    const double p = precision(), r = recall();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

Confusion confusion_at(std::span<const double> p_failure, std::span<const int> labels, double threshold) {
    Confusion c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = p_failure[i] >= threshold;
        if (labels[i] == 1) (predicted ? c.tp : c.fn) += 1;
        else (predicted ? c.fp : c.tn) += 1;
    }
    return c;
}

EvalReport evaluate(std::span<const int> labels, const FoldScorer& scorer, const EvalOptions& options) {
    if (options.folds < 1) throw ContractError("folds must be >= 1");
    if (!(options.threshold > 0 && options.threshold < 1)) throw ContractError("threshold must lie in (0, 1)");
    EvalReport r;
    r.folds = options.folds;
    r.threshold = options.threshold;
    r.seed = options.seed;
    r.test_fraction = options.test_fraction.value_or(default_test_fraction(labels.size()));

    struct Fold {
        Confusion cm;
        double auc = 0;
        bool single_class = false;
        std::string failure;
        std::vector<double> scores;
        std::vector<int> labels;
    };
    std::vector<Fold> folds(options.folds);
    // Fails fast on an impossible stratification before any fold runs.
    stratified_shuffle_split_fold(labels, r.test_fraction, options.seed, 0);
    for_each_index(options.folds, options.exec, [&](std::size_t f) {
        auto& out = folds[f];
        const auto split = stratified_shuffle_split_fold(labels, r.test_fraction, options.seed, f);
        for (auto i : split.test) out.labels.push_back(labels[i]);
        const auto ones = std::count(out.labels.begin(), out.labels.end(), 1);
        if (ones == 0 || ones == static_cast<long>(out.labels.size())) {
            out.single_class = true;
            return;
        }
        try {
            out.scores = scorer(split);
        } catch (const NumericalError& e) {
            out.failure = e.what();
            return;
        }
        if (out.scores.size() != out.labels.size()) throw ContractError("fold scorer returned the wrong number of scores");
        out.cm = confusion_at(out.scores, out.labels, options.threshold);
        out.auc = roc_auc(out.scores, out.labels);
    });

    std::vector<double> acc, prec, rec, f1, auc, pooled_scores;
    std::vector<int> pooled_labels;
    double test_rows = 0;
    for (const auto& f : folds) {
        if (f.single_class) {
            ++r.skipped_single_class;
            continue;
        }
        if (!f.failure.empty()) {
            if (r.failed_folds++ == 0) r.first_failure = f.failure;
            continue;
        }
        ++r.evaluated_folds;
        r.averaged.tn += f.cm.tn;
        r.averaged.fp += f.cm.fp;
        r.averaged.fn += f.cm.fn;
        r.averaged.tp += f.cm.tp;
        test_rows += static_cast<double>(f.labels.size());
        acc.push_back(f.cm.accuracy());
        prec.push_back(f.cm.precision());
        rec.push_back(f.cm.recall());
        f1.push_back(f.cm.f1());
        auc.push_back(f.auc);
        pooled_scores.insert(pooled_scores.end(), f.scores.begin(), f.scores.end());
        pooled_labels.insert(pooled_labels.end(), f.labels.begin(), f.labels.end());
    }
    if (r.evaluated_folds == 0)
        throw NumericalError("no fold could be evaluated" + (r.first_failure.empty() ? "" : ": " + r.first_failure));
    const auto k = static_cast<double>(r.evaluated_folds);
    r.averaged.tn /= k;
    r.averaged.fp /= k;
    r.averaged.fn /= k;
    r.averaged.tp /= k;
    r.mean_test_size = test_rows / k;
    r.accuracy = r.averaged.accuracy();
    r.precision = r.averaged.precision();
    r.recall = r.averaged.recall();
    r.f1 = r.averaged.f1();
    r.fold_accuracy = mean_sd(acc);
    r.fold_precision = mean_sd(prec);
    r.fold_recall = mean_sd(rec);
    r.fold_f1 = mean_sd(f1);
    r.fold_auc = mean_sd(auc);
    r.auc_fold_mean = r.fold_auc.mean;
    r.auc_pooled = roc_auc(pooled_scores, pooled_labels);
    return r;
}

json to_json(const EvalReport& r) {
    auto ms = [](const MeanSd& m) { return json{{"mean", m.mean}, {"sd", m.sd}}; };
    return {{"folds", r.folds},
            {"evaluated_folds", r.evaluated_folds},
            {"skipped_single_class_folds", r.skipped_single_class},
            {"failed_folds", r.failed_folds},
            {"first_failure", r.first_failure},
            {"threshold", r.threshold},
            {"seed", r.seed},
            {"test_fraction", r.test_fraction},
            {"mean_test_size", r.mean_test_size},
            {"confusion", {{"tn", r.averaged.tn}, {"fp", r.averaged.fp}, {"fn", r.averaged.fn}, {"tp", r.averaged.tp}}},
            {"accuracy", r.accuracy},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"auc_fold_mean", r.auc_fold_mean},
            {"auc_pooled", r.auc_pooled},
            {"per_fold",
             {{"accuracy", ms(r.fold_accuracy)},
              {"precision", ms(r.fold_precision)},
              {"recall", ms(r.fold_recall)},
              {"f1", ms(r.fold_f1)},
              {"auc", ms(r.fold_auc)}}}};
}

std::string render_text(const EvalReport& r, const std::string& title) {
    auto f2 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    auto f3 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << title << " (average on " << r.evaluated_folds << " folds)\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %18s %18s\n", "", "Predicted Success", "Predicted Failure");
    os << line;
    std::snprintf(line, sizeof line, "%-16s %18s %18s\n", "Actual Success", f2(r.averaged.tn).c_str(), f2(r.averaged.fp).c_str());
    os << line;
    std::snprintf(line, sizeof line, "%-16s %18s %18s\n", "Actual Failure", f2(r.averaged.fn).c_str(), f2(r.averaged.tp).c_str());
    os << line;
    os << "accuracy " << f3(r.accuracy) << "  precision " << f3(r.precision) << "  recall " << f3(r.recall) << "  f1 "
       << f3(r.f1) << "\n";
    os << "auc (fold mean) " << f3(r.auc_fold_mean) << "  auc (pooled) " << f3(r.auc_pooled) << "\n";
    os << "threshold " << io::format_double(r.threshold) << "  test fraction " << f3(r.test_fraction) << "  seed "
       << r.seed;
    if (r.skipped_single_class) os << "  skipped " << r.skipped_single_class;
    if (r.failed_folds) os << "  failed " << r.failed_folds;
    os << "\n";
    return os.str();
}

}  // namespace alarmrisk
