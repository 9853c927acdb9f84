#include <algorithm>
#include <random>
#include <set>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/evaluation.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace alarmrisk;

namespace {

std::vector<int> labels(std::size_t neg, std::size_t pos) {
    std::vector<int> y(neg, 0);
    y.insert(y.end(), pos, 1);
    return y;
}

}  // namespace

TEST_SUITE("evaluation") {
    TEST_CASE("stratified split sizes and disjointness") {
        const auto y = labels(59, 23);
        const auto s = stratified_shuffle_split_fold(y, 0.25, 42, 3);
        // 20.5 rounds to 21: 59*21/82 = 15.11, 23*21/82 = 5.89, remainder to the positives
        CHECK(s.test.size() == 21);
        CHECK(s.train.size() == 61);
        std::size_t pos = 0;
        for (auto i : s.test) pos += y[i];
        CHECK(pos == 6);
        CHECK(std::is_sorted(s.test.begin(), s.test.end()));
        std::set<std::size_t> all(s.train.begin(), s.train.end());
        for (auto i : s.test) CHECK(all.insert(i).second);
        CHECK(all.size() == y.size());
    }

    TEST_CASE("folds are counter-based") {
        const auto y = labels(40, 20);
        const auto folds = stratified_shuffle_split(y, 10, 0.3, 7);
        for (std::size_t f = 0; f < 10; ++f) {
            const auto again = stratified_shuffle_split_fold(y, 0.3, 7, f);
            CHECK(again.test == folds[f].test);
        }
        CHECK(folds[0].test != folds[1].test);
        CHECK(stratified_shuffle_split_fold(y, 0.3, 8, 0).test != folds[0].test);
        CHECK(fold_seed(1, 2) != fold_seed(2, 1));
    }

    TEST_CASE("every row lands in the test side roughly test_fraction of the time") {
        // 40 rows at 0.3: 9 of 30 negatives and 3 of 10 positives per fold
        const auto y = labels(30, 10);
        std::vector<int> hits(y.size(), 0);
        const std::size_t folds = 2000;
        for (const auto& s : stratified_shuffle_split(y, folds, 0.3, 1))
            for (auto i : s.test) ++hits[i];
        for (int h : hits) CHECK(std::abs(h / static_cast<double>(folds) - 0.3) < 0.04);
    }

    TEST_CASE("impossible stratification") {
        CHECK_THROWS_AS(stratified_shuffle_split_fold(labels(20, 1), 0.2, 0, 0), StratificationError);
        CHECK_THROWS_AS(stratified_shuffle_split_fold(labels(20, 0), 0.2, 0, 0), StratificationError);
        CHECK_THROWS_AS(stratified_shuffle_split_fold(labels(20, 5), 0.0, 0, 0), InputError);
        CHECK_THROWS_AS(stratified_shuffle_split_fold(labels(20, 5), 1.0, 0, 0), InputError);
    }

    TEST_CASE("default fraction targets about 82 test rows") {
        CHECK(default_test_fraction(87) == 0.5);
        CHECK(default_test_fraction(400) == doctest::Approx(0.205));
        CHECK(default_test_fraction(10000) == 0.1);
    }

    TEST_CASE("AUC equals the pairwise count") {
        std::mt19937_64 rng(9);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> s(60);
            std::vector<int> y(60);
            for (std::size_t i = 0; i < s.size(); ++i) {
                y[i] = static_cast<int>(rng() % 2);
                s[i] = static_cast<double>(rng() % 7) + y[i];  // many ties
            }
            y[0] = 0;
            y[1] = 1;
            CHECK(roc_auc(s, y) == doctest::Approx(oracle::auc_pairs(s, y)).epsilon(1e-12));
        }
        CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), InputError);
    }

    TEST_CASE("confusion at threshold") {
        const std::vector<double> p{0.1, 0.5, 0.7, 0.2, 0.9};
        const std::vector<int> y{0, 0, 1, 1, 1};
        const auto c = confusion_at(p, y, 0.5);
        CHECK(c.tn == 1);
        CHECK(c.fp == 1);
        CHECK(c.fn == 1);
        CHECK(c.tp == 2);
        CHECK(c.accuracy() == doctest::Approx(0.6));
        CHECK(c.precision() == doctest::Approx(2.0 / 3));
        CHECK(c.recall() == doctest::Approx(2.0 / 3));
        CHECK(c.f1() == doctest::Approx(2.0 / 3));
        Confusion none{5, 0, 0, 0};
        CHECK(none.precision() == 0);
        CHECK(none.recall() == 0);
        CHECK(none.f1() == 0);
    }

    TEST_CASE("evaluate averages matrices and is execution independent") {
        const auto y = labels(60, 30);
        std::vector<double> score(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) score[i] = y[i] ? 0.3 + (i % 7) / 10.0 : (i % 6) / 10.0;
        FoldScorer scorer = [&](const Split& s) {
            std::vector<double> out;
            for (auto i : s.test) out.push_back(score[i]);
            return out;
        };
        EvalOptions o;
        o.folds = 200;
        o.test_fraction = 0.3;
        o.seed = 5;
        const auto r = evaluate(y, scorer, o);
        CHECK(r.evaluated_folds == 200);
        CHECK(r.averaged.total() == doctest::Approx(27));
        CHECK(r.averaged.tp + r.averaged.fn == doctest::Approx(9));
        CHECK(r.accuracy == doctest::Approx(r.averaged.accuracy()));
        // fold matrices are subsets of the full-data matrix
        const auto full = confusion_at(score, y, 0.5);
        CHECK(r.averaged.fp / 18.0 == doctest::Approx(full.fp / 60.0).epsilon(0.15));
        o.exec = Execution::Parallel;
        CHECK(to_json(evaluate(y, scorer, o)) == to_json(r));
        CHECK(render_text(r, "demo").find("demo") != std::string::npos);
    }

    TEST_CASE("numerically failing folds are counted, not fatal") {
        const auto y = labels(30, 15);
        int calls = 0;
        FoldScorer flaky = [&](const Split& s) {
            if (s.test.front() % 2 == 0) throw SeparationError("separated");
            ++calls;
            return std::vector<double>(s.test.size(), 0.4);
        };
        EvalOptions o;
        o.folds = 50;
        const auto r = evaluate(y, flaky, o);
        CHECK(r.failed_folds + r.evaluated_folds + r.skipped_single_class == 50);
        CHECK(r.failed_folds > 0);
        CHECK(r.first_failure.find("separated") != std::string::npos);
        FoldScorer broken = [](const Split&) -> std::vector<double> { throw ConvergenceError("never"); };
        CHECK_THROWS_AS(evaluate(y, broken, o), NumericalError);
        FoldScorer wrong = [](const Split&) { return std::vector<double>{0.5}; };
        CHECK_THROWS_AS(evaluate(y, wrong, o), InputError);
    }
}
