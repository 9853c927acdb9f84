#include <random>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/group_stats.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace alarmrisk;

namespace {

// Reference values frozen from an independent statistics library.
const std::vector<double> kA{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.9, 3.1, 2.2, 4.0, 3.7};
const std::vector<double> kB{4.2, 5.1, 3.9, 6.3, 5.8, 4.4, 6.9, 5.2, 4.8, 5.5, 7.1};
const std::vector<double> kSkewed{1.073,  0.3085, 5.3754, 0.3664, 0.1154, 1.7998, 0.4986, 0.5514, 0.0297, 0.7641,
                                  1.0415, 0.2306, 1.6772, 0.2086, 0.7863, 0.1288, 0.9229, 0.4624, 0.6887, 2.649,
                                  1.1145, 0.8988, 2.84,   2.0309, 1.1658, 0.3286, 1.4347, 0.1578, 8.4229, 0.2359,
                                  2.4781, 1.9023, 0.3199, 1.8012, 0.0478, 1.3557, 1.1966, 0.0592, 1.1037, 3.7561};

FeatureVector row(Group g, Scenario s, double reaction, bool error) {
    FeatureVector f;
    f.group = g;
    f.scenario = s;
    f.reaction_time_s = reaction;
    f.response_time_s = reaction * 2;
    if (s != Scenario::S3) f.recovery_time_s = reaction * 3;
    f.accuracy_mse = reaction / 10;
    f.error = error;
    f.consequence = error ? 4 : 1;
    f.overall_performance = error ? Performance::Poor : Performance::Optimal;
    return f;
}

}  // namespace

TEST_SUITE("group_stats") {
    TEST_CASE("Shapiro-Wilk") {
        const auto r = shapiro_wilk(kA);
        CHECK(r.statistic == doctest::Approx(0.9652977974004654).epsilon(1e-6));
        CHECK(r.p == doctest::Approx(0.855886974201727).epsilon(1e-4));
        const auto s3 = shapiro_wilk(std::vector<double>{1, 2, 4});
        CHECK(s3.statistic == doctest::Approx(0.9642857142857142).epsilon(1e-9));
        CHECK(s3.p == doctest::Approx(0.6368868450289689).epsilon(1e-6));
        const auto big = shapiro_wilk(kSkewed);
        CHECK(big.statistic == doctest::Approx(0.6996756136003229).epsilon(1e-5));
        CHECK(big.p == doctest::Approx(9.61624250895695e-08).epsilon(1e-2));
        CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1, 2}), InputError);
        CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{3, 3, 3, 3}), DegenerateInputError);
    }

    TEST_CASE("Levene, Student and Welch") {
        const auto l = levene(kA, kB);
        CHECK(l.statistic == doctest::Approx(0.022359273831301905).epsilon(1e-9));
        CHECK(l.p == doctest::Approx(0.8825620709877037).epsilon(1e-9));
        const auto t = student_t(kA, kB);
        CHECK(t.statistic == doctest::Approx(-4.187801096719531).epsilon(1e-12));
        CHECK(t.p == doctest::Approx(0.00041469233936468466).epsilon(1e-9));
        CHECK(t.df == 21);
        const auto w = welch_t(kA, kB);
        CHECK(w.statistic == doctest::Approx(-4.20152787774286).epsilon(1e-12));
        CHECK(w.p == doctest::Approx(0.0004015686527713312).epsilon(1e-9));
        CHECK(w.df == doctest::Approx(20.992281757403187).epsilon(1e-12));
        CHECK_THROWS_AS(student_t(std::vector<double>{1, 1}, std::vector<double>{2, 2}), DegenerateInputError);
    }

    TEST_CASE("rank-sum, normal approximation") {
        std::vector<double> c, d;
        for (int i = 1; i <= 25; ++i) c.push_back(i);
        for (int i = 10; i < 40; ++i) d.push_back(i + 0.5);
        const auto r = wilcoxon_rank_sum(c, d);
        CHECK(r.statistic == 445);
        CHECK(r.p == doctest::Approx(1.6304302712056835e-05).epsilon(1e-9));
        const std::vector<double> e{1, 2, 2, 3, 3, 3, 4, 5, 5, 6, 7, 8, 8, 9};
        const std::vector<double> f{3, 4, 4, 5, 6, 6, 7, 8, 9, 9, 10, 10, 11, 12};
        const auto t = wilcoxon_rank_sum(e, f);
        CHECK(t.statistic == 151);
        CHECK(t.p == doctest::Approx(0.016388711791959797).epsilon(1e-9));
        const std::vector<double> same(12, 4.0);
        CHECK(wilcoxon_rank_sum(same, same).p == 1.0);
    }

    TEST_CASE("rank-sum, exact enumeration") {
        CHECK(wilcoxon_rank_sum(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}).p ==
              doctest::Approx(0.1).epsilon(1e-12));
        std::mt19937_64 rng(3);
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> a(3 + rng() % 6), b(3 + rng() % 6);
            for (auto& v : a) v = static_cast<double>(rng() % 6);
            for (auto& v : b) v = static_cast<double>(rng() % 6) + 1;
            CHECK(wilcoxon_rank_sum(a, b).p == doctest::Approx(oracle::wilcoxon_exact(a, b)).epsilon(1e-12));
        }
    }

    TEST_CASE("chi-squared") {
        const auto r = chi_squared({{10, 20, 30}, {20, 20, 10}});
        CHECK(r.statistic == doctest::Approx(12.52777777777778).epsilon(1e-12));
        CHECK(r.p == doctest::Approx(0.0019038276076954943).epsilon(1e-9));
        CHECK(r.df == 2);
        CHECK(chi_squared({{12, 5}, {4, 14}}).statistic == doctest::Approx(8.241314069487442).epsilon(1e-12));
        const auto y = chi_squared({{12, 5}, {4, 14}}, true);
        CHECK(y.statistic == doctest::Approx(6.407580301857583).epsilon(1e-12));
        CHECK(y.p == doctest::Approx(0.011363416602876389).epsilon(1e-9));
        // empty categories drop out; a single category is no evidence
        CHECK(chi_squared({{10, 0, 30}, {20, 0, 10}}).df == 1);
        const auto one = chi_squared({{10, 0}, {20, 0}});
        CHECK(one.statistic == 0);
        CHECK(one.p == 1);
        CHECK_THROWS_AS(chi_squared({{0, 0}, {1, 2}}), DegenerateInputError);
        const auto s = chi_squared_samples(std::vector<double>{1, 1, 2, 2, 2}, std::vector<double>{1, 2, 3});
        CHECK(s.df == 2);
    }

    TEST_CASE("test selection rule") {
        using VK = VariableKind;
        CHECK(select_test(VK::Categorical, 0.9, 0.9, 0.9, 0.05) == TestKind::ChiSquared);
        CHECK(select_test(VK::Continuous, 0.9, 0.9, 0.9, 0.05) == TestKind::StudentT);
        CHECK(select_test(VK::Continuous, 0.9, 0.9, 0.01, 0.05) == TestKind::WelchT);
        CHECK(select_test(VK::Continuous, 0.9, 0.9, std::nullopt, 0.05) == TestKind::WelchT);
        CHECK(select_test(VK::Continuous, 0.04, 0.9, 0.9, 0.05) == TestKind::WilcoxonRankSum);
        CHECK(select_test(VK::Continuous, std::nullopt, 0.9, 0.9, 0.05) == TestKind::WilcoxonRankSum);
        CHECK(select_test(VK::Continuous, 0.05, 0.05, 0.05, 0.05) == TestKind::StudentT);

        const auto c = choose_test(kA, kSkewed, VK::Continuous, 0.05);
        CHECK(c.test == TestKind::WilcoxonRankSum);
        const auto tiny = choose_test(std::vector<double>{1, 2}, kA, VK::Continuous, 0.05);
        CHECK(tiny.test == TestKind::WilcoxonRankSum);
        CHECK_FALSE(tiny.warnings.empty());
    }

    TEST_CASE("compare_samples direction and computability") {
        BatteryOptions o;
        const auto r = compare_samples("reaction_time", VariableKind::Continuous, kA, kB, o);
        CHECK(r.computable);
        CHECK(r.test == TestKind::StudentT);
        CHECK(r.significant);
        CHECK(r.direction == "+");
        const auto down = compare_samples("reaction_time", VariableKind::Continuous, kB, kA, o);
        CHECK(down.direction == "-");
        const auto empty = compare_samples("x", VariableKind::Continuous, std::vector<double>{}, kA, o);
        CHECK_FALSE(empty.computable);
    }

    TEST_CASE("battery covers the pairs and scenarios") {
        std::vector<FeatureVector> rows;
        std::mt19937_64 rng(1);
        std::normal_distribution<double> z;
        for (Group g : kAllGroups)
            for (Scenario s : kAllScenarios)
                for (int i = 0; i < 8; ++i) rows.push_back(row(g, s, 50 + 10 * z(rng) + 5 * code(g), rng() % 3 == 0));
        const auto res = run_battery(rows);
        std::size_t expected = 0;
        for (const auto& v : battery_variables()) expected += 3 * v.scenarios.size();
        CHECK(res.size() == expected);
        for (const auto& r : res) {
            CHECK(code(r.group_b) == code(r.group_a) + 1);
            if (r.variable == "procedures_opened") CHECK_FALSE(r.computable);
            if (r.variable == "error_rate") CHECK(r.test == TestKind::ChiSquared);
        }
        CHECK(to_json(res).size() == res.size());
        CHECK(battery_csv(res).find("reaction_time") != std::string::npos);
        CHECK_FALSE(battery_text(res).empty());
        CHECK(battery_value(rows[0], "reaction_time") == rows[0].reaction_time_s);
        CHECK(battery_value(rows[0], "error_rate") == 1.0 * rows[0].error);
    }
}
