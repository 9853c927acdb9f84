#pragma once
// Two-sample test battery for pairwise group comparisons per scenario.
// Continuous variables are routed by Shapiro-Wilk and Levene to Student t,
// Welch t or the Wilcoxon rank-sum test; categorical ones use chi-squared.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alarmrisk/session.hpp"
#include "json.hpp"

namespace alarmrisk {

struct TestResult {
    double statistic = 0;
    double p = 1;
    double df = 0;  // where applicable
};

// Royston's approximation, 3 <= n <= 5000.
TestResult shapiro_wilk(std::span<const double> x);
// Mean-centred Levene test, F statistic.
TestResult levene(std::span<const double> a, std::span<const double> b);
TestResult student_t(std::span<const double> a, std::span<const double> b);
TestResult welch_t(std::span<const double> a, std::span<const double> b);
// Statistic is the rank sum of `a`. Exact (tie-aware) enumeration for
// n_a + n_b <= kWilcoxonExactMax, else normal approximation with tie correction.
inline constexpr std::size_t kWilcoxonExactMax = 20;
TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);
// Contingency table rows x categories; empty categories are dropped. Fewer
// than two remaining categories gives statistic 0 and p = 1.
TestResult chi_squared(const std::vector<std::vector<double>>& table, bool continuity_correction = false);
// Category counts of two samples of labels.
TestResult chi_squared_samples(std::span<const double> a, std::span<const double> b, bool continuity_correction = false);

enum class TestKind { StudentT, WelchT, WilcoxonRankSum, ChiSquared };
std::string to_string(TestKind k);
enum class VariableKind { Continuous, Categorical };

// Pure decision rule. A missing Shapiro-Wilk p (too few rows, constant sample)
// counts as non-normal.
TestKind select_test(VariableKind kind, std::optional<double> sw_a, std::optional<double> sw_b,
                     std::optional<double> levene_p, double alpha);

struct TestChoice {
    TestKind test = TestKind::WilcoxonRankSum;
    std::optional<double> sw_a, sw_b, levene_p;
    std::vector<std::string> warnings;
};
TestChoice choose_test(std::span<const double> a, std::span<const double> b, VariableKind kind, double alpha);

struct ComparisonResult {
    std::string variable;
    Scenario scenario = Scenario::S1;
    Group group_a = Group::G1, group_b = Group::G2;
    std::size_t n_a = 0, n_b = 0;
    bool computable = false;
    TestKind test = TestKind::WilcoxonRankSum;
    std::optional<double> sw_a, sw_b, levene_p;
    double statistic = 0;
    double p = 1;
    bool significant = false;
    std::string direction;  // "+", "-" or "+/-" when significant: group_b relative to group_a
    std::vector<std::string> notes;
};

struct BatteryOptions {
    double alpha = 0.05;
    bool continuity_correction = false;
};

struct BatteryVariable {
    std::string name;
    VariableKind kind;
    std::vector<Scenario> scenarios;
};

// Accuracy, acknowledgements, alarms silenced, mimics, alarm count, reaction,
// recovery (S1/S2), response, procedures, consequence, overall performance
// (S1/S2) and error rate.
const std::vector<BatteryVariable>& battery_variables();
std::optional<double> battery_value(const FeatureVector& fv, const std::string& variable);

// Comparisons G1 vs G2, G2 vs G3, G3 vs G4 for every variable and scenario.
std::vector<ComparisonResult> run_battery(const std::vector<FeatureVector>& rows, const BatteryOptions& options = {});
ComparisonResult compare_samples(const std::string& variable, VariableKind kind, std::span<const double> a,
                                 std::span<const double> b, const BatteryOptions& options);

nlohmann::json to_json(const std::vector<ComparisonResult>& results);
std::string battery_csv(const std::vector<ComparisonResult>& results);
std::string battery_text(const std::vector<ComparisonResult>& results);

}  // namespace alarmrisk
