#pragma once
// Model-facing views of the feature rows: a numeric table (NaN = missing)
// and a discrete table (-1 = missing) for the Bayesian-network classifiers.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alarmrisk/session.hpp"

namespace alarmrisk {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double x) { return std::isnan(x); }

enum class FeatureKind { Continuous, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind;
    // categorical only: state labels in code order
    std::vector<std::string> states;
};

// Known model inputs, e.g. "num_alarms", "group", "sart".
const std::vector<FeatureSpec>& feature_catalogue();
const FeatureSpec& feature_spec(const std::string& name);  // ContractError if unknown
std::optional<double> feature_value(const FeatureVector& fv, const std::string& name);

enum class FeatureSet { Behavioural, BehaviouralSubjective };
FeatureSet parse_feature_set(const std::string& text);
std::string to_string(FeatureSet s);

enum class ModelFamily { NaiveBayes, Tan, Logistic, LogisticStepwise };
ModelFamily parse_family(const std::string& text);
std::string to_string(ModelFamily f);
bool is_bayes_family(ModelFamily f);

// Candidate inputs for a family. Regression excludes procedures_opened,
// which is never recorded for G1/G2.
std::vector<std::string> family_features(ModelFamily family, FeatureSet set);

struct NumericTable {
    std::vector<std::string> features;
    std::vector<std::vector<double>> x;  // row-major, NaN = missing
    std::vector<int> y;                  // 1 = failure
    std::vector<Group> group;
    std::vector<Scenario> scenario;

    std::size_t rows() const { return y.size(); }
    std::size_t column(const std::string& name) const;  // ContractError if absent
    NumericTable subset(std::span<const std::size_t> rows) const;
    // Rows without a missing cell among the given features.
    NumericTable complete_cases(const std::vector<std::string>& cols) const;
};

NumericTable make_table(const std::vector<FeatureVector>& rows, const std::vector<std::string>& features);

struct DiscreteDataset {
    std::vector<std::string> features;
    std::vector<int> cardinality;
    std::vector<std::vector<std::string>> state_labels;
    std::vector<std::vector<int>> x;  // row-major, -1 = missing
    std::vector<int> y;               // 0 = Success, 1 = Failure

    std::size_t rows() const { return y.size(); }
    std::size_t feature_count() const { return features.size(); }
    std::size_t index_of(const std::string& name) const;  // ContractError if absent
};

}  // namespace alarmrisk
