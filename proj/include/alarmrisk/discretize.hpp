#pragma once
// Supervised entropy/MDL discretization of continuous features.
//
// Splitting is recursive and binary. Candidate cuts sit at the midpoint of
// two adjacent distinct values unless both neighbouring value groups are pure
// in the same class. The best cut minimises class entropy (leftmost on ties
// within 1e-12) and is kept only if its information gain beats the MDL cost
//     (log2(N-1) + log2(3^k - 2) - k Ent(S) + k1 Ent(S1) + k2 Ent(S2)) / N.
// Intervals are half-open [lo, cut): a value equal to a cut falls above it.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "alarmrisk/dataset.hpp"
#include "json.hpp"

namespace alarmrisk {

inline constexpr double kCutTieTolerance = 1e-12;

double entropy_bits(std::span<const double> counts);

// labels are class indices in [0, n_classes).
std::vector<double> fit_mdl(std::span<const double> values, std::span<const int> labels, int n_classes = 2);

struct FeatureCuts {
    std::vector<double> cuts;
    bool no_informative_cut = false;
    bool operator==(const FeatureCuts&) const = default;
};

int interval_index(const std::vector<double>& cuts, double value);
std::vector<std::string> interval_labels(const std::vector<double>& cuts);

class DiscretizationMap {
public:
    // Fits every continuous feature of `features` on the table's non-missing rows.
    static DiscretizationMap fit(const NumericTable& table, const std::vector<std::string>& features);

    void set(const std::string& feature, FeatureCuts cuts);
    bool contains(const std::string& feature) const { return cuts_.count(feature) > 0; }
    const FeatureCuts& at(const std::string& feature) const;  // ContractError if unknown
    const std::map<std::string, FeatureCuts>& entries() const { return cuts_; }

    // Continuous features without an accepted cut are dropped from the output;
    // categorical ones pass through as code-1 states.
    DiscreteDataset apply(const NumericTable& table, const std::vector<std::string>& features) const;

    // Interval index of one raw value. ContractError for an unknown or dropped feature.
    int state_of(const std::string& feature, double value) const;

    nlohmann::json to_json() const;
    static DiscretizationMap from_json(const nlohmann::json& j);

    bool operator==(const DiscretizationMap&) const = default;

private:
    std::map<std::string, FeatureCuts> cuts_;
};

}  // namespace alarmrisk
