#pragma once
// Naive Bayes and Tree-Augmented Naive Bayes over discrete features.
//
// The class node "Error" (Success = 0, Failure = 1) is the parent of every
// feature. In a TAN model each feature may additionally have one feature
// parent; those edges form a maximum-weight spanning tree under conditional
// mutual information I(Xi; Xj | C), oriented away from the root.
//
// CPT layout, per node: index ((c * parent_card + parent_state) * card + state),
// parent_card = 1 for nodes without a feature parent.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alarmrisk/dataset.hpp"
#include "alarmrisk/discretize.hpp"
#include "alarmrisk/parallel.hpp"
#include "json.hpp"

namespace alarmrisk {

inline constexpr int kClassStates = 2;
inline const std::array<std::string, 2> kClassLabels = {"Success", "Failure"};

enum class BnKind { NaiveBayes, Tan };

struct BnNode {
    std::string name;
    int cardinality = 0;
    std::vector<std::string> states;
    int parent = -1;  // feature parent index, -1 if only the class
    std::vector<double> cpt;
};

struct TanEdge {
    int from = -1;
    int to = -1;
    double cmi = 0;
};

struct BnModel {
    BnKind kind = BnKind::NaiveBayes;
    double alpha = 1.0;
    std::array<double, 2> prior{0.5, 0.5};
    std::vector<BnNode> nodes;
    std::vector<TanEdge> edges;  // TAN only, parent -> child
    int root = -1;               // TAN only
    DiscretizationMap discretization;
    std::vector<std::string> warnings;

    std::size_t feature_count() const { return nodes.size(); }
    int index_of(const std::string& name) const;  // -1 if absent
    int parent_cardinality(std::size_t node) const;
    double cpt(std::size_t node, int cls, int parent_state, int state) const;
};

struct BnFitOptions {
    double alpha = 1.0;
    std::optional<std::string> root;  // TAN: pin the tree root by name
    Execution exec = Execution::Serial;
};

BnModel fit_nb(const DiscreteDataset& data, const BnFitOptions& options = {});
BnModel fit_tan(const DiscreteDataset& data, const BnFitOptions& options = {});

// evidence[i] is the observed state of feature i, or -1 when unobserved.
// Unobserved features are summed out exactly.
std::array<double, 2> posterior(const BnModel& model, std::span<const int> evidence);
std::vector<int> evidence_vector(const BnModel& model, const std::map<std::string, int>& by_name);

// Empirical information quantities in bits, over rows where every involved
// variable is observed.
double mutual_information_bits(std::span<const int> a, int card_a, std::span<const int> b, int card_b);
double conditional_mutual_information_bits(const DiscreteDataset& data, std::size_t i, std::size_t j);
// Symmetric F x F matrix, zero diagonal.
std::vector<std::vector<double>> cmi_matrix(const DiscreteDataset& data, Execution exec = Execution::Serial);

// Maximum-weight spanning tree over the complete graph, Kruskal with ties
// broken by lexicographic (name_a, name_b). Returns undirected (a, b), a < b.
std::vector<std::pair<int, int>> maximum_spanning_tree(const std::vector<std::vector<double>>& weights,
                                                       const std::vector<std::string>& names);

struct MiEntry {
    std::string feature;
    double mi_bits = 0;
    std::size_t observed = 0;
};

struct MiReport {
    std::vector<MiEntry> entries;  // sorted by MI, descending
    double h_error_bits = 0;
};

MiReport mutual_information(const DiscreteDataset& data);

nlohmann::json to_json(const BnModel& model);
BnModel bn_model_from_json(const nlohmann::json& j);
// Features, states, cut points and the class prior; no CPTs.
nlohmann::json model_summary(const BnModel& model);

}  // namespace alarmrisk
