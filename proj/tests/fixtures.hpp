#pragma once
// Seeded random models and datasets shared by the unit tests, the acceptance
// binary and the benchmarks.

#include <random>
#include <string>
#include <vector>

#include "alarmrisk/bayes_net.hpp"
#include "alarmrisk/dataset.hpp"

namespace fixtures {

using alarmrisk::BnModel;
using alarmrisk::DiscreteDataset;

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random forest over the features (each node has at most one feature parent),
// strictly positive CPT rows.
inline BnModel random_bn_model(std::mt19937_64& rng, int max_features = 6, int max_states = 4) {
    BnModel m;
    const int f = uniform_int(rng, 1, max_features);
    std::uniform_real_distribution<double> u(0.02, 1.0);
    const double p1 = u(rng);
    m.prior = {1 - p1 / 1.02, p1 / 1.02};
    std::vector<int> order(static_cast<std::size_t>(f));
    for (int i = 0; i < f; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    m.nodes.resize(static_cast<std::size_t>(f));
    for (int i = 0; i < f; ++i) {
        auto& n = m.nodes[static_cast<std::size_t>(i)];
        n.name = "x" + std::to_string(i);
        n.cardinality = uniform_int(rng, 2, max_states);
        for (int s = 0; s < n.cardinality; ++s) n.states.push_back("s" + std::to_string(s));
    }
    for (int k = 1; k < f; ++k) {
        if (uniform_int(rng, 0, 4) == 0) continue;  // occasional extra root
        const int child = order[static_cast<std::size_t>(k)];
        m.nodes[static_cast<std::size_t>(child)].parent = order[static_cast<std::size_t>(uniform_int(rng, 0, k - 1))];
    }
    bool tan = false;
    for (auto& n : m.nodes) {
        const int pc = n.parent < 0 ? 1 : m.nodes[static_cast<std::size_t>(n.parent)].cardinality;
        tan |= n.parent >= 0;
        for (int row = 0; row < 2 * pc; ++row) {
            std::vector<double> w(static_cast<std::size_t>(n.cardinality));
            double z = 0;
            for (auto& x : w) z += (x = u(rng));
            for (double x : w) n.cpt.push_back(x / z);
        }
    }
    m.kind = tan ? alarmrisk::BnKind::Tan : alarmrisk::BnKind::NaiveBayes;
    if (tan) {
        for (std::size_t i = 0; i < m.nodes.size(); ++i)
            if (m.nodes[i].parent >= 0) m.edges.push_back({m.nodes[i].parent, static_cast<int>(i), 0.0});
        m.root = order[0];
    }
    return m;
}

inline std::vector<int> random_evidence(std::mt19937_64& rng, const BnModel& m) {
    std::vector<int> ev(m.nodes.size(), -1);
    for (std::size_t i = 0; i < ev.size(); ++i)
        if (uniform_int(rng, 0, 1)) ev[i] = uniform_int(rng, 0, m.nodes[i].cardinality - 1);
    return ev;
}

// Class-dependent chain: x0 depends on the class, x_i on x_{i-1} and the class.
inline DiscreteDataset random_dataset(std::mt19937_64& rng, int features, std::size_t rows, int max_states = 3,
                                      double missing_rate = 0.0) {
    DiscreteDataset d;
    for (int i = 0; i < features; ++i) {
        d.features.push_back("f" + std::to_string(i));
        const int card = uniform_int(rng, 2, max_states);
        d.cardinality.push_back(card);
        std::vector<std::string> labels;
        for (int s = 0; s < card; ++s) labels.push_back("s" + std::to_string(s));
        d.state_labels.push_back(labels);
    }
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> strength(static_cast<std::size_t>(features));
    for (auto& s : strength) s = u(rng);
    for (std::size_t r = 0; r < rows; ++r) {
        const int y = u(rng) < 0.35;
        std::vector<int> x(static_cast<std::size_t>(features));
        for (int i = 0; i < features; ++i) {
            const int card = d.cardinality[static_cast<std::size_t>(i)];
            int v = uniform_int(rng, 0, card - 1);
            if (u(rng) < strength[static_cast<std::size_t>(i)]) {
                const int prev = i > 0 ? x[static_cast<std::size_t>(i - 1)] : 0;
                v = (prev + y) % card;
            }
            x[static_cast<std::size_t>(i)] = v;
        }
        for (auto& v : x)
            if (u(rng) < missing_rate) v = -1;
        d.x.push_back(x);
        d.y.push_back(y);
    }
    // both classes present
    d.y[0] = 0;
    d.y[1] = 1;
    return d;
}

inline std::vector<int> column(const DiscreteDataset& d, std::size_t j) {
    std::vector<int> c;
    for (const auto& row : d.x) c.push_back(row[j]);
    return c;
}

}  // namespace fixtures
