#include "alarmrisk/bayes_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <tuple>

#include "alarmrisk/errors.hpp"

namespace alarmrisk {

using nlohmann::json;

int BnModel::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].name == name) return static_cast<int>(i);
    return -1;
}

int BnModel::parent_cardinality(std::size_t node) const {
    const int p = nodes[node].parent;
    return p < 0 ? 1 : nodes[static_cast<std::size_t>(p)].cardinality;
}

double BnModel::cpt(std::size_t node, int cls, int parent_state, int state) const {
    const auto& n = nodes[node];
    const int pc = parent_cardinality(node);
    return n.cpt[static_cast<std::size_t>((cls * pc + parent_state) * n.cardinality + state)];
}

namespace {

void check_dataset(const DiscreteDataset& data) {
    if (data.rows() == 0) throw ContractError("cannot fit a classifier on an empty dataset");
    if (data.x.size() != data.rows()) throw ContractError("dataset rows and labels differ in length");
    for (std::size_t r = 0; r < data.rows(); ++r) {
        if (data.y[r] < 0 || data.y[r] >= kClassStates) throw ContractError("class label out of range");
        for (std::size_t f = 0; f < data.feature_count(); ++f) {
            const int s = data.x[r][f];
            if (s < -1 || s >= data.cardinality[f])
                throw ContractError("state out of range for feature '" + data.features[f] + "'");
        }
    }
}

BnModel skeleton(const DiscreteDataset& data, BnKind kind, double alpha) {
    check_dataset(data);
    if (!(alpha >= 0)) throw ContractError("smoothing alpha must be >= 0");
    BnModel m;
    m.kind = kind;
    m.alpha = alpha;
    std::array<double, 2> n{0, 0};
    for (int y : data.y) n[static_cast<std::size_t>(y)] += 1;
    const double total = n[0] + n[1];
    for (int c = 0; c < kClassStates; ++c) m.prior[c] = (n[c] + alpha) / (total + kClassStates * alpha);
    if (n[0] == 0 || n[1] == 0)
        m.warnings.push_back("degenerate prior: training data holds a single class");
    for (std::size_t f = 0; f < data.feature_count(); ++f) {
        BnNode node;
        node.name = data.features[f];
        node.cardinality = data.cardinality[f];
        node.states = data.state_labels.size() > f ? data.state_labels[f] : std::vector<std::string>{};
        if (node.states.empty())
            for (int s = 0; s < node.cardinality; ++s) node.states.push_back(std::to_string(s));
        m.nodes.push_back(std::move(node));
    }
    return m;
}

void estimate_cpts(BnModel& m, const DiscreteDataset& data) {
    for (std::size_t f = 0; f < m.nodes.size(); ++f) {
        auto& node = m.nodes[f];
        const int pc = m.parent_cardinality(f);
        const int card = node.cardinality;
        std::vector<double> counts(static_cast<std::size_t>(kClassStates * pc * card), 0.0);
        for (std::size_t r = 0; r < data.rows(); ++r) {
            const int s = data.x[r][f];
            if (s < 0) continue;
            int ps = 0;
            if (node.parent >= 0) {
                ps = data.x[r][static_cast<std::size_t>(node.parent)];
                if (ps < 0) continue;
            }
            counts[static_cast<std::size_t>((data.y[r] * pc + ps) * card + s)] += 1.0;
        }
        node.cpt.assign(counts.size(), 0.0);
        for (int row = 0; row < kClassStates * pc; ++row) {
            const auto base = static_cast<std::size_t>(row * card);
            double n = 0;
            for (int s = 0; s < card; ++s) n += counts[base + s];
            const double denom = n + m.alpha * card;
            for (int s = 0; s < card; ++s)
                node.cpt[base + s] = denom > 0 ? (counts[base + s] + m.alpha) / denom : 1.0 / card;
        }
    }
}

std::vector<int> column(const DiscreteDataset& data, std::size_t f) {
    std::vector<int> out(data.rows());
    for (std::size_t r = 0; r < data.rows(); ++r) out[r] = data.x[r][f];
    return out;
}

}  // namespace

BnModel fit_nb(const DiscreteDataset& data, const BnFitOptions& options) {
    BnModel m = skeleton(data, BnKind::NaiveBayes, options.alpha);
    estimate_cpts(m, data);
    return m;
}

double mutual_information_bits(std::span<const int> a, int card_a, std::span<const int> b, int card_b) {
    if (a.size() != b.size()) throw ContractError("mutual information: length mismatch");
    std::vector<double> joint(static_cast<std::size_t>(card_a * card_b), 0.0);
    std::vector<double> pa(static_cast<std::size_t>(card_a), 0.0), pb(static_cast<std::size_t>(card_b), 0.0);
    double n = 0;
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (a[r] < 0 || b[r] < 0) continue;
        joint[static_cast<std::size_t>(a[r] * card_b + b[r])] += 1;
        pa[static_cast<std::size_t>(a[r])] += 1;
        pb[static_cast<std::size_t>(b[r])] += 1;
        n += 1;
    }
    if (n == 0) return 0.0;
    double mi = 0;
    for (int i = 0; i < card_a; ++i)
        for (int j = 0; j < card_b; ++j) {
            const double nij = joint[static_cast<std::size_t>(i * card_b + j)];
            if (nij > 0) mi += (nij / n) * std::log2(nij * n / (pa[i] * pb[j]));
        }
    return std::max(mi, 0.0);
}

double conditional_mutual_information_bits(const DiscreteDataset& data, std::size_t i, std::size_t j) {
    const int ci = data.cardinality[i], cj = data.cardinality[j];
    std::vector<double> nabc(static_cast<std::size_t>(kClassStates * ci * cj), 0.0);
    std::vector<double> nac(static_cast<std::size_t>(kClassStates * ci), 0.0);
    std::vector<double> nbc(static_cast<std::size_t>(kClassStates * cj), 0.0);
    std::array<double, 2> nc{0, 0};
    double n = 0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const int a = data.x[r][i], b = data.x[r][j], c = data.y[r];
        if (a < 0 || b < 0) continue;
        nabc[static_cast<std::size_t>((c * ci + a) * cj + b)] += 1;
        nac[static_cast<std::size_t>(c * ci + a)] += 1;
        nbc[static_cast<std::size_t>(c * cj + b)] += 1;
        nc[static_cast<std::size_t>(c)] += 1;
        n += 1;
    }
    if (n == 0) return 0.0;
    double cmi = 0;
    for (int c = 0; c < kClassStates; ++c)
        for (int a = 0; a < ci; ++a)
            for (int b = 0; b < cj; ++b) {
                const double v = nabc[static_cast<std::size_t>((c * ci + a) * cj + b)];
                if (v > 0)
                    cmi += (v / n) * std::log2(v * nc[c] / (nac[static_cast<std::size_t>(c * ci + a)] *
                                                             nbc[static_cast<std::size_t>(c * cj + b)]));
            }
    return std::max(cmi, 0.0);
}

std::vector<std::vector<double>> cmi_matrix(const DiscreteDataset& data, Execution exec) {
    const std::size_t f = data.feature_count();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < f; ++i)
        for (std::size_t j = i + 1; j < f; ++j) pairs.emplace_back(i, j);
    std::vector<double> values(pairs.size());
    for_each_index(pairs.size(), exec, [&](std::size_t k) {
        values[k] = conditional_mutual_information_bits(data, pairs[k].first, pairs[k].second);
    });
    std::vector<std::vector<double>> w(f, std::vector<double>(f, 0.0));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        w[i][j] = w[j][i] = values[k];
    }
    return w;
}

std::vector<std::pair<int, int>> maximum_spanning_tree(const std::vector<std::vector<double>>& weights,
                                                       const std::vector<std::string>& names) {
    const int f = static_cast<int>(weights.size());
    struct Edge {
        double w;
        int a, b;
    };
    std::vector<Edge> edges;
    for (int i = 0; i < f; ++i)
        for (int j = i + 1; j < f; ++j) edges.push_back({weights[i][j], i, j});
    auto key = [&](const Edge& e) {
        const auto& x = names[e.a];
        const auto& y = names[e.b];
        return x < y ? std::tie(x, y) : std::tie(y, x);
    };
    std::stable_sort(edges.begin(), edges.end(), [&](const Edge& l, const Edge& r) {
        if (l.w != r.w) return l.w > r.w;
        return key(l) < key(r);
    });
    std::vector<int> parent(static_cast<std::size_t>(f));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::pair<int, int>> tree;
    for (const auto& e : edges) {
        const int ra = find(e.a), rb = find(e.b);
        if (ra == rb) continue;
        parent[ra] = rb;
        tree.emplace_back(e.a, e.b);
        if (static_cast<int>(tree.size()) == f - 1) break;
    }
    return tree;
}

MiReport mutual_information(const DiscreteDataset& data) {
    MiReport rep;
    std::vector<double> counts(kClassStates, 0.0);
    for (int y : data.y) counts[static_cast<std::size_t>(y)] += 1;
    rep.h_error_bits = entropy_bits(counts);
    for (std::size_t f = 0; f < data.feature_count(); ++f) {
        const auto col = column(data, f);
        MiEntry e;
        e.feature = data.features[f];
        e.mi_bits = mutual_information_bits(col, data.cardinality[f], data.y, kClassStates);
        e.observed = static_cast<std::size_t>(std::count_if(col.begin(), col.end(), [](int s) { return s >= 0; }));
        rep.entries.push_back(e);
    }
    std::stable_sort(rep.entries.begin(), rep.entries.end(), [](const MiEntry& a, const MiEntry& b) {
        if (a.mi_bits != b.mi_bits) return a.mi_bits > b.mi_bits;
        return a.feature < b.feature;
    });
    return rep;
}

BnModel fit_tan(const DiscreteDataset& data, const BnFitOptions& options) {
    if (data.feature_count() == 0) throw ContractError("TAN needs at least one feature");
    BnModel m = skeleton(data, BnKind::Tan, options.alpha);
    const auto f = data.feature_count();

    if (options.root) {
        m.root = m.index_of(*options.root);
        if (m.root < 0) throw ContractError("TAN root '" + *options.root + "' is not a feature");
    } else {
        double best = -1;
        for (std::size_t i = 0; i < f; ++i) {
            const double mi = mutual_information_bits(column(data, i), data.cardinality[i], data.y, kClassStates);
            if (mi > best || (mi == best && data.features[i] < data.features[static_cast<std::size_t>(m.root)])) {
                best = mi;
                m.root = static_cast<int>(i);
            }
        }
    }

    const auto weights = cmi_matrix(data, options.exec);
    const auto tree = maximum_spanning_tree(weights, data.features);
    std::vector<std::vector<int>> adj(f);
    for (auto [a, b] : tree) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    std::vector<bool> seen(f, false);
    std::queue<int> frontier;
    frontier.push(m.root);
    seen[static_cast<std::size_t>(m.root)] = true;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (seen[static_cast<std::size_t>(v)]) continue;
            seen[static_cast<std::size_t>(v)] = true;
            m.nodes[static_cast<std::size_t>(v)].parent = u;
            m.edges.push_back({u, v, weights[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]});
            frontier.push(v);
        }
    }
    estimate_cpts(m, data);
    return m;
}

std::array<double, 2> posterior(const BnModel& model, std::span<const int> evidence) {
    const auto f = model.nodes.size();
    if (evidence.size() != f) throw ContractError("evidence length does not match the model's features");
    for (std::size_t i = 0; i < f; ++i)
        if (evidence[i] < -1 || evidence[i] >= model.nodes[i].cardinality)
            throw ContractError("evidence state " + std::to_string(evidence[i]) + " out of range for '" +
                                model.nodes[i].name + "'");

    // Children lists and an order in which every child precedes its parent.
    std::vector<std::vector<std::size_t>> children(f);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < f; ++i)
        if (model.nodes[i].parent >= 0) children[static_cast<std::size_t>(model.nodes[i].parent)].push_back(i);
        else order.push_back(i);
    for (std::size_t k = 0; k < order.size(); ++k)
        for (auto c : children[order[k]]) order.push_back(c);
    if (order.size() != f) throw ContractError("feature parents do not form a forest");

    std::array<double, 2> joint{};
    std::vector<std::vector<double>> lambda(f);
    for (int c = 0; c < kClassStates; ++c) {
        double like = 1.0;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const auto i = *it;
            const auto& node = model.nodes[i];
            auto& lam = lambda[i];
            lam.assign(static_cast<std::size_t>(node.cardinality), 1.0);
            if (evidence[i] >= 0)
                for (int s = 0; s < node.cardinality; ++s)
                    if (s != evidence[i]) lam[static_cast<std::size_t>(s)] = 0.0;
            for (auto ch : children[i]) {
                const auto& child = model.nodes[ch];
                for (int s = 0; s < node.cardinality; ++s) {
                    double msg = 0;
                    for (int t = 0; t < child.cardinality; ++t)
                        msg += model.cpt(ch, c, s, t) * lambda[ch][static_cast<std::size_t>(t)];
                    lam[static_cast<std::size_t>(s)] *= msg;
                }
            }
            if (node.parent < 0) {
                double sum = 0;
                for (int s = 0; s < node.cardinality; ++s) sum += model.cpt(i, c, 0, s) * lam[static_cast<std::size_t>(s)];
                like *= sum;
            }
        }
        joint[static_cast<std::size_t>(c)] = model.prior[static_cast<std::size_t>(c)] * like;
    }
    const double z = joint[0] + joint[1];
    if (!(z > 0)) throw DegenerateInputError("evidence has zero probability under the model");
    return {joint[0] / z, joint[1] / z};
}

std::vector<int> evidence_vector(const BnModel& model, const std::map<std::string, int>& by_name) {
    std::vector<int> ev(model.nodes.size(), -1);
    for (const auto& [name, state] : by_name) {
        const int i = model.index_of(name);
        if (i < 0) throw ContractError("model has no feature '" + name + "'");
        ev[static_cast<std::size_t>(i)] = state;
    }
    return ev;
}

json to_json(const BnModel& model) {
    json nodes = json::array();
    for (const auto& n : model.nodes) {
        nodes.push_back({{"name", n.name},
                         {"states", n.states},
                         {"parent", n.parent < 0 ? json(nullptr) : json(model.nodes[static_cast<std::size_t>(n.parent)].name)},
                         {"cpt", n.cpt}});
    }
    json edges = json::array();
    for (const auto& e : model.edges)
        edges.push_back({{"from", model.nodes[static_cast<std::size_t>(e.from)].name},
                         {"to", model.nodes[static_cast<std::size_t>(e.to)].name},
                         {"cmi_bits", e.cmi}});
    return {{"format", "alarmrisk.bn"},
            {"version", 1},
            {"kind", model.kind == BnKind::Tan ? "tan" : "nb"},
            {"alpha", model.alpha},
            {"class", {{"name", "Error"}, {"states", kClassLabels}, {"prior", model.prior}}},
            {"nodes", nodes},
            {"edges", edges},
            {"root", model.root < 0 ? json(nullptr) : json(model.nodes[static_cast<std::size_t>(model.root)].name)},
            {"discretization", model.discretization.to_json()},
            {"warnings", model.warnings}};
}

BnModel bn_model_from_json(const json& j) {
    try {
        if (j.at("format") != "alarmrisk.bn") throw InputError("not a Bayesian-network model document");
        if (j.at("version").get<int>() != 1) throw InputError("unsupported model version");
        BnModel m;
        m.kind = j.at("kind") == "tan" ? BnKind::Tan : BnKind::NaiveBayes;
        m.alpha = j.at("alpha").get<double>();
        const auto prior = j.at("class").at("prior").get<std::vector<double>>();
        if (prior.size() != 2) throw InputError("class prior must have two entries");
        m.prior = {prior[0], prior[1]};
        std::vector<std::string> parent_names;
        for (const auto& n : j.at("nodes")) {
            BnNode node;
            node.name = n.at("name").get<std::string>();
            node.states = n.at("states").get<std::vector<std::string>>();
            node.cardinality = static_cast<int>(node.states.size());
            node.cpt = n.at("cpt").get<std::vector<double>>();
            parent_names.push_back(n.at("parent").is_null() ? "" : n.at("parent").get<std::string>());
            m.nodes.push_back(std::move(node));
        }
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            if (parent_names[i].empty()) continue;
            m.nodes[i].parent = m.index_of(parent_names[i]);
            if (m.nodes[i].parent < 0) throw InputError("unknown parent '" + parent_names[i] + "'");
        }
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            const auto expected = static_cast<std::size_t>(kClassStates * m.parent_cardinality(i) * m.nodes[i].cardinality);
            if (m.nodes[i].cpt.size() != expected) throw InputError("CPT size mismatch for '" + m.nodes[i].name + "'");
        }
        for (const auto& e : j.at("edges"))
            m.edges.push_back({m.index_of(e.at("from").get<std::string>()), m.index_of(e.at("to").get<std::string>()),
                               e.at("cmi_bits").get<double>()});
        if (!j.at("root").is_null()) m.root = m.index_of(j.at("root").get<std::string>());
        m.discretization = DiscretizationMap::from_json(j.at("discretization"));
        if (j.contains("warnings")) m.warnings = j.at("warnings").get<std::vector<std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
}

json model_summary(const BnModel& model) {
    json features = json::array();
    for (const auto& n : model.nodes) {
        json f = {{"name", n.name},
                  {"states", n.states},
                  {"parent", n.parent < 0 ? json(nullptr) : json(model.nodes[static_cast<std::size_t>(n.parent)].name)}};
        if (model.discretization.contains(n.name)) f["cuts"] = model.discretization.at(n.name).cuts;
        features.push_back(f);
    }
    json dropped = json::array();
    for (const auto& [name, fc] : model.discretization.entries())
        if (fc.no_informative_cut) dropped.push_back(name);
    return {{"kind", model.kind == BnKind::Tan ? "tan" : "nb"},
            {"class", {{"name", "Error"}, {"states", kClassLabels}, {"prior", model.prior}}},
            {"features", features},
            {"dropped_features", dropped}};
}

}  // namespace alarmrisk
