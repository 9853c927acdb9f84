#include "alarmrisk/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/io_util.hpp"

namespace alarmrisk {

using nlohmann::json;

double entropy_bits(std::span<const double> counts) {
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (n <= 0) return 0.0;
    double h = 0;
    for (double c : counts)
        if (c > 0) h -= (c / n) * std::log2(c / n);
    return h;
}

namespace {

struct ValueGroup {
    double value;
    std::vector<double> counts;  // per class
};

int classes_present(const std::vector<double>& counts) {
    return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }));
}

bool pure_same_class(const ValueGroup& a, const ValueGroup& b) {
    if (classes_present(a.counts) != 1 || classes_present(b.counts) != 1) return false;
    for (std::size_t k = 0; k < a.counts.size(); ++k)
        if ((a.counts[k] > 0) != (b.counts[k] > 0)) return false;
    return true;
}

void split(const std::vector<ValueGroup>& groups, std::size_t lo, std::size_t hi, int n_classes,
           std::vector<double>& cuts) {
    if (hi - lo < 2) return;
    std::vector<double> total(n_classes, 0.0);
    for (std::size_t g = lo; g < hi; ++g)
        for (int k = 0; k < n_classes; ++k) total[k] += groups[g].counts[k];
    const double n = std::accumulate(total.begin(), total.end(), 0.0);
    const double ent = entropy_bits(total);

    std::vector<double> left(n_classes, 0.0), right(n_classes);
    std::size_t best = 0;
    double best_e = 0;
    std::vector<double> best_left, best_right;
    for (std::size_t g = lo + 1; g < hi; ++g) {
        for (int k = 0; k < n_classes; ++k) left[k] += groups[g - 1].counts[k];
        if (pure_same_class(groups[g - 1], groups[g])) continue;
        for (int k = 0; k < n_classes; ++k) right[k] = total[k] - left[k];
        const double n1 = std::accumulate(left.begin(), left.end(), 0.0);
        const double e = (n1 / n) * entropy_bits(left) + ((n - n1) / n) * entropy_bits(right);
        if (best == 0 || e < best_e - kCutTieTolerance) {
            best = g;
            best_e = e;
            best_left = left;
            best_right = right;
        }
    }
    if (best == 0) return;

    const double gain = ent - best_e;
    const double k = classes_present(total);
    const double k1 = classes_present(best_left);
    const double k2 = classes_present(best_right);
    const double delta = std::log2(std::pow(3.0, k) - 2.0) -
                         (k * ent - k1 * entropy_bits(best_left) - k2 * entropy_bits(best_right));
    if (!(gain > (std::log2(n - 1.0) + delta) / n)) return;

    const double a = groups[best - 1].value, b = groups[best].value;
    cuts.push_back(a + (b - a) / 2.0);
    split(groups, lo, best, n_classes, cuts);
    split(groups, best, hi, n_classes, cuts);
}

}  // namespace

std::vector<double> fit_mdl(std::span<const double> values, std::span<const int> labels, int n_classes) {
    if (values.size() != labels.size()) throw ContractError("fit_mdl: values and labels differ in length");
    if (values.empty()) throw ContractError("fit_mdl: needs at least one value");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw InputError("fit_mdl: non-finite value");
        if (labels[i] < 0 || labels[i] >= n_classes) throw ContractError("fit_mdl: label out of range");
    }
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });

    std::vector<ValueGroup> groups;
    for (auto i : order) {
        if (groups.empty() || groups.back().value != values[i])
            groups.push_back({values[i], std::vector<double>(n_classes, 0.0)});
        groups.back().counts[labels[i]] += 1.0;
    }
    std::vector<double> cuts;
    split(groups, 0, groups.size(), n_classes, cuts);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

int interval_index(const std::vector<double>& cuts, double value) {
    return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

std::vector<std::string> interval_labels(const std::vector<double>& cuts) {
    std::vector<std::string> out;
    std::string lo = "-inf";
    for (std::size_t i = 0; i <= cuts.size(); ++i) {
        const std::string hi = i < cuts.size() ? io::format_double(cuts[i]) : "+inf";
        out.push_back((i == 0 ? "(" : "[") + lo + ", " + hi + ")");
        lo = hi;
    }
    return out;
}

DiscretizationMap DiscretizationMap::fit(const NumericTable& table, const std::vector<std::string>& features) {
    DiscretizationMap map;
    for (const auto& f : features) {
        if (feature_spec(f).kind != FeatureKind::Continuous) continue;
        const auto c = table.column(f);
        std::vector<double> v;
        std::vector<int> y;
        for (std::size_t r = 0; r < table.rows(); ++r) {
            if (is_missing(table.x[r][c])) continue;
            v.push_back(table.x[r][c]);
            y.push_back(table.y[r]);
        }
        FeatureCuts fc;
        if (!v.empty()) fc.cuts = fit_mdl(v, y);
        fc.no_informative_cut = fc.cuts.empty();
        map.set(f, std::move(fc));
    }
    return map;
}

void DiscretizationMap::set(const std::string& feature, FeatureCuts cuts) {
    for (std::size_t i = 1; i < cuts.cuts.size(); ++i)
        if (!(cuts.cuts[i] > cuts.cuts[i - 1])) throw ContractError("cut points must be strictly increasing");
    cuts.no_informative_cut = cuts.cuts.empty();
    cuts_[feature] = std::move(cuts);
}

const FeatureCuts& DiscretizationMap::at(const std::string& feature) const {
    auto it = cuts_.find(feature);
    if (it == cuts_.end()) throw ContractError("discretization map has no feature '" + feature + "'");
    return it->second;
}

DiscreteDataset DiscretizationMap::apply(const NumericTable& table, const std::vector<std::string>& features) const {
    DiscreteDataset d;
    std::vector<std::size_t> cols;
    std::vector<const FeatureCuts*> fcs;
    for (const auto& f : features) {
        const auto& spec = feature_spec(f);
        const auto col = table.column(f);
        if (spec.kind == FeatureKind::Categorical) {
            d.features.push_back(f);
            d.cardinality.push_back(static_cast<int>(spec.states.size()));
            d.state_labels.push_back(spec.states);
            cols.push_back(col);
            fcs.push_back(nullptr);
            continue;
        }
        const auto& fc = at(f);
        if (fc.no_informative_cut) continue;
        d.features.push_back(f);
        d.cardinality.push_back(static_cast<int>(fc.cuts.size()) + 1);
        d.state_labels.push_back(interval_labels(fc.cuts));
        cols.push_back(col);
        fcs.push_back(&fc);
    }
    d.y = table.y;
    d.x.reserve(table.rows());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        std::vector<int> row(cols.size());
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const double v = table.x[r][cols[k]];
            if (is_missing(v)) row[k] = -1;
            else if (fcs[k]) row[k] = interval_index(fcs[k]->cuts, v);
            else {
                row[k] = static_cast<int>(v) - 1;
                if (row[k] < 0 || row[k] >= d.cardinality[k])
                    throw ContractError("categorical code out of range for '" + d.features[k] + "'");
            }
        }
        d.x.push_back(std::move(row));
    }
    return d;
}

int DiscretizationMap::state_of(const std::string& feature, double value) const {
    const auto& fc = at(feature);
    if (fc.no_informative_cut) throw ContractError("feature '" + feature + "' has no informative cut");
    if (!std::isfinite(value)) throw InputError("non-finite value for '" + feature + "'");
    return interval_index(fc.cuts, value);
}

json DiscretizationMap::to_json() const {
    json j = json::object();
    for (const auto& [name, fc] : cuts_) j[name] = {{"cuts", fc.cuts}, {"no_informative_cut", fc.no_informative_cut}};
    return j;
}

DiscretizationMap DiscretizationMap::from_json(const json& j) {
    DiscretizationMap map;
    for (const auto& [name, v] : j.items()) {
        FeatureCuts fc;
        fc.cuts = v.at("cuts").get<std::vector<double>>();
        map.set(name, std::move(fc));
    }
    return map;
}

}  // namespace alarmrisk
