#include "alarmrisk/dataset.hpp"

#include <algorithm>

#include "alarmrisk/errors.hpp"

namespace alarmrisk {

const std::vector<FeatureSpec>& feature_catalogue() {
    static const std::vector<FeatureSpec> specs = {
        {"group", FeatureKind::Categorical, {"G1", "G2", "G3", "G4"}},
        {"scenario", FeatureKind::Categorical, {"S1", "S2", "S3"}},
        {"reaction_time", FeatureKind::Continuous, {}},
        {"response_time", FeatureKind::Continuous, {}},
        {"recovery_time", FeatureKind::Continuous, {}},
        {"accuracy", FeatureKind::Continuous, {}},
        {"alarms_silenced", FeatureKind::Continuous, {}},
        {"acknowledgements", FeatureKind::Continuous, {}},
        {"mimics_opened", FeatureKind::Continuous, {}},
        {"procedures_opened", FeatureKind::Continuous, {}},
        {"num_alarms", FeatureKind::Continuous, {}},
        {"tlx", FeatureKind::Continuous, {}},
        {"sart", FeatureKind::Continuous, {}},
        {"spam", FeatureKind::Continuous, {}},
        {"familiarity", FeatureKind::Continuous, {}},
        {"training", FeatureKind::Continuous, {}},
    };
    return specs;
}

const FeatureSpec& feature_spec(const std::string& name) {
    for (const auto& s : feature_catalogue())
        if (s.name == name) return s;
    throw ContractError("unknown feature '" + name + "'");
}

std::optional<double> feature_value(const FeatureVector& fv, const std::string& name) {
    auto opt_int = [](const std::optional<int>& v) -> std::optional<double> {
        return v ? std::optional<double>(*v) : std::nullopt;
    };
    if (name == "group") return code(fv.group);
    if (name == "scenario") return code(fv.scenario);
    if (name == "reaction_time") return fv.reaction_time_s;
    if (name == "response_time") return fv.response_time_s;
    if (name == "recovery_time") return fv.recovery_time_s;
    if (name == "accuracy") return fv.accuracy_mse;
    if (name == "alarms_silenced") return fv.alarms_silenced;
    if (name == "acknowledgements") return fv.acknowledgements;
    if (name == "mimics_opened") return fv.mimics_opened;
    if (name == "procedures_opened") return opt_int(fv.procedures_opened);
    if (name == "num_alarms") return fv.num_alarms;
    if (name == "tlx") return fv.subjective.tlx;
    if (name == "sart") return fv.subjective.sart;
    if (name == "spam") return fv.subjective.spam;
    if (name == "familiarity") return fv.subjective.familiarity;
    if (name == "training") return fv.subjective.training;
    throw ContractError("unknown feature '" + name + "'");
}

FeatureSet parse_feature_set(const std::string& text) {
    if (text == "behavioural") return FeatureSet::Behavioural;
    if (text == "behavioural+subjective") return FeatureSet::BehaviouralSubjective;
    throw ConfigError("feature set must be 'behavioural' or 'behavioural+subjective', got '" + text + "'");
}

std::string to_string(FeatureSet s) {
    return s == FeatureSet::Behavioural ? "behavioural" : "behavioural+subjective";
}

ModelFamily parse_family(const std::string& text) {
    if (text == "nb") return ModelFamily::NaiveBayes;
    if (text == "tan") return ModelFamily::Tan;
    if (text == "lr") return ModelFamily::Logistic;
    if (text == "lr-stepwise") return ModelFamily::LogisticStepwise;
    throw ConfigError("family must be nb, tan, lr or lr-stepwise, got '" + text + "'");
}

std::string to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::NaiveBayes: return "nb";
        case ModelFamily::Tan: return "tan";
        case ModelFamily::Logistic: return "lr";
        case ModelFamily::LogisticStepwise: return "lr-stepwise";
    }
    return "?";
}

bool is_bayes_family(ModelFamily f) { return f == ModelFamily::NaiveBayes || f == ModelFamily::Tan; }

std::vector<std::string> family_features(ModelFamily family, FeatureSet set) {
    std::vector<std::string> out = {"group",         "scenario",     "reaction_time", "response_time",
                                    "acknowledgements", "mimics_opened", "num_alarms"};
    if (is_bayes_family(family)) {
        out.push_back("procedures_opened");
        out.push_back("alarms_silenced");
        out.push_back("accuracy");
    }
    if (set == FeatureSet::BehaviouralSubjective) {
        for (const char* s : {"tlx", "sart", "spam", "familiarity", "training"}) out.emplace_back(s);
    }
    return out;
}

std::size_t NumericTable::column(const std::string& name) const {
    auto it = std::find(features.begin(), features.end(), name);
    if (it == features.end()) throw ContractError("table has no feature '" + name + "'");
    return static_cast<std::size_t>(it - features.begin());
}

NumericTable NumericTable::subset(std::span<const std::size_t> idx) const {
    NumericTable out;
    out.features = features;
    out.x.reserve(idx.size());
    for (auto i : idx) {
        out.x.push_back(x[i]);
        out.y.push_back(y[i]);
        out.group.push_back(group[i]);
        out.scenario.push_back(scenario[i]);
    }
    return out;
}

NumericTable NumericTable::complete_cases(const std::vector<std::string>& cols) const {
    std::vector<std::size_t> colidx;
    for (const auto& c : cols) colidx.push_back(column(c));
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < rows(); ++r) {
        bool ok = true;
        for (auto c : colidx) ok = ok && !is_missing(x[r][c]);
        if (ok) keep.push_back(r);
    }
    return subset(keep);
}

NumericTable make_table(const std::vector<FeatureVector>& rows, const std::vector<std::string>& features) {
    NumericTable t;
    t.features = features;
    for (const auto& f : features) feature_spec(f);
    for (const auto& r : rows) {
        std::vector<double> xr;
        xr.reserve(features.size());
        for (const auto& f : features) xr.push_back(feature_value(r, f).value_or(kMissing));
        t.x.push_back(std::move(xr));
        t.y.push_back(r.error ? 1 : 0);
        t.group.push_back(r.group);
        t.scenario.push_back(r.scenario);
    }
    return t;
}

std::size_t DiscreteDataset::index_of(const std::string& name) const {
    auto it = std::find(features.begin(), features.end(), name);
    if (it == features.end()) throw ContractError("dataset has no feature '" + name + "'");
    return static_cast<std::size_t>(it - features.begin());
}

}  // namespace alarmrisk
