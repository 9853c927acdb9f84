#include "alarmrisk/service.hpp"

#include <algorithm>
#include <cmath>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/io_util.hpp"

namespace alarmrisk {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const FeatureSpec* find_spec(const std::string& name) {
    for (const auto& s : feature_catalogue())
        if (s.name == name) return &s;
    return nullptr;
}

bool known_feature(const BnModel& model, const std::string& name) {
    return model.discretization.contains(name) || find_spec(name) != nullptr;
}

int state_from_value(const BnNode& node, const json& v) {
    if (v.is_number_integer() || v.is_number_unsigned()) {
        const auto s = v.get<long long>();
        if (s < 0 || s >= node.cardinality)
            throw RequestError(400, "state " + std::to_string(s) + " out of range for '" + node.name + "' (0.." +
                                        std::to_string(node.cardinality - 1) + ")");
        return static_cast<int>(s);
    }
    if (v.is_string()) {
        const auto label = v.get<std::string>();
        const auto it = std::find(node.states.begin(), node.states.end(), label);
        if (it == node.states.end()) throw RequestError(400, "'" + label + "' is not a state of '" + node.name + "'");
        return static_cast<int>(it - node.states.begin());
    }
    throw RequestError(400, "evidence for '" + node.name + "' must be a state index or label");
}

bool is_unknown(const json& v) { return v.is_null() || (v.is_string() && v.get<std::string>() == "unknown"); }

const json& member_object(const json& req, const char* key) {
    static const json empty = json::object();
    if (!req.contains(key) || req.at(key).is_null()) return empty;
    if (!req.at(key).is_object()) throw RequestError(400, std::string("'") + key + "' must be an object");
    return req.at(key);
}

std::optional<double> raw_number(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return io::parse_finite(v.get<std::string>());
    return std::nullopt;
}

}  // namespace

ParsedEvidence parse_evidence(const BnModel& model, const json& request) {
    if (!request.is_null() && !request.is_object()) throw RequestError(400, "request body must be a JSON object");
    ParsedEvidence pe;
    pe.states.assign(model.nodes.size(), -1);
    const json req = request.is_null() ? json::object() : request;

    auto locate = [&](const std::string& name) -> int {
        const int i = model.index_of(name);
        if (i >= 0) return i;
        if (!known_feature(model, name)) throw RequestError(400, "unknown feature '" + name + "'");
        if (std::find(pe.ignored.begin(), pe.ignored.end(), name) == pe.ignored.end()) pe.ignored.push_back(name);
        return -1;
    };
    auto record = [&](int i, int s) {
        const auto& node = model.nodes[static_cast<std::size_t>(i)];
        pe.states[static_cast<std::size_t>(i)] = s;
        pe.used[node.name] = {{"state", s}, {"label", node.states[static_cast<std::size_t>(s)]}};
    };

    for (const auto& [name, v] : member_object(req, "evidence").items()) {
        const int i = locate(name);
        if (i < 0 || is_unknown(v)) continue;
        record(i, state_from_value(model.nodes[static_cast<std::size_t>(i)], v));
    }
    for (const auto& [name, v] : member_object(req, "raw").items()) {
        const int i = locate(name);
        if (i < 0 || v.is_null()) continue;
        if (pe.states[static_cast<std::size_t>(i)] >= 0)
            throw RequestError(400, "'" + name + "' given both as evidence and as a raw value");
        const auto& node = model.nodes[static_cast<std::size_t>(i)];
        if (model.discretization.contains(name)) {
            const auto x = raw_number(v);
            if (!x || !std::isfinite(*x)) throw RequestError(422, "raw value for '" + name + "' is not a finite number");
            record(i, model.discretization.state_of(name, *x));
        } else if (v.is_string()) {
            record(i, state_from_value(node, v));
        } else {
            // categorical raw values are 1-based codes
            const auto x = raw_number(v);
            if (!x || !std::isfinite(*x)) throw RequestError(422, "raw value for '" + name + "' is not a finite number");
            if (*x != std::floor(*x) || *x < 1 || *x > node.cardinality)
                throw RequestError(400, "code for '" + name + "' must be an integer in 1.." + std::to_string(node.cardinality));
            record(i, static_cast<int>(*x) - 1);
        }
    }
    for (std::size_t i = 0; i < model.nodes.size(); ++i)
        if (pe.states[i] < 0) pe.missing.push_back(model.nodes[i].name);
    return pe;
}

json predict_json(const ModelSnapshot& snap, const json& request) {
    const auto pe = parse_evidence(snap.bn, request);
    std::array<double, 2> post;
    try {
        post = posterior(snap.bn, pe.states);
    } catch (const DegenerateInputError& e) {
        throw RequestError(422, e.what());
    }
    return {{"p_error", post[1]},
            {"posterior", {{kClassLabels[0], post[0]}, {kClassLabels[1], post[1]}}},
            {"evidence_used", pe.used},
            {"missing_features", pe.missing},
            {"ignored_features", pe.ignored},
            {"model_version", snap.version}};
}

json whatif_json(const ModelSnapshot& snap, const json& request) {
    if (!request.is_null() && !request.is_object()) throw RequestError(400, "request body must be a JSON object");
    const json req = request.is_null() ? json::object() : request;
    json base = req.contains("base") && !req.at("base").is_null() ? req.at("base") : json::object();
    if (!base.is_object()) throw RequestError(400, "'base' must be an object");
    const json base_reply = predict_json(snap, base);
    const double base_p = base_reply.at("p_error").get<double>();

    json overrides = req.contains("overrides") && !req.at("overrides").is_null() ? req.at("overrides") : json::array();
    if (!overrides.is_array()) throw RequestError(400, "'overrides' must be an array");
    json results = json::array();
    for (const auto& o : overrides) {
        if (!o.is_object() || !o.contains("feature") || !o.at("feature").is_string())
            throw RequestError(400, "each override needs a 'feature' name");
        const auto feature = o.at("feature").get<std::string>();
        json variant = base;
        for (const char* key : {"evidence", "raw"})
            if (variant.contains(key) && variant.at(key).is_object()) variant[key].erase(feature);
        if (o.contains("state") && !is_unknown(o.at("state"))) variant["evidence"][feature] = o.at("state");
        else if (o.contains("raw") && !o.at("raw").is_null()) variant["raw"][feature] = o.at("raw");
        const json r = predict_json(snap, variant);
        const double p = r.at("p_error").get<double>();
        results.push_back({{"override", o}, {"p_error", p}, {"delta_vs_base", p - base_p}});
    }
    return {{"base", base_reply}, {"results", results}, {"model_version", snap.version}};
}

json predict_lr_json(const ModelSnapshot& snap, const json& request) {
    if (!snap.lr) throw RequestError(503, "no regression model loaded");
    if (!request.is_object()) throw RequestError(400, "request body must be a JSON object");
    const auto& lr = *snap.lr;
    const json& values = request.contains("values") ? request.at("values") : member_object(request, "raw");
    if (!values.is_object()) throw RequestError(400, "'values' must be an object");
    std::vector<double> row;
    for (const auto& f : lr.features) {
        if (!values.contains(f) || values.at(f).is_null())
            throw RequestError(400, "regression needs every selected feature; '" + f + "' is missing");
        const auto& v = values.at(f);
        std::optional<double> x;
        if (const auto* spec = find_spec(f); v.is_string() && spec) {
            const auto label = v.get<std::string>();
            const auto it = std::find(spec->states.begin(), spec->states.end(), label);
            if (it != spec->states.end()) x = static_cast<double>(it - spec->states.begin() + 1);
        }
        if (!x) x = raw_number(v);
        if (!x || !std::isfinite(*x)) throw RequestError(422, "value for '" + f + "' is not a finite number");
        row.push_back(*x);
    }
    json ignored = json::array();
    for (const auto& [name, v] : values.items())
        if (std::find(lr.features.begin(), lr.features.end(), name) == lr.features.end()) ignored.push_back(name);
    return {{"p_error", predict_proba(lr, row)},
            {"features_used", lr.features},
            {"ignored_features", ignored},
            {"model_version", snap.version}};
}

BnModel load_bn_model(const fs::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return bn_model_from_json(j);
}

LrModel load_lr_model(const fs::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    if (j.contains("model") && j.at("model").is_object()) return lr_model_from_json(j.at("model"));
    return lr_model_from_json(j);
}

std::string model_version(const fs::path& bn, const std::optional<fs::path>& lr) {
    std::string text = io::read_file(bn);
    if (lr) text += io::read_file(*lr);
    return io::hex64(io::fnv1a64(text));
}

void RiskService::load(const fs::path& bn_path, const std::optional<fs::path>& lr_path) {
    auto snap = std::make_shared<ModelSnapshot>();
    snap->bn = load_bn_model(bn_path);
    if (lr_path) snap->lr = load_lr_model(*lr_path);
    snap->version = model_version(bn_path, lr_path);
    std::lock_guard<std::mutex> lock(mutex_);
    snap_ = std::move(snap);
    bn_path_ = bn_path;
    lr_path_ = lr_path;
    ++loads_;
}

void RiskService::set_snapshot(std::shared_ptr<const ModelSnapshot> snap) {
    std::lock_guard<std::mutex> lock(mutex_);
    snap_ = std::move(snap);
}

std::shared_ptr<const ModelSnapshot> RiskService::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return snap_;
}

template <class F>
Reply RiskService::guarded(const std::string& body, F&& handler) const {
    const auto snap = snapshot();
    auto fail = [&](int status, const std::string& msg) {
        Reply r{status, {{"error", msg}}};
        r.body["model_version"] = snap ? json(snap->version) : json(nullptr);
        return r;
    };
    if (!snap) return fail(503, "no model loaded");
    try {
        const json req = body.empty() ? json::object() : json::parse(body);
        return {200, handler(*snap, req)};
    } catch (const RequestError& e) {
        return fail(e.status(), e.what());
    } catch (const json::exception& e) {
        return fail(400, std::string("malformed request: ") + e.what());
    } catch (const InputError& e) {
        return fail(400, e.what());
    } catch (const DegenerateInputError& e) {
        return fail(422, e.what());
    } catch (const std::exception& e) {
        return fail(500, e.what());
    }
}

Reply RiskService::health() const {
    const auto snap = snapshot();
    return {200,
            {{"status", "ok"},
             {"model_loaded", snap != nullptr},
             {"model_version", snap ? json(snap->version) : json(nullptr)}}};
}

Reply RiskService::model() const {
    return guarded("", [](const ModelSnapshot& s, const json&) {
        json j = model_summary(s.bn);
        j["lr_features"] = s.lr ? json(s.lr->features) : json(nullptr);
        j["model_version"] = s.version;
        return j;
    });
}

Reply RiskService::predict(const std::string& body) const { return guarded(body, predict_json); }
Reply RiskService::whatif(const std::string& body) const { return guarded(body, whatif_json); }
Reply RiskService::predict_lr(const std::string& body) const { return guarded(body, predict_lr_json); }

Reply RiskService::reload(const std::string& body) {
    std::optional<fs::path> bn, lr;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        bn = bn_path_;
        lr = lr_path_;
    }
    try {
        if (!body.empty()) {
            const auto j = json::parse(body);
            if (!j.is_object()) return {400, {{"error", "request body must be a JSON object"}}};
            if (j.contains("model")) bn = fs::path(j.at("model").get<std::string>());
            if (j.contains("lr_model"))
                lr = j.at("lr_model").is_null() ? std::nullopt : std::optional<fs::path>(j.at("lr_model").get<std::string>());
        }
    } catch (const json::exception& e) {
        return {400, {{"error", std::string("malformed request: ") + e.what()}}};
    }
    if (!bn) return {400, {{"error", "no model path known; pass {\"model\": path}"}}};
    try {
        load(*bn, lr);
    } catch (const std::exception& e) {
        const auto snap = snapshot();
        return {500, {{"error", e.what()}, {"model_version", snap ? json(snap->version) : json(nullptr)}}};
    }
    return {200, {{"status", "reloaded"}, {"model_version", snapshot()->version}}};
}

}  // namespace alarmrisk
