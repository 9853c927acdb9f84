#include "alarmrisk/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/features.hpp"
#include "alarmrisk/group_stats.hpp"
#include "alarmrisk/ingest.hpp"
#include "alarmrisk/io_util.hpp"
#include "alarmrisk/synthetic.hpp"

namespace alarmrisk {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSubjective = {"tlx", "sart", "spam", "familiarity", "training"};

bool is_subjective(const std::string& f) {
    return std::find(kSubjective.begin(), kSubjective.end(), f) != kSubjective.end();
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_artifact(const fs::path& path, const std::string& content, CommandResult& res) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    io::write_file_atomic(path, content);
    res.written.push_back(path);
}

void write_json(const fs::path& path, const json& j, CommandResult& res) { write_artifact(path, dump_artifact(j), res); }

json cell_table_json(const CellTable& t) {
    json arr = json::array();
    for (const auto& [cell, m] : t)
        arr.push_back({{"group", to_string(cell.first)},
                       {"scenario", to_string(cell.second)},
                       {"p_success", m.mean_success},
                       {"rows", m.rows}});
    return arr;
}

std::string cell_table_text(const CellTable& t, const std::string& title) {
    std::ostringstream os;
    os << title << "\n";
    char line[128];
    std::snprintf(line, sizeof line, "%-4s %8s %8s %8s %8s\n", "", "G1", "G2", "G3", "G4");
    os << line;
    for (auto s : kAllScenarios) {
        os << to_string(s);
        for (auto g : kAllGroups) {
            auto it = t.find({g, s});
            std::snprintf(line, sizeof line, " %8s", it == t.end() ? "-" : fixed(it->second.mean_success, 3).c_str());
            os << line;
        }
        os << "\n";
    }
    return os.str();
}

json coefficients_json(const std::vector<Coefficient>& cs) {
    json arr = json::array();
    for (const auto& c : cs) arr.push_back({{"name", c.name}, {"beta", c.beta}, {"se", c.se}, {"z", c.z}, {"p", c.p}});
    return arr;
}

std::string coefficients_text(const std::vector<Coefficient>& cs) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %10s %10s %9s %9s\n", "", "coef", "std err", "z", "p");
    os << line;
    for (const auto& c : cs) {
        std::snprintf(line, sizeof line, "%-20s %10.4f %10.4f %9.3f %9.4f\n", c.name.c_str(), c.beta, c.se, c.z, c.p);
        os << line;
    }
    return os.str();
}

}  // namespace

void RunConfig::validate() const {
    if (folds < 1) throw ConfigError("--folds must be >= 1");
    if (!(threshold > 0 && threshold < 1)) throw ConfigError("--threshold must lie in (0, 1)");
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("--alpha must lie in (0, 1)");
    if (!(smoothing >= 0)) throw ConfigError("--smoothing must be >= 0");
    if (test_fraction && !(*test_fraction > 0 && *test_fraction < 1))
        throw ConfigError("--test-fraction must lie in (0, 1)");
    for (const auto& f : inputs) {
        try {
            feature_spec(f);
        } catch (const ContractError&) {
            throw ConfigError("unknown model input '" + f + "'");
        }
    }
}

fs::path RunConfig::features_path() const { return features_file ? *features_file : out / "features.csv"; }

std::vector<std::string> model_inputs(const RunConfig& cfg, ModelFamily family) {
    if (cfg.inputs.empty()) return family_features(family, cfg.feature_set);
    for (const auto& f : cfg.inputs) {
        if (!is_bayes_family(family) && f == "procedures_opened")
            throw ConfigError("procedures_opened is not recorded for G1/G2 and cannot enter a regression model");
        if (is_subjective(f) && cfg.feature_set != FeatureSet::BehaviouralSubjective)
            throw ConfigError("input '" + f + "' needs --features behavioural+subjective");
    }
    return cfg.inputs;
}

std::string config_hash(const RunConfig& cfg, ModelFamily family, const std::string& input_hash) {
    const json j = {{"family", to_string(family)},
                    {"inputs", model_inputs(cfg, family)},
                    {"seed", cfg.seed},
                    {"folds", cfg.folds},
                    {"threshold", cfg.threshold},
                    {"alpha", cfg.alpha},
                    {"smoothing", cfg.smoothing},
                    {"criterion", to_string(cfg.criterion)},
                    {"test_fraction", cfg.test_fraction ? json(*cfg.test_fraction) : json(nullptr)},
                    {"dummy_coding", cfg.dummy_coding},
                    {"continuity_correction", cfg.continuity_correction},
                    {"input", input_hash}};
    return io::hex64(io::fnv1a64(j.dump()));
}

json provenance(const RunConfig& cfg, ModelFamily family, const std::string& input_hash) {
    return {{"config_hash", config_hash(cfg, family, input_hash)}, {"seed", cfg.seed}, {"input_hash", input_hash}};
}

std::string dump_artifact(const json& j) { return j.dump(2) + "\n"; }

FeatureFile read_features(const fs::path& path) {
    FeatureFile f;
    const auto text = io::read_file(path);
    f.rows = features_from_csv(text, path.string());
    f.hash = io::hex64(io::fnv1a64(text));
    return f;
}

BnModel train_bn(const std::vector<FeatureVector>& rows, ModelFamily family, const std::vector<std::string>& inputs,
                 double smoothing, Execution exec) {
    if (!is_bayes_family(family)) throw ContractError("train_bn needs nb or tan");
    const auto table = make_table(rows, inputs);
    auto disc = DiscretizationMap::fit(table, inputs);
    const auto data = disc.apply(table, inputs);
    BnFitOptions opt;
    opt.alpha = smoothing;
    opt.exec = exec;
    BnModel m = family == ModelFamily::Tan ? fit_tan(data, opt) : fit_nb(data, opt);
    m.discretization = std::move(disc);
    return m;
}

NumericTable lr_table(const std::vector<FeatureVector>& rows, const std::vector<std::string>& inputs, bool dummy) {
    auto t = make_table(rows, inputs).complete_cases(inputs);
    return dummy ? dummy_code(t) : t;
}

std::vector<std::string> lr_names(const std::vector<std::string>& inputs, bool dummy) {
    return dummy ? dummy_feature_names(inputs) : inputs;
}

EvalReport evaluate_family(const std::vector<FeatureVector>& rows, ModelFamily family, const RunConfig& cfg) {
    const auto inputs = model_inputs(cfg, family);
    EvalOptions opt;
    opt.folds = cfg.folds;
    opt.test_fraction = cfg.test_fraction;
    opt.threshold = cfg.threshold;
    opt.seed = cfg.seed;
    opt.exec = cfg.exec;

    if (is_bayes_family(family)) {
        const auto table = make_table(rows, inputs);
        const double alpha = cfg.smoothing;
        auto scorer = [&](const Split& s) {
            const auto train = table.subset(s.train);
            const auto disc = DiscretizationMap::fit(train, inputs);
            BnFitOptions fo;
            fo.alpha = alpha;
            const auto dtrain = disc.apply(train, inputs);
            const BnModel m = family == ModelFamily::Tan ? fit_tan(dtrain, fo) : fit_nb(dtrain, fo);
            const auto dtest = disc.apply(table.subset(s.test), inputs);
            std::vector<double> out;
            for (const auto& row : dtest.x) out.push_back(posterior(m, row)[1]);
            return out;
        };
        return evaluate(table.y, scorer, opt);
    }

    const auto table = lr_table(rows, inputs, cfg.dummy_coding);
    const auto names = lr_names(inputs, cfg.dummy_coding);
    const bool step = family == ModelFamily::LogisticStepwise;
    const Criterion crit = cfg.criterion;
    auto scorer = [&](const Split& s) {
        const auto train = table.subset(s.train);
        const LrModel m = step ? stepwise(train, names, crit).model : fit_lr(train, names);
        std::vector<std::size_t> cols;
        for (const auto& f : m.features) cols.push_back(table.column(f));
        std::vector<double> out, row(cols.size());
        for (auto i : s.test) {
            for (std::size_t k = 0; k < cols.size(); ++k) row[k] = table.x[i][cols[k]];
            out.push_back(predict_proba(m, row));
        }
        return out;
    };
    return evaluate(table.y, scorer, opt);
}

CellTable bn_cell_table(const BnModel& model, const std::vector<FeatureVector>& rows) {
    const int gi = model.index_of("group"), si = model.index_of("scenario");
    if (gi < 0 || si < 0) throw ContractError("cell table needs group and scenario in the model");
    std::map<std::pair<Group, Scenario>, std::size_t> counts;
    for (const auto& r : rows) ++counts[{r.group, r.scenario}];
    CellTable out;
    for (const auto& [cell, n] : counts) {
        std::vector<int> ev(model.nodes.size(), -1);
        ev[static_cast<std::size_t>(gi)] = code(cell.first) - 1;
        ev[static_cast<std::size_t>(si)] = code(cell.second) - 1;
        out[cell] = {posterior(model, ev)[0], n};
    }
    return out;
}

json ExtractSummary::to_json() const {
    return {{"sessions", sessions},
            {"absent",
             {{"reaction_time", absent_reaction},
              {"response_time", absent_response},
              {"recovery_time", absent_recovery},
              {"procedures_opened", absent_procedures},
              {"subjective", absent_subjective}}},
            {"accuracy_filled_with_zero", filled_accuracy},
            {"failures", failures}};
}

CommandResult cmd_extract(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.manifest.empty()) throw ConfigError("extract needs --manifest");
    ExtractionConfig ec;
    std::string input_text = io::read_file(cfg.manifest);
    if (cfg.extraction_config) {
        ec = load_extraction_config(*cfg.extraction_config);
        input_text += io::read_file(*cfg.extraction_config);
    }
    std::map<std::string, SubjectiveScores> subj;
    if (cfg.subjective) {
        subj = load_subjective(*cfg.subjective);
        input_text += io::read_file(*cfg.subjective);
    }
    const auto sessions = load_manifest(cfg.manifest);

    ExtractSummary sum;
    std::vector<FeatureVector> rows;
    for (const auto& m : sessions) {
        const std::string who = m.participant_id + " " + to_string(m.scenario) + " (" + m.path.string() + ")";
        try {
            const auto log = load_session(m);
            input_text += io::read_file(m.path);
            const auto violations = validate_session(log);
            if (!violations.empty()) {
                std::string msg;
                for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v.message;
                throw InputError(msg);
            }
            auto fv = extract_features(log, ec);
            if (auto it = subj.find(m.participant_id); it != subj.end()) fv.subjective = it->second;
            rows.push_back(std::move(fv));
        } catch (const InputError& e) {
            sum.failures.push_back(who + ": " + e.what());
        }
    }
    if (!sum.failures.empty()) {
        std::string msg = "extraction failed for " + std::to_string(sum.failures.size()) + " session(s):";
        for (const auto& f : sum.failures) msg += "\n  " + f;
        throw InputError(msg);
    }
    assemble_dataset(rows, ec);

    sum.sessions = rows.size();
    for (const auto& r : rows) {
        sum.absent_reaction += !r.reaction_time_s;
        sum.absent_response += !r.response_time_s;
        sum.absent_recovery += !r.recovery_time_s;
        sum.filled_accuracy += r.accuracy_filled;
        sum.absent_procedures += !r.procedures_opened;
        sum.absent_subjective += !(r.subjective.tlx || r.subjective.sart || r.subjective.spam ||
                                   r.subjective.familiarity || r.subjective.training);
    }
    const auto input_hash = io::hex64(io::fnv1a64(input_text));
    CommandResult res;
    write_artifact(cfg.features_path(), features_to_csv(rows), res);
    json j = sum.to_json();
    j["provenance"] = provenance(cfg, cfg.family, input_hash);
    write_json(cfg.out / "extract_summary.json", j, res);

    std::ostringstream os;
    os << "extracted " << sum.sessions << " session(s)\n"
       << "absent: reaction " << sum.absent_reaction << ", response " << sum.absent_response << ", recovery "
       << sum.absent_recovery << ", procedures " << sum.absent_procedures << ", subjective " << sum.absent_subjective
       << "\naccuracy filled with 0: " << sum.filled_accuracy << "\n";
    res.summary = os.str();
    return res;
}

CommandResult cmd_train(const RunConfig& cfg) {
    cfg.validate();
    const auto ff = read_features(cfg.features_path());
    const auto inputs = model_inputs(cfg, cfg.family);
    const auto prov = provenance(cfg, cfg.family, ff.hash);
    const auto path = cfg.out / ("model_" + to_string(cfg.family) + ".json");
    CommandResult res;
    std::ostringstream os;
    if (is_bayes_family(cfg.family)) {
        const auto m = train_bn(ff.rows, cfg.family, inputs, cfg.smoothing, cfg.exec);
        json j = to_json(m);
        j["provenance"] = prov;
        write_json(path, j, res);
        os << to_string(cfg.family) << " model over " << m.nodes.size() << " feature(s):";
        for (const auto& n : m.nodes) os << " " << n.name << "[" << n.cardinality << "]";
        os << "\n";
        for (const auto& [name, fc] : m.discretization.entries())
            if (fc.no_informative_cut) os << "dropped (no informative cut): " << name << "\n";
        for (const auto& e : m.edges)
            os << "edge " << m.nodes[static_cast<std::size_t>(e.from)].name << " -> "
               << m.nodes[static_cast<std::size_t>(e.to)].name << " (cmi " << fixed(e.cmi, 4) << " bits)\n";
        for (const auto& w : m.warnings) os << "warning: " << w << "\n";
    } else {
        const auto table = lr_table(ff.rows, inputs, cfg.dummy_coding);
        const auto names = lr_names(inputs, cfg.dummy_coding);
        json j;
        LrModel m;
        if (cfg.family == ModelFamily::LogisticStepwise) {
            const auto r = stepwise(table, names, cfg.criterion, {}, cfg.exec);
            m = r.model;
            j = to_json(r);
        } else {
            m = fit_lr(table, names);
            j = to_json(m);
        }
        j["provenance"] = prov;
        j["rows_used"] = table.rows();
        write_json(path, j, res);
        os << to_string(cfg.family) << " on " << table.rows() << " complete row(s)\n"
           << coefficients_text(cfg.dummy_coding ? m.raw : m.standardized);
    }
    os << "wrote " << path.string() << "\n";
    res.summary = os.str();
    return res;
}

CommandResult cmd_evaluate(const RunConfig& cfg) {
    cfg.validate();
    const auto ff = read_features(cfg.features_path());
    const auto rep = evaluate_family(ff.rows, cfg.family, cfg);
    json j = to_json(rep);
    j["family"] = to_string(cfg.family);
    j["inputs"] = model_inputs(cfg, cfg.family);
    j["provenance"] = provenance(cfg, cfg.family, ff.hash);
    CommandResult res;
    const auto stem = cfg.out / ("eval_" + to_string(cfg.family));
    const auto text = render_text(rep, to_string(cfg.family) + " confusion matrix");
    write_json(stem.string() + ".json", j, res);
    write_artifact(stem.string() + ".txt", text, res);
    res.summary = text;
    return res;
}

CommandResult cmd_compare(const RunConfig& cfg) {
    cfg.validate();
    const auto ff = read_features(cfg.features_path());
    BatteryOptions bo;
    bo.alpha = cfg.alpha;
    bo.continuity_correction = cfg.continuity_correction;
    const auto results = run_battery(ff.rows, bo);
    CommandResult res;
    json j = {{"alpha", cfg.alpha}, {"results", to_json(results)}, {"provenance", provenance(cfg, cfg.family, ff.hash)}};
    write_json(cfg.out / "compare.json", j, res);
    write_artifact(cfg.out / "compare.csv", battery_csv(results), res);
    const auto text = battery_text(results);
    write_artifact(cfg.out / "compare.txt", text, res);
    res.summary = text;
    return res;
}

CommandResult cmd_report(const RunConfig& cfg) {
    cfg.validate();
    const auto ff = read_features(cfg.features_path());
    json rep;
    std::ostringstream text;
    CommandResult res;

    // Mutual information on the full-data discretization.
    {
        const auto inputs = model_inputs(cfg, ModelFamily::Tan);
        const auto table = make_table(ff.rows, inputs);
        const auto disc = DiscretizationMap::fit(table, inputs);
        const auto mi = mutual_information(disc.apply(table, inputs));
        json entries = json::array();
        text << "Mutual information with the error label (H(Error) = " << fixed(mi.h_error_bits, 4) << " bits)\n";
        for (const auto& e : mi.entries) {
            entries.push_back({{"feature", e.feature}, {"mi_bits", e.mi_bits}, {"observed", e.observed}});
            text << "  " << e.feature << std::string(e.feature.size() < 20 ? 20 - e.feature.size() : 1, ' ')
                 << fixed(e.mi_bits, 4) << "\n";
        }
        json dropped = json::array();
        for (const auto& [name, fc] : disc.entries())
            if (fc.no_informative_cut) dropped.push_back(name);
        for (const auto& d : dropped) text << "  " << d.get<std::string>() << ": no informative cut\n";
        rep["mutual_information"] = {{"h_error_bits", mi.h_error_bits}, {"ranking", entries}, {"dropped", dropped}};
        text << "\n";
    }

    // Cell tables.
    try {
        const auto tan = train_bn(ff.rows, ModelFamily::Tan, model_inputs(cfg, ModelFamily::Tan), cfg.smoothing);
        const auto cells = bn_cell_table(tan, ff.rows);
        rep["tan_success_by_cell"] = cell_table_json(cells);
        text << cell_table_text(cells, "TAN P(Success | group, scenario)") << "\n";
    } catch (const NumericalError& e) {
        rep["tan_success_by_cell"] = {{"error", e.what()}};
    }
    try {
        const auto inputs = model_inputs(cfg, ModelFamily::Logistic);
        const auto table = lr_table(ff.rows, inputs, cfg.dummy_coding);
        const auto m = fit_lr(table, lr_names(inputs, cfg.dummy_coding));
        const auto cells = aggregate_by_cell(m, table);
        rep["lr_success_by_cell"] = cell_table_json(cells);
        rep["lr_coefficients"] = {{"rows_used", table.rows()},
                                  {"standardized", coefficients_json(m.standardized)},
                                  {"raw", coefficients_json(m.raw)}};
        text << cell_table_text(cells, "LR mean P(Success) by group and scenario") << "\n"
             << "LR coefficients (standardized features, " << table.rows() << " rows)\n"
             << coefficients_text(m.standardized) << "\n";
    } catch (const NumericalError& e) {
        rep["lr_success_by_cell"] = {{"error", e.what()}};
        rep["lr_coefficients"] = {{"error", e.what()}};
    }
    try {
        const auto inputs = model_inputs(cfg, ModelFamily::LogisticStepwise);
        const auto table = lr_table(ff.rows, inputs, cfg.dummy_coding);
        const auto r = stepwise(table, lr_names(inputs, cfg.dummy_coding), cfg.criterion, {}, cfg.exec);
        rep["stepwise"] = to_json(r);
        text << "Stepwise (" << to_string(cfg.criterion) << ") selected:";
        for (const auto& f : r.model.features) text << " " << f;
        text << "\n" << coefficients_text(r.model.standardized) << "\n";
    } catch (const NumericalError& e) {
        rep["stepwise"] = {{"error", e.what()}};
    }

    // Side-by-side metrics, reusing evaluation artifacts whose hash matches.
    json metrics = json::array();
    char line[200];
    std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s %9s %9s\n", "family", "accuracy", "precision", "recall",
                  "f1", "auc", "auc pool");
    text << "Performance comparison\n" << line;
    for (auto fam : {ModelFamily::NaiveBayes, ModelFamily::Tan, ModelFamily::Logistic, ModelFamily::LogisticStepwise}) {
        const auto hash = config_hash(cfg, fam, ff.hash);
        const auto stem = cfg.out / ("eval_" + to_string(fam));
        json ej;
        bool reused = false;
        if (fs::exists(stem.string() + ".json")) {
            try {
                auto prev = json::parse(io::read_file(stem.string() + ".json"));
                if (prev.at("provenance").at("config_hash") == hash) {
                    ej = std::move(prev);
                    reused = true;
                }
            } catch (const std::exception&) {
            }
        }
        if (!reused) {
            RunConfig fc = cfg;
            fc.family = fam;
            try {
                const auto er = evaluate_family(ff.rows, fam, fc);
                ej = to_json(er);
                ej["family"] = to_string(fam);
                ej["inputs"] = model_inputs(cfg, fam);
                ej["provenance"] = provenance(cfg, fam, ff.hash);
                write_json(stem.string() + ".json", ej, res);
                write_artifact(stem.string() + ".txt", render_text(er, to_string(fam) + " confusion matrix"), res);
            } catch (const NumericalError& e) {
                metrics.push_back({{"family", to_string(fam)}, {"error", e.what()}});
                text << to_string(fam) << ": " << e.what() << "\n";
                continue;
            }
        }
        res.summary += to_string(fam) + (reused ? ": reused " : ": computed ") + stem.string() + ".json\n";
        metrics.push_back({{"family", to_string(fam)},
                           {"accuracy", ej.at("accuracy")},
                           {"precision", ej.at("precision")},
                           {"recall", ej.at("recall")},
                           {"f1", ej.at("f1")},
                           {"auc_fold_mean", ej.at("auc_fold_mean")},
                           {"auc_pooled", ej.at("auc_pooled")},
                           {"confusion", ej.at("confusion")},
                           {"eval_config_hash", hash}});
        std::snprintf(line, sizeof line, "%-12s %9.3f %9.3f %9.3f %9.3f %9.3f %9.3f\n", to_string(fam).c_str(),
                      ej.at("accuracy").get<double>(), ej.at("precision").get<double>(), ej.at("recall").get<double>(),
                      ej.at("f1").get<double>(), ej.at("auc_fold_mean").get<double>(),
                      ej.at("auc_pooled").get<double>());
        text << line;
    }
    rep["performance_comparison"] = metrics;
    rep["provenance"] = provenance(cfg, cfg.family, ff.hash);

    write_json(cfg.out / "report.json", rep, res);
    write_artifact(cfg.out / "report.txt", text.str(), res);
    res.summary = text.str() + res.summary;
    return res;
}

CommandResult cmd_synth(const RunConfig& cfg, std::size_t per_cell) {
    if (per_cell < 1) throw ConfigError("--per-cell must be >= 1");
    CommandResult res;
    const auto rows = synthetic_features(per_cell, cfg.seed);
    write_artifact(cfg.features_path(), features_to_csv(rows), res);
    res.summary = "wrote " + std::to_string(rows.size()) + " synthetic row(s) to " + cfg.features_path().string() + "\n";
    return res;
}

}  // namespace alarmrisk
