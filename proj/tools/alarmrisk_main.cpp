// alarmrisk: extract, train, evaluate, compare, report, serve, infer.
// Exit codes: 0 success, 1 input/configuration error, 2 numerical failure.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "alarmrisk/errors.hpp"
#include "alarmrisk/io_util.hpp"
#include "alarmrisk/pipeline.hpp"
#include "alarmrisk/service.hpp"
#include "httplib.h"

using namespace alarmrisk;

namespace {

struct Flags {
    RunConfig cfg;
    std::string manifest, out = "out", features_file, config, subjective;
    std::string family = "tan", features = "behavioural", criterion = "aic", inputs;
    double test_fraction = 0;
    bool serial = false;
    std::size_t per_cell = 8;

    std::string model, lr_model, request, request_file, host = "127.0.0.1";
    int port = 8080;

    RunConfig resolve() {
        RunConfig c = cfg;
        c.manifest = manifest;
        c.out = out;
        if (!features_file.empty()) c.features_file = features_file;
        if (!config.empty()) c.extraction_config = config;
        if (!subjective.empty()) c.subjective = subjective;
        c.family = parse_family(family);
        c.feature_set = parse_feature_set(features);
        c.criterion = parse_criterion(criterion);
        if (test_fraction != 0) c.test_fraction = test_fraction;
        if (serial) c.exec = Execution::Serial;
        c.inputs.clear();
        for (auto& s : io::split_row(inputs))
            if (!s.empty()) c.inputs.push_back(s);
        return c;
    }
};

void pipeline_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--features-file", f.features_file, "features file (default <out>/features.csv)");
    sub->add_option("--seed", f.cfg.seed, "master seed")->capture_default_str();
    sub->add_option("--folds", f.cfg.folds, "shuffle-split folds")->capture_default_str();
    sub->add_option("--threshold", f.cfg.threshold, "failure threshold on p(error)")->capture_default_str();
    sub->add_option("--alpha", f.cfg.alpha, "significance level")->capture_default_str();
    sub->add_option("--smoothing", f.cfg.smoothing, "Laplace pseudo-count for nb/tan")->capture_default_str();
    sub->add_option("--criterion", f.criterion, "stepwise criterion: aic | bic")->capture_default_str();
    sub->add_option("--family", f.family, "nb | tan | lr | lr-stepwise")->capture_default_str();
    sub->add_option("--features", f.features, "behavioural | behavioural+subjective")->capture_default_str();
    sub->add_option("--inputs", f.inputs, "explicit comma-separated model inputs");
    sub->add_option("--test-fraction", f.test_fraction, "test share per fold (default about 82 rows)");
    sub->add_flag("--dummy-coding", f.cfg.dummy_coding, "indicator coding of group/scenario in regression");
    sub->add_flag("--continuity-correction", f.cfg.continuity_correction, "Yates correction for 2x2 chi-squared");
    sub->add_flag("--serial", f.serial, "disable parallel kernels");
}

int run_serve(Flags& f) {
    if (f.model.empty())
        if (const char* env = std::getenv("ALARMRISK_MODEL")) f.model = env;
    if (const char* env = std::getenv("ALARMRISK_PORT"); env && f.port == 8080) f.port = std::atoi(env);
    RiskService service;
    if (!f.model.empty())
        service.load(f.model, f.lr_model.empty() ? std::nullopt : std::optional<std::filesystem::path>(f.lr_model));
    auto server = make_http_server(service);
    std::cout << "listening on http://" << f.host << ":" << f.port;
    if (auto s = service.snapshot()) std::cout << " (model " << s->version << ")";
    std::cout << std::endl;
    if (!server->listen(f.host, f.port)) {
        std::cerr << "error: cannot listen on " << f.host << ":" << f.port << "\n";
        return 1;
    }
    return 0;
}

int run_infer(const Flags& f) {
    if (f.model.empty()) throw ConfigError("infer needs --model");
    ModelSnapshot snap;
    snap.bn = load_bn_model(f.model);
    snap.version = model_version(f.model, std::nullopt);
    const std::string body = !f.request_file.empty() ? io::read_file(f.request_file) : f.request;
    nlohmann::json req;
    try {
        req = body.empty() ? nlohmann::json::object() : nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed request: ") + e.what());
    }
    try {
        std::cout << predict_json(snap, req).dump(2) << "\n";
    } catch (const RequestError& e) {
        throw InputError(e.what());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"alarmrisk: operator alarm-response risk modelling"};
    app.require_subcommand(1);
    Flags f;

    auto* extract = app.add_subcommand("extract", "session logs -> features file");
    extract->add_option("--manifest", f.manifest, "session manifest (JSON)")->required();
    extract->add_option("--config", f.config, "extraction config (JSON)");
    extract->add_option("--subjective", f.subjective, "questionnaire scores (CSV)");
    pipeline_flags(extract, f);

    auto* train = app.add_subcommand("train", "fit a model on the features file");
    pipeline_flags(train, f);
    auto* evaluate = app.add_subcommand("evaluate", "stratified shuffle-split evaluation");
    pipeline_flags(evaluate, f);
    auto* compare = app.add_subcommand("compare", "pairwise group test battery");
    pipeline_flags(compare, f);
    auto* report = app.add_subcommand("report", "MI ranking, cell tables, coefficient and metric tables");
    pipeline_flags(report, f);
    auto* synth = app.add_subcommand("synth", "write a synthetic features file");
    pipeline_flags(synth, f);
    synth->add_option("--per-cell", f.per_cell, "rows per group x scenario")->capture_default_str();

    auto* serve = app.add_subcommand("serve", "HTTP risk service");
    serve->add_option("--model", f.model, "BN model JSON (or $ALARMRISK_MODEL)");
    serve->add_option("--lr-model", f.lr_model, "optional regression model JSON");
    serve->add_option("--host", f.host)->capture_default_str();
    serve->add_option("--port", f.port, "port (or $ALARMRISK_PORT)")->capture_default_str();

    auto* infer = app.add_subcommand("infer", "one /predict request against a model file");
    infer->add_option("--model", f.model, "BN model JSON")->required();
    infer->add_option("--request", f.request, "request JSON");
    infer->add_option("--request-file", f.request_file, "request JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (serve->parsed()) return run_serve(f);
        if (infer->parsed()) return run_infer(f);
        const RunConfig cfg = f.resolve();
        CommandResult res;
        if (extract->parsed()) res = cmd_extract(cfg);
        else if (train->parsed()) res = cmd_train(cfg);
        else if (evaluate->parsed()) res = cmd_evaluate(cfg);
        else if (compare->parsed()) res = cmd_compare(cfg);
        else if (report->parsed()) res = cmd_report(cfg);
        else if (synth->parsed()) res = cmd_synth(cfg, f.per_cell);
        std::cout << res.summary;
        return 0;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
