#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/features.hpp"
#include "alarmrisk/ingest.hpp"
#include "alarmrisk/io_util.hpp"
#include "alarmrisk/pipeline.hpp"
#include "alarmrisk/synthetic.hpp"
#include "doctest.h"
#include "golden.hpp"
#include "test_util.hpp"

using namespace alarmrisk;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

// Golden sessions on disk with a manifest and an extraction config.
fs::path write_golden_corpus(const fs::path& dir) {
    nlohmann::json manifest = nlohmann::json::array();
    for (const auto& c : golden::cases()) {
        const auto file = "logs/" + c.log.meta.participant_id + ".csv";
        write_session(c.log, dir / file);
        manifest.push_back({{"path", file},
                            {"participant_id", c.log.meta.participant_id},
                            {"group", to_string(c.log.meta.group)},
                            {"scenario", to_string(c.log.meta.scenario)},
                            {"fault_start_s", c.log.meta.fault_start_s},
                            {"duration_s", c.log.meta.duration_s}});
    }
    testutil::write(dir / "manifest.json", manifest.dump(2));
    testutil::write(dir / "config.json", R"({"procedure_target_mean":{"S1":10,"S2":5,"S3":25}})");
    return dir / "manifest.json";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ALARMRISK_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig base_config(const fs::path& out) {
    RunConfig c;
    c.out = out;
    c.folds = 20;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("extract writes features matching in-memory extraction") {
        TempDir d;
        auto cfg = base_config(d / "out");
        cfg.manifest = write_golden_corpus(d.path());
        cfg.extraction_config = d / "config.json";
        const auto res = cmd_extract(cfg);
        CHECK(res.written.size() == 2);
        const auto rows = read_features(cfg.features_path()).rows;
        REQUIRE(rows.size() == 12);
        const auto cases = golden::cases();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto want = cases[i].expected;
            CHECK(rows[i].num_alarms == want.num_alarms);
            CHECK(rows[i].error == want.error);
            CHECK(rows[i].overall_performance);
        }
        const auto summary = nlohmann::json::parse(testutil::slurp(d / "out/extract_summary.json"));
        CHECK(summary.at("sessions") == 12);
        CHECK(summary.at("accuracy_filled_with_zero").get<int>() > 0);
        CHECK(summary.at("provenance").contains("input_hash"));
    }

    TEST_CASE("extract lists every failing session") {
        TempDir d;
        auto cfg = base_config(d / "out");
        cfg.manifest = write_golden_corpus(d.path());
        cfg.extraction_config = d / "config.json";
        fs::remove(d / "logs/P03.csv");
        testutil::write(d / "logs/P04.csv", "t,All1_1\n0,0\n1,2\n");
        try {
            cmd_extract(cfg);
            FAIL("expected InputError");
        } catch (const InputError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("2 session(s)") != std::string::npos);
            CHECK(msg.find("P03") != std::string::npos);
            CHECK(msg.find("P04") != std::string::npos);
        }
        CHECK_FALSE(fs::exists(d / "out/features.csv"));
    }

    TEST_CASE("train, evaluate, compare and report on synthetic rows") {
        TempDir d;
        auto cfg = base_config(d.path());
        cmd_synth(cfg, 10);
        for (auto fam : {ModelFamily::NaiveBayes, ModelFamily::Tan, ModelFamily::Logistic,
                         ModelFamily::LogisticStepwise}) {
            cfg.family = fam;
            cmd_train(cfg);
            CHECK(fs::exists(d / ("model_" + to_string(fam) + ".json")));
        }
        cfg.family = ModelFamily::Tan;
        cmd_evaluate(cfg);
        const auto ev = nlohmann::json::parse(testutil::slurp(d / "eval_tan.json"));
        CHECK(ev.at("folds") == 20);
        CHECK(ev.at("auc_fold_mean").get<double>() > 0.7);
        cmd_compare(cfg);
        CHECK(fs::exists(d / "compare.csv"));
        const auto rep = cmd_report(cfg);
        CHECK(fs::exists(d / "report.json"));
        CHECK(rep.summary.find("reused") != std::string::npos);
        const auto report = nlohmann::json::parse(testutil::slurp(d / "report.json"));
        CHECK(report.contains("mutual_information"));
    }

    TEST_CASE("inputs and feature sets are validated") {
        RunConfig c;
        c.inputs = {"procedures_opened", "group"};
        CHECK_THROWS_AS(model_inputs(c, ModelFamily::Logistic), ConfigError);
        CHECK(model_inputs(c, ModelFamily::Tan) == c.inputs);
        c.inputs = {"tlx"};
        CHECK_THROWS_AS(model_inputs(c, ModelFamily::Tan), ConfigError);
        c.feature_set = FeatureSet::BehaviouralSubjective;
        CHECK(model_inputs(c, ModelFamily::Tan) == c.inputs);
        RunConfig bad;
        bad.threshold = 1.5;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("config hash tracks output-relevant knobs only") {
        RunConfig a, b;
        b.exec = Execution::Serial;
        b.out = "elsewhere";
        CHECK(config_hash(a, ModelFamily::Tan, "h") == config_hash(b, ModelFamily::Tan, "h"));
        b.seed = 1;
        CHECK(config_hash(a, ModelFamily::Tan, "h") != config_hash(b, ModelFamily::Tan, "h"));
        CHECK(config_hash(a, ModelFamily::Tan, "h") != config_hash(a, ModelFamily::Tan, "i"));
    }

    TEST_CASE("cell table from the BN model") {
        const auto rows = synthetic_features(12, 5);
        const auto m = train_bn(rows, ModelFamily::Tan, family_features(ModelFamily::Tan, FeatureSet::Behavioural), 1.0);
        const auto cells = bn_cell_table(m, rows);
        CHECK(cells.size() == 12);
        // risk rises with scenario in the generator
        CHECK(cells.at({Group::G1, Scenario::S1}).mean_success > cells.at({Group::G1, Scenario::S3}).mean_success);
    }

    TEST_CASE("CLI exit codes") {
        TempDir d;
        const std::string out = " --out " + d.path().string();
        CHECK(run_cli("--help") == 0);
        CHECK(run_cli("") == 1);
        CHECK(run_cli("train --bogus") == 1);
        CHECK(run_cli("train" + out) == 1);  // no features file yet
        CHECK(run_cli("extract --manifest " + (d / "none.json").string() + out) == 1);
        CHECK(run_cli("synth --per-cell 6" + out) == 0);
        CHECK(run_cli("train --family nb" + out) == 0);
        CHECK(run_cli("train --family xx" + out) == 1);
        CHECK(run_cli("evaluate --folds 0" + out) == 1);

        // a perfectly separating alarm count defeats maximum likelihood
        auto rows = features_from_csv(testutil::slurp(d / "features.csv"));
        for (auto& r : rows) r.num_alarms = r.error ? 30 : 2;
        testutil::write(d / "sep.csv", features_to_csv(rows));
        CHECK(run_cli("train --family lr --features-file " + (d / "sep.csv").string() + out) == 2);
        CHECK(run_cli("train --family tan --features-file " + (d / "sep.csv").string() + out) == 0);
    }
}
