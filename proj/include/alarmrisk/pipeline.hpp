#pragma once
// Subcommand implementations shared by the CLI and the tests. Every artifact
// carries a provenance block (config hash, seed, input hash) and is written
// atomically; nothing time-dependent goes into an artifact.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "alarmrisk/bayes_net.hpp"
#include "alarmrisk/dataset.hpp"
#include "alarmrisk/evaluation.hpp"
#include "alarmrisk/logistic.hpp"
#include "json.hpp"

namespace alarmrisk {

struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path out = "out";
    std::optional<std::filesystem::path> features_file;  // default <out>/features.csv
    std::optional<std::filesystem::path> extraction_config;
    std::optional<std::filesystem::path> subjective;
    std::uint64_t seed = 0;
    std::size_t folds = 1000;
    double threshold = 0.5;
    double alpha = 0.05;      // significance level
    double smoothing = 1.0;   // Laplace pseudo-count for the Bayesian networks
    Criterion criterion = Criterion::Aic;
    ModelFamily family = ModelFamily::Tan;
    FeatureSet feature_set = FeatureSet::Behavioural;
    std::vector<std::string> inputs;  // explicit model inputs; empty = family default
    std::optional<double> test_fraction;
    bool dummy_coding = false;
    bool continuity_correction = false;
    Execution exec = Execution::Parallel;

    void validate() const;  // ConfigError
    std::filesystem::path features_path() const;
};

// Model inputs for a family under the config (explicit list or default).
std::vector<std::string> model_inputs(const RunConfig& cfg, ModelFamily family);

// Hash over every output-relevant knob plus the input content hash.
std::string config_hash(const RunConfig& cfg, ModelFamily family, const std::string& input_hash);
nlohmann::json provenance(const RunConfig& cfg, ModelFamily family, const std::string& input_hash);

struct FeatureFile {
    std::vector<FeatureVector> rows;
    std::string hash;
};
FeatureFile read_features(const std::filesystem::path& path);

// Fitting on whole datasets.
BnModel train_bn(const std::vector<FeatureVector>& rows, ModelFamily family, const std::vector<std::string>& inputs,
                 double smoothing, Execution exec = Execution::Serial);
NumericTable lr_table(const std::vector<FeatureVector>& rows, const std::vector<std::string>& inputs, bool dummy);
std::vector<std::string> lr_names(const std::vector<std::string>& inputs, bool dummy);

EvalReport evaluate_family(const std::vector<FeatureVector>& rows, ModelFamily family, const RunConfig& cfg);

// P(Success | group, scenario) with every other feature summed out. Cells
// without rows in `rows` are absent.
CellTable bn_cell_table(const BnModel& model, const std::vector<FeatureVector>& rows);

struct ExtractSummary {
    std::size_t sessions = 0;
    std::size_t absent_reaction = 0, absent_response = 0, absent_recovery = 0, filled_accuracy = 0,
                absent_procedures = 0, absent_subjective = 0;
    std::vector<std::string> failures;  // "participant: message"
    nlohmann::json to_json() const;
};

struct CommandResult {
    std::vector<std::filesystem::path> written;
    std::string summary;  // human-readable text for stdout
};

CommandResult cmd_extract(const RunConfig& cfg);
CommandResult cmd_train(const RunConfig& cfg);
CommandResult cmd_evaluate(const RunConfig& cfg);
CommandResult cmd_compare(const RunConfig& cfg);
CommandResult cmd_report(const RunConfig& cfg);
// Writes a synthetic features file (test and demo aid).
CommandResult cmd_synth(const RunConfig& cfg, std::size_t per_cell);

std::string dump_artifact(const nlohmann::json& j);

}  // namespace alarmrisk
