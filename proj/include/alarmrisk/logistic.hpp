#pragma once
// Maximum-likelihood logistic regression fitted by IRLS on standardized
// features, with Wald inference, AIC/BIC stepwise selection and per-cell
// probability aggregation.

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alarmrisk/dataset.hpp"
#include "alarmrisk/parallel.hpp"
#include "json.hpp"

namespace alarmrisk {

enum class Criterion { Aic, Bic };
Criterion parse_criterion(const std::string& text);
std::string to_string(Criterion c);

struct LrOptions {
    int max_iter = 200;
    double gradient_tol = 1e-8;
    double separation_cap = 50.0;  // on the standardized scale
};

struct Coefficient {
    std::string name;  // "(intercept)" for beta0
    double beta = 0, se = 0, z = 0, p = 1;
};

struct LrModel {
    std::vector<std::string> features;
    std::vector<double> mean, sd;        // training standardization, ddof 0
    std::vector<Coefficient> standardized;  // intercept first
    std::vector<Coefficient> raw;           // same model, raw feature scale
    std::size_t n = 0;
    double log_likelihood = 0;
    int iterations = 0;
    double gradient_norm = 0;

    std::size_t parameters() const { return features.size() + 1; }
    double aic() const;
    double bic() const;
    double criterion(Criterion c) const { return c == Criterion::Aic ? aic() : bic(); }
};

// x is row-major with one column per feature; no missing values allowed.
LrModel fit_lr(const std::vector<std::vector<double>>& x, std::span<const int> y,
               const std::vector<std::string>& features, const LrOptions& options = {});
// Complete cases of the table over `features`.
LrModel fit_lr(const NumericTable& table, const std::vector<std::string>& features, const LrOptions& options = {});

struct StepwiseStep {
    std::string action;  // "add" | "drop"
    std::string feature;
    double criterion = 0;
};

struct StepwiseResult {
    LrModel model;
    Criterion criterion = Criterion::Aic;
    std::vector<StepwiseStep> trace;
    std::vector<std::string> skipped;  // candidate fits that failed numerically, "feature: reason"
    std::size_t rows_used = 0;
};

// Starts from the intercept-only model on rows complete over all candidates.
StepwiseResult stepwise(const NumericTable& table, const std::vector<std::string>& candidates, Criterion criterion,
                        const LrOptions& options = {}, Execution exec = Execution::Serial);

// row holds raw values in model.features order.
double predict_proba(const LrModel& model, std::span<const double> row);
double predict_proba(const LrModel& model, const std::map<std::string, double>& row);

// Replaces categorical columns by 0/1 indicators against the first state,
// named "<feature>=<state>".
NumericTable dummy_code(const NumericTable& table);
std::vector<std::string> dummy_feature_names(const std::vector<std::string>& features);

struct CellMean {
    double mean_success = 0;
    std::size_t rows = 0;
};
using CellTable = std::map<std::pair<Group, Scenario>, CellMean>;

// Mean of 1 - p(failure) per group x scenario over the table's complete rows.
// Cells without rows are absent.
CellTable aggregate_by_cell(const LrModel& model, const NumericTable& table);

nlohmann::json to_json(const LrModel& model);
LrModel lr_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StepwiseResult& r);

}  // namespace alarmrisk
