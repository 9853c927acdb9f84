#pragma once
// Behavioural, system and performance metrics computed from one session log.
//
// Event conventions used throughout:
//   value change   sample i with v[i] != v[i-1]; the event time is t[i]
//   rising edge    a value change from 0 to non-zero; a series whose first
//                  sample is already non-zero counts that as one edge
// Only events at or after the fault start participate in the time metrics.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/session.hpp"

namespace alarmrisk {

// Raw log tags for each role. Defaults follow the simulator historian.
struct VariableMap {
    std::string reaction_switch_s12 = "MNitsel_1";
    std::string reaction_switch_s3 = "REC3WMO_1";
    std::string response_action_s1 = "MmanNit_1";
    std::string response_switch_s2 = "Nitsel_1";
    std::string cooling_temperature_s3 = "Toutrec2c_1";
    std::vector<std::string> activity_s3 = {"REC3WMO_1", "intop", "sAll", "AckAll", "proclis_1"};
    std::string accuracy_s1 = "FN2serb1O_1";
    std::string accuracy_s2 = "MWpopOld_1";
    std::string accuracy_s3 = "Toutrec2c_1";
    std::string recovery_alarm = "All2_1";
    std::string tank_pressure = "PSERB_1";
    std::string emergency_shutdown = "emmerO_1";
    std::string reactor_temperature = "TMAXREATORE_1";
    std::string alarms_silenced = "sAll";
    std::string acknowledgements = "AckAll";
    std::string mimics_opened = "intop";
    std::string procedures_opened = "proclis_1";
};

enum class CountMode { RisingEdge, ValueChange };

enum class PercentileCohort { Scenario, GroupAndScenario };

struct ExtractionConfig {
    // Midpoint of the procedure's prescribed range, per scenario.
    std::map<Scenario, double> procedure_target_mean;

    double psv01_level = 0.980;  // relief valve holds the tank; also the "normal" pressure
    double impurity_low = 0.975;
    double impurity_high = 0.980;
    double shutdown_level = 0.970;
    double reactor_overheat_level = 400.0;
    double s3_optimal_survival = 900.0;
    double s3_good_survival = 850.0;

    double spike_factor = 5.0;      // multiple of the pre-fault median |step|
    double spike_min_step = 1e-9;   // floor for a perfectly flat pre-fault trace
    double final_slope_window_s = 60.0;

    CountMode mimic_count_mode = CountMode::RisingEdge;
    PercentileCohort percentile_cohort = PercentileCohort::Scenario;

    VariableMap vars;

    // Throws ConfigError on broken invariants.
    void validate() const;
};

ExtractionConfig load_extraction_config(const std::filesystem::path& path);
ExtractionConfig extraction_config_from_json(const std::string& text);

class ExtractionError : public InputError {
public:
    ExtractionError(std::string variable, const std::string& what)
          : InputError(what), variable_(std::move(variable)) {}
    const std::string& variable() const { return variable_; }

private:
    std::string variable_;
};

// Event primitives, exposed for reuse and testing.
std::vector<double> value_change_times(const TimeSeries& s);
std::size_t count_rising_edges(const TimeSeries& s);
std::size_t count_events(const TimeSeries& s, CountMode mode);

// Linear interpolation between order statistics (h = (n-1) p).
double percentile(std::vector<double> values, double p);

std::optional<double> reaction_time(const SessionLog& log, const ExtractionConfig& cfg = {});
std::optional<double> response_time(const SessionLog& log, const ExtractionConfig& cfg = {});
std::optional<double> recovery_time(const SessionLog& log, const ExtractionConfig& cfg = {});
// Onset of the cooling-temperature spike (S3), if any.
std::optional<double> spike_onset(const TimeSeries& s, double fault_start, const ExtractionConfig& cfg);
// Absent when the target variable was never adjusted after the fault.
std::optional<double> accuracy_mse(const SessionLog& log, const ExtractionConfig& cfg);
int count_alarm_activations(const SessionLog& log);

struct InteractionCounts {
    int alarms_silenced = 0;
    int acknowledgements = 0;
    int mimics_opened = 0;
    std::optional<int> procedures_opened;
};
InteractionCounts interaction_counts(const SessionLog& log, const ExtractionConfig& cfg = {});

int consequence_rank(const SessionLog& log, const ExtractionConfig& cfg = {});
bool error_label(const SessionLog& log, const ExtractionConfig& cfg = {});

// Single-session metrics; overall_performance stays empty and a missing
// accuracy stays missing until assemble_dataset.
FeatureVector extract_features(const SessionLog& log, const ExtractionConfig& cfg);

// cohort = every FeatureVector of the same scenario (or group and scenario).
Performance overall_performance(const FeatureVector& fv, const std::vector<FeatureVector>& cohort,
                                const ExtractionConfig& cfg = {});

// Cohort pass over extracted rows: fills overall_performance and replaces a
// missing accuracy with a flagged 0.
void assemble_dataset(std::vector<FeatureVector>& rows, const ExtractionConfig& cfg = {});

// Features file (comma-delimited, fixed column order, empty cell = absent).
extern const std::vector<std::string> kFeatureColumns;
std::string features_to_csv(const std::vector<FeatureVector>& rows);
std::vector<FeatureVector> features_from_csv(const std::string& text, const std::string& source = "features");

}  // namespace alarmrisk
