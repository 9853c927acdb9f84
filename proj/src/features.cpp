#include "alarmrisk/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/io_util.hpp"
#include "json.hpp"

namespace alarmrisk {

using nlohmann::json;

void ExtractionConfig::validate() const {
    if (!(impurity_low < impurity_high)) throw ConfigError("impurity_low must be below impurity_high");
    if (!(shutdown_level < impurity_low)) throw ConfigError("shutdown_level must be below impurity_low");
    if (!(s3_good_survival < s3_optimal_survival))
        throw ConfigError("s3_good_survival must be below s3_optimal_survival");
    if (!(spike_factor > 0)) throw ConfigError("spike_factor must be positive");
    if (!(final_slope_window_s > 0)) throw ConfigError("final_slope_window_s must be positive");
}

ExtractionConfig extraction_config_from_json(const std::string& text) {
    ExtractionConfig cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("extraction config: ") + e.what());
    }
    try {
        if (j.contains("procedure_target_mean")) {
            for (const auto& [k, v] : j.at("procedure_target_mean").items())
                cfg.procedure_target_mean[parse_scenario(k)] = v.get<double>();
        }
        auto num = [&](const char* key, double& field) {
            if (j.contains(key)) field = j.at(key).get<double>();
        };
        num("psv01_level", cfg.psv01_level);
        num("impurity_low", cfg.impurity_low);
        num("impurity_high", cfg.impurity_high);
        num("shutdown_level", cfg.shutdown_level);
        num("reactor_overheat_level", cfg.reactor_overheat_level);
        num("s3_optimal_survival", cfg.s3_optimal_survival);
        num("s3_good_survival", cfg.s3_good_survival);
        num("spike_factor", cfg.spike_factor);
        num("spike_min_step", cfg.spike_min_step);
        num("final_slope_window_s", cfg.final_slope_window_s);
        if (j.contains("mimic_count_mode")) {
            const auto m = j.at("mimic_count_mode").get<std::string>();
            if (m == "rising_edge") cfg.mimic_count_mode = CountMode::RisingEdge;
            else if (m == "value_change") cfg.mimic_count_mode = CountMode::ValueChange;
            else throw ConfigError("mimic_count_mode must be rising_edge or value_change");
        }
        if (j.contains("percentile_cohort")) {
            const auto m = j.at("percentile_cohort").get<std::string>();
            if (m == "scenario") cfg.percentile_cohort = PercentileCohort::Scenario;
            else if (m == "group_scenario") cfg.percentile_cohort = PercentileCohort::GroupAndScenario;
            else throw ConfigError("percentile_cohort must be scenario or group_scenario");
        }
        if (j.contains("variables")) {
            const json& v = j.at("variables");
            auto& m = cfg.vars;
            auto str = [&](const char* key, std::string& field) {
                if (v.contains(key)) field = v.at(key).get<std::string>();
            };
            str("reaction_switch_s12", m.reaction_switch_s12);
            str("reaction_switch_s3", m.reaction_switch_s3);
            str("response_action_s1", m.response_action_s1);
            str("response_switch_s2", m.response_switch_s2);
            str("cooling_temperature_s3", m.cooling_temperature_s3);
            if (v.contains("activity_s3")) m.activity_s3 = v.at("activity_s3").get<std::vector<std::string>>();
            str("accuracy_s1", m.accuracy_s1);
            str("accuracy_s2", m.accuracy_s2);
            str("accuracy_s3", m.accuracy_s3);
            str("recovery_alarm", m.recovery_alarm);
            str("tank_pressure", m.tank_pressure);
            str("emergency_shutdown", m.emergency_shutdown);
            str("reactor_temperature", m.reactor_temperature);
            str("alarms_silenced", m.alarms_silenced);
            str("acknowledgements", m.acknowledgements);
            str("mimics_opened", m.mimics_opened);
            str("procedures_opened", m.procedures_opened);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("extraction config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExtractionConfig load_extraction_config(const std::filesystem::path& path) {
    return extraction_config_from_json(io::read_file(path));
}

std::vector<double> value_change_times(const TimeSeries& s) {
    std::vector<double> out;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s.v[i] != s.v[i - 1]) out.push_back(s.t[i]);
    return out;
}

std::size_t count_rising_edges(const TimeSeries& s) {
    if (s.empty()) return 0;
    std::size_t n = s.v[0] != 0.0 ? 1 : 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s.v[i - 1] == 0.0 && s.v[i] != 0.0) ++n;
    return n;
}

std::size_t count_events(const TimeSeries& s, CountMode mode) {
    return mode == CountMode::RisingEdge ? count_rising_edges(s) : value_change_times(s).size();
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw ContractError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

const TimeSeries& require(const SessionLog& log, const std::string& name) {
    if (const auto* s = log.find(name)) return *s;
    throw ExtractionError(name, "session " + log.meta.participant_id + ": required variable '" + name +
                                    "' missing");
}

std::optional<double> first_change_after(const TimeSeries& s, double from) {
    for (double t : value_change_times(s))
        if (t >= from) return t;
    return std::nullopt;
}

std::optional<double> last_change_after(const TimeSeries& s, double from) {
    std::optional<double> out;
    for (double t : value_change_times(s))
        if (t >= from) out = t;
    return out;
}

double min_value(const TimeSeries& s) { return *std::min_element(s.v.begin(), s.v.end()); }
double max_value(const TimeSeries& s) { return *std::max_element(s.v.begin(), s.v.end()); }

// Least-squares slope over the trailing window, centred on the last value so
// that a constant trace gives exactly 0.
double trailing_slope(const TimeSeries& s, double window) {
    if (s.size() < 2) return 0.0;
    const double t_end = s.t.back();
    const double v_end = s.v.back();
    std::size_t first = s.size() - 1;
    while (first > 0 && s.t[first - 1] >= t_end - window) --first;
    if (s.size() - first < 2) first = s.size() - 2;
    const std::size_t n = s.size() - first;
    double mt = 0, mv = 0;
    for (std::size_t i = first; i < s.size(); ++i) {
        mt += s.t[i] - t_end;
        mv += s.v[i] - v_end;
    }
    mt /= static_cast<double>(n);
    mv /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = first; i < s.size(); ++i) {
        const double dt = s.t[i] - t_end - mt;
        sxy += dt * (s.v[i] - v_end - mv);
        sxx += dt * dt;
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

const std::string& accuracy_variable(const ExtractionConfig& cfg, Scenario s) {
    switch (s) {
        case Scenario::S1: return cfg.vars.accuracy_s1;
        case Scenario::S2: return cfg.vars.accuracy_s2;
        case Scenario::S3: return cfg.vars.accuracy_s3;
    }
    return cfg.vars.accuracy_s1;
}

}  // namespace

std::optional<double> reaction_time(const SessionLog& log, const ExtractionConfig& cfg) {
    const auto& name =
        log.meta.scenario == Scenario::S3 ? cfg.vars.reaction_switch_s3 : cfg.vars.reaction_switch_s12;
    const auto t = first_change_after(require(log, name), log.meta.fault_start_s);
    if (!t) return std::nullopt;
    return *t - log.meta.fault_start_s;
}

std::optional<double> spike_onset(const TimeSeries& s, double fault_start, const ExtractionConfig& cfg) {
    std::vector<double> pre;
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (s.t[i + 1] <= fault_start) pre.push_back(std::abs(s.v[i + 1] - s.v[i]));
    const double base = pre.empty() ? 0.0 : percentile(pre, 0.5);
    const double threshold = cfg.spike_factor * std::max(base, cfg.spike_min_step);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s.t[i] < fault_start) continue;
        if (s.v[i + 1] - s.v[i] > threshold) return s.t[i];
    }
    return std::nullopt;
}

std::optional<double> response_time(const SessionLog& log, const ExtractionConfig& cfg) {
    const double f = log.meta.fault_start_s;
    switch (log.meta.scenario) {
        case Scenario::S1: {
            const auto t = last_change_after(require(log, cfg.vars.response_action_s1), f);
            if (!t) return std::nullopt;
            return *t - f;
        }
        case Scenario::S2: {
            const auto t = first_change_after(require(log, cfg.vars.response_switch_s2), f);
            if (!t) return std::nullopt;
            return *t - f;
        }
        case Scenario::S3: {
            const auto onset = spike_onset(require(log, cfg.vars.cooling_temperature_s3), f, cfg);
            if (!onset) return log.meta.duration_s - f;  // survived the whole task
            std::optional<double> last;
            for (const auto& name : cfg.vars.activity_s3) {
                const auto* s = log.find(name);
                if (!s) continue;
                for (double t : value_change_times(*s))
                    if (t >= f && t < *onset && (!last || t > *last)) last = t;
            }
            if (!last) return std::nullopt;
            return *last - f;
        }
    }
    return std::nullopt;
}

std::optional<double> recovery_time(const SessionLog& log, const ExtractionConfig& cfg) {
    if (log.meta.scenario == Scenario::S3)
        throw ContractError("recovery time is not defined for scenario S3");
    const auto& s = require(log, cfg.vars.recovery_alarm);
    if (s.empty() || s.v.back() != 0.0) return std::nullopt;
    std::optional<double> cleared;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s.v[i - 1] != 0.0 && s.v[i] == 0.0 && s.t[i] >= log.meta.fault_start_s) cleared = s.t[i];
    if (!cleared) return std::nullopt;
    return *cleared - log.meta.fault_start_s;
}

std::optional<double> accuracy_mse(const SessionLog& log, const ExtractionConfig& cfg) {
    const auto target = cfg.procedure_target_mean.find(log.meta.scenario);
    if (target == cfg.procedure_target_mean.end())
        throw ConfigError("procedure_target_mean not set for " + to_string(log.meta.scenario));
    const auto& s = require(log, accuracy_variable(cfg, log.meta.scenario));
    std::optional<std::size_t> last;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s.v[i] != s.v[i - 1] && s.t[i] >= log.meta.fault_start_s) last = i;
    if (!last) return std::nullopt;
    double sum = 0;
    for (std::size_t i = *last; i < s.size(); ++i) {
        const double d = s.v[i] - target->second;
        sum += d * d;
    }
    return sum / static_cast<double>(s.size() - *last);
}

int count_alarm_activations(const SessionLog& log) {
    std::size_t n = 0;
    for (const auto& [name, s] : log.series)
        if (is_alarm_variable(name)) n += count_rising_edges(s);
    return static_cast<int>(n);
}

InteractionCounts interaction_counts(const SessionLog& log, const ExtractionConfig& cfg) {
    auto count = [&](const std::string& name, CountMode mode) {
        const auto* s = log.find(name);
        return s ? static_cast<int>(count_events(*s, mode)) : 0;
    };
    InteractionCounts c;
    c.alarms_silenced = count(cfg.vars.alarms_silenced, CountMode::RisingEdge);
    c.acknowledgements = count(cfg.vars.acknowledgements, CountMode::RisingEdge);
    c.mimics_opened = count(cfg.vars.mimics_opened, cfg.mimic_count_mode);
    if (log.meta.group == Group::G3 || log.meta.group == Group::G4)
        c.procedures_opened = count(cfg.vars.procedures_opened, CountMode::RisingEdge);
    return c;
}

int consequence_rank(const SessionLog& log, const ExtractionConfig& cfg) {
    if (log.meta.scenario == Scenario::S3) {
        const auto& temp = require(log, cfg.vars.reactor_temperature);
        return !temp.empty() && max_value(temp) >= cfg.reactor_overheat_level ? 5 : 1;
    }
    const auto& pressure = require(log, cfg.vars.tank_pressure);
    const auto& emergency = require(log, cfg.vars.emergency_shutdown);
    if (pressure.empty()) throw ExtractionError(cfg.vars.tank_pressure, "tank pressure series is empty");
    const double p = min_value(pressure);
    const bool low_low = p <= cfg.shutdown_level;
    const bool tripped = !emergency.empty() && max_value(emergency) >= 1.0;
    if (low_low && tripped) return 5;
    if (low_low || tripped) return 4;
    if (p < cfg.impurity_low) return 3;
    if (p < cfg.impurity_high) return 2;
    return 1;
}

bool error_label(const SessionLog& log, const ExtractionConfig& cfg) {
    if (log.meta.scenario == Scenario::S3) return consequence_rank(log, cfg) == 5;
    if (consequence_rank(log, cfg) >= 4) return true;
    if (log.meta.scenario == Scenario::S2 &&
        !first_change_after(require(log, cfg.vars.response_switch_s2), log.meta.fault_start_s))
        return true;
    const auto& pressure = require(log, cfg.vars.tank_pressure);
    const bool increasing = trailing_slope(pressure, cfg.final_slope_window_s) > 0.0;
    const bool normal = pressure.v.back() >= cfg.psv01_level;
    return !(increasing || normal);
}

FeatureVector extract_features(const SessionLog& log, const ExtractionConfig& cfg) {
    FeatureVector fv;
    fv.participant_id = log.meta.participant_id;
    fv.group = log.meta.group;
    fv.scenario = log.meta.scenario;
    fv.reaction_time_s = reaction_time(log, cfg);
    fv.response_time_s = response_time(log, cfg);
    if (log.meta.scenario != Scenario::S3) fv.recovery_time_s = recovery_time(log, cfg);
    fv.accuracy_mse = accuracy_mse(log, cfg);
    const auto counts = interaction_counts(log, cfg);
    fv.alarms_silenced = counts.alarms_silenced;
    fv.acknowledgements = counts.acknowledgements;
    fv.mimics_opened = counts.mimics_opened;
    fv.procedures_opened = counts.procedures_opened;
    fv.num_alarms = count_alarm_activations(log);
    fv.consequence = consequence_rank(log, cfg);
    fv.error = error_label(log, cfg);
    return fv;
}

Performance overall_performance(const FeatureVector& fv, const std::vector<FeatureVector>& cohort,
                                const ExtractionConfig& cfg) {
    if (cohort.empty()) throw ContractError("overall_performance needs a non-empty cohort");
    if (fv.scenario == Scenario::S3) {
        if (!fv.response_time_s) return Performance::Poor;
        const double survival = *fv.response_time_s;
        if (survival >= cfg.s3_optimal_survival && fv.consequence == 1) return Performance::Optimal;
        if (survival >= cfg.s3_good_survival && survival < cfg.s3_optimal_survival) return Performance::Good;
        return Performance::Poor;
    }
    std::vector<double> times;
    for (const auto& c : cohort)
        if (c.recovery_time_s) times.push_back(*c.recovery_time_s);
    if (!fv.recovery_time_s || times.empty()) return Performance::Poor;
    const double rt = *fv.recovery_time_s;
    if (rt <= percentile(times, 0.25)) return Performance::Optimal;
    if (rt <= percentile(times, 0.50)) return Performance::Good;
    return Performance::Poor;
}

void assemble_dataset(std::vector<FeatureVector>& rows, const ExtractionConfig& cfg) {
    for (auto& r : rows) {
        std::vector<FeatureVector> cohort;
        for (const auto& c : rows) {
            if (c.scenario != r.scenario) continue;
            if (cfg.percentile_cohort == PercentileCohort::GroupAndScenario && c.group != r.group) continue;
            cohort.push_back(c);
        }
        r.overall_performance = overall_performance(r, cohort, cfg);
    }
    for (auto& r : rows) {
        if (!r.accuracy_mse) {
            r.accuracy_mse = 0.0;
            r.accuracy_filled = true;
        }
    }
}

const std::vector<std::string> kFeatureColumns = {
    "participant_id", "group", "scenario", "reaction_time_s", "response_time_s", "recovery_time_s",
    "accuracy_mse", "accuracy_filled", "alarms_silenced", "acknowledgements", "mimics_opened",
    "procedures_opened", "num_alarms", "consequence", "overall_performance", "error",
    "tlx", "sart", "spam", "familiarity", "training"};

namespace {

std::string cell(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }
std::string cell(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

}  // namespace

std::string features_to_csv(const std::vector<FeatureVector>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < kFeatureColumns.size(); ++i) out << (i ? "," : "") << kFeatureColumns[i];
    out << '\n';
    for (const auto& r : rows) {
        out << r.participant_id << ',' << to_string(r.group) << ',' << to_string(r.scenario) << ','
            << cell(r.reaction_time_s) << ',' << cell(r.response_time_s) << ',' << cell(r.recovery_time_s) << ','
            << cell(r.accuracy_mse) << ',' << (r.accuracy_filled ? 1 : 0) << ',' << r.alarms_silenced << ','
            << r.acknowledgements << ',' << r.mimics_opened << ',' << cell(r.procedures_opened) << ','
            << r.num_alarms << ',' << r.consequence << ','
            << (r.overall_performance ? to_string(*r.overall_performance) : std::string()) << ','
            << (r.error ? 1 : 0) << ',' << cell(r.subjective.tlx) << ',' << cell(r.subjective.sart) << ','
            << cell(r.subjective.spam) << ',' << cell(r.subjective.familiarity) << ','
            << cell(r.subjective.training) << '\n';
    }
    return out.str();
}

std::vector<FeatureVector> features_from_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError(source + ": empty features file");
    const auto header = io::split_row(line);
    if (header != kFeatureColumns) throw InputError(source + ": unexpected features header");

    std::vector<FeatureVector> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto c = io::split_row(line);
        if (c.size() != header.size())
            throw InputError(source + ": row " + std::to_string(lineno) + " has wrong cell count");
        auto fail = [&](const std::string& col) -> InputError {
            return InputError(source + ": bad value in column " + col + " at row " + std::to_string(lineno));
        };
        auto opt_real = [&](std::size_t k) -> std::optional<double> {
            if (c[k].empty()) return std::nullopt;
            auto v = io::parse_finite(c[k]);
            if (!v) throw fail(header[k]);
            return v;
        };
        auto opt_int = [&](std::size_t k) -> std::optional<int> {
            auto v = opt_real(k);
            if (!v) return std::nullopt;
            if (*v != std::floor(*v) || *v < 0) throw fail(header[k]);
            return static_cast<int>(*v);
        };
        auto req_int = [&](std::size_t k) {
            auto v = opt_int(k);
            if (!v) throw fail(header[k]);
            return *v;
        };
        FeatureVector r;
        r.participant_id = c[0];
        r.group = parse_group(c[1]);
        r.scenario = parse_scenario(c[2]);
        r.reaction_time_s = opt_real(3);
        r.response_time_s = opt_real(4);
        r.recovery_time_s = opt_real(5);
        r.accuracy_mse = opt_real(6);
        r.accuracy_filled = req_int(7) != 0;
        r.alarms_silenced = req_int(8);
        r.acknowledgements = req_int(9);
        r.mimics_opened = req_int(10);
        r.procedures_opened = opt_int(11);
        r.num_alarms = req_int(12);
        r.consequence = req_int(13);
        if (r.consequence < 1 || r.consequence > 5) throw fail(header[13]);
        if (!c[14].empty()) r.overall_performance = parse_performance(c[14]);
        r.error = req_int(15) != 0;
        r.subjective = {opt_real(16), opt_real(17), opt_real(18), opt_real(19), opt_real(20)};
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace alarmrisk
