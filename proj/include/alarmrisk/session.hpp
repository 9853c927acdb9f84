#pragma once
// In-memory model of recorded sessions and the per-session feature rows
// derived from them. Everything here is a plain value type.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alarmrisk {

enum class Group : std::uint8_t { G1 = 1, G2 = 2, G3 = 3, G4 = 4 };
enum class Scenario : std::uint8_t { S1 = 1, S2 = 2, S3 = 3 };

inline constexpr Group kAllGroups[] = {Group::G1, Group::G2, Group::G3, Group::G4};
inline constexpr Scenario kAllScenarios[] = {Scenario::S1, Scenario::S2, Scenario::S3};

// Ordinal codes 1..4 / 1..3, the encoding used by the regression models.
constexpr int code(Group g) { return static_cast<int>(g); }
constexpr int code(Scenario s) { return static_cast<int>(s); }

std::string to_string(Group g);
std::string to_string(Scenario s);
// Accepts "G2", "g2" or "2". Throws InputError otherwise.
Group parse_group(std::string_view text);
Scenario parse_scenario(std::string_view text);

inline constexpr double kDefaultFaultStart = 60.0;
inline constexpr double kDefaultS3Duration = 1080.0;

struct SessionMeta {
    std::string participant_id;
    Group group = Group::G1;
    Scenario scenario = Scenario::S1;
    double fault_start_s = kDefaultFaultStart;
    double duration_s = kDefaultS3Duration;
};

// One recorded variable. t and v always have equal length.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> v;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
    bool operator==(const TimeSeries&) const = default;
};

struct SessionLog {
    SessionMeta meta;
    std::map<std::string, TimeSeries> series;

    const TimeSeries* find(const std::string& name) const;
    // Throws ContractError naming the variable when absent.
    const TimeSeries& at(const std::string& name) const;
};

// Alarm tags are "All" followed by a digit (All2_1, All17_3, ...).
bool is_alarm_variable(std::string_view name);

enum class ViolationKind { MetaInvalid, LengthMismatch, NonMonotoneTime, NonBinaryAlarm };

struct Violation {
    ViolationKind kind;
    std::string variable;  // empty for metadata violations
    double timestamp = 0;  // first offending timestamp
    std::string message;
};

// Reports every broken invariant, at most one entry per (variable, kind).
std::vector<Violation> validate_session(const SessionLog& log);

enum class Performance : std::uint8_t { Optimal = 0, Good = 1, Poor = 2 };
std::string to_string(Performance p);
Performance parse_performance(std::string_view text);

// Questionnaire scores. Blank cells stay empty.
struct SubjectiveScores {
    std::optional<double> tlx;
    std::optional<double> sart;
    std::optional<double> spam;
    std::optional<double> familiarity;
    std::optional<double> training;
    bool operator==(const SubjectiveScores&) const = default;
};

struct FeatureVector {
    std::string participant_id;
    Group group = Group::G1;
    Scenario scenario = Scenario::S1;

    std::optional<double> reaction_time_s;
    std::optional<double> response_time_s;  // survival time for S3
    std::optional<double> recovery_time_s;  // never set for S3
    std::optional<double> accuracy_mse;
    bool accuracy_filled = false;  // accuracy_mse is a 0 fill, not a measurement
    int alarms_silenced = 0;
    int acknowledgements = 0;
    int mimics_opened = 0;
    std::optional<int> procedures_opened;  // G3/G4 only
    int num_alarms = 0;
    int consequence = 1;
    std::optional<Performance> overall_performance;  // needs the cohort pass
    bool error = false;

    SubjectiveScores subjective;

    bool operator==(const FeatureVector&) const = default;
};

}  // namespace alarmrisk
