#include "alarmrisk/session.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "alarmrisk/errors.hpp"

namespace alarmrisk {

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

int parse_code(std::string_view text, char prefix, int max_code, const char* what) {
    std::string u = upper(text);
    std::string_view body = u;
    if (!body.empty() && body.front() == prefix) body.remove_prefix(1);
    if (body.size() == 1 && body[0] >= '1' && body[0] < '1' + max_code) return body[0] - '0';
    throw InputError(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

}  // namespace

std::string to_string(Group g) { return "G" + std::to_string(code(g)); }
std::string to_string(Scenario s) { return "S" + std::to_string(code(s)); }

Group parse_group(std::string_view text) {
    return static_cast<Group>(parse_code(text, 'G', 4, "group"));
}

Scenario parse_scenario(std::string_view text) {
    return static_cast<Scenario>(parse_code(text, 'S', 3, "scenario"));
}

std::string to_string(Performance p) {
    switch (p) {
        case Performance::Optimal: return "Optimal";
        case Performance::Good: return "Good";
        case Performance::Poor: return "Poor";
    }
    return "?";
}

Performance parse_performance(std::string_view text) {
    std::string u = upper(text);
    if (u == "OPTIMAL") return Performance::Optimal;
    if (u == "GOOD") return Performance::Good;
    if (u == "POOR") return Performance::Poor;
    throw InputError("unknown performance class '" + std::string(text) + "'");
}

const TimeSeries* SessionLog::find(const std::string& name) const {
    auto it = series.find(name);
    return it == series.end() ? nullptr : &it->second;
}

const TimeSeries& SessionLog::at(const std::string& name) const {
    if (const auto* s = find(name)) return *s;
    throw ContractError("session " + meta.participant_id + ": variable '" + name + "' missing");
}

bool is_alarm_variable(std::string_view name) {
    return name.size() > 3 && name.substr(0, 3) == "All" &&
           std::isdigit(static_cast<unsigned char>(name[3]));
}

std::vector<Violation> validate_session(const SessionLog& log) {
    std::vector<Violation> out;
    const auto& m = log.meta;
    if (!(m.fault_start_s >= 0)) {
        out.push_back({ViolationKind::MetaInvalid, "", m.fault_start_s, "fault_start_s must be >= 0"});
    }
    if (!(m.duration_s > m.fault_start_s)) {
        out.push_back({ViolationKind::MetaInvalid, "", m.duration_s,
                       "duration_s must exceed fault_start_s"});
    }
    for (const auto& [name, s] : log.series) {
        if (s.t.size() != s.v.size()) {
            out.push_back({ViolationKind::LengthMismatch, name, 0.0,
                           "timestamp and value counts differ"});
            continue;
        }
        for (std::size_t i = 1; i < s.t.size(); ++i) {
            if (!(s.t[i] > s.t[i - 1])) {
                std::ostringstream msg;
                msg << "timestamps not strictly increasing at t=" << s.t[i];
                out.push_back({ViolationKind::NonMonotoneTime, name, s.t[i], msg.str()});
                break;
            }
        }
        if (is_alarm_variable(name)) {
            for (std::size_t i = 0; i < s.v.size(); ++i) {
                if (s.v[i] != 0.0 && s.v[i] != 1.0) {
                    std::ostringstream msg;
                    msg << "alarm value " << s.v[i] << " outside {0,1} at t=" << s.t[i];
                    out.push_back({ViolationKind::NonBinaryAlarm, name, s.t[i], msg.str()});
                    break;
                }
            }
        }
    }
    return out;
}

}  // namespace alarmrisk
