#include "alarmrisk/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "json.hpp"

#include "alarmrisk/io_util.hpp"

namespace alarmrisk {

using nlohmann::json;

LoadError::LoadError(LoadErrorKind kind, std::string file, std::size_t row, std::string column,
                     const std::string& what)
    : InputError(what), kind_(kind), file_(std::move(file)), row_(row), column_(std::move(column)) {}

namespace {

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_timestamp_name(const std::string& name) {
    static const std::set<std::string> names = {"t", "time", "time_s", "timestamp", "seconds"};
    return names.count(lower(name)) > 0;
}

std::vector<std::string_view> split_lines(const std::string& text) {
    std::vector<std::string_view> lines;
    std::string_view rest(text);
    while (!rest.empty()) {
        auto pos = rest.find('\n');
        lines.push_back(rest.substr(0, pos));
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 1);
    }
    // trailing blank lines carry no data
    while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string_view::npos) lines.pop_back();
    return lines;
}

std::string read_existing(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw LoadError(LoadErrorKind::FileNotFound, path.string(), 0, "",
                        "file not found: " + path.string());
    }
    return io::read_file(path);
}

}  // namespace

std::vector<SessionManifest> load_manifest(const std::filesystem::path& path) {
    const std::string text = read_existing(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw LoadError(LoadErrorKind::BadManifest, path.string(), 0, "",
                        "manifest " + path.string() + ": " + e.what());
    }
    const json& list = doc.is_object() && doc.contains("sessions") ? doc.at("sessions") : doc;
    if (!list.is_array()) {
        throw LoadError(LoadErrorKind::BadManifest, path.string(), 0, "",
                        "manifest must be an array of sessions");
    }
    const auto base = path.parent_path();
    std::vector<SessionManifest> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const json& rec = list[i];
        try {
            SessionManifest m;
            std::filesystem::path p = rec.at("path").get<std::string>();
            m.path = p.is_absolute() ? p : base / p;
            m.participant_id = rec.at("participant_id").get<std::string>();
            m.group = parse_group(rec.at("group").get<std::string>());
            m.scenario = parse_scenario(rec.at("scenario").get<std::string>());
            if (rec.contains("fault_start_s")) m.fault_start_s = rec.at("fault_start_s").get<double>();
            if (rec.contains("duration_s") && !rec.at("duration_s").is_null())
                m.duration_s = rec.at("duration_s").get<double>();
            out.push_back(std::move(m));
        } catch (const json::exception& e) {
            throw LoadError(LoadErrorKind::BadManifest, path.string(), i + 1, "",
                            "manifest record " + std::to_string(i + 1) + ": " + e.what());
        } catch (const InputError& e) {
            throw LoadError(LoadErrorKind::BadManifest, path.string(), i + 1, "",
                            "manifest record " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

LoadReport load_session_report(const SessionManifest& manifest, const LoadOptions& options) {
    const std::string file = manifest.path.string();
    const std::string text = read_existing(manifest.path);
    const auto lines = split_lines(text);
    if (lines.empty()) throw LoadError(LoadErrorKind::EmptyFile, file, 0, "", "empty file: " + file);

    const auto header = io::split_row(lines[0]);
    std::size_t ts_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (is_timestamp_name(header[c])) {
            ts_col = c;
            break;
        }
    }
    if (ts_col == header.size()) {
        throw LoadError(LoadErrorKind::MissingTimestamp, file, 1, "",
                        file + ": missing timestamp column in header");
    }
    if (lines.size() < 2) throw LoadError(LoadErrorKind::EmptyFile, file, 0, "", "no data rows: " + file);

    LoadReport rep;
    rep.log.meta.participant_id = manifest.participant_id;
    rep.log.meta.group = manifest.group;
    rep.log.meta.scenario = manifest.scenario;
    rep.log.meta.fault_start_s = manifest.fault_start_s;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != ts_col) rep.log.series[header[c]];
    }

    bool have_prev = false;
    double prev_t = 0;
    std::vector<std::optional<double>> parsed(header.size());
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t row = li + 1;
        const auto cells = io::split_row(lines[li]);
        if (cells.size() != header.size()) {
            throw LoadError(LoadErrorKind::RaggedRow, file, row, "",
                            file + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                " cells, header has " + std::to_string(header.size()));
        }
        rep.cells_in_file += cells.size();

        std::size_t bad_col = header.size();
        std::size_t empties = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            parsed[c].reset();
            if (cells[c].empty() && c != ts_col) {
                ++empties;
                continue;
            }
            parsed[c] = io::parse_finite(cells[c]);
            if (!parsed[c] && bad_col == header.size()) bad_col = c;
        }
        if (bad_col != header.size()) {
            if (options.strict) {
                throw LoadError(LoadErrorKind::BadCell, file, row, header[bad_col],
                                file + ": unparseable value '" + cells[bad_col] + "' at row " +
                                    std::to_string(row) + ", column " + header[bad_col]);
            }
            rep.cells_rejected += cells.size();
            rep.rejected_rows.push_back(row);
            continue;
        }
        const double t = *parsed[ts_col];
        if (have_prev && !(t > prev_t)) {
            throw LoadError(LoadErrorKind::NonMonotoneTimestamp, file, row, header[ts_col],
                            file + ": timestamp at row " + std::to_string(row) + " does not increase");
        }
        have_prev = true;
        prev_t = t;
        rep.cells_empty += empties;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parsed[c]) continue;
            ++rep.cells_parsed;
            if (c == ts_col) continue;
            auto& s = rep.log.series[header[c]];
            s.t.push_back(t);
            s.v.push_back(*parsed[c]);
        }
    }
    if (!have_prev) throw LoadError(LoadErrorKind::EmptyFile, file, 0, "", "no usable rows: " + file);

    if (manifest.duration_s) {
        rep.log.meta.duration_s = *manifest.duration_s;
    } else if (manifest.scenario == Scenario::S3) {
        rep.log.meta.duration_s = kDefaultS3Duration;
    } else {
        rep.log.meta.duration_s = prev_t;
    }
    return rep;
}

SessionLog load_session(const SessionManifest& manifest) { return load_session_report(manifest).log; }

std::string session_to_csv(const SessionLog& log) {
    std::vector<double> grid;
    for (const auto& [_, s] : log.series) grid.insert(grid.end(), s.t.begin(), s.t.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::ostringstream out;
    out << "t";
    for (const auto& [name, _] : log.series) out << ',' << name;
    out << '\n';
    std::vector<std::size_t> cursor(log.series.size(), 0);
    for (double t : grid) {
        out << io::format_double(t);
        std::size_t k = 0;
        for (const auto& [_, s] : log.series) {
            out << ',';
            auto& i = cursor[k++];
            if (i < s.t.size() && s.t[i] == t) out << io::format_double(s.v[i++]);
        }
        out << '\n';
    }
    return out.str();
}

void write_session(const SessionLog& log, const std::filesystem::path& path) {
    io::write_file_atomic(path, session_to_csv(log));
}

std::map<std::string, SubjectiveScores> load_subjective(const std::filesystem::path& path) {
    const std::string file = path.string();
    const std::string text = read_existing(path);
    const auto lines = split_lines(text);
    if (lines.empty()) throw LoadError(LoadErrorKind::EmptyFile, file, 0, "", "empty file: " + file);

    const auto header = io::split_row(lines[0]);
    auto col = [&](const char* name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (lower(header[c]) == name) return c;
        throw LoadError(LoadErrorKind::MissingColumn, file, 1, name,
                        file + ": missing column '" + name + "'");
    };
    const std::size_t id_col = col("participant_id");
    const std::size_t cols[5] = {col("tlx"), col("sart"), col("spam"), col("familiarity"), col("training")};
    static const char* names[5] = {"tlx", "sart", "spam", "familiarity", "training"};

    std::map<std::string, SubjectiveScores> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t row = li + 1;
        const auto cells = io::split_row(lines[li]);
        if (cells.size() != header.size()) {
            throw LoadError(LoadErrorKind::RaggedRow, file, row, "",
                            file + ": row " + std::to_string(row) + " has wrong cell count");
        }
        const std::string& id = cells[id_col];
        if (id.empty()) {
            throw LoadError(LoadErrorKind::BadCell, file, row, "participant_id",
                            file + ": empty participant_id at row " + std::to_string(row));
        }
        std::optional<double> v[5];
        for (int k = 0; k < 5; ++k) {
            const std::string& cell = cells[cols[k]];
            if (cell.empty()) continue;
            v[k] = io::parse_finite(cell);
            if (!v[k]) {
                throw LoadError(LoadErrorKind::BadCell, file, row, names[k],
                                file + ": unparseable " + names[k] + " '" + cell + "' at row " +
                                    std::to_string(row));
            }
        }
        SubjectiveScores s{v[0], v[1], v[2], v[3], v[4]};
        if (!out.emplace(id, s).second) {
            throw LoadError(LoadErrorKind::DuplicateParticipant, file, row, "participant_id",
                            file + ": duplicate participant_id '" + id + "' at row " + std::to_string(row));
        }
    }
    return out;
}

}  // namespace alarmrisk
