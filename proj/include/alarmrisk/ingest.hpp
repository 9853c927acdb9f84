#pragma once
// Batch loaders for session logs, dataset manifests and questionnaire files.
//
// Session log layout: comma-delimited, header row, one timestamp column
// (named t, time, time_s, timestamp or seconds; column 0 by convention) and
// any number of numeric variable columns. An empty cell means "no sample of
// that variable at this timestamp", which lets irregular series share a file.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/session.hpp"

namespace alarmrisk {

enum class LoadErrorKind {
    FileNotFound,
    EmptyFile,
    MissingTimestamp,
    NonMonotoneTimestamp,
    BadCell,
    RaggedRow,
    MissingColumn,
    DuplicateParticipant,
    BadManifest,
};

class LoadError : public InputError {
public:
    // row is the 1-based line number in the file (the header is line 1); 0 if n/a.
    LoadError(LoadErrorKind kind, std::string file, std::size_t row, std::string column,
              const std::string& what);

    LoadErrorKind kind() const { return kind_; }
    const std::string& file() const { return file_; }
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    LoadErrorKind kind_;
    std::string file_;
    std::size_t row_;
    std::string column_;
};

struct SessionManifest {
    std::filesystem::path path;
    std::string participant_id;
    Group group = Group::G1;
    Scenario scenario = Scenario::S1;
    double fault_start_s = kDefaultFaultStart;
    // Unset: 1080 s for S3, otherwise the last logged timestamp.
    std::optional<double> duration_s;
};

// JSON array of records, or an object with a "sessions" array. Relative log
// paths resolve against the manifest's directory.
std::vector<SessionManifest> load_manifest(const std::filesystem::path& path);

struct LoadOptions {
    // false: rows holding an unparseable cell are dropped and counted instead of
    // aborting the load.
    bool strict = true;
};

struct LoadReport {
    SessionLog log;
    std::size_t cells_in_file = 0;  // data cells, header excluded
    std::size_t cells_parsed = 0;   // numeric samples stored
    std::size_t cells_empty = 0;
    std::size_t cells_rejected = 0;  // every cell of a dropped row
    std::vector<std::size_t> rejected_rows;
};

LoadReport load_session_report(const SessionManifest& manifest, const LoadOptions& options = {});
SessionLog load_session(const SessionManifest& manifest);

// Inverse of load_session: timestamps are the union over all series.
std::string session_to_csv(const SessionLog& log);
void write_session(const SessionLog& log, const std::filesystem::path& path);

// Header must hold participant_id,tlx,sart,spam,familiarity,training (any order).
std::map<std::string, SubjectiveScores> load_subjective(const std::filesystem::path& path);

}  // namespace alarmrisk
