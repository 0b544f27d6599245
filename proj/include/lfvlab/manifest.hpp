// manifest.hpp — Machine-readable run results: named numeric tables,
// pass/fail checks, the scenario echo, and the convention choices that went
// into the run. JSON on disk (atomic write), one CSV per table for plotting.

#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lfvlab/errors.hpp"

namespace lfvlab {

inline constexpr const char* kManifestSchema = "lfvlab-manifest v1";
inline constexpr const char* kToolVersion = "1.0.0";

struct TableColumn {
    std::string name;
    std::string unit;  // "1" for dimensionless
};

struct Table {
    std::string name;
    std::vector<TableColumn> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row) {
        if (row.size() != columns.size()) {
            throw ShapeError("Table '" + name + "': row width " + std::to_string(row.size()) +
                             " != column count " + std::to_string(columns.size()));
        }
        rows.push_back(std::move(row));
    }
};

struct Check {
    std::string name;
    bool pass{false};
    double value{0.0};
    double threshold{0.0};
    std::string comparator{"<="};
    std::string details;
};

struct ResultManifest {
    std::string scenario_name;
    std::string experiment;
    std::string scenario_echo;  // verbatim config; re-runnable
    std::map<std::string, std::string> settings;
    std::vector<Table> tables;
    std::vector<Check> checks;
    double runtime_seconds{0.0};

    bool all_pass() const {
        for (const auto& c : checks) {
            if (!c.pass) return false;
        }
        return true;
    }

    Table& add_table(const std::string& name, std::vector<TableColumn> columns) {
        tables.push_back(Table{name, std::move(columns), {}});
        return tables.back();
    }

    Check& add_check(const std::string& name, double value, double threshold,
                     const std::string& comparator = "<=", const std::string& details = "") {
        bool pass = false;
        if (comparator == "<=") pass = value <= threshold;
        else if (comparator == ">=") pass = value >= threshold;
        else if (comparator == "in[0.7,1.3]") pass = value >= 0.7 && value <= 1.3;
        else throw ValidationError("Check '" + name + "': unknown comparator " + comparator);
        checks.push_back(Check{name, pass, value, threshold, comparator, details});
        return checks.back();
    }

    const Table* find_table(const std::string& name) const {
        for (const auto& t : tables) {
            if (t.name == name) return &t;
        }
        return nullptr;
    }
};

// ------------------------------- JSON round trip ------------------------------

inline nlohmann::json to_json(const ResultManifest& m) {
    nlohmann::json j;
    j["schema"] = kManifestSchema;
    j["tool_version"] = kToolVersion;
    j["scenario"] = {{"name", m.scenario_name}, {"experiment", m.experiment}};
    j["scenario_echo"] = m.scenario_echo;
    j["settings"] = m.settings;
    j["runtime_seconds"] = m.runtime_seconds;
    j["tables"] = nlohmann::json::array();
    for (const auto& t : m.tables) {
        nlohmann::json jt;
        jt["name"] = t.name;
        jt["columns"] = nlohmann::json::array();
        for (const auto& c : t.columns) jt["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
        jt["rows"] = t.rows;
        j["tables"].push_back(std::move(jt));
    }
    j["checks"] = nlohmann::json::array();
    for (const auto& c : m.checks) {
        j["checks"].push_back({{"name", c.name},
                               {"pass", c.pass},
                               {"value", c.value},
                               {"threshold", c.threshold},
                               {"comparator", c.comparator},
                               {"details", c.details}});
    }
    return j;
}

inline ResultManifest manifest_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != kManifestSchema) {
        throw ValidationError("manifest: unsupported schema '" + j.value("schema", "") + "'");
    }
    ResultManifest m;
    m.scenario_name = j.at("scenario").at("name").get<std::string>();
    m.experiment = j.at("scenario").at("experiment").get<std::string>();
    m.scenario_echo = j.at("scenario_echo").get<std::string>();
    m.settings = j.at("settings").get<std::map<std::string, std::string>>();
    m.runtime_seconds = j.value("runtime_seconds", 0.0);
    for (const auto& jt : j.at("tables")) {
        Table t;
        t.name = jt.at("name").get<std::string>();
        for (const auto& jc : jt.at("columns")) {
            t.columns.push_back({jc.at("name").get<std::string>(), jc.at("unit").get<std::string>()});
        }
        t.rows = jt.at("rows").get<std::vector<std::vector<double>>>();
        m.tables.push_back(std::move(t));
    }
    for (const auto& jc : j.at("checks")) {
        m.checks.push_back(Check{jc.at("name").get<std::string>(), jc.at("pass").get<bool>(),
                                 jc.at("value").get<double>(), jc.at("threshold").get<double>(),
                                 jc.at("comparator").get<std::string>(),
                                 jc.at("details").get<std::string>()});
    }
    return m;
}

// Atomic write: temp file in the target directory, then rename.
inline void write_manifest(const ResultManifest& m, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("write_manifest: cannot open " + tmp.string());
        out << to_json(m).dump(2) << "\n";
        if (!out) throw IoError("write_manifest: write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

inline ResultManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_manifest: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return manifest_from_json(j);
}

// ------------------------------------ emit_csv --------------------------------

// One CSV per table: header "name (unit),...", full double precision.
inline void emit_csv(const ResultManifest& m, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    for (const auto& t : m.tables) {
        const fs::path path = fs::path(directory) / (t.name + ".csv");
        std::ofstream out(path);
        if (!out) throw IoError("emit_csv: cannot open " + path.string());
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            out << (c ? "," : "") << t.columns[c].name << " (" << t.columns[c].unit << ")";
        }
        out << "\n";
        char buf[64];
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17e", row[c]);
                out << (c ? "," : "") << buf;
            }
            out << "\n";
        }
        if (!out) throw IoError("emit_csv: write failed for " + path.string());
    }
}

// ----------------------------------- comparison -------------------------------

struct ManifestDiff {
    bool match{true};
    std::vector<std::string> notes;
};

// Entrywise table comparison: |a - b| <= tol * max(1, |b|). Missing or
// reshaped tables are mismatches.
inline ManifestDiff compare_manifests(const ResultManifest& a, const ResultManifest& b,
                                      double tol) {
    ManifestDiff diff;
    const auto fail = [&diff](const std::string& note) {
        diff.match = false;
        diff.notes.push_back(note);
    };
    if (a.experiment != b.experiment) fail("experiments differ");
    for (const auto& ta : a.tables) {
        const Table* tb = b.find_table(ta.name);
        if (!tb) {
            fail("table '" + ta.name + "' missing from second manifest");
            continue;
        }
        if (tb->rows.size() != ta.rows.size() ||
            (ta.rows.size() && tb->rows[0].size() != ta.rows[0].size())) {
            fail("table '" + ta.name + "' has different shape");
            continue;
        }
        double worst = 0.0;
        for (std::size_t r = 0; r < ta.rows.size(); ++r) {
            for (std::size_t c = 0; c < ta.rows[r].size(); ++c) {
                const double scale = std::max(1.0, std::abs(tb->rows[r][c]));
                worst = std::max(worst, std::abs(ta.rows[r][c] - tb->rows[r][c]) / scale);
            }
        }
        if (worst > tol) {
            fail("table '" + ta.name + "': max deviation " + std::to_string(worst) +
                 " exceeds tol " + std::to_string(tol));
        }
    }
    for (const auto& tb : b.tables) {
        if (!a.find_table(tb.name)) fail("table '" + tb.name + "' missing from first manifest");
    }
    return diff;
}

}  // namespace lfvlab
