// scenario.hpp — Flat key=value scenario configs ("lfvlab-scenario v1"):
// parsing, validation with exhaustive violation lists, and construction of the
// physics objects an experiment needs.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lfvlab/bath.hpp"
#include "lfvlab/closed_system.hpp"
#include "lfvlab/collision.hpp"
#include "lfvlab/errors.hpp"
#include "lfvlab/numerics.hpp"

namespace lfvlab {

inline constexpr const char* kScenarioHeader = "lfvlab-scenario v1";

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {
        "closed_baseline",    "lgks_integrity",          "greens_audit",
        "thermal_audit",      "kernel_audit",            "zero_coupling_reduction",
        "brute_force_equality", "collision_extraction",  "lindblad_plus_consistency",
        "multi_frequency_check", "gaussian_crosscheck",
    };
    return kinds;
}

// ----------------------------------- Scenario --------------------------------

struct Scenario {
    std::string name;
    std::string experiment;

    // [system]
    double mass{1.0};
    std::string potential_kind{"harmonic"};  // "free" or "harmonic"
    double omega0{1.0};
    double hbar{1.0};

    // [grid]
    std::size_t grid_points{0};
    double x_min{0.0};
    double x_max{0.0};

    // [mesh]
    std::size_t mesh_steps{0};
    double t_total{0.0};

    // [bath]
    std::size_t bath_count{0};
    double bath_mass{1.0};
    std::vector<double> bath_omegas;
    std::vector<double> bath_couplings;
    double kT{1.0};  // 0 = zero temperature

    // [schedule]
    double tau{0.0};
    double epsilon{0.0};
    std::size_t collisions{0};
    double schedule_omega{0.0};
    std::vector<double> schedule_omegas;  // per-collision, optional

    // [oracle]
    std::size_t ancilla_dim{12};

    // [tolerances] free-form numeric knobs with per-experiment defaults
    std::map<std::string, double> tolerances;

    // [output]
    std::string output_dir{"."};
    unsigned seed{12345};

    std::string raw_text;  // verbatim config, echoed into manifests

    bool has_system{false}, has_grid{false}, has_mesh{false}, has_bath{false},
        has_schedule{false};

    double tolerance(const std::string& key, double fallback) const {
        const auto it = tolerances.find(key);
        return it == tolerances.end() ? fallback : it->second;
    }

    SystemSpec system_spec() const {
        if (potential_kind == "free") return SystemSpec::free_particle(mass, hbar);
        return SystemSpec::harmonic(mass, omega0, hbar);
    }

    PositionGrid grid() const { return PositionGrid(grid_points, x_min, x_max); }

    TimeMesh mesh() const { return TimeMesh(mesh_steps, t_total); }

    BathSpec bath() const {
        return BathSpec::from_temperature(bath_mass, bath_omegas, bath_couplings, kT, hbar);
    }

    CollisionSchedule schedule() const {
        const double base = schedule_omegas.empty() ? schedule_omega : schedule_omegas.front();
        CollisionSchedule s(tau, epsilon, collisions, base);
        if (!schedule_omegas.empty()) s = multi_frequency_schedule(schedule_omegas, s);
        return s;
    }
};

struct ParseResult {
    std::optional<Scenario> scenario;
    std::vector<std::string> errors;

    bool ok() const { return scenario.has_value() && errors.empty(); }
};

// ------------------------------------ parsing --------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline bool parse_double(const std::string& text, double& out) {
    std::istringstream in(text);
    in >> out;
    return static_cast<bool>(in) && in.eof();
}

inline bool parse_size(const std::string& text, std::size_t& out) {
    std::istringstream in(text);
    long long v = 0;
    in >> v;
    if (!in || !in.eof() || v < 0) return false;
    out = static_cast<std::size_t>(v);
    return true;
}

inline bool parse_list(const std::string& text, std::vector<double>& out) {
    out.clear();
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        double v = 0.0;
        if (!parse_double(trim(item), v)) return false;
        out.push_back(v);
    }
    return !out.empty();
}

}  // namespace detail

// Parse the config text. Syntax errors carry line numbers; semantic
// constraint violations are all enumerated, not just the first.
inline ParseResult parse_scenario(const std::string& text) {
    using detail::trim;
    ParseResult result;
    Scenario s;
    s.raw_text = text;
    std::vector<std::string>& errors = result.errors;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::string section;
    bool header_seen = false;

    static const std::map<std::string, std::set<std::string>> known = {
        {"scenario", {"name", "experiment"}},
        {"system", {"mass", "potential", "omega0", "hbar"}},
        {"grid", {"points", "x_min", "x_max"}},
        {"mesh", {"steps", "t_total"}},
        {"bath", {"count", "mass", "omegas", "couplings", "kT"}},
        {"schedule", {"tau", "epsilon", "collisions", "omega", "omegas"}},
        {"oracle", {"ancilla_dim"}},
        {"tolerances", {}},  // free-form numeric keys
        {"output", {"directory", "seed"}},
    };

    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (!header_seen) {
            if (t.empty()) continue;
            if (t != kScenarioHeader) {
                errors.push_back("line " + std::to_string(line_no) +
                                 ": expected header '" + kScenarioHeader + "', got '" + t + "'");
            }
            header_seen = true;
            continue;
        }
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                errors.push_back("line " + std::to_string(line_no) + ": unterminated section '" +
                                 t + "'");
                continue;
            }
            section = t.substr(1, t.size() - 2);
            if (known.find(section) == known.end()) {
                errors.push_back("line " + std::to_string(line_no) + ": unknown section [" +
                                 section + "]");
                section.clear();
            }
            if (section == "system") s.has_system = true;
            if (section == "grid") s.has_grid = true;
            if (section == "mesh") s.has_mesh = true;
            if (section == "bath") s.has_bath = true;
            if (section == "schedule") s.has_schedule = true;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) +
                             ": expected 'key = value', got '" + t + "'");
            continue;
        }
        if (section.empty()) {
            errors.push_back("line " + std::to_string(line_no) + ": key outside any section");
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        const auto hash = value.find('#');
        if (hash != std::string::npos) value = trim(value.substr(0, hash));
        const auto& keys = known.at(section);
        if (section != "tolerances" && keys.find(key) == keys.end()) {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key +
                             "' in section [" + section + "]");
            continue;
        }

        const auto bad = [&](const char* what) {
            errors.push_back("line " + std::to_string(line_no) + ": " + what + " for '" + key +
                             "': '" + value + "'");
        };
        if (section == "scenario") {
            if (key == "name") s.name = value;
            if (key == "experiment") s.experiment = value;
        } else if (section == "system") {
            if (key == "mass" && !detail::parse_double(value, s.mass)) bad("bad number");
            if (key == "potential") s.potential_kind = value;
            if (key == "omega0" && !detail::parse_double(value, s.omega0)) bad("bad number");
            if (key == "hbar" && !detail::parse_double(value, s.hbar)) bad("bad number");
        } else if (section == "grid") {
            if (key == "points" && !detail::parse_size(value, s.grid_points)) bad("bad integer");
            if (key == "x_min" && !detail::parse_double(value, s.x_min)) bad("bad number");
            if (key == "x_max" && !detail::parse_double(value, s.x_max)) bad("bad number");
        } else if (section == "mesh") {
            if (key == "steps" && !detail::parse_size(value, s.mesh_steps)) bad("bad integer");
            if (key == "t_total" && !detail::parse_double(value, s.t_total)) bad("bad number");
        } else if (section == "bath") {
            if (key == "count" && !detail::parse_size(value, s.bath_count)) bad("bad integer");
            if (key == "mass" && !detail::parse_double(value, s.bath_mass)) bad("bad number");
            if (key == "omegas" && !detail::parse_list(value, s.bath_omegas)) bad("bad list");
            if (key == "couplings" && !detail::parse_list(value, s.bath_couplings)) bad("bad list");
            if (key == "kT" && !detail::parse_double(value, s.kT)) bad("bad number");
        } else if (section == "schedule") {
            if (key == "tau" && !detail::parse_double(value, s.tau)) bad("bad number");
            if (key == "epsilon" && !detail::parse_double(value, s.epsilon)) bad("bad number");
            if (key == "collisions" && !detail::parse_size(value, s.collisions)) bad("bad integer");
            if (key == "omega" && !detail::parse_double(value, s.schedule_omega)) bad("bad number");
            if (key == "omegas" && !detail::parse_list(value, s.schedule_omegas)) bad("bad list");
        } else if (section == "oracle") {
            if (key == "ancilla_dim" && !detail::parse_size(value, s.ancilla_dim)) bad("bad integer");
        } else if (section == "tolerances") {
            double v = 0.0;
            if (!detail::parse_double(value, v)) {
                bad("bad number");
            } else {
                s.tolerances[key] = v;
            }
        } else if (section == "output") {
            if (key == "directory") s.output_dir = value;
            if (key == "seed") {
                std::size_t v = 0;
                if (!detail::parse_size(value, v)) bad("bad integer");
                else s.seed = static_cast<unsigned>(v);
            }
        }
    }
    if (!header_seen) errors.push_back("line 1: missing header '" + std::string(kScenarioHeader) + "'");

    // ---- semantic validation: collect every violated constraint ----
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), s.experiment) == kinds.end()) {
        errors.push_back("scenario.experiment '" + s.experiment +
                         "' is not in the documented set");
    }
    if (s.name.empty()) errors.push_back("scenario.name must be non-empty");

    const auto needs = [&](bool present, const char* what) {
        if (!present) errors.push_back(std::string("experiment '") + s.experiment +
                                       "' requires section [" + what + "]");
        return present;
    };
    const std::string& e = s.experiment;
    const bool wants_grid = e == "closed_baseline" || e == "thermal_audit" ||
                            e == "zero_coupling_reduction" || e == "brute_force_equality" ||
                            e == "collision_extraction" || e == "lindblad_plus_consistency" ||
                            e == "gaussian_crosscheck";
    const bool wants_mesh = e == "greens_audit" || e == "kernel_audit" ||
                            e == "zero_coupling_reduction" || e == "brute_force_equality" ||
                            e == "lindblad_plus_consistency" || e == "gaussian_crosscheck";
    const bool wants_bath = e == "greens_audit" || e == "thermal_audit" || e == "kernel_audit" ||
                            e == "zero_coupling_reduction" || e == "brute_force_equality" ||
                            e == "collision_extraction" || e == "lindblad_plus_consistency" ||
                            e == "multi_frequency_check" || e == "gaussian_crosscheck";
    const bool wants_schedule = e == "zero_coupling_reduction" || e == "brute_force_equality" ||
                                e == "collision_extraction" || e == "multi_frequency_check";
    const bool wants_system = e == "closed_baseline" || e == "zero_coupling_reduction" ||
                              e == "brute_force_equality" || e == "collision_extraction" ||
                              e == "gaussian_crosscheck";

    if (wants_system) needs(s.has_system, "system");
    if (wants_grid && needs(s.has_grid, "grid")) {
        if (s.grid_points < 2) errors.push_back("grid.points must be >= 2");
        if (!(s.x_min < s.x_max)) errors.push_back("grid requires x_min < x_max");
    }
    if (wants_mesh && needs(s.has_mesh, "mesh")) {
        if (s.mesh_steps < 1) errors.push_back("mesh.steps must be >= 1");
        if (!(s.t_total > 0.0)) errors.push_back("mesh.t_total must be > 0");
    }
    if (s.has_system) {
        if (!(s.mass > 0.0)) errors.push_back("system.mass must be > 0");
        if (!(s.hbar > 0.0)) errors.push_back("system.hbar must be > 0");
        if (s.potential_kind != "free" && s.potential_kind != "harmonic") {
            errors.push_back("system.potential must be 'free' or 'harmonic', got '" +
                             s.potential_kind + "'");
        }
        if (s.potential_kind == "harmonic" && !(s.omega0 > 0.0)) {
            errors.push_back("system.omega0 must be > 0 for the harmonic potential");
        }
    }
    if (wants_bath && needs(s.has_bath, "bath")) {
        if (s.bath_count == 0) errors.push_back("bath.count must be >= 1");
        // single-element lists broadcast to the full oscillator count
        if (s.bath_omegas.size() == 1 && s.bath_count > 1) {
            s.bath_omegas.assign(s.bath_count, s.bath_omegas.front());
        }
        if (s.bath_couplings.size() == 1 && s.bath_count > 1) {
            s.bath_couplings.assign(s.bath_count, s.bath_couplings.front());
        }
        if (s.bath_omegas.size() != s.bath_count) {
            errors.push_back("bath.omegas length " + std::to_string(s.bath_omegas.size()) +
                             " differs from bath.count " + std::to_string(s.bath_count));
        }
        if (s.bath_couplings.size() != s.bath_count) {
            errors.push_back("bath.couplings length " + std::to_string(s.bath_couplings.size()) +
                             " differs from bath.count " + std::to_string(s.bath_count));
        }
        if (!(s.bath_mass > 0.0)) errors.push_back("bath.mass must be > 0");
        if (s.kT < 0.0) errors.push_back("bath.kT must be >= 0 (0 = zero temperature)");
        for (std::size_t i = 0; i < s.bath_omegas.size(); ++i) {
            if (!(s.bath_omegas[i] > 0.0)) {
                errors.push_back("bath.omegas[" + std::to_string(i) + "] must be > 0");
            }
        }
    }
    if (wants_schedule && needs(s.has_schedule, "schedule")) {
        if (!(s.tau > 0.0)) errors.push_back("schedule.tau must be > 0");
        if (!(s.epsilon > 0.0)) errors.push_back("schedule.epsilon must be > 0");
        if (s.collisions == 0) errors.push_back("schedule.collisions must be >= 1");
        if (s.epsilon > 0.0 && s.tau > 0.0 && s.epsilon > s.tau / 10.0) {
            errors.push_back("schedule violates the rule epsilon <= tau/10 (epsilon = " +
                             std::to_string(s.epsilon) + ", tau = " + std::to_string(s.tau) + ")");
        }
        if (s.schedule_omegas.empty() && !(s.schedule_omega > 0.0)) {
            errors.push_back("schedule needs omega > 0 or a per-collision omegas list");
        }
        if (!s.schedule_omegas.empty() && s.schedule_omegas.size() != s.collisions) {
            errors.push_back("schedule.omegas length " + std::to_string(s.schedule_omegas.size()) +
                             " differs from schedule.collisions " + std::to_string(s.collisions));
        }
        if (s.has_bath && s.bath_count != s.collisions) {
            errors.push_back("bath.count " + std::to_string(s.bath_count) +
                             " must equal schedule.collisions " + std::to_string(s.collisions) +
                             " (one fresh oscillator per collision)");
        }
    }
    if (s.ancilla_dim < 2 || s.ancilla_dim > 16) {
        errors.push_back("oracle.ancilla_dim must be in [2, 16]");
    }

    if (errors.empty()) result.scenario = std::move(s);
    return result;
}

}  // namespace lfvlab
