// lfvlab — scenario runner CLI: validate configs, execute experiments, emit
// manifests + CSV tables, and compare manifests within a tolerance.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "lfvlab/experiments.hpp"
#include "lfvlab/manifest.hpp"
#include "lfvlab/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lfvlab::IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int do_validate(const std::string& path) {
    const auto result = lfvlab::parse_scenario(read_file(path));
    if (result.ok()) {
        std::cout << "valid scenario '" << result.scenario->name << "' (experiment "
                  << result.scenario->experiment << ")\n";
        return 0;
    }
    std::cerr << path << ": " << result.errors.size() << " violation(s)\n";
    for (const auto& e : result.errors) std::cerr << "  - " << e << "\n";
    return 1;
}

int do_run(const std::string& path) {
    const auto result = lfvlab::parse_scenario(read_file(path));
    if (!result.ok()) {
        std::cerr << path << ": invalid scenario\n";
        for (const auto& e : result.errors) std::cerr << "  - " << e << "\n";
        return 2;
    }
    const lfvlab::Scenario& s = *result.scenario;
    lfvlab::ResultManifest manifest;
    try {
        manifest = lfvlab::run_experiment(s);
    } catch (const std::exception& e) {
        std::cerr << "experiment failed: " << e.what() << "\n";
        return 3;
    }
    namespace fs = std::filesystem;
    const fs::path dir(s.output_dir);
    const fs::path manifest_path = dir / (s.name + ".manifest.json");
    lfvlab::write_manifest(manifest, manifest_path.string());
    lfvlab::emit_csv(manifest, dir.string());
    std::cout << "wrote " << manifest_path.string() << " (" << manifest.tables.size()
              << " tables, " << manifest.checks.size() << " checks, "
              << manifest.runtime_seconds << " s)\n";
    int failures = 0;
    for (const auto& c : manifest.checks) {
        std::cout << (c.pass ? "  [pass] " : "  [FAIL] ") << c.name << ": " << c.value << " "
                  << c.comparator << " " << c.threshold << "\n";
        if (!c.pass) {
            ++failures;
            std::cerr << "check failed: " << c.name << " (value " << c.value << ", threshold "
                      << c.threshold << ") " << c.details << "\n";
        }
    }
    return failures == 0 ? 0 : 1;
}

int do_compare(const std::string& a, const std::string& b, double tol) {
    const auto ma = lfvlab::read_manifest(a);
    const auto mb = lfvlab::read_manifest(b);
    const auto diff = lfvlab::compare_manifests(ma, mb, tol);
    if (diff.match) {
        std::cout << "manifests match within tol " << tol << "\n";
        return 0;
    }
    std::cerr << "manifests differ:\n";
    for (const auto& note : diff.notes) std::cerr << "  - " << note << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lfvlab — open-system propagator laboratory"};
    app.require_subcommand(1);

    std::string scenario_path;
    auto* run = app.add_subcommand("run", "run a scenario and write manifest + CSV tables");
    run->add_option("scenario", scenario_path, "scenario file")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "validate a scenario file");
    validate->add_option("scenario", validate_path, "scenario file")->required();

    std::string cmp_a, cmp_b;
    double tol = 1e-12;
    auto* compare = app.add_subcommand("compare", "compare two manifests");
    compare->add_option("manifest-a", cmp_a, "first manifest")->required();
    compare->add_option("manifest-b", cmp_b, "second manifest")->required();
    compare->add_option("--tol", tol, "tolerance (|a-b| <= tol*max(1,|b|))");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(scenario_path);
        if (validate->parsed()) return do_validate(validate_path);
        if (compare->parsed()) return do_compare(cmp_a, cmp_b, tol);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
