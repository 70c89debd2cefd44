#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sfd {

namespace fs = std::filesystem;

/// JSON document describing one experiment:
///
///     {"schema": 1, "name": "...", "scenario": "theorem200",
///      "parameters": {...}, "output_dir": "..."}
///
/// Missing parameters take the scenario defaults; unknown ones are rejected.
struct ExperimentManifest {
    int schema = 1;
    std::string name;
    std::string scenario;
    nlohmann::json parameters = nlohmann::json::object();
    fs::path output_dir;

    static ExperimentManifest from_json(const nlohmann::json& j);
    static ExperimentManifest load(const fs::path& path);
    [[nodiscard]] nlohmann::json to_json() const;
};

struct Verdict {
    std::string name;
    std::string anchor;   ///< the mathematical statement being checked
    double measured = 0.0;
    double theory = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Straight line in log-log coordinates drawn next to a measured norm series.
struct Overlay {
    std::string norm;     ///< key of the series in run.jsonl ("linf", "l1", ...)
    double slope = 0.0;
    double t_anchor = 1.0;
};

struct ResultRecord {
    std::string name;
    std::string scenario;
    std::string manifest_hash;
    std::string started;
    std::string finished;
    fs::path output_dir;
    std::vector<std::string> files;  ///< relative to output_dir
    std::vector<Verdict> verdicts;
    std::vector<Overlay> overlays;
    nlohmann::json parameters;       ///< after defaults were applied
    bool failed = false;             ///< the scenario threw; partial outputs are kept
    std::string error;

    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] nlohmann::json to_json() const;
    /// to_json() without the timestamps, for reproducibility comparisons.
    [[nodiscard]] nlohmann::json payload() const;
    static ResultRecord from_json(const nlohmann::json& j);
};

struct RunOptions {
    /// Multiplies solver tolerances (ODE and Newton); assertion tolerances are unaffected.
    double tol_scale = 1.0;
    /// When set, outputs go to out_root / manifest.name instead of manifest.output_dir.
    fs::path out_root;
};

std::vector<std::string> scenario_names();
nlohmann::json default_parameters(const std::string& scenario);

/// 64-bit FNV-1a of the manifest's compact JSON form, as 16 hex digits.
std::string manifest_hash(const ExperimentManifest& manifest);

/// Executes the scenario and writes result.json next to its artifacts.
ResultRecord run(const ExperimentManifest& manifest, const RunOptions& options = {});

/// Runs manifests on up to `workers` threads. Records come back in input order.
std::vector<ResultRecord> sweep(std::span<const ExperimentManifest> manifests, int workers,
                                const RunOptions& options = {});

/// All *.json manifests directly inside `dir`, sorted by file name.
std::vector<ExperimentManifest> load_manifest_dir(const fs::path& dir);

/// Every result.json below `dir`.
std::vector<ResultRecord> load_records(const fs::path& dir);

struct Report {
    std::string table;
    std::vector<fs::path> plot_files;
    bool all_pass = true;
};

/// Writes summary.txt and two-column plot-data CSVs into `out_dir`.
Report report(std::span<const ResultRecord> records, const fs::path& out_dir);

}  // namespace sfd
