#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfd/asymptotics.hpp"
#include "sfd/profile_ode.hpp"
#include "sfd/radial_pde.hpp"
#include "sfd/steady_state.hpp"

namespace sfd {

namespace fs = std::filesystem;

/// %.17g, enough digits for an exact double round trip.
std::string format_double(double x);

// Self-similar profiles: <stem>.csv with header xi,f,fp and a <stem>.json sidecar.
nlohmann::json profile_metadata(const Profile& profile, const ProfileOptions& options);
void write_profile_csv(const Profile& profile, const fs::path& csv);
/// Reads the three columns; params are taken from the argument.
Profile read_profile_csv(const fs::path& csv, const ProfileParams& params);
void save_profile(const Profile& profile, const ProfileOptions& options, const fs::path& stem);
Profile load_profile(const fs::path& stem);

// Steady profiles: <stem>.csv with header r,w and a <stem>.json sidecar.
nlohmann::json steady_metadata(const SteadyProfile& profile, const SteadyOptions& options);
void write_steady_csv(const SteadyProfile& profile, const fs::path& csv);
void save_steady(const SteadyProfile& profile, const SteadyOptions& options, const fs::path& stem);
/// The derivative column is not stored, so the result has an empty `wp`.
SteadyProfile load_steady(const fs::path& stem);

// Runs: one JSON object per sampled time.
/// {"t":..,"tau":..,"linf":..,"lq":{"1":..},"min_inner":..} with tau = ln(t+1).
nlohmann::json norm_record(const NormSample& sample);
NormSample parse_norm_record(const nlohmann::json& record);
void write_run_jsonl(const EvolutionRun& run, const fs::path& path);
/// Appends {"fits":[...]}.
void append_fits_jsonl(std::span<const DecayFit> fits, const fs::path& path);
struct RunFile {
    std::vector<NormSample> norms;
    std::vector<nlohmann::json> fits;
};
RunFile read_run_jsonl(const fs::path& path);

/// CSV r,u.
void write_field_csv(const RadialField& field, const fs::path& path);
/// Writes snapshot_<k>.csv for every snapshot into `dir`; returns the paths.
std::vector<fs::path> write_snapshots(const EvolutionRun& run, const fs::path& dir);

nlohmann::json to_json(const EvolveConfig& config);
/// Missing keys keep the defaults of EvolveConfig; unknown keys raise FormatError.
EvolveConfig evolve_config_from_json(const nlohmann::json& j);

/// Whole file as a string; throws FormatError when unreadable.
std::string read_text(const fs::path& path);
/// Creates parent directories as needed.
void write_text(const fs::path& path, const std::string& text);

}  // namespace sfd
