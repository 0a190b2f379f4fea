#pragma once

#include "epsb/kmc.hpp"
#include "epsb/lattice.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace epsb::io {

namespace fs = std::filesystem;

/// Shortest round-trip text for a double ("{:.17g}").
std::string format_double(double x);

/// Writes a header line and rows of numbers. Throws IoError.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Numeric CSV with one header line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const fs::path& path);

/// Profile as "u,value" rows.
void write_profile_csv(const fs::path& path, const Profile& profile);
/// Reads "u,value" rows on a uniform grid starting at 0 and ending at 1.
Profile read_profile_csv(const fs::path& path);

/// Profile as the JSON text {"grid_size": G, "values": [...]}.
std::string profile_to_json(const Profile& profile);
Profile profile_from_json(const std::string& text);

/// Space-time grid read from "t,u,value" rows; values are not range checked.
struct GridData {
  double horizon = 0.0;
  std::size_t time_steps = 0;
  std::size_t grid_size = 0;
  std::vector<double> values;  ///< row-major in time
};
GridData read_grid_csv(const fs::path& path);

void write_space_time_csv(const fs::path& path, const SpaceTimeProfile& rho);

/// Binary dump: "EPSBGRID", u64 frames, u64 grid size, f64 horizon, then row-major f64, little-endian.
void write_space_time_binary(const fs::path& path, const SpaceTimeProfile& rho);
SpaceTimeProfile read_space_time_binary(const fs::path& path);

/**
 * Trajectory as a JSON header (params, seed, stream, initial and final
 * configurations, schedule, event count) next to a binary event file with
 * records (f64 time, u8 kind, u32 site), little-endian, 13 bytes each.
 */
void write_trajectory(const fs::path& json_path, const fs::path& events_path, const Trajectory& trajectory);
Trajectory read_trajectory(const fs::path& json_path, const fs::path& events_path);

/// Snapshot densities as "t,x,eta" rows.
void write_snapshots_csv(const fs::path& path, const Trajectory& trajectory);

}  // namespace epsb::io
