#include "epsb/io.hpp"

#include "epsb/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace epsb::io {

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

namespace {

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return in;
}

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::IoError, "truncated binary file");
  return v;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  std::string line;
  for (std::size_t i = 0; i < header.size(); ++i) line += (i ? "," : "") + header[i];
  out << line << '\n';
  for (const auto& row : rows) {
    line.clear();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += ',';
      line += format_double(row[i]);
    }
    out << line << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::IoError, "missing CSV column " + name);
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty CSV " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::IoError, "non-numeric CSV cell '" + cell + "' in " + path.string());
      }
    }
    if (row.size() != t.header.size()) throw Error(ErrorCode::IoError, "ragged CSV row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_profile_csv(const fs::path& path, const Profile& profile) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i <= profile.grid_size(); ++i) rows.push_back({profile.node(i), profile[i]});
  write_csv(path, {"u", "value"}, rows);
}

Profile read_profile_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t cu = t.column("u"), cv = t.column("value");
  if (t.rows.size() < 3) throw Error(ErrorCode::IoError, "profile CSV needs at least 3 rows");
  const std::size_t G = t.rows.size() - 1;
  std::vector<double> v(G + 1);
  for (std::size_t i = 0; i <= G; ++i) {
    if (std::abs(t.rows[i][cu] - static_cast<double>(i) / static_cast<double>(G)) > 1e-9) {
      throw Error(ErrorCode::IoError, "profile CSV must use a uniform grid from 0 to 1");
    }
    v[i] = t.rows[i][cv];
  }
  return Profile(std::move(v));
}

std::string profile_to_json(const Profile& profile) {
  nlohmann::json j = {{"grid_size", profile.grid_size()}, {"values", profile.values()}};
  return j.dump();
}

Profile profile_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != j.at("grid_size").get<std::size_t>() + 1) {
      throw Error(ErrorCode::IoError, "profile JSON: values must have grid_size+1 entries");
    }
    return Profile(std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("profile JSON: ") + e.what());
  }
}

GridData read_grid_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t ct = t.column("t"), cu = t.column("u"), cv = t.column("value");
  std::map<double, std::map<double, double>> grid;
  for (const auto& row : t.rows) grid[row[ct]][row[cu]] = row[cv];
  if (grid.size() < 2) throw Error(ErrorCode::IoError, "grid CSV needs at least two times");
  GridData g;
  g.time_steps = grid.size() - 1;
  g.grid_size = grid.begin()->second.size() - 1;
  g.horizon = grid.rbegin()->first;
  for (const auto& [time, row] : grid) {
    if (row.size() != g.grid_size + 1) throw Error(ErrorCode::IoError, "grid CSV rows differ in length");
    for (const auto& [u, v] : row) g.values.push_back(v);
  }
  return g;
}

void write_space_time_csv(const fs::path& path, const SpaceTimeProfile& rho) {
  std::ofstream out = open_out(path);
  out << "t,u,value\n";
  for (std::size_t m = 0; m < rho.frames(); ++m) {
    const std::string t = format_double(rho.time(m));
    for (std::size_t i = 0; i <= rho.grid_size(); ++i) {
      out << t << ',' << format_double(rho.node(i)) << ',' << format_double(rho.at(m, i)) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void write_space_time_binary(const fs::path& path, const SpaceTimeProfile& rho) {
  std::ofstream out = open_out(path, true);
  out.write("EPSBGRID", 8);
  put<std::uint64_t>(out, rho.frames());
  put<std::uint64_t>(out, rho.grid_size());
  put<double>(out, rho.horizon());
  out.write(reinterpret_cast<const char*>(rho.values().data()),
            static_cast<std::streamsize>(rho.values().size() * sizeof(double)));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

SpaceTimeProfile read_space_time_binary(const fs::path& path) {
  std::ifstream in = open_in(path, true);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "EPSBGRID", 8) != 0) throw Error(ErrorCode::IoError, "not a grid dump: " + path.string());
  const auto frames = get<std::uint64_t>(in);
  const auto G = get<std::uint64_t>(in);
  const auto horizon = get<double>(in);
  std::vector<double> v(frames * (G + 1));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::IoError, "truncated grid dump");
  return SpaceTimeProfile(horizon, G, std::move(v));
}

void write_trajectory(const fs::path& json_path, const fs::path& events_path, const Trajectory& tr) {
  nlohmann::json j;
  j["params"] = {{"n", tr.params.n}, {"theta", tr.params.theta}, {"alpha", tr.params.alpha},
                 {"beta", tr.params.beta}, {"horizon", tr.params.horizon}};
  j["seed"] = tr.seed;
  j["stream"] = tr.stream;
  j["initial"] = tr.initial.to_string();
  j["final"] = tr.final_state.to_string();
  j["schedule"] = tr.schedule;
  j["event_count"] = tr.event_count;
  j["events_recorded"] = tr.events_recorded;
  j["events_file"] = events_path.filename().string();
  j["event_record"] = "f64 time, u8 kind, u32 site; little-endian";
  std::ofstream jo = open_out(json_path);
  jo << j.dump(2) << '\n';

  std::ofstream out = open_out(events_path, true);
  for (const auto& e : tr.events) {
    put<double>(out, e.time);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(e.kind));
    put<std::uint32_t>(out, e.site);
  }
  if (!out || !jo) throw Error(ErrorCode::IoError, "write failed for trajectory");
}

Trajectory read_trajectory(const fs::path& json_path, const fs::path& events_path) {
  std::ifstream ji = open_in(json_path);
  nlohmann::json j;
  try {
    ji >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("bad trajectory header: ") + e.what());
  }
  Trajectory tr;
  const auto& p = j.at("params");
  tr.params = validate_params(p.at("n").get<long long>(), p.at("theta").get<double>(), p.at("alpha").get<double>(),
                              p.at("beta").get<double>(), p.at("horizon").get<double>());
  tr.seed = j.at("seed").get<std::uint64_t>();
  tr.stream = j.at("stream").get<std::uint64_t>();
  tr.initial = Configuration::from_string(j.at("initial").get<std::string>());
  tr.final_state = Configuration::from_string(j.at("final").get<std::string>());
  tr.schedule = j.at("schedule").get<std::vector<double>>();
  tr.event_count = j.at("event_count").get<std::size_t>();
  tr.events_recorded = j.at("events_recorded").get<bool>();

  std::ifstream in = open_in(events_path, true);
  for (;;) {
    double t;
    in.read(reinterpret_cast<char*>(&t), sizeof t);
    if (in.gcount() == 0) break;
    Event e;
    e.time = t;
    const auto kind = get<std::uint8_t>(in);
    if (kind > 3) throw Error(ErrorCode::IoError, "bad event kind in " + events_path.string());
    e.kind = static_cast<EventKind>(kind);
    e.site = get<std::uint32_t>(in);
    tr.events.push_back(e);
  }
  if (tr.events_recorded && tr.events.size() != tr.event_count) {
    throw Error(ErrorCode::IoError, "event file does not match the header count");
  }
  if (!tr.schedule.empty() && tr.events_recorded) {
    for (double s : tr.schedule) tr.snapshots.push_back(tr.at(s));
  }
  return tr;
}

void write_snapshots_csv(const fs::path& path, const Trajectory& tr) {
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < tr.snapshots.size() && j < tr.schedule.size(); ++j) {
    for (std::size_t x = 1; x < tr.params.n; ++x) {
      rows.push_back({tr.schedule[j], static_cast<double>(x), static_cast<double>(tr.snapshots[j][x])});
    }
  }
  write_csv(path, {"t", "x", "eta"}, rows);
}

}  // namespace epsb::io
