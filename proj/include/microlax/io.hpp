#pragma once

// Plain-text configuration (INI), CSV tables, legacy VTK snapshots and run
// manifests. All numbers are written with std::to_chars (shortest
// round-trip, locale independent).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "microlax/field_solver.hpp"

namespace microlax::io {

std::string fmt(double v);
std::string fmt(long v);
double parse_double(const std::string& s, const std::string& what);
long parse_long(const std::string& s, const std::string& what);
bool parse_bool(const std::string& s, const std::string& what);
std::vector<double> parse_list(const std::string& s, const std::string& what);
std::string join(const std::vector<double>& v);

/// Sections of `key = value` lines. '#' and ';' start comments. Keys and
/// sections keep sorted order so dumps are canonical.
class Ini {
 public:
  using Section = std::map<std::string, std::string>;

  static Ini parse(const std::string& text);
  static Ini load(const std::string& path);

  bool has(const std::string& section) const { return sections_.count(section) != 0; }
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, const std::string& value);
  const std::map<std::string, Section>& sections() const { return sections_; }
  std::string dump() const;

 private:
  std::map<std::string, Section> sections_;
};

/// Builds a validated SimConfig. Unknown sections or keys are rejected
/// (except the [manifest] section written by RunManifest).
SimConfig config_from_ini(const Ini& ini);
/// Every field of the config, so that config_from_ini(config_to_ini(c))
/// reproduces c.
Ini config_to_ini(const SimConfig& c);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
  void write(const std::string& path) const;
};

/// Cell-centred field as CSV with columns i, j, x, y, value.
void write_field_csv(const std::string& path, const Grid& g, const Field& f);
/// Reads a field from a CSV with a `value` column, or one number per line.
Field read_field(const std::string& path, int expected_size);

/// Legacy structured-points file with the cell-centred fields as point data.
void write_vtk(const std::string& path, const Grid& g, const std::vector<std::pair<std::string, const Field*>>& fields);

struct RunManifest {
  SimConfig config;
  std::string version = MICROLAX_VERSION;
  std::string command;
  std::string started;
  std::string finished;
  std::string status = "ok";
  std::optional<Diagnostics> final_diagnostics;
  long accepted_steps = 0;
  long rejected_attempts = 0;

  /// The config sections plus a [manifest] section; the file can be passed
  /// back to `simulate --config`.
  std::string str() const;
  void write(const std::string& path) const;
};

std::string utc_timestamp();

}  // namespace microlax::io
