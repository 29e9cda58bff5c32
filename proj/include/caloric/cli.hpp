#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "caloric/grid.hpp"

namespace caloric::cli {

enum class KeyType { integer, real, text, boolean, real_list };

struct KeySpec {
  std::string name;
  KeyType type;
  std::string fallback;
  double lo = -1e300, hi = 1e300;      // inclusive numeric range
  std::vector<std::string> choices;    // text keys: allowed values (empty: any)
  std::string help;
};

const std::vector<KeySpec>& key_specs();

// Flat key=value configuration; every key is typed and range checked when set, unknown keys are
// rejected with ConfigError.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  // "key=value" form, as given to --set
  void set_assignment(const std::string& assignment);
  // '#' starts a comment; blank lines are ignored.
  void load_text(const std::string& text, const std::string& origin = "config");
  void load_file(const std::string& path);
  // Sets the keys of a named fixture; later set() calls override them.
  void apply_preset(const std::string& name);

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  // Sorted key=value lines of every key; identical configurations give identical text.
  std::string canonical() const;
  // FNV-1a 64 of canonical(), 16 hex digits.
  std::string hash() const;
  // Cross-key checks that single keys cannot express.
  void validate() const;

 private:
  const std::string& raw(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

std::vector<std::string> preset_names();

GridSpec grid_of(const RunConfig& cfg);

// Initial data built from the configuration. For geodesic kinds the scalar profiles are kept for the
// oracles (exp(base, u0 e) with velocity u1 e).
struct DataSetup {
  DataPair data;
  std::string kind;
  bool geodesic = false;
  Vec u0, u1;
  Vec direction;
  Point2 center{0.0, 0.0};
  double support_radius = 0.0;  // radius around center containing every cell of nonzero energy
  std::vector<std::string> warnings;
};
DataSetup make_data(const RunConfig& cfg, const GridSpec& g);

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=" or ">="
  double threshold = 0.0;
  bool pass = false;
};

struct RunSummary {
  std::string command;
  std::string config_hash;
  double wall_seconds = 0.0;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::string> artifacts;

  bool passed() const;
  void check_le(const std::string& name, double value, double threshold);
  void check_ge(const std::string& name, double value, double threshold);
  void value(const std::string& key, double v);
  void value(const std::string& key, const std::string& v);
  const Check* find_check(const std::string& name) const;
  std::string find_value(const std::string& key) const;
};

// Output directory with artifact bookkeeping. CSVs carry a one-line '#' header; numbers use the shortest form that reads back exactly.
class Output {
 public:
  explicit Output(std::string dir);
  const std::string& dir() const { return dir_; }
  void csv(RunSummary& s, const std::string& name, const std::vector<std::string>& columns,
           const std::vector<std::vector<double>>& rows);
  void snapshot(RunSummary& s, const std::string& name, const DataPair& d);
  void snapshot(RunSummary& s, const std::string& name, const MapField& phi);
  // Writes summary.txt; always the last file of a run.
  void summary(const RunSummary& s);

 private:
  std::string dir_;
};

std::string format_number(double v);
std::string summary_text(const RunSummary& s);

RunSummary cmd_simulate(const RunConfig& cfg, Output& out);
RunSummary cmd_heatflow(const RunConfig& cfg, Output& out);
RunSummary cmd_esd(const RunConfig& cfg, Output& out);
RunSummary cmd_verify(const RunConfig& cfg, Output& out);
RunSummary cmd_localize(const RunConfig& cfg, Output& out);

// Runs a command by name, writes the summary and maps the outcome to an exit code:
// 0 all checks pass, 2 a check failed, 3 configuration error, 4 numerical abort.
int run_command(const std::string& command, const RunConfig& cfg, const std::string& out_dir, std::string* error = nullptr,
                RunSummary* summary = nullptr);

}  // namespace caloric::cli
