#include <filesystem>
#include <fstream>
#include <sstream>

#include "caloric/cli.hpp"
#include "caloric/errors.hpp"
#include "caloric/snapshot.hpp"

namespace caloric::cli {

bool RunSummary::passed() const {
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

void RunSummary::check_le(const std::string& name, double value, double threshold) {
  checks.push_back({name, value, "<=", threshold, value <= threshold});
}

void RunSummary::check_ge(const std::string& name, double value, double threshold) {
  checks.push_back({name, value, ">=", threshold, value >= threshold});
}

void RunSummary::value(const std::string& key, double v) { values.emplace_back(key, format_number(v)); }
void RunSummary::value(const std::string& key, const std::string& v) { values.emplace_back(key, v); }

const Check* RunSummary::find_check(const std::string& name) const {
  for (const Check& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string RunSummary::find_value(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  return "";
}

Output::Output(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir_ + "': " + ec.message());
}

void Output::csv(RunSummary& s, const std::string& name, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os << "# ";
  for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << "\n";
  }
  const std::string path = dir_ + "/" + name;
  std::ofstream f(path, std::ios::binary);
  f << os.str();
  if (!f) throw std::runtime_error("cannot write " + path);
  s.artifacts.push_back(name);
}

void Output::snapshot(RunSummary& s, const std::string& name, const DataPair& d) {
  write_snapshot(dir_ + "/" + name, snapshot_of(d));
  s.artifacts.push_back(name);
}

void Output::snapshot(RunSummary& s, const std::string& name, const MapField& phi) {
  write_snapshot(dir_ + "/" + name, snapshot_of(phi));
  s.artifacts.push_back(name);
}

std::string summary_text(const RunSummary& s) {
  std::ostringstream os;
  os << "command=" << s.command << "\n";
  os << "config_hash=" << s.config_hash << "\n";
  os << "wall_seconds=" << format_number(s.wall_seconds) << "\n";
  os << "status=" << (s.passed() ? "pass" : "fail") << "\n";
  for (const auto& [k, v] : s.values) os << "value." << k << "=" << v << "\n";
  for (const Check& c : s.checks)
    os << "check." << c.name << "=" << (c.pass ? "pass" : "fail") << " " << format_number(c.value) << " " << c.relation
       << " " << format_number(c.threshold) << "\n";
  std::string files;
  for (const auto& a : s.artifacts) files += (files.empty() ? "" : ",") + a;
  os << "artifacts=" << files << "\n";
  return os.str();
}

void Output::summary(const RunSummary& s) {
  const std::string path = dir_ + "/summary.txt";
  std::ofstream f(path, std::ios::binary);
  f << summary_text(s);
  if (!f) throw std::runtime_error("cannot write " + path);
}

}  // namespace caloric::cli
