// Runs the acceptance fixtures through the command layer and prints one PASS/FAIL line per criterion.
// Usage: caloric_acceptance [output-dir] [criterion...]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "caloric/cli.hpp"
#include "caloric/errors.hpp"
#include "caloric/parallel.hpp"

namespace fs = std::filesystem;
using caloric::cli::RunConfig;
using caloric::cli::RunSummary;

namespace {

struct Run {
  std::string label;
  std::string command;
  std::string preset;
  std::vector<std::string> overrides;
  std::vector<std::string> checks;  // names that must be present and pass
  std::vector<std::string> report;  // values echoed on the criterion line; "key=value" entries must match
};

struct Criterion {
  int number;
  std::string title;
  std::vector<Run> runs;
};

std::vector<Criterion> criteria() {
  return {
      {1, "energy identity",
       {{"geodesic", "esd", "geodesic-gaussian", {"esd.symmetry=false"}, {"energy_identity"}, {}},
        {"multibump", "esd", "multibump", {"esd.symmetry=false", "esd.oracle=false", "esd.identity_tol=5e-3"},
         {"energy_identity"}, {}}}},
      {2, "ESD against the scalar oracle", {{"geodesic", "esd", "geodesic-gaussian", {"esd.symmetry=false"}, {"oracle"}, {}}}},
      {3, "dilation, translation and time reversal",
       {{"dilation", "esd", "dilation", {}, {"symmetry.dilation", "symmetry.translation", "symmetry.time_reversal"}, {}}}},
      {4, "gauge identities",
       {{"refinement", "verify", "random-smooth", {"n=512", "verify.levels=3", "verify.suite=identities"},
         {"order.torsion", "order.curvature", "order.heatflow", "order.A_s"}, {}},
        {"abelian", "verify", "geodesic-gaussian", {"n=256", "verify.suite=identities"},
         {"abelian.torsion", "abelian.curvature", "abelian.A_s", "abelian.A_x"}, {}}}},
      {5, "wave tension", {{"tension", "verify", "wave", {"verify.suite=tension"}, {"tension", "tension.reduction"}, {}}}},
      {6, "covariant heat",
       {{"covariant", "verify", "random-smooth", {"n=256", "verify.levels=2", "verify.covariant_s_max=0.25", "verify.suite=covariant"},
         {"covariant.dominance", "covariant.mass_increase", "covariant.energy_inequality", "covariant.mass_diffusion_order"},
         {}}}},
      {7, "wave solver",
       {{"wave", "simulate", "wave", {}, {"energy_drift", "lightcone_leak", "oracle_order"}, {"lightcone.inside=true"}}}},
      {8, "energy metric",
       {{"metric", "verify", "random-smooth", {"verify.suite=metric"}, {"metric.self", "metric.quotient", "metric.energy"}, {}}}},
      {9, "localization",
       {{"offset-bump", "localize", "offset-bump", {},
         {"normalized.scale", "normalized.center", "dilation.scale_ratio", "tightness.increases", "tightness.exponent"}, {}},
        {"two-scale", "localize", "two-scale", {}, {"gap.present", "gap.between_scales"},
         {"gap.s_prime", "gap.scale_narrow", "gap.scale_wide", "gap.floor_met"}}}},
  };
}

std::string read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome execute(const Run& r, const fs::path& dir) {
  Outcome o;
  RunConfig cfg;
  std::string error;
  RunSummary s;
  int code = 3;
  try {
    cfg.apply_preset(r.preset);
    for (const auto& kv : r.overrides) cfg.set_assignment(kv);
    code = caloric::cli::run_command(r.command, cfg, (dir / r.label).string(), &error, &s);
  } catch (const caloric::ConfigError& e) {
    error = e.what();
  }
  std::ostringstream os;
  os << r.label << ":";
  if (code != 0 && code != 2) {
    o.pass = false;
    os << " exit " << code << " (" << error << ")";
    o.detail = os.str();
    return o;
  }
  for (const auto& name : r.checks) {
    const auto* c = s.find_check(name);
    if (!c) {
      o.pass = false;
      os << " " << name << " missing";
      continue;
    }
    o.pass = o.pass && c->pass;
    os << " " << name << "=" << caloric::cli::format_number(c->value) << (c->pass ? "" : " (fail)");
  }
  for (const auto& entry : r.report) {
    const auto eq = entry.find('=');
    const std::string key = entry.substr(0, eq), got = s.find_value(key);
    os << " " << key << "=" << got;
    if (eq != std::string::npos && got != entry.substr(eq + 1)) {
      o.pass = false;
      os << " (expected " << entry.substr(eq + 1) << ")";
    }
  }
  os << " [" << static_cast<long>(s.wall_seconds) << " s]";
  o.detail = os.str();
  return o;
}

// Two identical runs, the second with more workers, must give identical artifacts.
Outcome determinism(const fs::path& dir) {
  Outcome o;
  std::ostringstream os;
  const std::vector<Run> runs = {
      {"simulate", "simulate", "wave", {"n=64"}, {}, {}},
      {"esd", "esd", "geodesic-gaussian", {"n=64", "s_max=2", "esd.symmetry=false", "esd.identity=false"}, {}, {}},
      {"localize", "localize", "offset-bump", {"n=80", "s_max=2", "localize.dilation_check=false"}, {}, {}},
  };
  size_t compared = 0;
  for (const Run& r : runs) {
    std::vector<RunSummary> sums(2);
    for (int k = 0; k < 2; ++k) {
      caloric::set_jobs(k + 1);
      RunConfig cfg;
      cfg.apply_preset(r.preset);
      for (const auto& kv : r.overrides) cfg.set_assignment(kv);
      std::string error;
      const int code = caloric::cli::run_command(r.command, cfg, (dir / (r.label + "_" + std::to_string(k))).string(), &error, &sums[k]);
      if (code != 0 && code != 2) {
        o.pass = false;
        os << " " << r.label << " exit " << code << " (" << error << ")";
      }
    }
    caloric::set_jobs(1);
    if (!o.pass) continue;
    if (sums[0].artifacts != sums[1].artifacts) {
      o.pass = false;
      os << " " << r.label << " artifact lists differ";
      continue;
    }
    for (const auto& a : sums[0].artifacts) {
      ++compared;
      if (read_bytes(dir / (r.label + "_0") / a) != read_bytes(dir / (r.label + "_1") / a)) {
        o.pass = false;
        os << " " << r.label << "/" << a << " differs";
      }
    }
  }
  os << " files compared=" << compared;
  o.detail = "determinism:" + os.str();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "acceptance_out";
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto selected = [&](int n) { return only.empty() || only.count(n) > 0; };
  int failed = 0;
  for (const Criterion& c : criteria()) {
    if (!selected(c.number)) continue;
    bool pass = true;
    std::string details;
    for (const Run& r : c.runs) {
      const Outcome o = execute(r, dir / ("c" + std::to_string(c.number)));
      pass = pass && o.pass;
      details += " " + o.detail;
    }
    failed += pass ? 0 : 1;
    std::printf("criterion %d (%s): %s |%s\n", c.number, c.title.c_str(), pass ? "PASS" : "FAIL", details.c_str());
    std::fflush(stdout);
  }
  if (selected(10)) {
    const Outcome o = determinism(dir / "c10");
    failed += o.pass ? 0 : 1;
    std::printf("criterion 10 (determinism): %s | %s\n", o.pass ? "PASS" : "FAIL", o.detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}
