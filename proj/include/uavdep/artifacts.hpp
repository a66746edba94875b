#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavdep/config.hpp"
#include "uavdep/simulator.hpp"

namespace uavdep {

// fixed-format numeric printing so identical runs give identical bytes
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string metrics_csv(const ExperimentResult& result) {
  std::ostringstream out;
  const std::size_t u_count =
      result.log.empty() ? 0 : result.log.front().positions.size();
  out << "t,estimated_coverage,true_coverage,disagreement,phi_total";
  for (std::size_t u = 0; u < u_count; ++u)
    out << ",uav" << u << "_x,uav" << u << "_y,uav" << u << "_z";
  out << "\n";
  for (const StepRecord& rec : result.log) {
    out << rec.t << ',' << fmt(rec.estimated_coverage) << ','
        << fmt(rec.true_coverage) << ',' << fmt(rec.disagreement) << ','
        << fmt(rec.phi_total);
    for (const UavPosition& p : rec.positions)
      out << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(p.altitude);
    out << "\n";
  }
  return out.str();
}

inline std::string trajectory_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "t,uav,x,y,z,phi,disagreement,total_coverage\n";
  for (const StepRecord& rec : result.log)
    for (std::size_t u = 0; u < rec.positions.size(); ++u)
      out << rec.t << ',' << u << ',' << fmt(rec.positions[u].x) << ','
          << fmt(rec.positions[u].y) << ',' << fmt(rec.positions[u].altitude)
          << ',' << fmt(rec.phis[u]) << ',' << fmt(rec.disagreement) << ','
          << fmt(rec.true_coverage) << "\n";
  return out.str();
}

inline std::string cells_csv(const CellAssignment& cells) {
  std::ostringstream out;
  out << "row,col,label\n";
  for (int row = 0; row < cells.ny; ++row)
    for (int col = 0; col < cells.nx; ++col)
      out << row << ',' << col << ',' << cells.at(row, col) << "\n";
  return out.str();
}

inline json snapshot_to_json(const Snapshot& snap) {
  json obj;
  obj["t"] = snap.t;
  json deployment = json::array();
  for (const UavPosition& p : snap.deployment.positions)
    deployment.push_back({p.x, p.y, p.altitude});
  obj["deployment"] = deployment;
  obj["cells"] = {{"nx", snap.cells.nx},
                  {"ny", snap.cells.ny},
                  {"labels", snap.cells.labels}};
  obj["intensity_true"] = snap.intensity_true.values;
  obj["intensity_estimated"] = snap.intensity_estimated.values;
  return obj;
}

inline json snapshots_to_json(const ExperimentResult& result) {
  json list = json::array();
  for (const Snapshot& snap : result.snapshots)
    list.push_back(snapshot_to_json(snap));
  return list;
}

inline std::string config_hash(const json& config) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016zx",
                std::hash<std::string>{}(config.dump()));
  return buf;
}

inline constexpr const char* kArtifactVersion = "1";

inline json manifest_json(const json& resolved_config, std::uint64_t seed,
                          const ExperimentResult& result) {
  json obj;
  obj["artifact_version"] = kArtifactVersion;
  obj["config"] = resolved_config;
  obj["config_hash"] = config_hash(resolved_config);
  obj["seed"] = seed;
  obj["resolved_a0"] = result.resolved_a0;
  obj["resolved_push_gain"] = result.resolved_push_gain;
  return obj;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Writes the full artifact set for one experiment into `dir`.
inline void write_run_artifacts(const std::filesystem::path& dir,
                                const ExperimentResult& result,
                                const json& resolved_config,
                                std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "metrics.csv", metrics_csv(result));
  write_text_file(dir / "trajectory.csv", trajectory_csv(result));
  write_text_file(dir / "snapshots.json", snapshots_to_json(result).dump(2) + "\n");
  write_text_file(dir / "manifest.json",
                  manifest_json(resolved_config, seed, result).dump(2) + "\n");
  if (!result.snapshots.empty())
    write_text_file(dir / "cells_final.csv",
                    cells_csv(result.snapshots.back().cells));
}

struct SweepStats {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Mean and 95% normal-approximation confidence interval; a single sample
/// gives a degenerate interval equal to the point.
inline SweepStats sweep_stats(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("sweep_stats: empty");
  SweepStats st;
  for (double v : samples) st.mean += v;
  st.mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double v : samples) var += (v - st.mean) * (v - st.mean);
  if (samples.size() > 1) {
    var /= static_cast<double>(samples.size() - 1);
    const double half =
        1.96 * std::sqrt(var / static_cast<double>(samples.size()));
    st.ci_low = st.mean - half;
    st.ci_high = st.mean + half;
  } else {
    st.ci_low = st.ci_high = st.mean;
  }
  return st;
}

}  // namespace uavdep
