#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "vpmcf/curve.hpp"
#include "vpmcf/error.hpp"
#include "vpmcf/flow.hpp"
#include "json.hpp"

namespace vpmcf {

namespace fs = std::filesystem;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_snapshot(std::ostream& os, const ClosedCurve& c) {
  os << "# t=" << format_double(c.time) << " N=" << c.size() << "\n";
  for (const auto& v : c.vertices) os << format_double(v.x()) << "," << format_double(v.y()) << "\n";
}

inline void write_snapshot(const fs::path& path, const ClosedCurve& c) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_snapshot(os, c);
}

inline ClosedCurve read_snapshot(std::istream& is, const std::string& name = "<stream>") {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Io, name + ": empty snapshot");
  static const std::regex header(R"(^#\s*t=([^\s]+)\s+N=(\d+)\s*$)");
  std::smatch m;
  if (!std::regex_match(line, m, header)) throw Error(ErrorKind::Io, name + ": bad header '" + line + "'");
  ClosedCurve c;
  c.time = std::stod(m[1].str());
  const std::size_t n = std::stoul(m[2].str());
  c.vertices.reserve(n);
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::Io, name + ": expected 'x,y', got '" + line + "'");
    try {
      c.vertices.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Io, name + ": unparsable vertex '" + line + "'");
    }
  }
  if (c.vertices.size() != n) {
    throw Error(ErrorKind::Io, name + ": header says N=" + std::to_string(n) + " but found " + std::to_string(c.vertices.size()));
  }
  return c;
}

inline ClosedCurve read_snapshot(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_snapshot(is, path.string());
}

/// snap_<k>.csv files of a directory, ordered by k
inline std::vector<fs::path> snapshot_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
  static const std::regex pat(R"(^snap_(\d+)\.csv$)");
  std::vector<std::pair<long, fs::path>> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, pat)) found.emplace_back(std::stol(m[1].str()), e.path());
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

inline void write_history_snapshots(const fs::path& dir, const FlowHistory& h) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < h.snapshots.size(); ++k) {
    write_snapshot(dir / ("snap_" + std::to_string(k) + ".csv"), h.snapshots[k].curve);
  }
}

inline void write_run_json(const fs::path& path, const FlowHistory& h) {
  nlohmann::json j;
  j["mode"] = h.config.mode == FlowMode::mcf ? "mcf" : "vpmcf";
  j["multiplier"] = h.config.multiplier == Multiplier::analytic ? "analytic" : "constrained";
  j["dt"] = h.config.dt;
  j["t_end"] = h.config.t_end;
  j["N"] = h.config.N;
  j["initial_area"] = h.initial_area;
  j["status"] = h.status == RunStatus::Completed ? "completed" : "singularity";
  if (h.status == RunStatus::SingularityReached) j["singular_time"] = h.singular_time;
  j["steps"] = h.steps.size();
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os << j.dump(2) << "\n";
}

/// (t, i2) pairs from the series.csv of a run directory
inline std::vector<std::pair<double, double>> read_i2_column(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  std::vector<std::pair<double, double>> out;
  while (std::getline(is, line)) {
    std::vector<double> cols;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(std::stod(cell));
    if (cols.size() < 5) throw Error(ErrorKind::Io, path.string() + ": short row '" + line + "'");
    out.emplace_back(cols[0], cols[4]);
  }
  return out;
}

/// Rebuilds a history from a run directory: snap_<k>.csv, plus run.json and series.csv when present.
inline FlowHistory load_history(const fs::path& dir) {
  const auto files = snapshot_files(dir);
  if (files.empty()) throw Error(ErrorKind::Io, "no snap_<k>.csv files in " + dir.string());
  FlowHistory h;
  if (fs::exists(dir / "run.json")) {
    std::ifstream is(dir / "run.json");
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Io, (dir / "run.json").string() + ": " + e.what());
    }
    h.config.mode = j.value("mode", "vpmcf") == "mcf" ? FlowMode::mcf : FlowMode::vpmcf;
    h.config.dt = j.value("dt", h.config.dt);
    h.config.N = j.value("N", h.config.N);
    if (j.value("status", "completed") == "singularity") {
      h.status = RunStatus::SingularityReached;
      h.singular_time = j.value("singular_time", NAN);
    }
  }
  std::vector<std::pair<double, double>> i2col;
  if (fs::exists(dir / "series.csv")) i2col = read_i2_column(dir / "series.csv");
  auto i2_lookup = [&](double t) {
    auto it = std::lower_bound(i2col.begin(), i2col.end(), t, [](const auto& a, double v) { return a.first < v; });
    if (it == i2col.end()) return i2col.back().second;
    if (it == i2col.begin() || it->first == t) return it->second;
    auto prev = it - 1;
    return prev->second + (it->second - prev->second) * (t - prev->first) / (it->first - prev->first);
  };
  double i2 = 0.0;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const ClosedCurve c = read_snapshot(files[k]);
    Snapshot sn = make_snapshot(c, h.config.mode, 0.0, 0, k);
    if (!i2col.empty()) {
      i2 = i2_lookup(c.time);
    } else if (k > 0) {
      const auto& prev = h.snapshots.back();
      i2 += 0.5 * (c.time - prev.curve.time) * (prev.hbar * prev.hbar + sn.hbar * sn.hbar);
    }
    sn.i2 = i2;
    sn.epoch = k;  // unknown resampling between files
    h.snapshots.push_back(std::move(sn));
  }
  h.config.N = h.front().curve.size();
  h.initial_area = h.front().cache.area;
  return h;
}

}  // namespace vpmcf
