#pragma once

// Analysis configuration, sliding-window slicing and in-window recency.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "timeutil.hpp"

namespace orgcoupling {

struct AnalysisConfig {
  int window_length_days = 365;
  int step_days = 180;
  double theta = 10.0;
  int rare_k = 1;
  int max_hops = 4;
  double recency_floor = 0.01;
  int top_n = 3;
  // Longitudinal thresholds.
  double aoc_threshold = 0.25;
  double connector_threshold = 0.25;
  // Per-pair cap on enumerated developer-projection paths.
  std::size_t path_cap = 10000;
  std::string switch_degree = "adjacent";

  Seconds window_length() const { return Days{window_length_days}; }
  Seconds step() const { return Days{step_days}; }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
    if (window_length_days <= 0) fail("window_length_days must be positive");
    if (step_days <= 0) fail("step_days must be positive");
    if (step_days > window_length_days) fail("step_days must not exceed window_length_days");
    if (!(theta > 1.0) || !std::isfinite(theta)) fail("theta must be a finite value > 1");
    if (rare_k < 1) fail("rare_k must be >= 1");
    if (max_hops < 2) fail("max_hops must be >= 2");
    if (!(recency_floor > 0.0 && recency_floor < 1.0)) fail("recency_floor must lie in (0,1)");
    if (top_n < 1) fail("top_n must be >= 1");
    if (!(aoc_threshold >= 0.0 && aoc_threshold <= 1.0)) fail("aoc_threshold must lie in [0,1]");
    if (!(connector_threshold >= 0.0 && connector_threshold <= 1.0)) fail("connector_threshold must lie in [0,1]");
    if (path_cap == 0) fail("path_cap must be positive");
    if (switch_degree != "adjacent") fail("unknown switch_degree '" + switch_degree + "'");
  }

  // Applies one "key = value" setting; unknown keys are a config error.
  void set(const std::string& key, const std::string& value) {
    auto as_int = [&](int& out) {
      std::size_t used = 0;
      try {
        out = std::stoi(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) throw Error(ErrorKind::InvalidConfig, key + ": expected integer, got '" + value + "'");
    };
    auto as_double = [&](double& out) {
      std::size_t used = 0;
      try {
        out = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) throw Error(ErrorKind::InvalidConfig, key + ": expected number, got '" + value + "'");
    };
    if (key == "window_length_days") as_int(window_length_days);
    else if (key == "step_days") as_int(step_days);
    else if (key == "theta") as_double(theta);
    else if (key == "rare_k") as_int(rare_k);
    else if (key == "max_hops") as_int(max_hops);
    else if (key == "recency_floor") as_double(recency_floor);
    else if (key == "top_n") as_int(top_n);
    else if (key == "aoc_threshold") as_double(aoc_threshold);
    else if (key == "connector_threshold") as_double(connector_threshold);
    else if (key == "path_cap") {
      int cap = 0;
      as_int(cap);
      if (cap <= 0) throw Error(ErrorKind::InvalidConfig, "path_cap must be positive");
      path_cap = static_cast<std::size_t>(cap);
    } else if (key == "switch_degree") switch_degree = value;
    else throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
  }

  std::map<std::string, std::string> snapshot() const {
    auto fmt = [](double v) {
      std::ostringstream os;
      os.precision(17);
      os << v;
      return os.str();
    };
    return {
        {"window_length_days", std::to_string(window_length_days)},
        {"step_days", std::to_string(step_days)},
        {"theta", fmt(theta)},
        {"rare_k", std::to_string(rare_k)},
        {"max_hops", std::to_string(max_hops)},
        {"recency_floor", fmt(recency_floor)},
        {"top_n", std::to_string(top_n)},
        {"aoc_threshold", fmt(aoc_threshold)},
        {"connector_threshold", fmt(connector_threshold)},
        {"path_cap", std::to_string(path_cap)},
        {"switch_degree", switch_degree},
    };
  }
};

// "key = value" lines; '#' starts a comment.
inline void apply_config_text(AnalysisConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    cfg.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
}

inline AnalysisConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config file " + path);
  AnalysisConfig cfg;
  apply_config_text(cfg, in);
  cfg.validate();
  return cfg;
}

struct Window {
  int index = 0;
  Instant start{};  // inclusive
  Instant end{};    // exclusive

  bool contains(Instant t) const { return start <= t && t < end; }
  friend bool operator==(const Window&, const Window&) = default;
};

// The first window starts at midnight UTC of the first event's day; starts
// advance by step_days while they do not pass the last event.
inline std::vector<Window> slice_windows(Instant first_event, Instant last_event, const AnalysisConfig& cfg) {
  if (last_event < first_event) throw Error(ErrorKind::EmptyTimeline, "last event precedes first event");
  std::vector<Window> out;
  const Instant origin = midnight_utc(first_event);
  for (Instant start = origin; start <= last_event; start += cfg.step()) {
    out.push_back(Window{static_cast<int>(out.size()), start, start + cfg.window_length()});
  }
  return out;
}

inline std::vector<Window> slice_windows(const std::vector<ChangeEvent>& changes,
                                         const std::vector<TimelineEvent>& timeline, const AnalysisConfig& cfg) {
  if (changes.empty() && timeline.empty()) throw Error(ErrorKind::EmptyTimeline, "no events to slice");
  Instant lo = Instant::max(), hi = Instant::min();
  for (const auto& e : changes) {
    lo = std::min(lo, e.timestamp);
    hi = std::max(hi, e.timestamp);
  }
  for (const auto& e : timeline) {
    lo = std::min(lo, e.timestamp);
    hi = std::max(hi, e.timestamp);
  }
  return slice_windows(lo, hi, cfg);
}

// r = max(floor, (t - start) / window_length), in (0, 1).
inline double normalized_recency(Instant t, const Window& w, const AnalysisConfig& cfg) {
  if (!w.contains(t)) {
    throw Error(ErrorKind::OutOfWindow, format_rfc3339(t) + " outside window " + std::to_string(w.index));
  }
  const double offset = static_cast<double>((t - w.start).count());
  const double length = static_cast<double>(cfg.window_length().count());
  return std::max(cfg.recency_floor, offset / length);
}

inline double edge_distance(Instant t, const Window& w, const AnalysisConfig& cfg) {
  return 1.0 / normalized_recency(t, w, cfg);
}

}  // namespace orgcoupling
