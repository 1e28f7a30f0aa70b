#pragma once

// Window-aligned per-service series of role indicators and AOC, role
// persistence, connector persistence and role-stacking hot-spots.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "coupling.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "roles.hpp"

namespace orgcoupling {

// Service-local role scores of one window, keyed by service.
struct WindowRoles {
  int window = 0;
  std::map<std::string, std::vector<RoleScores>> by_service;
};

struct WindowCoupling {
  int window = 0;
  std::vector<ServiceCouplingSummary> summaries;
};

struct SeriesPoint {
  int window_index = 0;
  double aoc = 0.0;
  double max_connector = 0.0;
  double max_coverage = 0.0;
  double max_mavenness = 0.0;
  double rsi_mean = 0.0;
  double rsi_max = 0.0;
  double rsi_p90 = 0.0;
  std::vector<std::string> top_jack_ids;
  std::vector<std::string> top_maven_ids;
  std::vector<std::string> top_connector_ids;

  const std::vector<std::string>& top_ids(Role r) const {
    switch (r) {
      case Role::Jack: return top_jack_ids;
      case Role::Maven: return top_maven_ids;
      case Role::Connector: return top_connector_ids;
    }
    return top_connector_ids;
  }
};

struct WindowSeries {
  std::string service;
  std::vector<SeriesPoint> points;  // strictly increasing window_index

  const SeriesPoint* at(int window) const {
    for (const auto& p : points) {
      if (p.window_index == window) return &p;
    }
    return nullptr;
  }
};

// Nearest-rank percentile, q in (0, 1].
inline double nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

inline SeriesPoint make_point(int window, const std::vector<RoleScores>& scores, double aoc, int top_n) {
  SeriesPoint p;
  p.window_index = window;
  p.aoc = aoc;
  std::vector<double> rsis;
  for (const auto& s : scores) {
    p.max_connector = std::max(p.max_connector, s.betweenness);
    p.max_coverage = std::max(p.max_coverage, s.coverage);
    p.max_mavenness = std::max(p.max_mavenness, s.mavenness);
    p.rsi_max = std::max(p.rsi_max, s.rsi);
    p.rsi_mean += s.rsi;
    rsis.push_back(s.rsi);
  }
  if (!scores.empty()) p.rsi_mean /= static_cast<double>(scores.size());
  p.rsi_p90 = nearest_rank(rsis, 0.9);
  auto ids = [&](Role r) {
    std::vector<std::string> out;
    for (auto& rd : rank_by(scores, r, static_cast<std::size_t>(top_n))) out.push_back(rd.developer);
    return out;
  };
  p.top_jack_ids = ids(Role::Jack);
  p.top_maven_ids = ids(Role::Maven);
  p.top_connector_ids = ids(Role::Connector);
  return p;
}

// One series per service over the windows in which it has scored
// developers. Windows where a service is inactive are absent, not zero.
// A window whose coupling summary lacks the service (fewer than two active
// services) contributes aoc = 0.
inline std::vector<WindowSeries> build_series(std::vector<WindowRoles> roles, std::vector<WindowCoupling> coupling,
                                              int top_n) {
  auto by_index = [](const auto& a, const auto& b) { return a.window < b.window; };
  std::sort(roles.begin(), roles.end(), by_index);
  std::sort(coupling.begin(), coupling.end(), by_index);
  if (roles.size() != coupling.size()) throw Error(ErrorKind::GridMismatch, "role and coupling window counts differ");
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i].window != coupling[i].window) {
      throw Error(ErrorKind::GridMismatch, "window " + std::to_string(roles[i].window) + " has no coupling counterpart");
    }
  }
  std::map<std::string, WindowSeries> series;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    std::map<std::string, double> aoc;
    for (const auto& s : coupling[i].summaries) aoc[s.service] = s.aoc;
    for (const auto& [service, scores] : roles[i].by_service) {
      if (scores.empty()) continue;
      auto& ws = series[service];
      ws.service = service;
      auto it = aoc.find(service);
      ws.points.push_back(make_point(roles[i].window, scores, it == aoc.end() ? 0.0 : it->second, top_n));
    }
  }
  std::vector<WindowSeries> out;
  for (auto& [_, ws] : series) out.push_back(std::move(ws));
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

struct PersistenceIndicator {
  std::string service;
  Role role = Role::Jack;
  std::vector<double> transitions;  // Jaccard of consecutive top-n sets
  double jaccard_topn = 0.0;         // mean over transitions
  std::size_t streak_len = 0;
};

// `window_indices` (optional, same length as `sets`) lets a gap between
// windows break a streak; without it the sets are taken as consecutive.
inline PersistenceIndicator role_persistence(const std::vector<std::vector<std::string>>& sets,
                                             const std::vector<int>& window_indices = {}) {
  if (sets.size() < 2) throw Error(ErrorKind::TooFewWindows, "persistence needs at least two windows");
  PersistenceIndicator out;
  std::size_t streak = 1;
  out.streak_len = 1;
  for (std::size_t i = 1; i < sets.size(); ++i) {
    const double j = jaccard(sets[i - 1], sets[i]);
    out.transitions.push_back(j);
    out.jaccard_topn += j;
    const bool adjacent = window_indices.empty() || window_indices[i] == window_indices[i - 1] + 1;
    const bool shares = std::any_of(sets[i].begin(), sets[i].end(), [&](const std::string& id) {
      return std::find(sets[i - 1].begin(), sets[i - 1].end(), id) != sets[i - 1].end();
    });
    streak = adjacent && shares ? streak + 1 : 1;
    out.streak_len = std::max(out.streak_len, streak);
  }
  out.jaccard_topn /= static_cast<double>(out.transitions.size());
  return out;
}

inline PersistenceIndicator role_persistence(const WindowSeries& ws, Role role) {
  std::vector<std::vector<std::string>> sets;
  std::vector<int> idx;
  for (const auto& p : ws.points) {
    sets.push_back(p.top_ids(role));
    idx.push_back(p.window_index);
  }
  auto out = role_persistence(sets, idx);
  out.service = ws.service;
  out.role = role;
  return out;
}

struct ConnectorPersistence {
  std::string service;
  std::vector<int> windows_above;
  std::size_t longest_streak = 0;
  // Sign of the mean AOC delta across transitions inside above-threshold
  // streaks; 0 when no such transition exists.
  int comovement = 0;
  double mean_aoc_delta = 0.0;
};

inline const char* comovement_label(int sign) {
  return sign > 0 ? "positive" : sign < 0 ? "negative" : "none";
}

inline std::vector<ConnectorPersistence> connector_persistence_report(const std::vector<WindowSeries>& series,
                                                                      double threshold) {
  std::vector<ConnectorPersistence> out;
  for (const auto& ws : series) {
    ConnectorPersistence cp;
    cp.service = ws.service;
    std::size_t streak = 0;
    double delta_sum = 0.0;
    std::size_t transitions = 0;
    const SeriesPoint* prev = nullptr;
    for (const auto& p : ws.points) {
      const bool above = p.max_connector >= threshold;
      if (above) {
        cp.windows_above.push_back(p.window_index);
        const bool continues = prev && prev->max_connector >= threshold && prev->window_index + 1 == p.window_index;
        streak = continues ? streak + 1 : 1;
        if (continues) {
          delta_sum += p.aoc - prev->aoc;
          ++transitions;
        }
      } else {
        streak = 0;
      }
      cp.longest_streak = std::max(cp.longest_streak, streak);
      prev = &p;
    }
    if (transitions > 0) {
      cp.mean_aoc_delta = delta_sum / static_cast<double>(transitions);
      cp.comovement = cp.mean_aoc_delta > 1e-12 ? 1 : cp.mean_aoc_delta < -1e-12 ? -1 : 0;
    }
    out.push_back(std::move(cp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hot-spots

struct HotspotEvidence {
  std::string service;
  double rsi_p90_mean = 0.0;
  bool rsi_top_quartile = false;
  std::size_t active_windows = 0;
  std::size_t aoc_windows_above = 0;
  bool aoc_condition = false;
  bool flagged = false;
};

struct HotspotReport {
  double aoc_threshold = 0.25;
  std::vector<std::string> flagged;
  std::vector<HotspotEvidence> evidence;  // one row per service
};

// A service is flagged when its mean per-window rsi_p90 is among the top
// ceil(N/4) services (ties included, zero never qualifies) and its AOC
// reaches the threshold in at least half of its active windows.
inline HotspotReport stacking_hotspots(const std::vector<WindowSeries>& series, double aoc_threshold) {
  HotspotReport rep;
  rep.aoc_threshold = aoc_threshold;
  std::vector<double> scores;
  for (const auto& ws : series) {
    HotspotEvidence ev;
    ev.service = ws.service;
    ev.active_windows = ws.points.size();
    for (const auto& p : ws.points) {
      ev.rsi_p90_mean += p.rsi_p90;
      if (p.aoc >= aoc_threshold) ++ev.aoc_windows_above;
    }
    if (ev.active_windows) ev.rsi_p90_mean /= static_cast<double>(ev.active_windows);
    ev.aoc_condition = ev.active_windows > 0 && 2 * ev.aoc_windows_above >= ev.active_windows;
    scores.push_back(ev.rsi_p90_mean);
    rep.evidence.push_back(ev);
  }
  if (scores.empty()) return rep;
  std::sort(scores.begin(), scores.end(), std::greater<>());
  const std::size_t k = (scores.size() + 3) / 4;
  const double cutoff = scores[k - 1];
  for (auto& ev : rep.evidence) {
    ev.rsi_top_quartile = ev.rsi_p90_mean > 0.0 && ev.rsi_p90_mean >= cutoff;
    ev.flagged = ev.rsi_top_quartile && ev.aoc_condition;
    if (ev.flagged) rep.flagged.push_back(ev.service);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Plot data

inline const std::vector<std::string>& plot_metrics() {
  static const std::vector<std::string> m{"aoc", "rsi_max", "max_connector", "max_coverage", "max_mavenness"};
  return m;
}

// Long format: window_index,service,metric,value.
inline std::string emit_plot_data(const std::vector<WindowSeries>& series) {
  std::string out = "window_index,service,metric,value\n";
  for (const auto& ws : series) {
    for (const auto& p : ws.points) {
      const double values[] = {p.aoc, p.rsi_max, p.max_connector, p.max_coverage, p.max_mavenness};
      for (std::size_t i = 0; i < plot_metrics().size(); ++i) {
        out += csv_row({std::to_string(p.window_index), ws.service, plot_metrics()[i], fmt6(values[i])});
      }
    }
  }
  return out;
}

}  // namespace orgcoupling
