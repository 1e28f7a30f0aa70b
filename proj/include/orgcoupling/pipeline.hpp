#pragma once

// End-to-end orchestration: load an input directory, analyze every window,
// write the analysis directory, and build reports from it.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "coupling.hpp"
#include "csv.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "ingest.hpp"
#include "longitudinal.hpp"
#include "roles.hpp"
#include "tracegraph.hpp"
#include "window.hpp"

namespace orgcoupling {

inline constexpr const char* kToolVersion = "0.1.0";

struct InputFile {
  std::string name;  // relative to the input directory
  std::string sha256;
  std::size_t records = 0;
  std::size_t malformed = 0;
};

struct IngestSummary {
  std::size_t change_records = 0;
  std::size_t timeline_records = 0;
  std::size_t malformed = 0;
  std::size_t bot_changes_removed = 0;
  std::size_t bot_timeline_removed = 0;
  std::size_t unmapped_identities = 0;
  std::size_t merged_identities = 0;
  std::vector<std::string> bot_ids;
};

struct PreparedInput {
  std::vector<ChangeEvent> changes;
  std::vector<TimelineEvent> timeline;
  std::vector<InputFile> files;
  std::vector<ParseDiagnostic> diagnostics;  // prefixed by file in `reason`
  IngestSummary summary;
};

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Parses, resolves identities (aliases.csv) and filters bots (bots.txt).
inline PreparedInput prepare_events(std::vector<ChangeEvent> changes, std::vector<TimelineEvent> timeline,
                                    const AliasTable& aliases, const BotMatcher& bots) {
  PreparedInput p;
  p.changes = std::move(changes);
  p.timeline = std::move(timeline);
  const auto ident = resolve_identities(p.changes, p.timeline, aliases);
  p.summary.unmapped_identities = ident.unmapped.size();
  p.summary.merged_identities = ident.merge_counts.size();
  const auto bot = filter_bots(p.changes, p.timeline, bots);
  p.summary.bot_changes_removed = bot.removed_changes;
  p.summary.bot_timeline_removed = bot.removed_timeline;
  p.summary.bot_ids.assign(bot.bot_ids.begin(), bot.bot_ids.end());
  std::sort(p.changes.begin(), p.changes.end(), change_order);
  std::stable_sort(p.timeline.begin(), p.timeline.end(), timeline_order);
  return p;
}

inline PreparedInput load_input_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::InputMissing, "input directory '" + dir + "' does not exist");
  std::vector<fs::path> change_files, timeline_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (ends_with(name, ".changes.jsonl")) change_files.push_back(entry.path());
    else if (ends_with(name, ".timeline.jsonl")) timeline_files.push_back(entry.path());
  }
  if (change_files.empty()) throw Error(ErrorKind::InputMissing, "no *.changes.jsonl files in '" + dir + "'");
  std::sort(change_files.begin(), change_files.end());
  std::sort(timeline_files.begin(), timeline_files.end());

  std::vector<ChangeEvent> changes;
  std::vector<TimelineEvent> timeline;
  std::vector<InputFile> files;
  std::vector<ParseDiagnostic> diags;
  IngestSummary summary;
  auto note = [&](const fs::path& path, const std::string& text, std::size_t records, const auto& errors) {
    files.push_back({path.filename().string(), sha256_hex(text), records, errors.size()});
    for (auto d : errors) {
      d.reason = path.filename().string() + ": " + d.reason;
      diags.push_back(d);
    }
    summary.malformed += errors.size();
  };
  for (const auto& path : change_files) {
    const auto text = read_file(path.string());
    auto res = parse_change_stream(text);
    note(path, text, res.records, res.errors);
    summary.change_records += res.records;
    changes.insert(changes.end(), res.events.begin(), res.events.end());
  }
  for (const auto& path : timeline_files) {
    const auto text = read_file(path.string());
    auto res = parse_timeline_stream(text);
    note(path, text, res.records, res.errors);
    summary.timeline_records += res.records;
    timeline.insert(timeline.end(), res.events.begin(), res.events.end());
  }
  AliasTable aliases;
  BotMatcher bots;
  const fs::path alias_path = fs::path(dir) / "aliases.csv";
  const fs::path bots_path = fs::path(dir) / "bots.txt";
  if (fs::exists(alias_path)) {
    const auto text = read_file(alias_path.string());
    aliases = AliasTable::parse_csv(text);
    files.push_back({"aliases.csv", sha256_hex(text), aliases.size(), 0});
  }
  if (fs::exists(bots_path)) {
    const auto text = read_file(bots_path.string());
    bots = BotMatcher::parse(text);
    files.push_back({"bots.txt", sha256_hex(text), bots.patterns().size(), 0});
  }
  std::sort(files.begin(), files.end(), [](const InputFile& a, const InputFile& b) { return a.name < b.name; });

  auto p = prepare_events(std::move(changes), std::move(timeline), aliases, bots);
  p.files = std::move(files);
  p.diagnostics = std::move(diags);
  const auto resolved = p.summary;
  p.summary = summary;
  p.summary.unmapped_identities = resolved.unmapped_identities;
  p.summary.merged_identities = resolved.merged_identities;
  p.summary.bot_changes_removed = resolved.bot_changes_removed;
  p.summary.bot_timeline_removed = resolved.bot_timeline_removed;
  p.summary.bot_ids = resolved.bot_ids;
  return p;
}

// ---------------------------------------------------------------------------
// Per-window analysis

struct WindowAnalysis {
  Window window;
  BuildReport build;
  GraphStats stats;
  RoleAnalysis global;
  std::map<std::string, std::set<std::string>> services_of;  // developer -> services committed to
  std::map<std::string, std::vector<RoleScores>> local;       // service -> committers' local scores
  std::size_t local_capped_pairs = 0;
  CouplingMatrix matrix;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<ContributionPair>> pairs;
  std::vector<ServiceCouplingSummary> aoc;  // empty with fewer than two services
};

struct AnalysisResult {
  AnalysisConfig config;
  std::vector<WindowAnalysis> windows;
  std::vector<WindowSeries> series;
};

// Scores of the developers with at least one in-window commit to `service`,
// computed on that service's own subgraph and re-normalized among them.
inline std::vector<RoleScores> service_local_roles(const std::vector<ChangeEvent>& changes,
                                                   const std::vector<TimelineEvent>& timeline, const Window& w,
                                                   const std::string& service, const AnalysisConfig& cfg,
                                                   std::size_t* capped = nullptr) {
  std::set<std::string> committers;
  for (const auto& ev : changes) {
    if (ev.service == service && w.contains(ev.timestamp)) committers.insert(ev.author);
  }
  const auto gb = build_graph(changes, timeline, w, cfg, service);
  auto ra = compute_roles(gb.graph, cfg);
  if (capped) *capped += ra.capped_pairs;
  std::vector<RoleScores> out;
  for (auto& s : ra.scores) {
    if (committers.count(s.developer)) out.push_back(std::move(s));
  }
  normalize_role_scores(out);
  return out;
}

inline WindowAnalysis analyze_window(const std::vector<ChangeEvent>& changes, const std::vector<TimelineEvent>& timeline,
                                     const Window& w, const AnalysisConfig& cfg) {
  WindowAnalysis wa;
  wa.window = w;
  auto gb = build_graph(changes, timeline, w, cfg);
  wa.build = gb.report;
  wa.stats = graph_stats(gb.graph);
  wa.global = compute_roles(gb.graph, cfg);
  for (const auto& ev : changes) {
    if (w.contains(ev.timestamp)) wa.services_of[ev.author].insert(ev.service);
  }
  const auto services = active_services(changes, w);
  for (const auto& svc : services) wa.local[svc] = service_local_roles(changes, timeline, w, svc, cfg, &wa.local_capped_pairs);
  wa.matrix = build_matrix(changes, w, services, switch_degree_by_name(cfg.switch_degree), &wa.pairs);
  if (services.size() >= 2) {
    for (const auto& svc : services) wa.aoc.push_back(service_aoc(wa.matrix, svc));
  }
  return wa;
}

// Windows run on up to `threads` workers; results keep window order.
inline AnalysisResult analyze(const PreparedInput& in, const AnalysisConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  AnalysisResult res;
  res.config = cfg;
  const auto windows = slice_windows(in.changes, in.timeline, cfg);
  res.windows.resize(windows.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(windows.size()));
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  std::size_t error_window = 0;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= windows.size()) return;
      try {
        res.windows[i] = analyze_window(in.changes, in.timeline, windows[i], cfg);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error || i < error_window) {
          first_error = std::current_exception();
          error_window = i;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const Error& e) {
      throw Error(e.kind(), "window " + std::to_string(error_window) + ": " + e.what());
    }
  }
  std::vector<WindowRoles> roles;
  std::vector<WindowCoupling> coupling;
  for (const auto& wa : res.windows) {
    roles.push_back({wa.window.index, wa.local});
    coupling.push_back({wa.window.index, wa.aoc});
  }
  res.series = build_series(roles, coupling, cfg.top_n);
  return res;
}

// ---------------------------------------------------------------------------
// Analysis directory

inline const std::vector<std::string>& series_header() {
  static const std::vector<std::string> h{"window_index", "service", "aoc", "max_connector", "max_coverage", "max_mavenness",
                                          "rsi_mean", "rsi_max", "rsi_p90", "top_jack_ids", "top_maven_ids",
                                          "top_connector_ids"};
  return h;
}

inline std::string series_csv(const std::vector<WindowSeries>& series) {
  std::string out = csv_row(series_header());
  for (const auto& ws : series) {
    for (const auto& p : ws.points) {
      out += csv_row({std::to_string(p.window_index), ws.service, fmt6(p.aoc), fmt6(p.max_connector), fmt6(p.max_coverage),
                      fmt6(p.max_mavenness), fmt6(p.rsi_mean), fmt6(p.rsi_max), fmt6(p.rsi_p90), join(p.top_jack_ids, ";"),
                      join(p.top_maven_ids, ";"), join(p.top_connector_ids, ";")});
    }
  }
  return out;
}

inline std::vector<std::string> score_fields(const RoleScores& s) {
  return {fmt6(s.coverage), fmt6(s.mavenness), fmt6(s.betweenness), fmt6(s.j_norm),
          fmt6(s.m_norm),   fmt6(s.c_norm),    fmt6(s.rsi)};
}

// File name -> content, in the order written.
inline std::vector<std::pair<std::string, std::string>> render_analysis(const AnalysisResult& res) {
  std::string windows = csv_row({"window_index", "start", "end", "change_events", "timeline_events", "developers", "commits",
                                 "files", "issues", "edges", "components", "dangling_refs", "rare_files", "capped_pairs",
                                 "local_capped_pairs", "services"});
  std::string roles = csv_row({"window_index", "developer", "service_list", "coverage", "mavenness", "betweenness", "j_norm",
                               "m_norm", "c_norm", "rsi"});
  std::string local = csv_row({"window_index", "service", "developer", "coverage", "mavenness", "betweenness", "j_norm",
                               "m_norm", "c_norm", "rsi"});
  std::string pairs = csv_row({"window_index", "service_a", "service_b", "shared_devs", "oc", "noc"});
  std::string aoc = csv_row({"window_index", "service", "aoc"});
  for (const auto& wa : res.windows) {
    const auto idx = std::to_string(wa.window.index);
    windows += csv_row({idx, format_rfc3339(wa.window.start), format_rfc3339(wa.window.end),
                        std::to_string(wa.build.change_events), std::to_string(wa.build.timeline_events),
                        std::to_string(wa.stats.developers), std::to_string(wa.stats.commits), std::to_string(wa.stats.files),
                        std::to_string(wa.stats.issues), std::to_string(wa.stats.edges), std::to_string(wa.stats.components),
                        std::to_string(wa.build.dangling_refs), std::to_string(wa.global.rare_files),
                        std::to_string(wa.global.capped_pairs), std::to_string(wa.local_capped_pairs),
                        join(wa.matrix.services, ";")});
    for (const auto& s : wa.global.scores) {
      std::vector<std::string> svc;
      if (auto it = wa.services_of.find(s.developer); it != wa.services_of.end()) svc.assign(it->second.begin(), it->second.end());
      std::vector<std::string> row{idx, s.developer, join(svc, ";")};
      for (auto& f : score_fields(s)) row.push_back(f);
      roles += csv_row(row);
    }
    for (const auto& [service, scores] : wa.local) {
      for (const auto& s : scores) {
        std::vector<std::string> row{idx, service, s.developer};
        for (auto& f : score_fields(s)) row.push_back(f);
        local += csv_row(row);
      }
    }
    const auto& m = wa.matrix;
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        pairs += csv_row({idx, m.services[a], m.services[b], std::to_string(m.shared_devs[a][b]), fmt6(m.oc[a][b]),
                          fmt6(m.noc[a][b])});
      }
    }
    for (const auto& s : wa.aoc) aoc += csv_row({idx, s.service, fmt6(s.aoc)});
  }
  return {{"windows.csv", windows},       {"roles.csv", roles},          {"roles_by_service.csv", local},
          {"coupling_pairs.csv", pairs},  {"coupling_aoc.csv", aoc},     {"series.csv", series_csv(res.series)}};
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::InputMissing, "cannot write " + path.string());
  out << content;
}

inline nlohmann::ordered_json build_manifest(const AnalysisResult& res, const PreparedInput& in,
                                             const std::vector<std::pair<std::string, std::string>>& outputs) {
  nlohmann::ordered_json m;
  m["tool"] = "orgcoupling";
  m["version"] = kToolVersion;
  m["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : res.config.snapshot()) m["config"][k] = v;
  m["inputs"] = nlohmann::ordered_json::array();
  for (const auto& f : in.files) {
    m["inputs"].push_back({{"file", f.name}, {"sha256", f.sha256}, {"records", f.records}, {"malformed", f.malformed}});
  }
  const auto& s = in.summary;
  m["ingest"] = {{"change_records", s.change_records},
                 {"timeline_records", s.timeline_records},
                 {"malformed", s.malformed},
                 {"changes_kept", in.changes.size()},
                 {"timeline_kept", in.timeline.size()},
                 {"bot_changes_removed", s.bot_changes_removed},
                 {"bot_timeline_removed", s.bot_timeline_removed},
                 {"bot_ids", s.bot_ids},
                 {"unmapped_identities", s.unmapped_identities},
                 {"merged_identities", s.merged_identities}};
  m["windows"] = res.windows.size();
  m["outputs"] = nlohmann::ordered_json::array();
  for (const auto& [name, content] : outputs) m["outputs"].push_back({{"file", name}, {"sha256", sha256_hex(content)}});
  return m;
}

inline void write_analysis(const AnalysisResult& res, const PreparedInput& in, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto outputs = render_analysis(res);
  for (const auto& [name, content] : outputs) write_text(fs::path(out_dir) / name, content);
  write_text(fs::path(out_dir) / "manifest.json", build_manifest(res, in, outputs).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Reports

struct LoadedAnalysis {
  std::vector<WindowSeries> series;
  std::map<int, std::map<std::string, std::vector<RoleScores>>> local;  // window -> service -> scores
  std::map<int, std::pair<std::string, std::string>> window_bounds;
  int top_n = 3;
};

inline std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::MissingAnalysis, "missing " + p.filename().string() + " in analysis directory");
  auto rows = read_csv(in);
  if (rows.empty()) throw Error(ErrorKind::MissingAnalysis, p.filename().string() + " is empty");
  rows.erase(rows.begin());
  return rows;
}

inline LoadedAnalysis load_analysis(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::MissingAnalysis, "analysis directory '" + dir + "' does not exist");
  if (!fs::exists(fs::path(dir) / "manifest.json")) throw Error(ErrorKind::MissingAnalysis, "no manifest.json in '" + dir + "'");
  LoadedAnalysis la;
  {
    std::ifstream in(fs::path(dir) / "manifest.json");
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::MissingAnalysis, "manifest.json is not valid JSON");
    if (j.contains("config") && j["config"].contains("top_n")) la.top_n = std::stoi(j["config"]["top_n"].get<std::string>());
  }
  auto num = [](const std::string& s) { return std::stod(s); };
  auto ids = [](const std::string& s) { return split(s, ';'); };
  std::map<std::string, WindowSeries> series;
  for (const auto& r : read_csv_file(fs::path(dir) / "series.csv")) {
    if (r.size() != series_header().size()) throw Error(ErrorKind::MissingAnalysis, "series.csv row has wrong width");
    SeriesPoint p;
    p.window_index = std::stoi(r[0]);
    p.aoc = num(r[2]);
    p.max_connector = num(r[3]);
    p.max_coverage = num(r[4]);
    p.max_mavenness = num(r[5]);
    p.rsi_mean = num(r[6]);
    p.rsi_max = num(r[7]);
    p.rsi_p90 = num(r[8]);
    p.top_jack_ids = ids(r[9]);
    p.top_maven_ids = ids(r[10]);
    p.top_connector_ids = ids(r[11]);
    auto& ws = series[r[1]];
    ws.service = r[1];
    ws.points.push_back(p);
  }
  for (auto& [_, ws] : series) {
    std::sort(ws.points.begin(), ws.points.end(), [](const SeriesPoint& a, const SeriesPoint& b) { return a.window_index < b.window_index; });
    la.series.push_back(std::move(ws));
  }
  for (const auto& r : read_csv_file(fs::path(dir) / "roles_by_service.csv")) {
    if (r.size() != 10) throw Error(ErrorKind::MissingAnalysis, "roles_by_service.csv row has wrong width");
    RoleScores s;
    s.window = std::stoi(r[0]);
    s.developer = r[2];
    s.coverage = num(r[3]);
    s.mavenness = num(r[4]);
    s.betweenness = num(r[5]);
    s.j_norm = num(r[6]);
    s.m_norm = num(r[7]);
    s.c_norm = num(r[8]);
    s.rsi = num(r[9]);
    la.local[s.window][r[1]].push_back(s);
  }
  for (const auto& r : read_csv_file(fs::path(dir) / "windows.csv")) {
    if (r.size() < 3) throw Error(ErrorKind::MissingAnalysis, "windows.csv row has wrong width");
    la.window_bounds[std::stoi(r[0])] = {r[1], r[2]};
  }
  return la;
}

struct ReportOptions {
  std::optional<std::string> service;
  double aoc_threshold = 0.25;
  double connector_threshold = 0.25;
};

inline std::vector<std::pair<std::string, std::string>> render_report(const LoadedAnalysis& la, const ReportOptions& opts) {
  // Hot-spot ranking is relative to the whole ecosystem, so it is computed
  // before the service filter applies.
  const auto hotspots = stacking_hotspots(la.series, opts.aoc_threshold);
  std::vector<WindowSeries> series;
  for (const auto& ws : la.series) {
    if (!opts.service || ws.service == *opts.service) series.push_back(ws);
  }
  if (opts.service && series.empty()) {
    throw Error(ErrorKind::InputMissing, "service '" + *opts.service + "' does not appear in the analysis");
  }

  std::string persistence = csv_row({"service", "role", "windows", "jaccard_topn", "streak_len"});
  for (const auto& ws : series) {
    for (Role r : {Role::Jack, Role::Maven, Role::Connector}) {
      if (ws.points.size() < 2) {
        persistence += csv_row({ws.service, to_string(r), std::to_string(ws.points.size()), "", ws.points.empty() ? "0" : "1"});
        continue;
      }
      const auto p = role_persistence(ws, r);
      persistence += csv_row({ws.service, to_string(r), std::to_string(ws.points.size()), fmt6(p.jaccard_topn),
                              std::to_string(p.streak_len)});
    }
  }
  const auto conn = connector_persistence_report(series, opts.connector_threshold);
  std::string conn_csv = csv_row({"service", "windows_above", "longest_streak", "comovement", "mean_aoc_delta"});
  for (const auto& c : conn) {
    std::vector<std::string> w;
    for (int i : c.windows_above) w.push_back(std::to_string(i));
    conn_csv += csv_row({c.service, join(w, ";"), std::to_string(c.longest_streak), comovement_label(c.comovement),
                         fmt6(c.mean_aoc_delta)});
  }
  std::string hot_csv = csv_row({"service", "rsi_p90_mean", "rsi_top_quartile", "active_windows", "aoc_windows_above",
                                 "aoc_condition", "flagged"});
  for (const auto& e : hotspots.evidence) {
    if (opts.service && e.service != *opts.service) continue;
    hot_csv += csv_row({e.service, fmt6(e.rsi_p90_mean), e.rsi_top_quartile ? "true" : "false",
                        std::to_string(e.active_windows), std::to_string(e.aoc_windows_above),
                        e.aoc_condition ? "true" : "false", e.flagged ? "true" : "false"});
  }

  std::ostringstream txt;
  txt << "Services: " << series.size() << "\n";
  for (const auto& ws : series) {
    txt << "  " << ws.service << ": " << ws.points.size() << " active window(s)\n";
  }
  for (const auto& [window, by_service] : la.local) {
    std::map<std::string, std::vector<RoleScores>> shown;
    for (const auto& [svc, scores] : by_service) {
      if (!opts.service || svc == *opts.service) shown[svc] = scores;
    }
    if (shown.empty()) continue;
    txt << "\nWindow " << window;
    if (auto it = la.window_bounds.find(window); it != la.window_bounds.end()) {
      txt << " [" << it->second.first << ", " << it->second.second << ")";
    }
    txt << "\n" << format_top_roles(top_roles(shown, la.top_n));
  }
  txt << "\nCoupling and persistence\n";
  for (const auto& ws : series) {
    double mean = 0.0, peak = 0.0;
    std::size_t above = 0;
    for (const auto& p : ws.points) {
      mean += p.aoc;
      peak = std::max(peak, p.aoc);
      above += p.aoc >= opts.aoc_threshold;
    }
    if (!ws.points.empty()) mean /= static_cast<double>(ws.points.size());
    txt << "  " << ws.service << ": mean AOC " << fmt6(mean) << ", max AOC " << fmt6(peak) << ", " << above << "/"
        << ws.points.size() << " windows at or above " << fmt6(opts.aoc_threshold) << "\n";
    for (const auto& c : conn) {
      if (c.service != ws.service) continue;
      txt << "    connector above " << fmt6(opts.connector_threshold) << " in " << c.windows_above.size()
          << " window(s), longest streak " << c.longest_streak << ", AOC co-movement " << comovement_label(c.comovement)
          << "\n";
    }
  }
  txt << "\nRole-stacking hot-spots (AOC threshold " << fmt6(opts.aoc_threshold) << "): ";
  std::vector<std::string> flagged;
  for (const auto& f : hotspots.flagged) {
    if (!opts.service || f == *opts.service) flagged.push_back(f);
  }
  txt << (flagged.empty() ? "none" : join(flagged, ", ")) << "\n";

  return {{"plot_data.csv", emit_plot_data(series)},
          {"persistence.csv", persistence},
          {"connector_persistence.csv", conn_csv},
          {"hotspots.csv", hot_csv},
          {"summary.txt", txt.str()}};
}

}  // namespace orgcoupling
