#pragma once

// Canonical event types, record-stream parsers, identity resolution and
// automation-account filtering.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "timeutil.hpp"

namespace orgcoupling {

enum class ChangeType { Add, Modify, Delete, Rename };

inline const char* to_string(ChangeType t) {
  switch (t) {
    case ChangeType::Add: return "add";
    case ChangeType::Modify: return "modify";
    case ChangeType::Delete: return "delete";
    case ChangeType::Rename: return "rename";
  }
  return "modify";
}

inline std::optional<ChangeType> parse_change_type(std::string_view s) {
  if (s == "add") return ChangeType::Add;
  if (s == "modify") return ChangeType::Modify;
  if (s == "delete") return ChangeType::Delete;
  if (s == "rename") return ChangeType::Rename;
  return std::nullopt;
}

enum class TimelineKind { Opened, Commented, Closed, CommitRef };

inline const char* to_string(TimelineKind k) {
  switch (k) {
    case TimelineKind::Opened: return "opened";
    case TimelineKind::Commented: return "commented";
    case TimelineKind::Closed: return "closed";
    case TimelineKind::CommitRef: return "commit_ref";
  }
  return "commented";
}

inline std::optional<TimelineKind> parse_timeline_kind(std::string_view s) {
  if (s == "opened") return TimelineKind::Opened;
  if (s == "commented") return TimelineKind::Commented;
  if (s == "closed") return TimelineKind::Closed;
  if (s == "commit_ref") return TimelineKind::CommitRef;
  return std::nullopt;
}

struct FileChange {
  std::string path;
  ChangeType change_type = ChangeType::Modify;
  std::uint64_t loc = 0;

  friend bool operator==(const FileChange&, const FileChange&) = default;
};

struct ChangeEvent {
  std::string commit_id;
  std::string author;  // canonical developer id
  std::string author_name;
  std::string author_email;
  Instant timestamp{};
  std::string service;
  std::vector<FileChange> files;

  std::uint64_t loc_delta() const {
    std::uint64_t total = 0;
    for (const auto& f : files) total += f.loc;
    return total;
  }

  friend bool operator==(const ChangeEvent&, const ChangeEvent&) = default;
};

struct TimelineEvent {
  std::string issue_id;
  std::string actor;  // canonical developer id
  std::string actor_email;
  Instant timestamp{};
  TimelineKind kind = TimelineKind::Commented;
  std::optional<std::string> linked_commit;  // present iff kind == CommitRef
  std::string service;

  friend bool operator==(const TimelineEvent&, const TimelineEvent&) = default;
};

struct DeveloperIdentity {
  std::string canonical_id;
  std::set<std::string> aliases;
  bool is_bot = false;
};

// Sort key used everywhere downstream: timestamp, then event id.
inline bool change_order(const ChangeEvent& a, const ChangeEvent& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.commit_id != b.commit_id) return a.commit_id < b.commit_id;
  return a.service < b.service;
}

inline bool timeline_order(const TimelineEvent& a, const TimelineEvent& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.issue_id != b.issue_id) return a.issue_id < b.issue_id;
  return static_cast<int>(a.kind) < static_cast<int>(b.kind);
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Forward slashes, no "./" prefix, no empty segments, no trailing slash.
inline std::string normalize_path(std::string_view raw) {
  std::string p(raw);
  std::replace(p.begin(), p.end(), '\\', '/');
  std::string out;
  out.reserve(p.size());
  std::size_t i = 0;
  while (i < p.size()) {
    std::size_t j = p.find('/', i);
    if (j == std::string::npos) j = p.size();
    std::string_view seg(p.data() + i, j - i);
    if (!seg.empty() && seg != ".") {
      if (!out.empty()) out += '/';
      out += seg;
    }
    i = j + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

struct ParseOptions {
  Instant min_time = make_instant(1970, 1, 1);
  Instant max_time = make_instant(2100, 1, 1);
};

struct ParseDiagnostic {
  std::size_t line_no = 0;
  ErrorKind kind = ErrorKind::MalformedRecord;
  std::string reason;
};

template <class Event>
struct ParseResult {
  std::vector<Event> events;
  std::vector<ParseDiagnostic> errors;
  std::size_t records = 0;  // non-blank input lines

  // Throws the first diagnostic, for callers that want all-or-nothing input.
  void throw_if_errors() const {
    if (errors.empty()) return;
    const auto& e = errors.front();
    if (e.kind == ErrorKind::MalformedRecord) throw MalformedRecord(e.line_no, e.reason);
    throw Error(e.kind, "line " + std::to_string(e.line_no) + ": " + e.reason);
  }
};

namespace detail {

struct RecordError {
  ErrorKind kind;
  std::string reason;
};

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw RecordError{ErrorKind::MalformedRecord, std::string("missing field '") + key + "'"};
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, bool allow_empty = false) {
  const auto& v = require(obj, key);
  if (!v.is_string()) throw RecordError{ErrorKind::MalformedRecord, std::string("field '") + key + "' is not a string"};
  auto s = v.get<std::string>();
  if (!allow_empty && s.empty()) throw RecordError{ErrorKind::MalformedRecord, std::string("field '") + key + "' is empty"};
  return s;
}

inline std::string optional_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw RecordError{ErrorKind::MalformedRecord, std::string("field '") + key + "' is not a string"};
  return it->get<std::string>();
}

inline Instant require_time(const nlohmann::json& obj, const ParseOptions& opts) {
  auto raw = require_string(obj, "timestamp");
  auto t = parse_rfc3339(raw);
  if (!t) throw RecordError{ErrorKind::MalformedRecord, "unparseable timestamp '" + raw + "'"};
  if (*t < opts.min_time || *t >= opts.max_time) {
    throw RecordError{ErrorKind::TimestampOutOfRange, "timestamp " + raw + " outside configured range"};
  }
  return *t;
}

inline std::string fallback_id(std::string_view email, std::string_view name) {
  auto e = to_lower(trim(email));
  if (!e.empty()) return e;
  return to_lower(trim(name));
}

template <class Event, class Fn>
ParseResult<Event> parse_lines(std::istream& in, Fn&& parse_one) {
  ParseResult<Event> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++result.records;
    try {
      auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) throw RecordError{ErrorKind::MalformedRecord, "record is not a JSON object"};
      result.events.push_back(parse_one(obj));
    } catch (const nlohmann::json::exception& e) {
      result.errors.push_back({line_no, ErrorKind::MalformedRecord, e.what()});
    } catch (const RecordError& e) {
      result.errors.push_back({line_no, e.kind, e.reason});
    }
  }
  return result;
}

}  // namespace detail

inline ChangeEvent parse_change_record(const nlohmann::json& obj, const ParseOptions& opts = {}) {
  using detail::RecordError;
  ChangeEvent ev;
  ev.commit_id = detail::require_string(obj, "commit_id");
  ev.author_name = detail::optional_string(obj, "author_name");
  ev.author_email = detail::optional_string(obj, "author_email");
  if (trim(ev.author_name).empty() && trim(ev.author_email).empty()) {
    throw RecordError{ErrorKind::MalformedRecord, "record has neither author_name nor author_email"};
  }
  ev.author = detail::fallback_id(ev.author_email, ev.author_name);
  ev.timestamp = detail::require_time(obj, opts);
  ev.service = detail::require_string(obj, "service");
  const auto& files = detail::require(obj, "files");
  if (!files.is_array()) throw RecordError{ErrorKind::MalformedRecord, "'files' is not an array"};
  if (files.empty()) throw RecordError{ErrorKind::MalformedRecord, "'files' is empty"};
  std::set<std::string> seen;
  for (const auto& f : files) {
    if (!f.is_object()) throw RecordError{ErrorKind::MalformedRecord, "file entry is not an object"};
    FileChange fc;
    fc.path = normalize_path(detail::require_string(f, "path"));
    if (fc.path.empty()) throw RecordError{ErrorKind::MalformedRecord, "file path normalizes to empty"};
    if (!seen.insert(fc.path).second) {
      throw RecordError{ErrorKind::MalformedRecord, "duplicate file path '" + fc.path + "'"};
    }
    auto ct = parse_change_type(detail::require_string(f, "change_type"));
    if (!ct) throw RecordError{ErrorKind::MalformedRecord, "unknown change_type"};
    fc.change_type = *ct;
    if (auto it = f.find("loc"); it != f.end()) {
      if (!it->is_number_integer() || it->get<long long>() < 0) {
        throw RecordError{ErrorKind::MalformedRecord, "'loc' must be a non-negative integer"};
      }
      fc.loc = it->get<std::uint64_t>();
    }
    ev.files.push_back(std::move(fc));
  }
  return ev;
}

inline TimelineEvent parse_timeline_record(const nlohmann::json& obj, const ParseOptions& opts = {}) {
  using detail::RecordError;
  TimelineEvent ev;
  ev.issue_id = detail::require_string(obj, "issue_id");
  ev.actor_email = detail::require_string(obj, "actor_email");
  ev.actor = detail::fallback_id(ev.actor_email, {});
  ev.timestamp = detail::require_time(obj, opts);
  auto kind = parse_timeline_kind(detail::require_string(obj, "kind"));
  if (!kind) throw RecordError{ErrorKind::MalformedRecord, "unknown timeline kind"};
  ev.kind = *kind;
  auto linked = detail::optional_string(obj, "linked_commit");
  if (ev.kind == TimelineKind::CommitRef) {
    if (linked.empty()) throw RecordError{ErrorKind::MalformedRecord, "commit_ref without linked_commit"};
    ev.linked_commit = linked;
  } else if (!linked.empty()) {
    throw RecordError{ErrorKind::MalformedRecord, "linked_commit on a non-commit_ref event"};
  }
  ev.service = detail::require_string(obj, "service");
  return ev;
}

inline ParseResult<ChangeEvent> parse_change_stream(std::istream& in, const ParseOptions& opts = {}) {
  return detail::parse_lines<ChangeEvent>(in, [&](const nlohmann::json& o) { return parse_change_record(o, opts); });
}

inline ParseResult<ChangeEvent> parse_change_stream(std::string_view text, const ParseOptions& opts = {}) {
  std::istringstream in{std::string(text)};
  return parse_change_stream(in, opts);
}

inline ParseResult<TimelineEvent> parse_timeline_stream(std::istream& in, const ParseOptions& opts = {}) {
  return detail::parse_lines<TimelineEvent>(in, [&](const nlohmann::json& o) { return parse_timeline_record(o, opts); });
}

inline ParseResult<TimelineEvent> parse_timeline_stream(std::string_view text, const ParseOptions& opts = {}) {
  std::istringstream in{std::string(text)};
  return parse_timeline_stream(in, opts);
}

// ---------------------------------------------------------------------------
// Serialization (one compact JSON object per line, fixed key order)

inline std::string to_record_line(const ChangeEvent& ev) {
  nlohmann::ordered_json obj;
  obj["commit_id"] = ev.commit_id;
  obj["author_name"] = ev.author_name;
  obj["author_email"] = ev.author_email;
  obj["timestamp"] = format_rfc3339(ev.timestamp);
  obj["service"] = ev.service;
  auto files = nlohmann::ordered_json::array();
  for (const auto& f : ev.files) {
    nlohmann::ordered_json fo;
    fo["path"] = f.path;
    fo["change_type"] = to_string(f.change_type);
    fo["loc"] = f.loc;
    files.push_back(std::move(fo));
  }
  obj["files"] = std::move(files);
  return obj.dump();
}

inline std::string to_record_line(const TimelineEvent& ev) {
  nlohmann::ordered_json obj;
  obj["issue_id"] = ev.issue_id;
  obj["actor_email"] = ev.actor_email;
  obj["timestamp"] = format_rfc3339(ev.timestamp);
  obj["kind"] = to_string(ev.kind);
  if (ev.linked_commit) obj["linked_commit"] = *ev.linked_commit;
  obj["service"] = ev.service;
  return obj.dump();
}

template <class Event>
std::string to_record_stream(const std::vector<Event>& events) {
  std::string out;
  for (const auto& ev : events) {
    out += to_record_line(ev);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Identity resolution

class AliasTable {
 public:
  AliasTable() = default;

  // Keys are matched case-insensitively. Mapping one key to two different
  // canonical ids throws ConflictingAlias.
  void add(std::string_view raw, std::string_view canonical) {
    auto key = to_lower(trim(raw));
    auto target = trim(canonical);
    if (key.empty() || target.empty()) {
      throw Error(ErrorKind::InvalidConfig, "alias entries need a raw key and a canonical id");
    }
    auto [it, inserted] = map_.emplace(key, target);
    if (!inserted && it->second != target) throw ConflictingAlias(std::string(raw), it->second, target);
    canonical_.emplace(to_lower(target), target);
  }

  std::optional<std::string> lookup(std::string_view raw) const {
    auto key = to_lower(trim(raw));
    if (auto it = map_.find(key); it != map_.end()) return it->second;
    if (auto it = canonical_.find(key); it != canonical_.end()) return it->second;
    return std::nullopt;
  }

  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }

  // CSV with columns raw,canonical; an optional header row is skipped.
  static AliasTable parse_csv(std::istream& in) {
    AliasTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto comma = t.rfind(',');
      if (comma == std::string::npos) throw MalformedRecord(line_no, "alias row needs two columns");
      auto raw = trim(std::string_view(t).substr(0, comma));
      auto canon = trim(std::string_view(t).substr(comma + 1));
      if (line_no == 1 && to_lower(raw) == "raw" && to_lower(canon) == "canonical") continue;
      table.add(raw, canon);
    }
    return table;
  }

  static AliasTable parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_csv(in);
  }

 private:
  std::unordered_map<std::string, std::string> map_;
  std::unordered_map<std::string, std::string> canonical_;
};

struct IdentityReport {
  std::vector<std::string> unmapped;                  // fallback ids, sorted
  std::map<std::string, std::size_t> merge_counts;  // canonical id -> distinct raw strings merged
  std::map<std::string, DeveloperIdentity> identities;
};

namespace detail {

inline std::string raw_pair(std::string_view name, std::string_view email) {
  return trim(name) + " <" + trim(email) + ">";
}

inline std::string resolve_one(const AliasTable& table, std::string_view name, std::string_view email,
                               IdentityReport& report, std::set<std::string>& unmapped) {
  std::optional<std::string> hit;
  if (!trim(name).empty() && !trim(email).empty()) hit = table.lookup(raw_pair(name, email));
  if (!hit && !trim(email).empty()) hit = table.lookup(email);
  if (!hit && !trim(name).empty()) hit = table.lookup(name);
  std::string id = hit ? *hit : fallback_id(email, name);
  if (!hit) unmapped.insert(id);
  auto& ident = report.identities[id];
  ident.canonical_id = id;
  ident.aliases.insert(trim(email).empty() ? trim(name) : to_lower(trim(email)));
  return id;
}

}  // namespace detail

// Rewrites author/actor of every event to its canonical id. Idempotent: the
// raw name/email fields are never modified.
inline IdentityReport resolve_identities(std::vector<ChangeEvent>& changes, std::vector<TimelineEvent>& timeline,
                                         const AliasTable& table) {
  IdentityReport report;
  std::set<std::string> unmapped;
  for (auto& ev : changes) ev.author = detail::resolve_one(table, ev.author_name, ev.author_email, report, unmapped);
  for (auto& ev : timeline) ev.actor = detail::resolve_one(table, {}, ev.actor_email, report, unmapped);
  report.unmapped.assign(unmapped.begin(), unmapped.end());
  for (const auto& [id, ident] : report.identities) {
    if (ident.aliases.size() > 1) report.merge_counts[id] = ident.aliases.size();
  }
  return report;
}

// ---------------------------------------------------------------------------
// Bot filtering

// Case-insensitive glob with '*' and '?'.
inline bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  auto eq = [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  };
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || (pattern[p] != '*' && eq(pattern[p], text[t])))) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

class BotMatcher {
 public:
  BotMatcher() = default;
  explicit BotMatcher(std::vector<std::string> patterns) {
    for (auto& p : patterns) {
      auto t = trim(p);
      if (!t.empty()) patterns_.push_back(std::move(t));
    }
  }

  // Patterns containing '*' or '?' are globs over the whole id; all others
  // are case-insensitive substrings.
  bool matches(std::string_view id) const {
    const auto lowered = to_lower(id);
    for (const auto& p : patterns_) {
      if (p.find_first_of("*?") != std::string::npos) {
        if (glob_match(p, id)) return true;
      } else if (lowered.find(to_lower(p)) != std::string::npos) {
        return true;
      }
    }
    return false;
  }

  const std::vector<std::string>& patterns() const { return patterns_; }

  static BotMatcher parse(std::istream& in) {
    std::vector<std::string> patterns;
    std::string line;
    while (std::getline(in, line)) {
      auto t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      patterns.push_back(t);
    }
    return BotMatcher(std::move(patterns));
  }

  static BotMatcher parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
  }

 private:
  std::vector<std::string> patterns_;
};

struct BotFilterReport {
  std::size_t removed_changes = 0;
  std::size_t removed_timeline = 0;
  std::set<std::string> bot_ids;
};

inline BotFilterReport filter_bots(std::vector<ChangeEvent>& changes, std::vector<TimelineEvent>& timeline,
                                   const BotMatcher& bots) {
  BotFilterReport report;
  auto c = std::remove_if(changes.begin(), changes.end(), [&](const ChangeEvent& ev) {
    if (!bots.matches(ev.author)) return false;
    report.bot_ids.insert(ev.author);
    return true;
  });
  report.removed_changes = static_cast<std::size_t>(changes.end() - c);
  changes.erase(c, changes.end());
  auto t = std::remove_if(timeline.begin(), timeline.end(), [&](const TimelineEvent& ev) {
    if (!bots.matches(ev.actor)) return false;
    report.bot_ids.insert(ev.actor);
    return true;
  });
  report.removed_timeline = static_cast<std::size_t>(timeline.end() - t);
  timeline.erase(t, timeline.end());
  return report;
}

inline std::vector<ChangeEvent> filter_bots(std::vector<ChangeEvent> changes, const BotMatcher& bots) {
  std::vector<TimelineEvent> none;
  filter_bots(changes, none, bots);
  return changes;
}

}  // namespace orgcoupling
