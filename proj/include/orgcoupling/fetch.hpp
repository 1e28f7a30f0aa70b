#pragma once

// GitHub REST exporter. Writes one record file per API page:
//   <owner>__<repo>.commits.pNNNN.changes.jsonl
//   <owner>__<repo>.issues.pNNNN.timeline.jsonl
// and a <owner>__<repo>.cursor.json that records finished pages, so an
// interrupted run resumes where it stopped and never rewrites a page.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "ingest.hpp"
#include "timeutil.hpp"

namespace orgcoupling {

struct FetchOptions {
  std::string api_base = "https://api.github.com";
  std::vector<std::string> repos;  // owner/repo
  std::string token;               // empty: unauthenticated
  std::optional<Instant> since;
  std::optional<Instant> until;
  std::string out_dir = ".";
  int per_page = 100;
  int timeout_s = 30;
};

struct FetchSummary {
  std::size_t repos = 0;
  std::size_t pages_written = 0;
  std::size_t pages_skipped = 0;
  std::size_t changes = 0;
  std::size_t timeline = 0;
  std::size_t commits_without_files = 0;
};

namespace detail {

struct RepoCursor {
  int commit_pages = 0;
  bool commits_done = false;
  int issue_pages = 0;
  bool issues_done = false;
};

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::FetchError, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::FetchError, "short write on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline RepoCursor load_cursor(const std::filesystem::path& path) {
  RepoCursor c;
  std::ifstream in(path);
  if (!in) return c;
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::FetchError, "corrupt cursor file " + path.string());
  c.commit_pages = j.value("commit_pages", 0);
  c.commits_done = j.value("commits_done", false);
  c.issue_pages = j.value("issue_pages", 0);
  c.issues_done = j.value("issues_done", false);
  return c;
}

inline void save_cursor(const std::filesystem::path& path, const RepoCursor& c) {
  nlohmann::ordered_json j;
  j["commit_pages"] = c.commit_pages;
  j["commits_done"] = c.commits_done;
  j["issue_pages"] = c.issue_pages;
  j["issues_done"] = c.issues_done;
  write_atomic(path, j.dump(2) + "\n");
}

inline std::string page_name(const std::string& stem, const char* phase, int page, const char* kind) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ".p%04d.", page);
  return stem + "." + phase + buf + kind + ".jsonl";
}

inline std::optional<ChangeType> map_status(const std::string& s) {
  if (s == "added" || s == "copied") return ChangeType::Add;
  if (s == "modified" || s == "changed") return ChangeType::Modify;
  if (s == "removed") return ChangeType::Delete;
  if (s == "renamed") return ChangeType::Rename;
  return std::nullopt;
}

inline std::string login_email(const nlohmann::json& user) {
  if (user.is_object() && user.contains("login") && user["login"].is_string()) {
    return to_lower(user["login"].get<std::string>()) + "@users.noreply.github.com";
  }
  return "ghost@users.noreply.github.com";
}

class GitHubClient {
 public:
  GitHubClient(const FetchOptions& opts, std::string cursor_path)
      : client_(opts.api_base), cursor_path_(std::move(cursor_path)) {
    client_.set_connection_timeout(opts.timeout_s);
    client_.set_read_timeout(opts.timeout_s);
    client_.set_follow_location(true);
    headers_ = {{"Accept", "application/vnd.github+json"}, {"User-Agent", "orgcoupling-fetch"}};
    if (!opts.token.empty()) headers_.emplace("Authorization", "Bearer " + opts.token);
  }

  nlohmann::json get(const std::string& path) {
    auto res = client_.Get(path, headers_);
    if (!res) throw PartialFetch(cursor_path_, "request failed: " + httplib::to_string(res.error()) + " for " + path);
    const int status = res->status;
    if (status == 401) throw Error(ErrorKind::AuthFailure, "401 from " + path);
    if (status == 403 || status == 429) {
      const bool exhausted = res->get_header_value("X-RateLimit-Remaining") == "0";
      if (res->has_header("Retry-After")) {
        throw RateLimited(std::stol(res->get_header_value("Retry-After")), cursor_path_);
      }
      if (exhausted || status == 429) {
        long wait = 60;
        if (res->has_header("X-RateLimit-Reset")) {
          const long reset = std::stol(res->get_header_value("X-RateLimit-Reset"));
          const long now = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();
          wait = std::max(0L, reset - now);
        }
        throw RateLimited(wait, cursor_path_);
      }
      throw Error(ErrorKind::AuthFailure, "403 from " + path);
    }
    if (status >= 500) throw PartialFetch(cursor_path_, "HTTP " + std::to_string(status) + " for " + path);
    if (status != 200) throw Error(ErrorKind::FetchError, "HTTP " + std::to_string(status) + " for " + path);
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw PartialFetch(cursor_path_, "unparseable body for " + path);
    return j;
  }

 private:
  httplib::Client client_;
  httplib::Headers headers_;
  std::string cursor_path_;
};

inline std::string str_or(const nlohmann::json& j, const char* key, const std::string& fallback = {}) {
  if (j.is_object() && j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  return fallback;
}

inline std::optional<Instant> time_of(const nlohmann::json& j, const char* key) {
  const auto s = str_or(j, key);
  if (s.empty()) return std::nullopt;
  return parse_rfc3339(s);
}

}  // namespace detail

inline FetchSummary fetch_export(const FetchOptions& opts) {
  namespace fs = std::filesystem;
  FetchSummary summary;
  if (opts.repos.empty()) return summary;
  fs::create_directories(opts.out_dir);
  auto in_range = [&](Instant t) { return (!opts.since || t >= *opts.since) && (!opts.until || t < *opts.until); };
  const std::string per_page = std::to_string(opts.per_page);

  for (const auto& repo : opts.repos) {
    const auto slash = repo.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == repo.size()) {
      throw Error(ErrorKind::InvalidConfig, "repository must be owner/name, got '" + repo + "'");
    }
    const std::string owner = repo.substr(0, slash), name = repo.substr(slash + 1);
    const std::string stem = owner + "__" + name;
    const fs::path cursor_path = fs::path(opts.out_dir) / (stem + ".cursor.json");
    auto cursor = detail::load_cursor(cursor_path);
    detail::GitHubClient gh(opts, cursor_path.string());
    const std::string base = "/repos/" + owner + "/" + name;
    ++summary.repos;

    while (!cursor.commits_done) {
      const int page = cursor.commit_pages + 1;
      const fs::path file = fs::path(opts.out_dir) / detail::page_name(stem, "commits", page, "changes");
      std::string q = base + "/commits?per_page=" + per_page + "&page=" + std::to_string(page);
      if (opts.since) q += "&since=" + format_rfc3339(*opts.since);
      if (opts.until) q += "&until=" + format_rfc3339(*opts.until);
      const auto list = gh.get(q);
      if (!list.is_array()) throw PartialFetch(cursor_path.string(), "commit listing is not an array");
      std::string body;
      for (const auto& item : list) {
        const auto sha = detail::str_or(item, "sha");
        if (sha.empty()) continue;
        const auto detail_json = gh.get(base + "/commits/" + sha);
        const auto& meta = detail_json.contains("commit") ? detail_json["commit"] : nlohmann::json::object();
        const auto& author = meta.contains("author") ? meta["author"] : nlohmann::json::object();
        ChangeEvent ev;
        ev.commit_id = sha;
        ev.author_name = detail::str_or(author, "name");
        ev.author_email = detail::str_or(author, "email");
        if (ev.author_name.empty() && ev.author_email.empty()) ev.author_email = detail::login_email(detail_json["author"]);
        auto ts = detail::time_of(author, "date");
        if (!ts) continue;
        ev.timestamp = *ts;
        ev.service = name;
        if (detail_json.contains("files") && detail_json["files"].is_array()) {
          for (const auto& f : detail_json["files"]) {
            auto type = detail::map_status(detail::str_or(f, "status"));
            const auto path = normalize_path(detail::str_or(f, "filename"));
            if (!type || path.empty()) continue;
            const bool dup = std::any_of(ev.files.begin(), ev.files.end(), [&](const FileChange& c) { return c.path == path; });
            if (dup) continue;
            ev.files.push_back({path, *type, f.value("additions", 0ull) + f.value("deletions", 0ull)});
          }
        }
        if (ev.files.empty()) {
          ++summary.commits_without_files;
          continue;
        }
        body += to_record_line(ev) + "\n";
        ++summary.changes;
      }
      if (fs::exists(file)) {
        ++summary.pages_skipped;
      } else {
        detail::write_atomic(file, body);
        ++summary.pages_written;
      }
      cursor.commit_pages = page;
      cursor.commits_done = static_cast<int>(list.size()) < opts.per_page;
      detail::save_cursor(cursor_path, cursor);
    }

    while (!cursor.issues_done) {
      const int page = cursor.issue_pages + 1;
      const fs::path file = fs::path(opts.out_dir) / detail::page_name(stem, "issues", page, "timeline");
      std::string q = base + "/issues?state=all&per_page=" + per_page + "&page=" + std::to_string(page);
      if (opts.since) q += "&since=" + format_rfc3339(*opts.since);
      const auto list = gh.get(q);
      if (!list.is_array()) throw PartialFetch(cursor_path.string(), "issue listing is not an array");
      std::string body;
      auto emit = [&](TimelineEvent ev) {
        if (!in_range(ev.timestamp)) return;
        body += to_record_line(ev) + "\n";
        ++summary.timeline;
      };
      for (const auto& issue : list) {
        if (!issue.contains("number")) continue;
        const std::string number = std::to_string(issue["number"].get<long long>());
        if (auto created = detail::time_of(issue, "created_at")) {
          const auto email = detail::login_email(issue.value("user", nlohmann::json::object()));
          emit({number, email, email, *created, TimelineKind::Opened, std::nullopt, name});
        }
        for (int tpage = 1;; ++tpage) {
          const auto events = gh.get(base + "/issues/" + number + "/timeline?per_page=" + per_page + "&page=" + std::to_string(tpage));
          if (!events.is_array()) break;
          for (const auto& e : events) {
            const auto kind = detail::str_or(e, "event");
            const auto& who = e.contains("actor") && e["actor"].is_object() ? e["actor"] : e.value("user", nlohmann::json::object());
            const auto email = detail::login_email(who);
            auto ts = detail::time_of(e, "created_at");
            if (!ts) continue;
            if (kind == "commented") {
              emit({number, email, email, *ts, TimelineKind::Commented, std::nullopt, name});
            } else if (kind == "closed") {
              emit({number, email, email, *ts, TimelineKind::Closed, std::nullopt, name});
            } else if (kind == "referenced" && e.contains("commit_id") && e["commit_id"].is_string()) {
              emit({number, email, email, *ts, TimelineKind::CommitRef, e["commit_id"].get<std::string>(), name});
            }
          }
          if (static_cast<int>(events.size()) < opts.per_page) break;
        }
      }
      if (fs::exists(file)) {
        ++summary.pages_skipped;
      } else {
        detail::write_atomic(file, body);
        ++summary.pages_written;
      }
      cursor.issue_pages = page;
      cursor.issues_done = static_cast<int>(list.size()) < opts.per_page;
      detail::save_cursor(cursor_path, cursor);
    }
  }
  return summary;
}

}  // namespace orgcoupling
