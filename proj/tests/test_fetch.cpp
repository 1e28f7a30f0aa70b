#include <catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <thread>

#include <orgcoupling/fetch.hpp>
#include <orgcoupling/pipeline.hpp>

using namespace orgcoupling;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// A tiny stand-in for the REST API: three commits over two pages of two,
// one issue with a short timeline.
class MockApi {
 public:
  std::atomic<int> fail_detail_at{-1};  // n-th commit detail request answers 502
  std::atomic<int> status_override{0};
  std::atomic<int> detail_requests{0};
  std::string last_auth;
  std::string retry_after;

  MockApi() {
    srv_.Get(R"(/repos/o/r/commits)", [this](const httplib::Request& req, httplib::Response& res) {
      if (intercept(req, res)) return;
      const int page = std::stoi(req.get_param_value("page"));
      json list = json::array();
      if (page == 1) list = {{{"sha", "c1"}}, {{"sha", "c2"}}};
      if (page == 2) list = {{{"sha", "c3"}}};
      res.set_content(list.dump(), "application/json");
    });
    srv_.Get(R"(/repos/o/r/commits/(\w+))", [this](const httplib::Request& req, httplib::Response& res) {
      if (intercept(req, res)) return;
      const int n = detail_requests++;
      if (n == fail_detail_at) {
        res.status = 502;
        return;
      }
      const std::string sha = req.matches[1];
      json files = json::array({{{"filename", "src/" + sha + ".go"}, {"status", "modified"}, {"additions", 3}, {"deletions", 1}}});
      if (sha == "c2") files.push_back({{"filename", "README.md"}, {"status", "added"}, {"additions", 10}, {"deletions", 0}});
      json body = {{"sha", sha},
                   {"commit", {{"author", {{"name", "Dev " + sha}, {"email", sha + "@example.org"}, {"date", "2021-03-0" + sha.substr(1) + "T10:00:00Z"}}}}},
                   {"files", files}};
      res.set_content(body.dump(), "application/json");
    });
    srv_.Get(R"(/repos/o/r/issues)", [this](const httplib::Request& req, httplib::Response& res) {
      if (intercept(req, res)) return;
      json list = json::array();
      if (req.get_param_value("page") == "1") {
        list.push_back({{"number", 7}, {"created_at", "2021-03-01T09:00:00Z"}, {"user", {{"login", "amy"}}}});
      }
      res.set_content(list.dump(), "application/json");
    });
    srv_.Get(R"(/repos/o/r/issues/7/timeline)", [this](const httplib::Request& req, httplib::Response& res) {
      if (intercept(req, res)) return;
      json events = json::array({
          {{"event", "commented"}, {"created_at", "2021-03-01T11:00:00Z"}, {"actor", {{"login", "bo"}}}},
          {{"event", "referenced"}, {"created_at", "2021-03-01T12:00:00Z"}, {"commit_id", "c1"}, {"actor", {{"login", "amy"}}}},
          {{"event", "labeled"}, {"created_at", "2021-03-01T12:30:00Z"}, {"actor", {{"login", "amy"}}}},
          {{"event", "closed"}, {"created_at", "2021-03-02T08:00:00Z"}, {"actor", {{"login", "amy"}}}},
      });
      const auto page = static_cast<std::size_t>(std::stoi(req.get_param_value("page")));
      const auto per = static_cast<std::size_t>(std::stoi(req.get_param_value("per_page")));
      json slice = json::array();
      for (std::size_t i = (page - 1) * per; i < std::min(events.size(), page * per); ++i) slice.push_back(events[i]);
      res.set_content(slice.dump(), "application/json");
    });
    port_ = srv_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { srv_.listen_after_bind(); });
    srv_.wait_until_ready();
  }

  ~MockApi() {
    srv_.stop();
    thread_.join();
  }

  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  bool intercept(const httplib::Request& req, httplib::Response& res) {
    last_auth = req.get_header_value("Authorization");
    if (status_override == 0) return false;
    res.status = status_override;
    if (!retry_after.empty()) res.set_header("Retry-After", retry_after);
    return true;
  }

  httplib::Server srv_;
  int port_ = 0;
  std::thread thread_;
};

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("orgcoupling-fetch-" + std::to_string(::getpid()));
  TempDir() {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

FetchOptions options(const MockApi& api, const TempDir& tmp) {
  FetchOptions o;
  o.api_base = api.base();
  o.repos = {"o/r"};
  o.out_dir = tmp.path.string();
  o.per_page = 2;
  o.timeout_s = 5;
  return o;
}

auto kind_is(ErrorKind k) {
  return Catch::Matchers::Predicate<Error>([k](const Error& e) { return e.kind() == k; });
}

}  // namespace

TEST_CASE("an empty repository list fetches nothing") {
  FetchOptions o;
  o.api_base = "http://127.0.0.1:1";
  const auto s = fetch_export(o);
  CHECK(s.repos == 0);
  CHECK(s.pages_written == 0);
}

TEST_CASE("a full export is readable by the pipeline") {
  MockApi api;
  TempDir tmp;
  const auto s = fetch_export(options(api, tmp));
  CHECK(api.last_auth.empty());
  CHECK(s.changes == 3);
  CHECK(s.timeline == 4);
  CHECK(fs::exists(tmp.path / "o__r.commits.p0001.changes.jsonl"));
  CHECK(fs::exists(tmp.path / "o__r.commits.p0002.changes.jsonl"));
  CHECK(fs::exists(tmp.path / "o__r.issues.p0001.timeline.jsonl"));

  const auto in = load_input_dir(tmp.path.string());
  REQUIRE(in.changes.size() == 3);
  CHECK(in.timeline.size() == 4);
  CHECK(in.summary.malformed == 0);
  CHECK(in.changes[0].service == "r");
  CHECK(in.changes[1].files.size() == 2);
  CHECK(in.changes[1].files[0].loc == 4);
  std::set<TimelineKind> kinds;
  for (const auto& ev : in.timeline) kinds.insert(ev.kind);
  CHECK(kinds.size() == 4);
  CHECK(in.timeline[0].actor_email == "amy@users.noreply.github.com");

  // A second run over a finished export does nothing.
  const auto again = fetch_export(options(api, tmp));
  CHECK(again.changes == 0);
  CHECK(again.pages_written == 0);
}

TEST_CASE("tokens are sent as bearer credentials") {
  MockApi api;
  TempDir tmp;
  auto o = options(api, tmp);
  o.token = "secret";
  fetch_export(o);
  CHECK(api.last_auth == "Bearer secret");
}

TEST_CASE("401 is an authentication failure") {
  MockApi api;
  TempDir tmp;
  api.status_override = 401;
  CHECK_THROWS_MATCHES(fetch_export(options(api, tmp)), Error, kind_is(ErrorKind::AuthFailure));
  api.status_override = 403;
  CHECK_THROWS_MATCHES(fetch_export(options(api, tmp)), Error, kind_is(ErrorKind::AuthFailure));
  api.status_override = 404;
  CHECK_THROWS_MATCHES(fetch_export(options(api, tmp)), Error, kind_is(ErrorKind::FetchError));
}

TEST_CASE("rate limits report the wait") {
  MockApi api;
  TempDir tmp;
  api.status_override = 429;
  api.retry_after = "17";
  try {
    fetch_export(options(api, tmp));
    FAIL("expected RateLimited");
  } catch (const RateLimited& e) {
    CHECK(e.retry_after() == 17);
    CHECK(e.kind() == ErrorKind::RateLimited);
  }
}

TEST_CASE("an interrupted export resumes without duplicates") {
  MockApi api;
  TempDir tmp;
  api.fail_detail_at = 2;  // the only commit on page two
  try {
    fetch_export(options(api, tmp));
    FAIL("expected PartialFetch");
  } catch (const PartialFetch& e) {
    CHECK(fs::path(e.cursor()).filename() == "o__r.cursor.json");
  }
  CHECK(fs::exists(tmp.path / "o__r.commits.p0001.changes.jsonl"));
  CHECK_FALSE(fs::exists(tmp.path / "o__r.commits.p0002.changes.jsonl"));

  api.fail_detail_at = -1;
  const auto s = fetch_export(options(api, tmp));
  CHECK(s.changes == 1);
  const auto in = load_input_dir(tmp.path.string());
  std::set<std::string> ids;
  for (const auto& ev : in.changes) ids.insert(ev.commit_id);
  CHECK(in.changes.size() == 3);
  CHECK(ids.size() == 3);
}

TEST_CASE("an unreachable server is a partial fetch") {
  TempDir tmp;
  FetchOptions o;
  o.api_base = "http://127.0.0.1:1";
  o.repos = {"o/r"};
  o.out_dir = tmp.path.string();
  o.timeout_s = 2;
  CHECK_THROWS_MATCHES(fetch_export(o), Error, kind_is(ErrorKind::PartialFetch));
  o.repos = {"noslash"};
  CHECK_THROWS_MATCHES(fetch_export(o), Error, kind_is(ErrorKind::InvalidConfig));
}
