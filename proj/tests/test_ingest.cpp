#include <catch_amalgamated.hpp>

#include <random>

#include <orgcoupling/ingest.hpp>

using namespace orgcoupling;

namespace {

const char* kThreeFiles =
    R"({"commit_id":"c1","author_name":"Alice","author_email":"Alice@X.com","timestamp":"2021-03-04T05:06:07Z",)"
    R"("service":"orca","files":[{"path":"a.java","change_type":"add","loc":3},)"
    R"({"path":"src/b.java","change_type":"modify","loc":5},{"path":"c.java","change_type":"delete","loc":0}]})";

std::string change_line(const std::string& id, const std::string& email, const std::string& ts, const std::string& files) {
  return R"({"commit_id":")" + id + R"(","author_name":"n","author_email":")" + email + R"(","timestamp":")" + ts +
         R"(","service":"s","files":)" + files + "}";
}

}  // namespace

TEST_CASE("valid record with three files maps every field") {
  auto res = parse_change_stream(kThreeFiles);
  REQUIRE(res.errors.empty());
  REQUIRE(res.events.size() == 1);
  const auto& ev = res.events[0];
  CHECK(ev.commit_id == "c1");
  CHECK(ev.files.size() == 3);
  CHECK(ev.author == "alice@x.com");
  CHECK(ev.service == "orca");
  CHECK(format_rfc3339(ev.timestamp) == "2021-03-04T05:06:07Z");
  CHECK(ev.files[1].path == "src/b.java");
  CHECK(ev.files[2].change_type == ChangeType::Delete);
  CHECK(ev.loc_delta() == 8);
}

TEST_CASE("empty stream yields no events") {
  auto res = parse_change_stream("");
  CHECK(res.events.empty());
  CHECK(res.errors.empty());
  CHECK(res.records == 0);
  CHECK(parse_timeline_stream("\n\n").events.empty());
}

TEST_CASE("empty file list is malformed") {
  auto res = parse_change_stream(change_line("c", "a@x", "2020-01-01T00:00:00Z", "[]"));
  CHECK(res.events.empty());
  REQUIRE(res.errors.size() == 1);
  CHECK(res.errors[0].kind == ErrorKind::MalformedRecord);
  CHECK(res.errors[0].line_no == 1);
  CHECK_THROWS_AS(res.throw_if_errors(), MalformedRecord);
}

TEST_CASE("malformed lines are reported with their line numbers and do not stop parsing") {
  std::string text = std::string(kThreeFiles) + "\n\nnot json\n" +
                     change_line("c2", "a@x", "2020-01-01T00:00:00Z", R"([{"path":"a","change_type":"merge"}])") + "\n" +
                     change_line("c3", "a@x", "2020-01-01T00:00:00Z", R"([{"path":"a/./b","change_type":"add"},{"path":"a//b","change_type":"add"}])") +
                     "\n" + change_line("c4", "a@x", "2020-01-01T00:00:00Z", R"([{"path":"a","change_type":"add","loc":-2}])") +
                     "\n" + change_line("c5", "a@x", "2020-02-30T00:00:00Z", R"([{"path":"a","change_type":"add"}])") + "\n" +
                     R"({"commit_id":"c6","timestamp":"2020-01-01T00:00:00Z","service":"s","files":[{"path":"a","change_type":"add"}]})" +
                     "\n" + change_line("c7", "a@x", "2020-01-01T00:00:00Z", R"([{"path":"x\\y.txt","change_type":"rename"}])");
  auto res = parse_change_stream(text);
  REQUIRE(res.events.size() == 2);
  CHECK(res.events[0].commit_id == "c1");
  CHECK(res.events[1].commit_id == "c7");
  CHECK(res.events[1].files[0].path == "x/y.txt");
  std::vector<std::size_t> lines;
  for (auto& e : res.errors) lines.push_back(e.line_no);
  CHECK(lines == std::vector<std::size_t>{3, 4, 5, 6, 7, 8});
  CHECK(res.records == res.events.size() + res.errors.size());
}

TEST_CASE("timestamps are normalized to UTC seconds and range-checked") {
  auto res = parse_change_stream(change_line("c", "a@x", "2021-06-01T02:30:00.987+02:30", R"([{"path":"a","change_type":"add"}])"));
  REQUIRE(res.events.size() == 1);
  CHECK(format_rfc3339(res.events[0].timestamp) == "2021-06-01T00:00:00Z");

  ParseOptions opts;
  opts.min_time = make_instant(2015, 1, 1);
  auto old = parse_change_stream(change_line("c", "a@x", "2014-12-31T23:59:59Z", R"([{"path":"a","change_type":"add"}])"), opts);
  REQUIRE(old.errors.size() == 1);
  CHECK(old.errors[0].kind == ErrorKind::TimestampOutOfRange);
  CHECK_THROWS_MATCHES(old.throw_if_errors(), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::TimestampOutOfRange;
                       }));
}

TEST_CASE("timeline kinds and commit references") {
  auto res = parse_timeline_stream(
      R"({"issue_id":"7","actor_email":"Bob@Y.com","timestamp":"2020-05-05T00:00:00Z","kind":"commented","service":"s"})"
      "\n"
      R"({"issue_id":"7","actor_email":"bob@y.com","timestamp":"2020-05-06T00:00:00Z","kind":"commit_ref","linked_commit":"abc123","service":"s"})"
      "\n"
      R"({"issue_id":"7","actor_email":"bob@y.com","timestamp":"2020-05-06T00:00:00Z","kind":"commit_ref","service":"s"})"
      "\n"
      R"({"issue_id":"7","actor_email":"bob@y.com","timestamp":"2020-05-06T00:00:00Z","kind":"closed","linked_commit":"abc","service":"s"})"
      "\n"
      R"({"issue_id":"7","actor_email":"bob@y.com","timestamp":"2020-05-06T00:00:00Z","kind":"labeled","service":"s"})");
  REQUIRE(res.events.size() == 2);
  CHECK(res.events[0].kind == TimelineKind::Commented);
  CHECK_FALSE(res.events[0].linked_commit.has_value());
  CHECK(res.events[0].actor == "bob@y.com");
  CHECK(res.events[1].kind == TimelineKind::CommitRef);
  CHECK(res.events[1].linked_commit == std::optional<std::string>("abc123"));
  REQUIRE(res.errors.size() == 3);
  for (auto& e : res.errors) CHECK(e.kind == ErrorKind::MalformedRecord);
  CHECK(res.errors[0].line_no == 3);
}

TEST_CASE("serialize and reparse round-trips") {
  std::mt19937_64 rng(7);
  std::string text;
  for (int i = 0; i < 200; ++i) {
    const int nfiles = 1 + static_cast<int>(rng() % 4);
    std::string files = "[";
    for (int f = 0; f < nfiles; ++f) {
      if (f) files += ",";
      files += R"({"path":"dir)" + std::to_string(rng() % 3) + "/f" + std::to_string(f) + R"(.c","change_type":")" +
               std::string(to_string(static_cast<ChangeType>(rng() % 4))) + R"(","loc":)" + std::to_string(rng() % 500) + "}";
    }
    files += "]";
    text += change_line("c" + std::to_string(i), "dev" + std::to_string(rng() % 9) + "@X.org",
                        format_rfc3339(make_instant(2020, 1, 1, static_cast<long>(rng() % 86400)) + Days{rng() % 900}), files) +
            "\n";
  }
  auto first = parse_change_stream(text);
  REQUIRE(first.errors.empty());
  auto second = parse_change_stream(to_record_stream(first.events));
  REQUIRE(second.errors.empty());
  CHECK(first.events == second.events);

  std::string tl;
  for (int i = 0; i < 50; ++i) {
    const auto kind = static_cast<TimelineKind>(rng() % 4);
    tl += R"({"issue_id":")" + std::to_string(i % 7) + R"(","actor_email":"u)" + std::to_string(i % 5) + R"(@x","timestamp":")" +
          format_rfc3339(make_instant(2021, 2, 3) + Seconds{i * 977}) + R"(","kind":")" + to_string(kind) + "\"" +
          (kind == TimelineKind::CommitRef ? R"(,"linked_commit":"c)" + std::to_string(i) + "\"" : std::string{}) +
          R"(,"service":"s"})" + "\n";
  }
  auto t1 = parse_timeline_stream(tl);
  REQUIRE(t1.errors.empty());
  CHECK(parse_timeline_stream(to_record_stream(t1.events)).events == t1.events);
}

TEST_CASE("aliases merge identities") {
  auto res = parse_change_stream(change_line("c1", "a@x.com", "2020-01-01T00:00:00Z", R"([{"path":"f","change_type":"add"}])") +
                                 "\n" +
                                 change_line("c2", "ALICE@x.com", "2020-01-02T00:00:00Z", R"([{"path":"f","change_type":"add"}])") +
                                 "\n" +
                                 change_line("c3", "Bob@Y.com", "2020-01-03T00:00:00Z", R"([{"path":"f","change_type":"add"}])"));
  AliasTable table;
  table.add("a@x.com", "dev1");
  table.add("alice@x.com", "dev1");
  std::vector<TimelineEvent> tl;
  auto report = resolve_identities(res.events, tl, table);
  CHECK(res.events[0].author == "dev1");
  CHECK(res.events[1].author == "dev1");
  CHECK(res.events[2].author == "bob@y.com");
  CHECK(report.unmapped == std::vector<std::string>{"bob@y.com"});
  CHECK(report.merge_counts.at("dev1") == 2);
}

TEST_CASE("alias keys: name <email> wins over email, email over name") {
  auto table = AliasTable::parse_csv("raw,canonical\nAlice <A@X.com>,alice-full\na@x.com,alice-mail\nAlice,alice-name\n");
  std::vector<ChangeEvent> ev(3);
  ev[0].author_name = "Alice", ev[0].author_email = "a@x.com";
  ev[1].author_name = "Someone", ev[1].author_email = "a@x.com";
  ev[2].author_name = "alice", ev[2].author_email = "";
  std::vector<TimelineEvent> tl;
  resolve_identities(ev, tl, table);
  CHECK(ev[0].author == "alice-full");
  CHECK(ev[1].author == "alice-mail");
  CHECK(ev[2].author == "alice-name");
}

TEST_CASE("conflicting alias targets are rejected") {
  AliasTable table;
  table.add("a@x.com", "dev1");
  CHECK_NOTHROW(table.add("A@X.COM", "dev1"));
  try {
    table.add("a@x.com", "dev2");
    FAIL("expected ConflictingAlias");
  } catch (const ConflictingAlias& e) {
    CHECK(e.first() == "dev1");
    CHECK(e.second() == "dev2");
    CHECK(e.kind() == ErrorKind::ConflictingAlias);
  }
  CHECK_THROWS_AS(AliasTable::parse_csv("x,d1\ny,d2\nx,d3\n"), ConflictingAlias);
}

TEST_CASE("identity resolution is idempotent") {
  std::mt19937_64 rng(11);
  std::vector<ChangeEvent> ev;
  std::vector<TimelineEvent> tl;
  for (int i = 0; i < 300; ++i) {
    ChangeEvent e;
    e.commit_id = std::to_string(i);
    e.author_name = "N" + std::to_string(rng() % 6);
    e.author_email = rng() % 4 ? "m" + std::to_string(rng() % 8) + "@Corp.io" : "";
    e.files = {{"f", ChangeType::Add, 1}};
    ev.push_back(e);
    TimelineEvent t;
    t.issue_id = std::to_string(i);
    t.actor_email = "m" + std::to_string(rng() % 8) + "@corp.io";
    tl.push_back(t);
  }
  auto table = AliasTable::parse_csv("m1@corp.io,one\nm2@corp.io,one\nN3,three\nm5@corp.io,m5@corp.io\n");
  resolve_identities(ev, tl, table);
  const auto ev1 = ev;
  const auto tl1 = tl;
  resolve_identities(ev, tl, table);
  CHECK(ev == ev1);
  CHECK(tl == tl1);
}

TEST_CASE("bot filtering by substring and glob") {
  std::vector<ChangeEvent> ev(4);
  ev[0].author = "dependabot[bot]";
  ev[1].author = "release-ci";
  ev[2].author = "alice@x.com";
  ev[3].author = "Dependabot-Preview";
  std::vector<TimelineEvent> tl(2);
  tl[0].actor = "release-ci";
  tl[1].actor = "alice@x.com";

  auto unchanged = ev;
  CHECK(filter_bots(unchanged, BotMatcher{}) == ev);

  auto bots = BotMatcher::parse("# bots\ndependabot\n*-ci\n");
  auto kept = ev;
  auto rep = filter_bots(kept, tl, bots);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].author == "alice@x.com");
  CHECK(tl.size() == 1);
  CHECK(rep.removed_changes == 3);
  CHECK(rep.removed_timeline == 1);
  CHECK(rep.bot_ids.count("release-ci"));
  CHECK_FALSE(BotMatcher::parse("*-ci").matches("ci-release"));
  CHECK(glob_match("r?lease-*", "RELEASE-bot"));
}

TEST_CASE("bot filtering and identity resolution commute after an initial resolution") {
  std::vector<ChangeEvent> ev;
  const char* names[] = {"dependabot[bot]", "alice", "release-ci", "bob", "Alice"};
  for (int i = 0; i < 40; ++i) {
    ChangeEvent e;
    e.commit_id = std::to_string(i);
    e.author_name = names[i % 5];
    e.files = {{"f", ChangeType::Add, 1}};
    ev.push_back(e);
  }
  auto table = AliasTable::parse_csv("alice,alice@corp\nbob,bob@corp\n");
  auto bots = BotMatcher::parse("dependabot\n*-ci\n");
  std::vector<TimelineEvent> none;
  resolve_identities(ev, none, table);

  auto a = ev;  // filter, then resolve
  filter_bots(a, none, bots);
  resolve_identities(a, none, table);
  auto b = ev;  // resolve, then filter
  resolve_identities(b, none, table);
  filter_bots(b, none, bots);
  CHECK(a == b);
  CHECK(a.size() == 24);
}

TEST_CASE("path normalization") {
  CHECK(normalize_path("./a//b/./c.txt") == "a/b/c.txt");
  CHECK(normalize_path("a\\b\\c") == "a/b/c");
  CHECK(normalize_path("/abs/x") == "abs/x");
}
