#pragma once

// Synthetic event traces with planted developer profiles.
//
// Randomness comes from std::mt19937_64 (its output sequence is fixed by the
// C++ standard) with explicit integer mappings, so a seed reproduces the same
// byte stream on every conforming implementation:
//   uniform_below(n): draw x until x >= (2^64 - n) % n, return x % n
//   uniform01():      (x >> 11) * 2^-53

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "timeutil.hpp"

namespace orgcoupling {

class TraceRng {
 public:
  explicit TraceRng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return uniform01() < p; }

  std::string hex(std::size_t chars) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    while (out.size() < chars) {
      std::uint64_t x = gen_();
      for (int i = 0; i < 16 && out.size() < chars; ++i, x >>= 4) out += digits[x & 0xf];
    }
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

enum class Profile { Background, Jack, Maven, Connector, Stacked };

inline const char* to_string(Profile p) {
  switch (p) {
    case Profile::Background: return "background";
    case Profile::Jack: return "jack";
    case Profile::Maven: return "maven";
    case Profile::Connector: return "connector";
    case Profile::Stacked: return "stacked";
  }
  return "background";
}

inline Profile parse_profile(const std::string& s) {
  if (s == "background") return Profile::Background;
  if (s == "jack") return Profile::Jack;
  if (s == "maven") return Profile::Maven;
  if (s == "connector") return Profile::Connector;
  if (s == "stacked") return Profile::Stacked;
  throw Error(ErrorKind::InvalidSpec, "unknown profile '" + s + "'");
}

struct DeveloperSpec {
  std::string id;
  Profile profile = Profile::Background;
  double rate = 0.3;            // commits per day
  std::vector<int> services;    // first entry is the home service
  int private_files = 0;        // maven / stacked only
  int team = -1;                // background team within the home service; -1 = round robin
  bool alternate = false;       // strictly alternate commits across `services`
  std::vector<int> hub_services;  // stacked: services whose hub files it co-edits
};

struct ScenarioSpec {
  std::uint64_t seed = 42;
  int n_devs = 1;
  int n_services = 1;
  int n_files_per_service = 12;
  int duration_days = 365;
  Instant start = make_instant(2020, 1, 1);
  double issue_rate = 0.2;
  double comment_rate = 0.5;
  double background_rate = 0.3;
  int teams_per_service = 1;
  int hub_files = 2;
  double hub_share = 0.3;  // share of background commits that go to hub files
  int bots = 1;
  double bot_rate = 0.05;
  std::vector<std::string> service_names;  // defaults to svc0..svcN-1
  std::vector<DeveloperSpec> developers;   // declared; the rest are background

  std::string service_name(int i) const {
    if (i >= 0 && static_cast<std::size_t>(i) < service_names.size()) return service_names[static_cast<std::size_t>(i)];
    return "svc" + std::to_string(i);
  }
};

// Fills undeclared developer slots with background developers homed round
// robin across services, then checks every field.
inline std::vector<DeveloperSpec> expand_developers(const ScenarioSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); };
  if (spec.n_devs < 1) fail("n_devs must be >= 1");
  if (spec.n_services < 1) fail("n_services must be >= 1");
  if (spec.n_files_per_service < 1) fail("n_files_per_service must be >= 1");
  if (spec.duration_days < 1) fail("duration_days must be >= 1");
  if (spec.teams_per_service < 1) fail("teams_per_service must be >= 1");
  if (spec.hub_files < 0) fail("hub_files must be >= 0");
  if (!(spec.background_rate > 0.0)) fail("background_rate must be positive");
  if (spec.bots < 0 || (spec.bots > 0 && !(spec.bot_rate > 0.0))) fail("bot settings invalid");
  if (spec.hub_share < 0.0 || spec.hub_share > 1.0) fail("hub_share must lie in [0,1]");
  if (spec.issue_rate < 0.0 || spec.issue_rate > 1.0 || spec.comment_rate < 0.0 || spec.comment_rate > 1.0) {
    fail("issue_rate and comment_rate must lie in [0,1]");
  }
  if (static_cast<int>(spec.developers.size()) > spec.n_devs) fail("more declared developers than n_devs");
  std::vector<DeveloperSpec> devs = spec.developers;
  std::set<std::string> ids;
  for (auto& d : devs) {
    if (d.id.empty()) fail("developer id must be non-empty");
    if (!ids.insert(d.id).second) fail("duplicate developer id '" + d.id + "'");
  }
  int bg = 0;
  while (static_cast<int>(devs.size()) < spec.n_devs) {
    DeveloperSpec d;
    char buf[16];
    do {
      std::snprintf(buf, sizeof buf, "bg%02d", ++bg);
    } while (ids.count(buf));
    d.id = buf;
    ids.insert(d.id);
    d.rate = spec.background_rate;
    d.services = {(bg - 1) % spec.n_services};
    devs.push_back(d);
  }
  for (auto& d : devs) {
    if (!(d.rate > 0.0) || !std::isfinite(d.rate)) fail("developer " + d.id + ": rate must be positive");
    if (d.services.empty()) {
      d.services = d.profile == Profile::Jack || d.profile == Profile::Connector ? std::vector<int>{} : std::vector<int>{0};
      if (d.services.empty()) {
        for (int s = 0; s < spec.n_services; ++s) d.services.push_back(s);
      }
    }
    for (int s : d.services) {
      if (s < 0 || s >= spec.n_services) fail("developer " + d.id + ": service index out of range");
    }
    for (int s : d.hub_services) {
      if (s < 0 || s >= spec.n_services) fail("developer " + d.id + ": hub service index out of range");
    }
    if ((d.profile == Profile::Maven || d.profile == Profile::Stacked) && d.private_files <= 0) d.private_files = 6;
    if (d.private_files < 0) fail("developer " + d.id + ": private_files must be >= 0");
  }
  return devs;
}

// "key = value" lines; "[dev <id>]" opens a developer section.
inline ScenarioSpec parse_scenario(std::istream& in) {
  ScenarioSpec spec;
  DeveloperSpec* current = nullptr;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::InvalidSpec, "line " + std::to_string(line_no) + ": " + what);
  };
  auto to_int = [&](const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
      x = std::stoll(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) fail("expected integer, got '" + v + "'");
    return x;
  };
  auto to_double = [&](const std::string& v) {
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) fail("expected number, got '" + v + "'");
    return x;
  };
  auto int_list = [&](const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto t = trim(item);
      if (!t.empty()) out.push_back(static_cast<int>(to_int(t)));
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("unterminated section header");
      auto inner = trim(std::string_view(t).substr(1, t.size() - 2));
      if (inner.rfind("dev ", 0) != 0) fail("sections must be named [dev <id>]");
      spec.developers.push_back({});
      current = &spec.developers.back();
      current->id = trim(std::string_view(inner).substr(4));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto val = trim(std::string_view(t).substr(eq + 1));
    if (current) {
      if (key == "profile") current->profile = parse_profile(val);
      else if (key == "rate") current->rate = to_double(val);
      else if (key == "services") current->services = int_list(val);
      else if (key == "private_files") current->private_files = static_cast<int>(to_int(val));
      else if (key == "team") current->team = static_cast<int>(to_int(val));
      else if (key == "alternate") current->alternate = val == "true" || val == "1" || val == "yes";
      else if (key == "hub_services") current->hub_services = int_list(val);
      else fail("unknown developer key '" + key + "'");
      continue;
    }
    if (key == "seed") spec.seed = static_cast<std::uint64_t>(to_int(val));
    else if (key == "n_devs") spec.n_devs = static_cast<int>(to_int(val));
    else if (key == "n_services") spec.n_services = static_cast<int>(to_int(val));
    else if (key == "n_files_per_service") spec.n_files_per_service = static_cast<int>(to_int(val));
    else if (key == "duration_days") spec.duration_days = static_cast<int>(to_int(val));
    else if (key == "start_date") {
      auto ts = parse_rfc3339(val + "T00:00:00Z");
      if (!ts) fail("start_date must be YYYY-MM-DD");
      spec.start = *ts;
    } else if (key == "issue_rate") spec.issue_rate = to_double(val);
    else if (key == "comment_rate") spec.comment_rate = to_double(val);
    else if (key == "background_rate") spec.background_rate = to_double(val);
    else if (key == "teams_per_service") spec.teams_per_service = static_cast<int>(to_int(val));
    else if (key == "hub_files") spec.hub_files = static_cast<int>(to_int(val));
    else if (key == "hub_share") spec.hub_share = to_double(val);
    else if (key == "bots") spec.bots = static_cast<int>(to_int(val));
    else if (key == "bot_rate") spec.bot_rate = to_double(val);
    else if (key == "service_names") {
      spec.service_names.clear();
      std::stringstream ss(val);
      std::string item;
      while (std::getline(ss, item, ',')) spec.service_names.push_back(trim(item));
    } else fail("unknown scenario key '" + key + "'");
  }
  expand_developers(spec);
  return spec;
}

inline ScenarioSpec parse_scenario(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_scenario(in);
}

inline ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InputMissing, "cannot open scenario " + path);
  return parse_scenario(in);
}

struct SyntheticTrace {
  std::vector<ChangeEvent> changes;
  std::vector<TimelineEvent> timeline;
  std::vector<DeveloperSpec> developers;  // after expansion
  std::string aliases_csv;                // raw,canonical
  std::string bots_txt;
};

namespace detail {

// File layout of one service: hub files first, then team pools, then one
// private block per maven/stacked developer homed there.
struct ServiceFiles {
  std::vector<std::string> hubs;
  std::vector<std::vector<std::string>> teams;
  std::map<std::string, std::vector<std::string>> private_blocks;

  std::vector<std::string> pool() const {
    std::vector<std::string> out = hubs;
    for (const auto& t : teams) out.insert(out.end(), t.begin(), t.end());
    return out;
  }
};

inline std::vector<ServiceFiles> lay_out_files(const ScenarioSpec& spec, const std::vector<DeveloperSpec>& devs) {
  std::vector<ServiceFiles> out(static_cast<std::size_t>(spec.n_services));
  for (int s = 0; s < spec.n_services; ++s) {
    int reserved = 0;
    for (const auto& d : devs) {
      if ((d.profile == Profile::Maven || d.profile == Profile::Stacked) && d.services.front() == s) reserved += d.private_files;
    }
    const int shared = spec.n_files_per_service - reserved;
    if (shared < spec.hub_files + spec.teams_per_service) {
      throw Error(ErrorKind::InvalidSpec, "service " + std::to_string(s) + " has too few files for its layout");
    }
    char buf[64];
    int next = 0;
    auto name = [&](const char* dir) {
      std::snprintf(buf, sizeof buf, "src/%s/File%03d.java", dir, next++);
      return std::string(buf);
    };
    auto& sf = out[static_cast<std::size_t>(s)];
    for (int i = 0; i < spec.hub_files; ++i) sf.hubs.push_back(name("api"));
    sf.teams.resize(static_cast<std::size_t>(spec.teams_per_service));
    const int pool = shared - spec.hub_files;
    for (int i = 0; i < pool; ++i) {
      sf.teams[static_cast<std::size_t>(i % spec.teams_per_service)].push_back(name("core"));
    }
    for (const auto& d : devs) {
      if ((d.profile == Profile::Maven || d.profile == Profile::Stacked) && d.services.front() == s) {
        auto& block = sf.private_blocks[d.id];
        for (int i = 0; i < d.private_files; ++i) block.push_back(name("internal"));
      }
    }
  }
  return out;
}

template <class T>
const T& pick(TraceRng& rng, const std::vector<T>& v) {
  return v[rng.uniform_below(v.size())];
}

}  // namespace detail

// Deterministic trace for the scenario. Profiles:
//   background  1-file commits to its team's pool in its home service, or
//               to a hub file with probability hub_share
//   jack        1-file commits spread uniformly over every pool file of its services
//   maven       commits confined to its private file block
//   connector   commits to the hub files of each of its services
//   stacked     mixes jack-like pool edits in its home service, private edits
//               and hub edits in `hub_services`; elsewhere it only edits hubs
// Background commits open issues (opened, commit_ref, optional comment by a
// teammate, closed) with probability issue_rate.
inline SyntheticTrace generate_trace(const ScenarioSpec& spec) {
  SyntheticTrace out;
  out.developers = expand_developers(spec);
  const auto& devs = out.developers;
  const auto layout = detail::lay_out_files(spec, devs);
  TraceRng rng(spec.seed);

  // Team assignment of background developers per home service.
  std::map<std::string, int> team_of;
  std::vector<std::vector<std::vector<std::string>>> team_members(
      static_cast<std::size_t>(spec.n_services), std::vector<std::vector<std::string>>(static_cast<std::size_t>(spec.teams_per_service)));
  std::vector<int> next_team(static_cast<std::size_t>(spec.n_services), 0);
  for (const auto& d : devs) {
    if (d.profile != Profile::Background) continue;
    const auto home = static_cast<std::size_t>(d.services.front());
    int team = d.team >= 0 ? d.team % spec.teams_per_service : next_team[home]++ % spec.teams_per_service;
    team_of[d.id] = team;
    team_members[home][static_cast<std::size_t>(team)].push_back(d.id);
  }

  struct Slot {
    Instant t;
    std::size_t dev;
  };
  std::vector<Slot> slots;
  const long day_s = 86400;
  for (std::size_t i = 0; i < devs.size(); ++i) {
    const double rate = devs[i].rate;
    const auto whole = static_cast<long>(std::floor(rate));
    const double frac = rate - static_cast<double>(whole);
    for (int day = 0; day < spec.duration_days; ++day) {
      long n = whole + (rng.chance(frac) ? 1 : 0);
      for (long k = 0; k < n; ++k) {
        slots.push_back({spec.start + Days{day} + Seconds{static_cast<long>(rng.uniform_below(day_s))}, i});
      }
    }
  }
  struct BotSlot {
    Instant t;
    int bot;
  };
  std::vector<BotSlot> bot_slots;
  for (int b = 0; b < spec.bots; ++b) {
    for (int day = 0; day < spec.duration_days; ++day) {
      if (rng.chance(spec.bot_rate)) bot_slots.push_back({spec.start + Days{day} + Seconds{static_cast<long>(rng.uniform_below(day_s))}, b});
    }
  }
  std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.t < b.t; });

  std::vector<std::size_t> commit_counter(devs.size(), 0);
  std::vector<int> issue_counter(static_cast<std::size_t>(spec.n_services), 0);
  const Instant horizon = spec.start + Days{spec.duration_days};

  auto emails = [](const std::string& id) {
    return std::pair{id + "@example.org", id + "@users.noreply.example.org"};
  };

  for (const auto& slot : slots) {
    const auto& d = devs[slot.dev];
    const std::size_t nth = commit_counter[slot.dev]++;
    int service = d.services.front();
    std::vector<std::string> candidates;
    switch (d.profile) {
      case Profile::Background: {
        const auto& sf = layout[static_cast<std::size_t>(service)];
        candidates = sf.teams[static_cast<std::size_t>(team_of[d.id])];
        if (!sf.hubs.empty() && rng.chance(spec.hub_share)) candidates = sf.hubs;
        break;
      }
      case Profile::Jack:
        service = d.alternate ? d.services[nth % d.services.size()] : detail::pick(rng, d.services);
        candidates = layout[static_cast<std::size_t>(service)].pool();
        break;
      case Profile::Maven:
        candidates = layout[static_cast<std::size_t>(service)].private_blocks.at(d.id);
        break;
      case Profile::Connector:
        service = d.alternate ? d.services[nth % d.services.size()] : detail::pick(rng, d.services);
        candidates = layout[static_cast<std::size_t>(service)].hubs;
        if (candidates.empty()) candidates = layout[static_cast<std::size_t>(service)].pool();
        break;
      case Profile::Stacked: {
        service = d.alternate ? d.services[nth % d.services.size()] : detail::pick(rng, d.services);
        const auto& sf = layout[static_cast<std::size_t>(service)];
        const double u = rng.uniform01();
        auto priv = sf.private_blocks.find(d.id);
        if (u < 0.3 && priv != sf.private_blocks.end()) {
          candidates = priv->second;
        } else if (u < 0.55 && !d.hub_services.empty()) {
          service = detail::pick(rng, d.hub_services);
          candidates = layout[static_cast<std::size_t>(service)].hubs;
          if (candidates.empty()) candidates = layout[static_cast<std::size_t>(service)].pool();
        } else if (service != d.services.front() && !sf.hubs.empty()) {
          candidates = sf.hubs;
        } else {
          candidates = sf.pool();
        }
        break;
      }
    }
    ChangeEvent ev;
    ev.commit_id = rng.hex(40);
    ev.author_name = d.id;
    const auto [primary, secondary] = emails(d.id);
    ev.author_email = rng.chance(0.2) ? secondary : primary;
    ev.author = to_lower(ev.author_email);
    ev.timestamp = slot.t;
    ev.service = spec.service_name(service);
    const auto& path = detail::pick(rng, candidates);
    const ChangeType kinds[] = {ChangeType::Modify, ChangeType::Modify, ChangeType::Modify, ChangeType::Add, ChangeType::Delete, ChangeType::Rename};
    ev.files.push_back({path, kinds[rng.uniform_below(6)], 1 + rng.uniform_below(120)});
    out.changes.push_back(ev);

    if (d.profile == Profile::Background && rng.chance(spec.issue_rate)) {
      const auto home = static_cast<std::size_t>(service);
      const std::string issue = std::to_string(++issue_counter[home]);
      const std::string svc = ev.service;
      auto push = [&](Instant t, const std::string& actor, TimelineKind kind, std::optional<std::string> link) {
        if (t >= horizon) return;
        out.timeline.push_back({issue, actor + "@example.org", actor + "@example.org", t, kind, std::move(link), svc});
      };
      push(slot.t + Seconds{60}, d.id, TimelineKind::Opened, std::nullopt);
      push(slot.t + Seconds{120}, d.id, TimelineKind::CommitRef, ev.commit_id);
      const auto& mates = team_members[home][static_cast<std::size_t>(team_of[d.id])];
      if (mates.size() > 1 && rng.chance(spec.comment_rate)) {
        std::string other;
        do {
          other = detail::pick(rng, mates);
        } while (other == d.id);
        push(slot.t + Seconds{3600}, other, TimelineKind::Commented, std::nullopt);
      }
      push(slot.t + Seconds{7200}, d.id, TimelineKind::Closed, std::nullopt);
    }
  }

  const char* bot_names[] = {"dependabot[bot]", "release-ci", "renovate-bot"};
  for (const auto& bs : bot_slots) {
    const std::string name = bot_names[bs.bot % 3];
    const int service = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(spec.n_services)));
    const auto pool = layout[static_cast<std::size_t>(service)].pool();
    ChangeEvent ev;
    ev.commit_id = rng.hex(40);
    ev.author_name = name;
    ev.author = to_lower(name);
    ev.timestamp = bs.t;
    ev.service = spec.service_name(service);
    ev.files.push_back({detail::pick(rng, pool), ChangeType::Modify, 1 + rng.uniform_below(10)});
    out.changes.push_back(ev);
  }

  std::sort(out.changes.begin(), out.changes.end(), change_order);
  std::stable_sort(out.timeline.begin(), out.timeline.end(), timeline_order);

  out.aliases_csv = "raw,canonical\n";
  for (const auto& d : devs) {
    const auto [primary, secondary] = emails(d.id);
    out.aliases_csv += primary + "," + d.id + "\n";
    out.aliases_csv += secondary + "," + d.id + "\n";
  }
  out.bots_txt = "# automation accounts\ndependabot\n*-ci\n*-bot\n";
  return out;
}

// One change and one timeline file per service plus aliases.csv and bots.txt,
// laid out the way load_input_dir expects. Returns the written file names.
inline std::vector<std::string> write_trace_dir(const SyntheticTrace& trace, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::map<std::string, std::vector<ChangeEvent>> changes;
  std::map<std::string, std::vector<TimelineEvent>> timeline;
  for (const auto& ev : trace.changes) changes[ev.service].push_back(ev);
  for (const auto& ev : trace.timeline) timeline[ev.service].push_back(ev);
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InputMissing, "cannot write " + (fs::path(dir) / name).string());
    out << content;
    written.push_back(name);
  };
  for (const auto& [svc, evs] : changes) put(svc + ".changes.jsonl", to_record_stream(evs));
  for (const auto& [svc, evs] : timeline) put(svc + ".timeline.jsonl", to_record_stream(evs));
  put("aliases.csv", trace.aliases_csv);
  put("bots.txt", trace.bots_txt);
  return written;
}

}  // namespace orgcoupling
