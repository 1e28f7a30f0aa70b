#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <orgcoupling/fetch.hpp>
#include <orgcoupling/pipeline.hpp>
#include <orgcoupling/synth.hpp>

namespace oc = orgcoupling;

namespace {

constexpr int kExitAnalysis = 1;
constexpr int kExitUsage = 2;

int exit_code_for(oc::ErrorKind k) {
  switch (k) {
    case oc::ErrorKind::InputMissing:
    case oc::ErrorKind::InvalidConfig:
    case oc::ErrorKind::InvalidSpec:
    case oc::ErrorKind::MissingAnalysis:
    case oc::ErrorKind::MalformedRecord:
    case oc::ErrorKind::ConflictingAlias:
      return kExitUsage;
    default:
      return kExitAnalysis;
  }
}

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

struct ConfigFlags {
  std::string config;
  std::optional<int> window_days, step_days, rare_k, max_hops, top_n;
  std::optional<double> theta, aoc_threshold;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config, "key = value configuration file");
    cmd->add_option("--window-days", window_days, "window length in days (default 365)");
    cmd->add_option("--step-days", step_days, "window step in days (default 180)");
    cmd->add_option("--theta", theta, "reachability distance budget (default 10)");
    cmd->add_option("--rare-k", rare_k, "rare-file threshold k (default 1)");
    cmd->add_option("--max-hops", max_hops, "projection path length bound (default 4)");
    cmd->add_option("--top-n", top_n, "developers per role in rankings (default 3)");
    cmd->add_option("--aoc-threshold", aoc_threshold, "hot-spot AOC threshold (default 0.25)");
  }

  // Config file first, then flags on top.
  oc::AnalysisConfig resolve() const {
    oc::AnalysisConfig cfg = config.empty() ? oc::AnalysisConfig{} : oc::load_config_file(config);
    if (window_days) cfg.window_length_days = *window_days;
    if (step_days) cfg.step_days = *step_days;
    if (theta) cfg.theta = *theta;
    if (rare_k) cfg.rare_k = *rare_k;
    if (max_hops) cfg.max_hops = *max_hops;
    if (top_n) cfg.top_n = *top_n;
    if (aoc_threshold) cfg.aoc_threshold = *aoc_threshold;
    cfg.validate();
    return cfg;
  }
};

std::optional<oc::Instant> parse_when(const std::string& s, const char* flag) {
  if (s.empty()) return std::nullopt;
  auto t = oc::parse_rfc3339(s.size() == 10 ? s + "T00:00:00Z" : s);
  if (!t) throw oc::Error(oc::ErrorKind::InvalidConfig, std::string(flag) + " must be YYYY-MM-DD or RFC 3339");
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Developer roles and organizational coupling from commit and issue history"};
  app.set_version_flag("--version", oc::kToolVersion);
  app.require_subcommand(1);

  // fetch
  auto* fetch = app.add_subcommand("fetch", "export commits and issue timelines from the GitHub REST API");
  std::vector<std::string> repos;
  std::string api_base = "https://api.github.com", fetch_out, since, until, token_env = "GITHUB_TOKEN";
  fetch->add_option("--repo", repos, "owner/repo, repeatable")->required();
  fetch->add_option("--api-base", api_base, "API root URL");
  fetch->add_option("--since", since, "earliest commit date");
  fetch->add_option("--until", until, "latest commit date (exclusive)");
  fetch->add_option("--out", fetch_out, "output directory (default: fetch-<UTC timestamp>)");
  fetch->add_option("--token-env", token_env, "environment variable holding the API token");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "run the per-window analysis over a directory of record files");
  ConfigFlags flags;
  std::string input, out;
  unsigned threads = 0;
  analyze->add_option("--input", input, "directory of *.changes.jsonl / *.timeline.jsonl")->required();
  analyze->add_option("--out", out, "output directory (default: run-<UTC timestamp>)");
  analyze->add_option("--threads", threads, "worker threads (default: hardware concurrency)");
  flags.add_to(analyze);

  // report
  auto* report = app.add_subcommand("report", "summarize an analysis directory");
  std::string report_in, report_out, service;
  std::optional<double> report_aoc, connector_threshold;
  std::optional<int> report_top;
  report->add_option("--input", report_in, "analysis directory")->required();
  report->add_option("--out", report_out, "output directory (default: the analysis directory)");
  report->add_option("--service", service, "restrict sections to one service");
  report->add_option("--aoc-threshold", report_aoc, "hot-spot AOC threshold (default 0.25)");
  report->add_option("--connector-threshold", connector_threshold, "connector persistence threshold (default 0.25)");
  report->add_option("--top-n", report_top, "developers per role in tables (default: the analysis setting)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic trace from a scenario file");
  std::string scenario, synth_out;
  std::optional<std::uint64_t> seed;
  synth->add_option("--scenario", scenario, "scenario file")->required();
  synth->add_option("--seed", seed, "override the scenario seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fetch) {
      oc::FetchOptions opts;
      opts.api_base = api_base;
      opts.repos = repos;
      if (const char* tok = std::getenv(token_env.c_str())) opts.token = tok;
      opts.since = parse_when(since, "--since");
      opts.until = parse_when(until, "--until");
      opts.out_dir = fetch_out.empty() ? "fetch-" + utc_stamp() : fetch_out;
      if (opts.token.empty()) std::cerr << "warning: " << token_env << " is not set; requests are unauthenticated\n";
      const auto s = oc::fetch_export(opts);
      std::cout << "fetched " << s.repos << " repositories into " << opts.out_dir << ": " << s.changes << " change records, "
                << s.timeline << " timeline records, " << s.pages_written << " pages written, " << s.pages_skipped
                << " already present\n";
    } else if (*analyze) {
      const auto cfg = flags.resolve();
      const auto in = oc::load_input_dir(input);
      for (const auto& d : in.diagnostics) std::cerr << "warning: " << d.reason << " (line " << d.line_no << ")\n";
      const auto res = oc::analyze(in, cfg, threads);
      const std::string dir = out.empty() ? "run-" + utc_stamp() : out;
      oc::write_analysis(res, in, dir);
      std::cout << "analyzed " << res.windows.size() << " windows (" << in.changes.size() << " change events, "
                << in.timeline.size() << " timeline events) into " << dir << "\n";
    } else if (*report) {
      auto la = oc::load_analysis(report_in);
      if (report_top) {
        if (*report_top < 1) throw oc::Error(oc::ErrorKind::InvalidConfig, "--top-n must be >= 1");
        la.top_n = *report_top;
      }
      oc::ReportOptions opts;
      if (!service.empty()) opts.service = service;
      if (report_aoc) opts.aoc_threshold = *report_aoc;
      if (connector_threshold) opts.connector_threshold = *connector_threshold;
      const auto files = oc::render_report(la, opts);
      const std::string dir = report_out.empty() ? report_in : report_out;
      std::filesystem::create_directories(dir);
      for (const auto& [name, content] : files) {
        oc::write_text(std::filesystem::path(dir) / name, content);
        if (name == "summary.txt") std::cout << content;
      }
    } else if (*synth) {
      auto spec = oc::load_scenario(scenario);
      if (seed) spec.seed = *seed;
      const auto trace = oc::generate_trace(spec);
      const auto files = oc::write_trace_dir(trace, synth_out);
      std::cout << "wrote " << trace.changes.size() << " change events and " << trace.timeline.size()
                << " timeline events to " << synth_out << " (" << files.size() << " files)\n";
    }
  } catch (const oc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnalysis;
  }
  return 0;
}
