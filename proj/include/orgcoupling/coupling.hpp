#pragma once

// Organizational coupling between services: switch degree, pairwise OC and
// NOC, and per-service AOC.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "window.hpp"

namespace orgcoupling {

enum class Side : std::uint8_t { A, B };

// Adjacent unequal pairs over (length - 1); a single commit scores 0.
inline double switch_degree(std::span<const Side> sequence) {
  if (sequence.empty()) throw Error(ErrorKind::EmptySequence, "switch degree of an empty sequence");
  if (sequence.size() == 1) return 0.0;
  std::size_t switches = 0;
  for (std::size_t i = 1; i < sequence.size(); ++i) {
    if (sequence[i] != sequence[i - 1]) ++switches;
  }
  return static_cast<double>(switches) / static_cast<double>(sequence.size() - 1);
}

using SwitchDegreeFn = std::function<double(std::span<const Side>)>;

inline SwitchDegreeFn switch_degree_by_name(const std::string& name) {
  if (name == "adjacent") return [](std::span<const Side> s) { return switch_degree(s); };
  throw Error(ErrorKind::InvalidConfig, "unknown switch_degree '" + name + "'");
}

struct ContributionPair {
  std::string developer;
  std::string service_a;
  std::string service_b;
  std::uint64_t c_a = 0;
  std::uint64_t c_b = 0;
  std::vector<Side> sequence;
  double switch_degree = 0.0;

  double harmonic_weight() const {
    return 2.0 * static_cast<double>(c_a) * static_cast<double>(c_b) / static_cast<double>(c_a + c_b);
  }
};

inline ContributionPair make_pair_contribution(std::string developer, std::string service_a, std::string service_b,
                                               std::vector<Side> sequence, const SwitchDegreeFn& sd = {}) {
  ContributionPair p{std::move(developer), std::move(service_a), std::move(service_b), 0, 0, std::move(sequence), 0.0};
  for (Side s : p.sequence) (s == Side::A ? p.c_a : p.c_b) += 1;
  if (p.c_a == 0 || p.c_b == 0) {
    throw Error(ErrorKind::InvalidSpec, "developer " + p.developer + " does not contribute to both services");
  }
  p.switch_degree = sd ? sd(p.sequence) : switch_degree(p.sequence);
  return p;
}

inline double pair_oc(std::span<const ContributionPair> pairs) {
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.harmonic_weight() * p.switch_degree;
  return sum;
}

// OC over its value under perfect alternation; 0 with no shared developers.
inline double pair_noc(std::span<const ContributionPair> pairs) {
  double num = 0.0, den = 0.0;
  for (const auto& p : pairs) {
    num += p.harmonic_weight() * p.switch_degree;
    den += p.harmonic_weight();
  }
  return den > 0.0 ? num / den : 0.0;
}

struct CouplingMatrix {
  int window = 0;
  std::vector<std::string> services;  // sorted
  std::vector<std::vector<double>> oc;
  std::vector<std::vector<double>> noc;
  std::vector<std::vector<std::size_t>> shared_devs;

  std::size_t size() const { return services.size(); }

  std::size_t index_of(const std::string& service) const {
    auto it = std::lower_bound(services.begin(), services.end(), service);
    if (it == services.end() || *it != service) throw Error(ErrorKind::InputMissing, "service '" + service + "' not in matrix");
    return static_cast<std::size_t>(it - services.begin());
  }
};

// Per service pair, every shared developer's chronological commit sequence
// restricted to that pair. Equal timestamps order by commit id.
inline CouplingMatrix build_matrix(const std::vector<ChangeEvent>& changes, const Window& window,
                                   std::vector<std::string> services, const SwitchDegreeFn& sd = {},
                                   std::map<std::pair<std::size_t, std::size_t>, std::vector<ContributionPair>>* pairs_out = nullptr) {
  std::sort(services.begin(), services.end());
  services.erase(std::unique(services.begin(), services.end()), services.end());
  CouplingMatrix m;
  m.window = window.index;
  m.services = services;
  const std::size_t n = services.size();
  m.oc.assign(n, std::vector<double>(n, 0.0));
  m.noc.assign(n, std::vector<double>(n, 0.0));
  m.shared_devs.assign(n, std::vector<std::size_t>(n, 0));

  // developer -> (timestamp, commit id, service index)
  std::map<std::string, std::vector<std::tuple<Instant, std::string, std::size_t>>> history;
  for (const auto& ev : changes) {
    if (!window.contains(ev.timestamp)) continue;
    auto it = std::lower_bound(services.begin(), services.end(), ev.service);
    if (it == services.end() || *it != ev.service) continue;
    history[ev.author].emplace_back(ev.timestamp, ev.commit_id, static_cast<std::size_t>(it - services.begin()));
  }

  std::map<std::pair<std::size_t, std::size_t>, std::vector<ContributionPair>> pairs;
  for (auto& [dev, seq] : history) {
    std::sort(seq.begin(), seq.end());
    std::set<std::size_t> touched;
    for (const auto& e : seq) touched.insert(std::get<2>(e));
    const std::vector<std::size_t> svc(touched.begin(), touched.end());
    for (std::size_t i = 0; i < svc.size(); ++i) {
      for (std::size_t j = i + 1; j < svc.size(); ++j) {
        std::vector<Side> tags;
        for (const auto& e : seq) {
          if (std::get<2>(e) == svc[i]) tags.push_back(Side::A);
          else if (std::get<2>(e) == svc[j]) tags.push_back(Side::B);
        }
        pairs[{svc[i], svc[j]}].push_back(make_pair_contribution(dev, services[svc[i]], services[svc[j]], std::move(tags), sd));
      }
    }
  }
  for (const auto& [key, list] : pairs) {
    const auto [a, b] = key;
    m.oc[a][b] = m.oc[b][a] = pair_oc(list);
    m.noc[a][b] = m.noc[b][a] = pair_noc(list);
    m.shared_devs[a][b] = m.shared_devs[b][a] = list.size();
  }
  if (pairs_out) *pairs_out = std::move(pairs);
  return m;
}

// Services with at least one in-window commit, sorted.
inline std::vector<std::string> active_services(const std::vector<ChangeEvent>& changes, const Window& window) {
  std::set<std::string> s;
  for (const auto& ev : changes) {
    if (window.contains(ev.timestamp)) s.insert(ev.service);
  }
  return {s.begin(), s.end()};
}

struct ServiceCouplingSummary {
  int window = 0;
  std::string service;
  double aoc = 0.0;
  std::size_t n_services = 0;
};

inline ServiceCouplingSummary service_aoc(const CouplingMatrix& m, const std::string& service) {
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorKind::SingleService, "AOC needs at least two services, window has " + std::to_string(n));
  const std::size_t a = m.index_of(service);
  double sum = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    if (b != a) sum += m.noc[a][b];
  }
  return {m.window, service, sum / static_cast<double>(n - 1), n};
}

}  // namespace orgcoupling
