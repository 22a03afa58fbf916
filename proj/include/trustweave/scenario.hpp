#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trustweave/federation.hpp"
#include "trustweave/graph.hpp"
#include "trustweave/simnet.hpp"
#include "trustweave/sso.hpp"

namespace trustweave {

struct SsoOpDecl {
  EntityId user;
  EntityId sp;
  EntityId user_idp;
  EntityId sp_idp;
  SsoParams params;
};

/// A parsed scenario file: entities, graph include, adversaries, the
/// operations to run and the feedback-round count. Line-oriented, `#`
/// comments, unknown keys rejected.
struct ScenarioFile {
  std::uint64_t seed = 0;
  std::string graph_path;  // resolved against the scenario file's directory
  double drop_probability = 0.0;
  Tick max_ticks = 1000;
  int max_depth = 4;
  AggregationStrategy strategy = AggregationStrategy::MaxPath;
  int rounds = 1;
  std::vector<EntityDecl> entities;
  std::map<EntityId, AdversaryKind> adversaries;
  std::vector<SsoOpDecl> operations;
  std::vector<FederationPolicy> federation_policies;

  static ScenarioFile parse(std::istream& in);
  static ScenarioFile load_file(const std::string& path);
};

namespace detail {

inline std::map<std::string, std::string> keyvals(
    const std::vector<std::string>& words, std::size_t from, int line_no) {
  std::map<std::string, std::string> kv;
  for (std::size_t i = from; i < words.size(); ++i) {
    auto eq = words[i].find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, "expected key=value, got `" + words[i] + "`");
    kv[words[i].substr(0, eq)] = words[i].substr(eq + 1);
  }
  return kv;
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <typename Fn>
void take(std::map<std::string, std::string>& kv, const std::string& key,
          Fn&& fn) {
  auto it = kv.find(key);
  if (it == kv.end()) return;
  fn(it->second);
  kv.erase(it);
}

inline void reject_leftovers(const std::map<std::string, std::string>& kv,
                             int line_no) {
  if (!kv.empty())
    throw ParseError(line_no, "unknown key `" + kv.begin()->first + "`");
}

}  // namespace detail

inline ScenarioFile ScenarioFile::parse(std::istream& in) {
  ScenarioFile sc;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    std::vector<std::string> words;
    while (ls >> word) words.push_back(word);
    if (words.empty()) continue;
    const std::string& directive = words[0];
    try {
      if (directive == "seed" && words.size() == 2) {
        sc.seed = std::stoull(words[1]);
      } else if (directive == "graph" && words.size() == 2) {
        sc.graph_path = words[1];
      } else if (directive == "drop-probability" && words.size() == 2) {
        sc.drop_probability = std::stod(words[1]);
      } else if (directive == "max-ticks" && words.size() == 2) {
        sc.max_ticks = std::stoll(words[1]);
      } else if (directive == "max-depth" && words.size() == 2) {
        sc.max_depth = std::stoi(words[1]);
      } else if (directive == "strategy" && words.size() == 2) {
        sc.strategy = parse_strategy(words[1]);
      } else if (directive == "rounds" && words.size() == 2) {
        sc.rounds = std::stoi(words[1]);
      } else if (directive == "entity" && words.size() >= 2) {
        EntityDecl d;
        d.id = words[1];
        auto kv = detail::keyvals(words, 2, line_no);
        detail::take(kv, "roles", [&](const std::string& v) {
          for (const auto& r : detail::split_commas(v))
            d.roles.insert(parse_entity_role(r));
        });
        detail::take(kv, "idp", [&](const std::string& v) { d.idp = v; });
        detail::take(kv, "secret", [&](const std::string& v) { d.secret = v; });
        for (auto it = kv.begin(); it != kv.end();) {
          if (it->first.rfind("attr.", 0) == 0) {
            d.attributes[it->first.substr(5)] = it->second;
            it = kv.erase(it);
          } else {
            ++it;
          }
        }
        detail::reject_leftovers(kv, line_no);
        sc.entities.push_back(std::move(d));
      } else if (directive == "adversary" && words.size() == 3) {
        sc.adversaries[words[1]] = parse_adversary(words[2]);
      } else if (directive == "operation" && words.size() >= 2 &&
                 words[1] == "sso") {
        SsoOpDecl op;
        auto kv = detail::keyvals(words, 2, line_no);
        detail::take(kv, "user", [&](const std::string& v) { op.user = v; });
        detail::take(kv, "sp", [&](const std::string& v) { op.sp = v; });
        detail::take(kv, "user-idp",
                     [&](const std::string& v) { op.user_idp = v; });
        detail::take(kv, "sp-idp",
                     [&](const std::string& v) { op.sp_idp = v; });
        detail::take(kv, "threshold-c", [&](const std::string& v) {
          op.params.threshold_c = TrustValue(TrustGraph::parse_value(v));
        });
        detail::take(kv, "threshold-d", [&](const std::string& v) {
          op.params.threshold_d = TrustValue(TrustGraph::parse_value(v));
        });
        detail::take(kv, "attributes", [&](const std::string& v) {
          op.params.attributes_requested = detail::split_commas(v);
        });
        detail::reject_leftovers(kv, line_no);
        if (op.user.empty() || op.sp.empty() || op.user_idp.empty() ||
            op.sp_idp.empty())
          throw ParseError(line_no, "sso operation needs user, sp, user-idp and sp-idp bindings");
        sc.operations.push_back(std::move(op));
      } else if (directive == "federation-policy") {
        FederationPolicy p;
        auto kv = detail::keyvals(words, 1, line_no);
        detail::take(kv, "context", [&](const std::string& v) {
          p.context = TrustContext::parse(v);
        });
        detail::take(kv, "threshold", [&](const std::string& v) {
          p.threshold = TrustValue(TrustGraph::parse_value(v));
        });
        detail::take(kv, "refresh-every", [&](const std::string& v) {
          p.refresh_every = std::stoll(v);
        });
        detail::reject_leftovers(kv, line_no);
        sc.federation_policies.push_back(std::move(p));
      } else {
        throw ParseError(line_no, "unknown directive `" + directive + "`");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return sc;
}

inline ScenarioFile ScenarioFile::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  ScenarioFile sc = ScenarioFile::parse(in);
  if (!sc.graph_path.empty() && sc.graph_path.front() != '/') {
    auto slash = path.find_last_of('/');
    if (slash != std::string::npos)
      sc.graph_path = path.substr(0, slash + 1) + sc.graph_path;
  }
  return sc;
}

}  // namespace trustweave
