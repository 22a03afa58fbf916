#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "trustweave/crypto.hpp"
#include "trustweave/graph.hpp"
#include "trustweave/trust_store.hpp"

namespace trustweave {

/// A referee's signed statement about one of its own trust arcs, as carried
/// over the wire. The signature covers the canonical graph-file line of the
/// statement arc, UTF-8, no trailing whitespace.
struct Referral {
  EntityId referee;
  std::string statement_line;
  Bytes signature;
  EntityId signer_key_id;

  static Referral make(const EntityId& referee, const TrustArc& statement,
                       const SecretKey& sk) {
    Referral r;
    r.referee = referee;
    r.statement_line = statement.canonical_line();
    r.signature = sign(sk, r.statement_line);
    r.signer_key_id = referee;
    return r;
  }
};

enum class ReferralFault {
  None,
  UnknownKey,
  BadSignature,
  Impersonation,
  Malformed,
};

struct ReferralCheck {
  bool ok = false;
  ReferralFault fault = ReferralFault::None;
  explicit operator bool() const { return ok; }
};

inline TrustArc parse_statement(const Referral& referral) {
  std::istringstream in(referral.statement_line);
  std::string tag, trustor, trustee, ctx, kind, value;
  if (!(in >> tag >> trustor >> trustee >> ctx >> kind >> value) ||
      tag != "arc")
    throw std::invalid_argument("malformed referral statement");
  std::string rest;
  if (in >> rest) throw std::invalid_argument("trailing referral bytes");
  return TrustGraph::parse_arc_fields(trustor, trustee, ctx, kind, value);
}

/// True iff the signature verifies under the referee's registered key and
/// the statement's trustor is the referee itself.
inline ReferralCheck verify_referral(const Referral& referral,
                                     const KeyRegistry& keys) {
  auto pk = keys.lookup(referral.referee);
  if (!pk) return {false, ReferralFault::UnknownKey};
  if (!verify(*pk, referral.statement_line, referral.signature))
    return {false, ReferralFault::BadSignature};
  TrustArc statement;
  try {
    statement = parse_statement(referral);
  } catch (const std::exception&) {
    return {false, ReferralFault::Malformed};
  }
  if (statement.trustor != referral.referee)
    return {false, ReferralFault::Impersonation};
  return {true, ReferralFault::None};
}

/// A chain of same-context referral arcs terminating in one performance arc.
struct TrustPath {
  EntityId source;
  std::vector<TrustArc> arcs;
  TrustContext context;

  const EntityId& sink() const { return arcs.back().trustee; }

  /// The entity sequence source..sink; paths order lexicographically by it.
  std::vector<EntityId> entity_sequence() const {
    std::vector<EntityId> seq{source};
    for (const auto& a : arcs) seq.push_back(a.trustee);
    return seq;
  }
};

struct PathQuery {
  EntityId source;
  EntityId sink;
  TrustContext context;
  int max_depth = 4;
};

/// All TrustPath invariants: connected simple chain from source, every
/// non-terminal arc a referral in the context, terminal arc performance in
/// the context, length within max_depth.
inline bool validate_path(const TrustPath& path, const TrustContext& context,
                          int max_depth) {
  if (path.arcs.empty()) return false;
  if (static_cast<int>(path.arcs.size()) > max_depth) return false;
  if (path.arcs.front().trustor != path.source) return false;
  std::set<EntityId> seen{path.source};
  for (std::size_t i = 0; i < path.arcs.size(); ++i) {
    const TrustArc& a = path.arcs[i];
    if (i > 0 && a.trustor != path.arcs[i - 1].trustee) return false;
    if (!seen.insert(a.trustee).second) return false;  // simple path
    bool terminal = (i + 1 == path.arcs.size());
    if (terminal) {
      if (a.kind != ArcKind::Performance) return false;
    } else {
      if (a.kind != ArcKind::Referral) return false;
    }
    if (!(a.effective_context() == context)) return false;
  }
  return true;
}

/// Product of arc values along the path (multiplicative discounting).
inline TrustValue path_score(const TrustPath& path) {
  if (!validate_path(path, path.context,
                     static_cast<int>(path.arcs.size())))
    throw std::invalid_argument("invalid trust path");
  double score = 1.0;
  for (const auto& a : path.arcs) score *= a.value.get();
  return TrustValue::clamped(score);
}

enum class AggregationStrategy { MaxPath, ProbabilisticSumDisjoint };

inline AggregationStrategy parse_strategy(const std::string& tok) {
  if (tok == "max") return AggregationStrategy::MaxPath;
  if (tok == "psum") return AggregationStrategy::ProbabilisticSumDisjoint;
  throw std::invalid_argument("unknown strategy (expected max|psum): " + tok);
}

namespace detail {

/// Stable path order for aggregation: descending score, then ascending
/// entity sequence. Shared with the brute-force oracle so both sides select
/// disjoint paths identically.
inline std::vector<std::size_t> score_order(const std::vector<TrustPath>& paths,
                                            const std::vector<double>& scores) {
  std::vector<std::size_t> order(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return paths[a].entity_sequence() < paths[b].entity_sequence();
  });
  return order;
}

inline std::set<TrustStore::ArcKey> arc_keys(const TrustPath& p) {
  std::set<TrustStore::ArcKey> keys;
  for (const auto& a : p.arcs) keys.insert(a.key());
  return keys;
}

}  // namespace detail

/// MaxPath takes the best single chain; ProbabilisticSumDisjoint greedily
/// picks arc-disjoint paths in score order and combines them as
/// 1 - prod(1 - s_i).
inline TrustValue aggregate(const std::vector<TrustPath>& paths,
                            AggregationStrategy strategy) {
  if (paths.empty()) return TrustValue(0.0);
  for (const auto& p : paths) {
    if (p.source != paths.front().source || p.sink() != paths.front().sink() ||
        !(p.context == paths.front().context))
      throw std::invalid_argument("mixed query: paths disagree on source/sink/context");
  }
  std::vector<double> scores;
  scores.reserve(paths.size());
  for (const auto& p : paths) scores.push_back(path_score(p).get());

  if (strategy == AggregationStrategy::MaxPath)
    return TrustValue::clamped(*std::max_element(scores.begin(), scores.end()));

  auto order = detail::score_order(paths, scores);
  std::set<TrustStore::ArcKey> used;
  double miss = 1.0;
  for (std::size_t idx : order) {
    auto keys = detail::arc_keys(paths[idx]);
    bool disjoint = std::all_of(keys.begin(), keys.end(), [&](const auto& k) {
      return !used.contains(k);
    });
    if (!disjoint) continue;
    used.insert(keys.begin(), keys.end());
    miss *= 1.0 - scores[idx];
  }
  return TrustValue::clamped(1.0 - miss);
}

class TrustManager;

enum class RatingBasis { Direct, Transitive, None };

inline std::string basis_token(RatingBasis b) {
  switch (b) {
    case RatingBasis::Direct: return "direct";
    case RatingBasis::Transitive: return "transitive";
    case RatingBasis::None: return "none";
  }
  return "?";
}

struct TrustRating {
  EntityId trustee;
  TrustContext context;
  TrustValue value;
  RatingBasis basis = RatingBasis::None;
  int path_count = 0;  // meaningful for Transitive
};

/// The trust manager: the owner's direct arcs plus verified third-party
/// referral statements, queried for path discovery and trust evaluation.
/// Pure over a snapshot; referral gathering happens on the network side.
class TrustManager {
 public:
  explicit TrustManager(TrustStore* store, AggregationStrategy strategy =
                                               AggregationStrategy::MaxPath,
                        int max_depth = 4)
      : store_(store), strategy_(strategy), max_depth_(max_depth) {}

  const TrustStore& store() const { return *store_; }
  TrustStore& store() { return *store_; }
  AggregationStrategy strategy() const { return strategy_; }
  void set_strategy(AggregationStrategy s) { strategy_ = s; }
  int max_depth() const { return max_depth_; }
  void set_max_depth(int d) { max_depth_ = d; }

  /// Verified statement from a referee; last write wins per arc quadruple.
  void add_statement(const TrustArc& arc) {
    arc.check();
    statements_[arc.key()] = arc;
  }

  /// Verify-then-ingest gate for referrals arriving off the wire.
  ReferralCheck ingest_referral(const Referral& referral,
                                const KeyRegistry& keys) {
    ReferralCheck check = verify_referral(referral, keys);
    if (check) add_statement(parse_statement(referral));
    return check;
  }

  void clear_statements() { statements_.clear(); }
  std::size_t statement_count() const { return statements_.size(); }

  /// Every simple path satisfying the TrustPath invariants within
  /// max_depth, in lexicographic order of entity sequence. Built only from
  /// the owner's direct arcs plus verified referral statements.
  std::vector<TrustPath> discover_paths(const PathQuery& query) const {
    if (query.max_depth < 1)
      throw std::invalid_argument("maxDepth must be >= 1");
    auto adjacency = build_adjacency();
    std::vector<TrustPath> out;
    TrustPath cur{query.source, {}, query.context};
    std::set<EntityId> visited{query.source};
    walk(adjacency, query, cur, visited, out);
    return out;
  }

  /// Direct performance experience dominates; otherwise transitive
  /// referral evidence; otherwise no evidence at all.
  TrustRating evaluate_trust(const EntityId& trustee,
                             const TrustContext& context) const {
    TrustRating rating{trustee, context, TrustValue(0.0), RatingBasis::None, 0};
    auto direct =
        store_->direct_rating(trustee, context, ArcKind::Performance);
    if (direct) {
      rating.value = *direct;
      rating.basis = RatingBasis::Direct;
      return rating;
    }
    auto paths = discover_paths(
        {store_->owner(), trustee, context, max_depth_});
    if (!paths.empty()) {
      rating.value = aggregate(paths, strategy_);
      rating.basis = RatingBasis::Transitive;
      rating.path_count = static_cast<int>(paths.size());
    }
    return rating;
  }

 private:
  using Adjacency = std::map<EntityId, std::vector<TrustArc>>;

  Adjacency build_adjacency() const {
    std::map<TrustStore::ArcKey, TrustArc> merged = statements_;
    for (const auto& [key, arc] : store_->arcs()) merged[key] = arc;
    Adjacency adj;
    for (const auto& [key, arc] : merged) adj[arc.trustor].push_back(arc);
    for (auto& [id, arcs] : adj) {
      std::sort(arcs.begin(), arcs.end(), [](const TrustArc& a, const TrustArc& b) {
        if (a.trustee != b.trustee) return a.trustee < b.trustee;
        return a.kind == ArcKind::Performance && b.kind == ArcKind::Referral;
      });
    }
    return adj;
  }

  void walk(const Adjacency& adjacency, const PathQuery& query, TrustPath& cur,
            std::set<EntityId>& visited, std::vector<TrustPath>& out) const {
    const EntityId& at = cur.arcs.empty() ? query.source : cur.arcs.back().trustee;
    auto it = adjacency.find(at);
    if (it == adjacency.end()) return;
    int depth = static_cast<int>(cur.arcs.size());
    for (const TrustArc& arc : it->second) {
      if (arc.kind == ArcKind::Performance) {
        if (arc.trustee == query.sink && arc.effective_context() == query.context &&
            depth + 1 <= query.max_depth && !visited.contains(arc.trustee)) {
          cur.arcs.push_back(arc);
          out.push_back(cur);
          cur.arcs.pop_back();
        }
      } else {
        if (!(arc.effective_context() == query.context)) continue;
        if (arc.trustee == query.sink) continue;  // would forbid a simple finish
        if (visited.contains(arc.trustee)) continue;
        if (depth + 1 >= query.max_depth) continue;  // no room left for the performance arc
        cur.arcs.push_back(arc);
        visited.insert(arc.trustee);
        walk(adjacency, query, cur, visited, out);
        visited.erase(arc.trustee);
        cur.arcs.pop_back();
      }
    }
  }

  TrustStore* store_;
  AggregationStrategy strategy_;
  int max_depth_;
  std::map<TrustStore::ArcKey, TrustArc> statements_;
};

/// Treat a global graph as already-verified evidence: every arc whose
/// trustor is not the owner becomes a statement. Used where the graph file
/// itself is the source of truth (CLI queries, oracle comparisons).
inline void grant_full_visibility(TrustManager& manager,
                                  const TrustGraph& graph) {
  for (const TrustArc& a : graph.arcs())
    if (a.trustor != manager.store().owner()) manager.add_statement(a);
}

}  // namespace trustweave
