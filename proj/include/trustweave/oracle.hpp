#pragma once

// Brute-force reference answers for trust queries, written against the
// global graph and independent of the TrustManager code path. Used by the
// equivalence tests; keep it free of trust_manager internals.

#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include "trustweave/graph.hpp"
#include "trustweave/trust_manager.hpp"

namespace trustweave::oracle {

inline constexpr std::size_t kMaxOracleNodes = 12;

struct GraphTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Independent restatement of the chain rule: referral arcs in the target
// context all the way, one performance arc at the end, nobody visited twice.
inline bool chain_ok(const std::vector<TrustArc>& arcs, const EntityId& source,
                     const EntityId& sink, const TrustContext& context,
                     int max_depth) {
  if (arcs.empty() || static_cast<int>(arcs.size()) > max_depth) return false;
  if (arcs.front().trustor != source || arcs.back().trustee != sink) return false;
  std::set<EntityId> seen;
  seen.insert(source);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (i > 0 && arcs[i].trustor != arcs[i - 1].trustee) return false;
    if (seen.count(arcs[i].trustee)) return false;
    seen.insert(arcs[i].trustee);
    bool last = i + 1 == arcs.size();
    if (last && arcs[i].kind != ArcKind::Performance) return false;
    if (!last && arcs[i].kind != ArcKind::Referral) return false;
    TrustContext eff = arcs[i].context.is_referral()
                           ? arcs[i].context.referral_target()
                           : arcs[i].context;
    if (!(eff == context)) return false;
  }
  return true;
}

inline void enumerate(const std::vector<TrustArc>& all, const PathQuery& q,
                      std::vector<TrustArc>& chain,
                      std::vector<std::vector<TrustArc>>& found) {
  if (static_cast<int>(chain.size()) >= q.max_depth) return;
  // by value: push_back below may reallocate `chain` under a reference
  const EntityId at = chain.empty() ? q.source : chain.back().trustee;
  for (const TrustArc& arc : all) {
    if (arc.trustor != at) continue;
    bool repeats = arc.trustee == q.source;
    for (const TrustArc& prior : chain)
      if (prior.trustee == arc.trustee) repeats = true;
    if (repeats) continue;
    chain.push_back(arc);
    if (chain_ok(chain, q.source, q.sink, q.context, q.max_depth))
      found.push_back(chain);
    enumerate(all, q, chain, found);
    chain.pop_back();
  }
}

inline std::vector<EntityId> sequence(const EntityId& source,
                                      const std::vector<TrustArc>& arcs) {
  std::vector<EntityId> seq{source};
  for (const auto& a : arcs) seq.push_back(a.trustee);
  return seq;
}

inline double chain_score(const std::vector<TrustArc>& arcs) {
  double s = 1.0;
  for (const auto& a : arcs) s *= a.value.get();
  return s;
}

}  // namespace detail

/// All valid transitive chains source->sink, lexicographic by entity
/// sequence. Same shape as TrustManager::discover_paths so the two can be
/// compared path-for-path.
inline std::vector<TrustPath> enumerate_paths(const TrustGraph& graph,
                                              const PathQuery& query) {
  if (graph.entities().size() > kMaxOracleNodes)
    throw GraphTooLarge("oracle refuses graphs over " +
                        std::to_string(kMaxOracleNodes) + " nodes");
  std::vector<TrustArc> chain;
  std::vector<std::vector<TrustArc>> found;
  detail::enumerate(graph.arcs(), query, chain, found);
  std::sort(found.begin(), found.end(),
            [&](const std::vector<TrustArc>& a, const std::vector<TrustArc>& b) {
              return detail::sequence(query.source, a) <
                     detail::sequence(query.source, b);
            });
  std::vector<TrustPath> out;
  for (auto& arcs : found)
    out.push_back(TrustPath{query.source, std::move(arcs), query.context});
  return out;
}

/// Aggregated transitive value over all enumerated chains; no direct-arc
/// precedence. Own copy of the aggregation math.
inline TrustValue path_value(const TrustGraph& graph, const PathQuery& query,
                             AggregationStrategy strategy) {
  auto paths = enumerate_paths(graph, query);
  if (paths.empty()) return TrustValue(0.0);

  std::vector<double> scores;
  for (const auto& p : paths) scores.push_back(detail::chain_score(p.arcs));

  if (strategy == AggregationStrategy::MaxPath) {
    double best = 0.0;
    for (double s : scores) best = std::max(best, s);
    return TrustValue::clamped(best);
  }

  std::vector<std::size_t> order(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return detail::sequence(query.source, paths[a].arcs) <
           detail::sequence(query.source, paths[b].arcs);
  });
  std::set<std::tuple<EntityId, EntityId, TrustContext, ArcKind>> used;
  double miss = 1.0;
  for (std::size_t idx : order) {
    bool disjoint = true;
    for (const auto& a : paths[idx].arcs)
      if (used.count({a.trustor, a.trustee, a.context, a.kind})) disjoint = false;
    if (!disjoint) continue;
    for (const auto& a : paths[idx].arcs)
      used.insert({a.trustor, a.trustee, a.context, a.kind});
    miss *= 1.0 - scores[idx];
  }
  return TrustValue::clamped(1.0 - miss);
}

/// Reference for evaluate_trust: a direct performance arc wins outright,
/// otherwise the aggregated transitive value, otherwise no evidence.
inline TrustRating rating(const TrustGraph& graph, const PathQuery& query,
                          AggregationStrategy strategy) {
  TrustRating r{query.sink, query.context, TrustValue(0.0), RatingBasis::None, 0};
  for (const TrustArc& a : graph.arcs()) {
    if (a.trustor == query.source && a.trustee == query.sink &&
        a.kind == ArcKind::Performance && a.context == query.context) {
      r.value = a.value;
      r.basis = RatingBasis::Direct;
      return r;
    }
  }
  auto paths = enumerate_paths(graph, query);
  if (!paths.empty()) {
    r.value = path_value(graph, query, strategy);
    r.basis = RatingBasis::Transitive;
    r.path_count = static_cast<int>(paths.size());
  }
  return r;
}

}  // namespace trustweave::oracle
