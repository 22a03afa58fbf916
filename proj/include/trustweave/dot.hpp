#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trustweave/graph.hpp"

namespace trustweave {

namespace detail {

inline std::string dot_edge(const TrustArc& a) {
  std::string style = a.kind == ArcKind::Performance ? "solid" : "dashed";
  return "  \"" + a.trustor + "\" -> \"" + a.trustee + "\" [style=" + style +
         ", label=\"" + a.effective_context().token() + ":" +
         format_value(a.value) + "\"];\n";
}

}  // namespace detail

/// Graphviz rendering of a trust graph: solid edges for performance trust,
/// dashed for referral trust, labels `context:value`. Node and edge order
/// follow the canonical arc order, so output is byte-stable.
inline std::string export_dot(const TrustGraph& graph) {
  std::string out = "digraph trust {\n";
  for (const EntityId& id : graph.entities())
    out += "  \"" + id + "\";\n";
  for (const TrustArc& a : graph.arcs()) out += detail::dot_edge(a);
  out += "}\n";
  return out;
}

/// The transitive sub-graph visible from `source` in `context`: referral
/// arcs reachable by chaining same-context referrals outward, plus the
/// performance arcs hanging off any reached node.
inline std::string export_dot_reachable(const TrustGraph& graph,
                                        const EntityId& source,
                                        const TrustContext& context) {
  TrustContext ref_ctx = TrustContext::referral(context);
  std::set<EntityId> reached{source};
  bool grew = true;
  std::vector<const TrustArc*> edges;
  while (grew) {
    grew = false;
    for (const TrustArc& a : graph.arcs()) {
      if (a.kind != ArcKind::Referral || !(a.context == ref_ctx)) continue;
      if (!reached.contains(a.trustor)) continue;
      if (reached.insert(a.trustee).second) grew = true;
    }
  }
  std::set<EntityId> nodes;
  std::string body;
  for (const TrustArc& a : graph.arcs()) {
    bool referral_edge = a.kind == ArcKind::Referral && a.context == ref_ctx &&
                         reached.contains(a.trustor);
    bool performance_edge = a.kind == ArcKind::Performance &&
                            a.context == context && reached.contains(a.trustor);
    if (!referral_edge && !performance_edge) continue;
    nodes.insert(a.trustor);
    nodes.insert(a.trustee);
    body += detail::dot_edge(a);
  }
  nodes.insert(source);
  std::string out = "digraph trust {\n";
  for (const EntityId& id : nodes) out += "  \"" + id + "\";\n";
  out += body;
  out += "}\n";
  return out;
}

}  // namespace trustweave
