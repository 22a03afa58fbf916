#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "trustweave/federation.hpp"
#include "trustweave/report.hpp"
#include "trustweave/runtime.hpp"
#include "trustweave/scenario.hpp"
#include "trustweave/sso.hpp"

namespace trustweave {

inline Network build_network(const ScenarioFile& sc, const TrustGraph& graph) {
  NetworkConfig cfg;
  cfg.seed = sc.seed;
  cfg.drop_probability = sc.drop_probability;
  cfg.max_ticks = sc.max_ticks;
  cfg.adversaries = sc.adversaries;
  Network net(cfg, graph, sc.entities);
  for (auto& [id, entity] : net.entities()) {
    entity->manager().set_max_depth(sc.max_depth);
    entity->manager().set_strategy(sc.strategy);
  }
  return net;
}

/// Post-operation experience reports, per each participant's feedback
/// rules. `registered_attributes` is the scenario's ground truth used to
/// spot fabricated assertion content.
inline void experience_feedback(
    Runtime& runtime, const OperationInstance& inst,
    const std::map<EntityId, AttributeMap>& registered_attributes) {
  Network& net = runtime.network();
  const EntityId& sp_idp = inst.binding(Role::SPIdP);
  const EntityId& user_idp = inst.binding(Role::UserIdP);
  const EntityId& subject = inst.binding(inst.spec.subject_role);
  TrustContext ctx_c = TrustContext::make_good_assertions();
  TrustContext ctx_d = TrustContext::maintain_privacy();

  // The SP's IdP rates the user's IdP on assertion quality, once an
  // assertion actually reached verification.
  bool reached_assertion = inst.assertion.has_value();
  if (reached_assertion && sp_idp != user_idp) {
    bool good = inst.status == OpStatus::Succeeded && inst.assertion_verified;
    if (good) {
      auto truth = registered_attributes.find(subject);
      for (const auto& [k, v] : inst.assertion->attributes) {
        if (truth == registered_attributes.end() ||
            !truth->second.contains(k) || truth->second.at(k) != v)
          good = false;
      }
    }
    Entity& rater = net.entity(sp_idp);
    bool had_direct = rater.store()
                          .direct_rating(user_idp, ctx_c, ArcKind::Performance)
                          .has_value();
    if (!good && !had_direct) {
      // The bad outcome came in on referral evidence: every referee on a
      // contributing path loses referral standing.
      auto paths = rater.manager().discover_paths(
          {sp_idp, user_idp, ctx_c, rater.manager().max_depth()});
      std::set<EntityId> referees;
      for (const auto& p : paths)
        for (const auto& a : p.arcs)
          if (a.trustor != sp_idp) referees.insert(a.trustor);
      for (const EntityId& referee : referees)
        rater.store().penalize_referee(referee, ctx_c, net.now());
    }
    rater.store().apply_experience(
        {user_idp, ctx_c, good ? 1.0 : 0.0, inst.id, net.now()});
  }

  // The user's IdP rates the SP's IdP on protocol conduct when the
  // exchange it took part in completed cleanly.
  if (inst.status == OpStatus::Succeeded && user_idp != sp_idp) {
    net.entity(user_idp).store().apply_experience(
        {sp_idp, ctx_d, 1.0, inst.id, net.now()});
  }
}

inline void snapshot_rating(Report& report, Network& net, int round,
                            const EntityId& owner, const EntityId& trustee,
                            const TrustContext& ctx) {
  if (owner == trustee) return;
  TrustRating r = net.entity(owner).manager().evaluate_trust(trustee, ctx);
  ReportRecord rec("rating");
  rec.field("round", round)
      .field("owner", owner)
      .field("trustee", trustee)
      .field("context", ctx.token())
      .field("value", format_value(r.value))
      .field("basis", basis_token(r.basis));
  report.add(rec);
}

inline void snapshot_referral_arcs(Report& report, Network& net, int round,
                                   const EntityId& owner,
                                   const TrustContext& ctx) {
  TrustContext ref_ctx = TrustContext::referral(ctx);
  for (const auto& [key, arc] : net.entity(owner).store().arcs()) {
    if (!(arc.context == ref_ctx)) continue;
    ReportRecord rec("referral-rating");
    rec.field("round", round)
        .field("owner", owner)
        .field("referee", arc.trustee)
        .field("context", ctx.token())
        .field("value", format_value(arc.value));
    report.add(rec);
  }
}

/// Runs every declared operation for the declared number of feedback
/// rounds, emitting per-round rating snapshots and final federation lists.
struct ScenarioResult {
  Report report;
  bool any_nontrust_failure = false;
  std::vector<OperationOutcome> outcomes;  // in run order
};

inline ScenarioResult run_scenario(Runtime& runtime, const ScenarioFile& sc) {
  ScenarioResult result;
  Network& net = runtime.network();

  std::map<EntityId, AttributeMap> truth;
  for (const auto& d : sc.entities) truth[d.id] = d.attributes;

  for (int round = 1; round <= sc.rounds; ++round) {
    result.report.add(ReportRecord("round").field("n", round));
    for (std::size_t i = 0; i < sc.operations.size(); ++i) {
      const SsoOpDecl& op = sc.operations[i];
      OperationOutcome out = run_sso(runtime, op.user, op.sp, op.user_idp,
                                     op.sp_idp, op.params);
      ReportRecord rec("outcome");
      rec.field("round", round)
          .field("op", static_cast<long long>(i))
          .field("status", status_token(out.status));
      if (out.terminated_at)
        rec.field("relationship", relationship_token(*out.terminated_at));
      if (out.fail_reason)
        rec.field("reason", fail_reason_token(*out.fail_reason));
      result.report.add(rec);
      if (out.status == OpStatus::Failed) result.any_nontrust_failure = true;

      // Feedback works off the engine instance, which holds the full state.
      experience_feedback(runtime, runtime.last_instance(), truth);
      result.outcomes.push_back(std::move(out));

      // Per-round snapshot of the ratings behind the two trust checks.
      snapshot_rating(result.report, net, round, op.sp_idp, op.user_idp,
                      TrustContext::make_good_assertions());
      snapshot_rating(result.report, net, round, op.user_idp, op.sp_idp,
                      TrustContext::maintain_privacy());
      snapshot_referral_arcs(result.report, net, round, op.sp_idp,
                             TrustContext::make_good_assertions());
    }
  }

  for (const FederationPolicy& policy : sc.federation_policies) {
    for (const auto& [id, entity] : net.entities()) {
      std::vector<EntityId> peers;
      for (const auto& [pid, p] : net.entities()) peers.push_back(pid);
      FederationList list =
          refresh_federations(entity->manager(), policy, peers, net.now());
      ReportRecord rec("federation");
      rec.field("owner", id).field("context", policy.context.token());
      rec.field("threshold", format_value(policy.threshold));
      std::string members;
      for (const auto& m : list.members) {
        if (!members.empty()) members += ",";
        members += m.peer;
      }
      rec.field("members", members.empty() ? "-" : members);
      result.report.add(rec);
    }
  }
  return result;
}

}  // namespace trustweave
