#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "trustweave/operations.hpp"
#include "trustweave/simnet.hpp"

namespace trustweave {

/// Drives operation instances and referral crawls over one Network. All
/// message handling funnels through dispatch(); instances share no state
/// beyond each entity's own trust store.
class Runtime {
 public:
  explicit Runtime(Network& net) : net_(net) {
    net_.set_dispatcher(
        [this](Network& n, const MessageEnvelope& e) { dispatch(n, e); });
  }

  Network& network() { return net_; }

  // ------------------------------------------------------------------ ops

  OperationInstance& start(const OperationSpec& spec,
                           std::map<Role, EntityId> bindings) {
    std::string id = "op-" + std::to_string(net_.next_serial());
    std::string nonce = derive_nonce(id);
    OperationInstance inst =
        instantiate(spec, std::move(bindings), id, std::move(nonce));
    auto [it, inserted] = instances_.emplace(id, std::move(inst));
    last_instance_id_ = id;
    progress(it->second);
    return it->second;
  }

  const OperationInstance& last_instance() const {
    return instances_.at(last_instance_id_);
  }

  /// Runs the event loop until the instance reaches a terminal status or
  /// the tick budget runs out (Timeout).
  OperationOutcome run_to_completion(const std::string& instance_id) {
    net_.run_until_quiet();
    OperationInstance& inst = instances_.at(instance_id);
    if (inst.status == OpStatus::Running) {
      inst.status = OpStatus::Failed;
      inst.fail_reason = FailReason::Timeout;
      inst.transcript.push_back("outcome failed reason=timeout");
    }
    return outcome_of(inst);
  }

  const OperationInstance& instance(const std::string& id) const {
    return instances_.at(id);
  }

  static OperationOutcome outcome_of(const OperationInstance& inst) {
    OperationOutcome out;
    out.status = inst.status;
    out.terminated_at = inst.terminated_at;
    out.fail_reason = inst.fail_reason;
    out.assertion = inst.assertion;
    out.transcript = inst.transcript;
    return out;
  }

  // ---------------------------------------------------------------- crawl

  /// Breadth-limited referral crawl: ask referral-trusted neighbours for
  /// their statements about (trustee, context), recursively to max_depth.
  /// Responses travel back along the query route, so intermediaries
  /// forward (and can tamper with) them. Only verified referrals are
  /// ingested at the origin; the crawl is best-effort.
  std::vector<Referral> gather_referrals(const EntityId& origin,
                                         const EntityId& trustee,
                                         const TrustContext& context,
                                         int max_depth) {
    crawl_origin_ = origin;
    crawl_gathered_.clear();
    crawl_seen_.clear();
    if (max_depth <= 0) return {};
    crawl_id_ = "crawl-" + std::to_string(net_.next_serial());
    Entity& o = net_.entity(origin);
    for (const EntityId& neighbour :
         referral_neighbours(o, context, trustee)) {
      net_.send({origin,
                 neighbour,
                 std::nullopt,
                 ReferralQuery{trustee, context, max_depth, {origin}, crawl_id_},
                 0});
    }
    net_.run_until_quiet();
    return crawl_gathered_;
  }

 private:
  // ------------------------------------------------------------ dispatch

  void dispatch(Network&, const MessageEnvelope& env) {
    if (const auto* q = std::get_if<ReferralQuery>(&env.payload)) {
      on_referral_query(env, *q);
    } else if (const auto* r = std::get_if<ReferralResponse>(&env.payload)) {
      on_referral_response(env, *r);
    } else {
      on_operation_message(env);
    }
  }

  // ------------------------------------------------------- crawl handlers

  /// Neighbours this entity trusts for referrals in the context, i.e.
  /// holds a Referral(context) arc above 0 toward. Never crawls through
  /// explicitly untrusted parties.
  static std::vector<EntityId> referral_neighbours(const Entity& e,
                                                   const TrustContext& context,
                                                   const EntityId& trustee) {
    std::vector<EntityId> out;
    TrustContext ref_ctx = TrustContext::referral(context);
    for (const auto& [key, arc] : e.store().arcs()) {
      if (arc.kind != ArcKind::Referral || !(arc.context == ref_ctx)) continue;
      if (arc.value.get() <= 0.0) continue;
      if (arc.trustee == trustee) continue;  // the sink cannot referee itself
      out.push_back(arc.trustee);
    }
    return out;  // store order is sorted, hence deterministic
  }

  void on_referral_query(const MessageEnvelope& env, const ReferralQuery& q) {
    Entity& node = net_.entity(env.to);

    ReferralResponse resp;
    resp.crawl_id = q.crawl_id;
    resp.route_back = q.route;
    resp.route_back.pop_back();  // env.from is route.back(); reply to it

    for (const auto& [key, arc] : node.store().arcs()) {
      bool relevant =
          (arc.kind == ArcKind::Performance && arc.trustee == q.trustee &&
           arc.context == q.context) ||
          (arc.kind == ArcKind::Referral &&
           arc.context == TrustContext::referral(q.context));
      if (relevant)
        resp.referrals.push_back(
            Referral::make(node.id(), arc, node.keys().secret_key));
    }
    if (!resp.referrals.empty())
      net_.send({env.to, env.from, std::nullopt, std::move(resp), 0});

    if (q.depth > 1) {
      std::vector<EntityId> route = q.route;
      route.push_back(env.to);
      for (const EntityId& next :
           referral_neighbours(node, q.context, q.trustee)) {
        if (std::find(route.begin(), route.end(), next) != route.end())
          continue;
        net_.send({env.to, next, std::nullopt,
                   ReferralQuery{q.trustee, q.context, q.depth - 1, route,
                                 q.crawl_id},
                   0});
      }
    }
  }

  void on_referral_response(const MessageEnvelope& env,
                            const ReferralResponse& resp) {
    if (!resp.route_back.empty()) {
      ReferralResponse fwd = resp;
      EntityId next = fwd.route_back.back();
      fwd.route_back.pop_back();
      net_.send({env.to, next, std::nullopt, std::move(fwd), 0});
      return;
    }
    if (resp.crawl_id != crawl_id_ || env.to != crawl_origin_) return;
    Entity& origin = net_.entity(env.to);
    for (const Referral& r : resp.referrals) {
      if (!origin.manager().ingest_referral(r, net_.keys())) continue;
      if (crawl_seen_.insert(r.referee + "\x1f" + r.statement_line).second)
        crawl_gathered_.push_back(r);
    }
  }

  // --------------------------------------------------------- op handlers

  void on_operation_message(const MessageEnvelope& env) {
    if (!env.instance_id) return;
    auto it = instances_.find(*env.instance_id);
    if (it == instances_.end()) return;  // stray; nothing to fail
    OperationInstance& inst = it->second;

    if (const auto* f = std::get_if<FailureResponse>(&env.payload)) {
      inst.transcript.push_back("recv failure-response at=" + env.to +
                                " code=" + f->code);
      if (!inst.failure_route.empty()) {
        EntityId next = inst.failure_route.front();
        inst.failure_route.erase(inst.failure_route.begin());
        net_.send({env.to, next, inst.id, FailureResponse{f->code}, 0});
      }
      return;
    }

    if (inst.terminal()) return;  // absorbing

    const auto* step = inst.cursor < inst.spec.steps.size()
                           ? std::get_if<MessageStep>(&inst.spec.steps[inst.cursor])
                           : nullptr;
    bool expected = step && inst.binding(step->from) == env.from &&
                    inst.binding(step->to) == env.to &&
                    step->payload == payload_kind(env.payload);
    if (!expected) {
      inst.status = OpStatus::Failed;
      inst.fail_reason = FailReason::ProtocolViolation;
      inst.transcript.push_back("outcome failed reason=protocol-violation");
      return;
    }

    inst.transcript.push_back("recv " + payload_kind_token(step->payload) +
                              " from=" + env.from + " to=" + env.to);
    note_conversation(inst, env.from);
    note_conversation(inst, env.to);

    if (const auto* cp = std::get_if<CredentialPresentation>(&env.payload)) {
      inst.presented = *cp;
    } else if (const auto* ar = std::get_if<AssertionResponse>(&env.payload)) {
      inst.assertion = ar->assertion;
      inst.assertion_verified = false;
    }

    ++inst.cursor;
    progress(inst);
  }

  // --------------------------------------------------------- step engine

  void progress(OperationInstance& inst) {
    while (!inst.terminal()) {
      if (inst.cursor >= inst.spec.steps.size()) {
        inst.status = OpStatus::Succeeded;
        inst.transcript.push_back("outcome succeeded");
        return;
      }
      const Step& step = inst.spec.steps[inst.cursor];
      if (const auto* m = std::get_if<MessageStep>(&step)) {
        if (!emit_message(inst, *m)) return;  // delivery resumes us
      } else if (const auto* c = std::get_if<TrustCheckStep>(&step)) {
        if (!run_trust_check(inst, *c)) return;
      } else if (const auto* a = std::get_if<LocalActionStep>(&step)) {
        if (!run_local_action(inst, *a)) return;
      }
    }
  }

  /// Returns true if the step completed locally (co-located elision);
  /// false when a real envelope went out and we wait for its delivery.
  bool emit_message(OperationInstance& inst, const MessageStep& m) {
    const EntityId& from = inst.binding(m.from);
    const EntityId& to = inst.binding(m.to);
    if (from == to) {
      // Internal forward between co-located roles; invisible on the wire.
      inst.transcript.push_back("elide " + payload_kind_token(m.payload) +
                                " at=" + from);
      note_conversation(inst, from);
      ++inst.cursor;
      return true;
    }
    note_conversation(inst, from);
    net_.send({from, to, inst.id, build_payload(inst, m), 0});
    inst.transcript.push_back("send " + payload_kind_token(m.payload) +
                              " from=" + from + " to=" + to);
    // cursor stays on this step; delivery matches against it and advances
    return false;
  }

  Payload build_payload(OperationInstance& inst, const MessageStep& m) {
    switch (m.payload) {
      case PayloadKind::ServiceRequest: return ServiceRequest{};
      case PayloadKind::ForwardedAuthnRequest: return ForwardedAuthnRequest{};
      case PayloadKind::AuthnRequest: return AuthnRequest{};
      case PayloadKind::AuthnChallenge: return AuthnChallenge{};
      case PayloadKind::AttributeQuery: return AttributeQuery{};
      case PayloadKind::ServiceGrant: return ServiceGrant{};
      case PayloadKind::VerifiedResult:
        return VerifiedResult{AssertStatus::Verified};
      case PayloadKind::CredentialPresentation: {
        const EntityId& user = inst.binding(m.from);
        const EntityId& idp = inst.binding(m.to);
        const Credential* c = net_.entity(user).credential_for(idp);
        CredentialPresentation cp;
        cp.subject = user;
        if (c) cp.credential = *c;
        return cp;
      }
      case PayloadKind::AssertionResponse: {
        if (!inst.assertion)
          throw std::logic_error("assertion-response step before issuance");
        return AssertionResponse{*inst.assertion};
      }
      default:
        throw std::logic_error("spec messages cannot carry this payload kind");
    }
  }

  bool run_trust_check(OperationInstance& inst, const TrustCheckStep& c) {
    const EntityId& checker = inst.binding(c.checker);
    const EntityId& subject = inst.binding(c.subject);
    std::string rel = relationship_token(c.relationship);
    if (checker == subject) {
      // Internal and absolute: one entity playing both roles.
      inst.transcript.push_back("check " + rel + " internal pass");
      ++inst.cursor;
      return true;
    }
    TrustContext ctx = relationship_spec(c.relationship).context;
    TrustRating rating = net_.entity(checker).manager().evaluate_trust(subject, ctx);
    bool pass = rating.basis != RatingBasis::None &&
                rating.value >= c.threshold;
    inst.transcript.push_back(
        "check " + rel + " checker=" + checker + " subject=" + subject +
        " value=" + format_value(rating.value) +
        " basis=" + basis_token(rating.basis) +
        " threshold=" + format_value(c.threshold) +
        (pass ? " pass" : " fail"));
    if (!pass) {
      inst.status = OpStatus::TerminatedAtTrustCheck;
      inst.terminated_at = c.relationship;
      inst.transcript.push_back(
          "outcome terminated-at-trust-check relationship=" + rel);
      send_failure_back(inst, checker);
      return false;
    }
    ++inst.cursor;
    return true;
  }

  bool run_local_action(OperationInstance& inst, const LocalActionStep& a) {
    Entity& actor = net_.entity(inst.binding(a.role));
    switch (a.action) {
      case ActionKind::Authenticate: {
        bool ok = inst.presented &&
                  actor.authenticate_local(inst.presented->subject,
                                           inst.presented->credential);
        inst.transcript.push_back(std::string("authenticate at=") + actor.id() +
                                  (ok ? " pass" : " fail"));
        if (!ok) {
          fail(inst, FailReason::AuthenticationFailed);
          send_failure_back(inst, actor.id());
          return false;
        }
        break;
      }
      case ActionKind::IssueAssertion: {
        AttributeMap requested;
        for (const auto& name : inst.spec.attributes_requested)
          requested[name];
        inst.assertion = actor.create_assertion(
            inst.binding(inst.spec.subject_role),
            inst.binding(inst.spec.audience_role), requested, inst.nonce,
            net_.now());
        inst.transcript.push_back("issue-assertion issuer=" + actor.id());
        break;
      }
      case ActionKind::VerifyAssertion: {
        AssertStatus st = inst.assertion
                              ? actor.verify_assertion(*inst.assertion,
                                                       actor.id(), net_.keys())
                              : AssertStatus::BadSignature;
        inst.transcript.push_back("verify-assertion at=" + actor.id() +
                                  " status=" + assert_status_token(st));
        if (st != AssertStatus::Verified) {
          fail(inst, FailReason::AssertionRejected);
          send_failure_back(inst, actor.id());
          return false;
        }
        inst.assertion_verified = true;
        break;
      }
    }
    ++inst.cursor;
    return true;
  }

  void fail(OperationInstance& inst, FailReason reason) {
    inst.status = OpStatus::Failed;
    inst.fail_reason = reason;
    inst.transcript.push_back("outcome failed reason=" +
                              fail_reason_token(reason));
  }

  /// A failed authentication result hops back along the conversation so
  /// far until it reaches the initiator. The code is opaque; transcripts
  /// keep the detail locally.
  void send_failure_back(OperationInstance& inst, const EntityId& at) {
    auto pos = std::find(inst.conversation.begin(), inst.conversation.end(), at);
    if (pos == inst.conversation.end() || pos == inst.conversation.begin())
      return;  // failing entity is the initiator or unknown; nothing to route
    std::vector<EntityId> route(inst.conversation.begin(), pos);
    std::reverse(route.begin(), route.end());  // nearest hop first
    EntityId first = route.front();
    inst.failure_route.assign(route.begin() + 1, route.end());
    net_.send({at, first, inst.id, FailureResponse{"authn-failed"}, 0});
  }

  void note_conversation(OperationInstance& inst, const EntityId& id) {
    if (std::find(inst.conversation.begin(), inst.conversation.end(), id) ==
        inst.conversation.end())
      inst.conversation.push_back(id);
  }

  std::string derive_nonce(const std::string& instance_id) {
    crypto_init();
    unsigned char out[16];
    std::string material = std::to_string(net_.config().seed) + "/" + instance_id;
    crypto_generichash(out, sizeof(out),
                       reinterpret_cast<const unsigned char*>(material.data()),
                       material.size(), nullptr, 0);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned char b : out) {
      s += hex[b >> 4];
      s += hex[b & 0xf];
    }
    return s;
  }

  Network& net_;
  std::map<std::string, OperationInstance> instances_;
  std::string last_instance_id_;
  std::string crawl_id_;
  EntityId crawl_origin_;
  std::vector<Referral> crawl_gathered_;
  std::set<std::string> crawl_seen_;
};

}  // namespace trustweave
