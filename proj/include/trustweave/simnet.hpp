#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "trustweave/graph.hpp"
#include "trustweave/identity.hpp"

namespace trustweave {

// ---------------------------------------------------------------------------
// Message payloads. Each kind knows how to describe itself for the event
// log; descriptions never contain credential secrets.

enum class PayloadKind {
  ServiceRequest,
  ForwardedAuthnRequest,
  AuthnRequest,
  AuthnChallenge,
  CredentialPresentation,
  AssertionResponse,
  VerifiedResult,
  ServiceGrant,
  FailureResponse,
  AttributeQuery,
  ReferralQuery,
  ReferralResponse,
};

inline std::string payload_kind_token(PayloadKind k) {
  switch (k) {
    case PayloadKind::ServiceRequest: return "service-request";
    case PayloadKind::ForwardedAuthnRequest: return "forwarded-authn-request";
    case PayloadKind::AuthnRequest: return "authn-request";
    case PayloadKind::AuthnChallenge: return "authn-challenge";
    case PayloadKind::CredentialPresentation: return "credential-presentation";
    case PayloadKind::AssertionResponse: return "assertion-response";
    case PayloadKind::VerifiedResult: return "verified-result";
    case PayloadKind::ServiceGrant: return "service-grant";
    case PayloadKind::FailureResponse: return "failure-response";
    case PayloadKind::AttributeQuery: return "attribute-query";
    case PayloadKind::ReferralQuery: return "referral-query";
    case PayloadKind::ReferralResponse: return "referral-response";
  }
  return "?";
}

struct ServiceRequest {};
struct ForwardedAuthnRequest {};
struct AuthnRequest {};
struct AuthnChallenge {};
struct CredentialPresentation {
  EntityId subject;
  Credential credential;  // travels User -> User-IdP only
};
struct AssertionResponse {
  IdentityAssertion assertion;
};
struct VerifiedResult {
  AssertStatus status = AssertStatus::Verified;
};
struct ServiceGrant {};
struct FailureResponse {
  std::string code;  // opaque; never names the failing trust relationship
};
struct AttributeQuery {};
struct ReferralQuery {
  EntityId trustee;
  TrustContext context;
  int depth = 0;
  std::vector<EntityId> route;  // origin first; also the cycle guard
  std::string crawl_id;
};
struct ReferralResponse {
  std::vector<EntityId> route_back;  // next hop at the back
  std::vector<Referral> referrals;
  std::string crawl_id;
};

using Payload =
    std::variant<ServiceRequest, ForwardedAuthnRequest, AuthnRequest,
                 AuthnChallenge, CredentialPresentation, AssertionResponse,
                 VerifiedResult, ServiceGrant, FailureResponse, AttributeQuery,
                 ReferralQuery, ReferralResponse>;

inline PayloadKind payload_kind(const Payload& p) {
  return static_cast<PayloadKind>(p.index());
}

struct MessageEnvelope {
  EntityId from;
  EntityId to;
  std::optional<std::string> instance_id;
  Payload payload;
  Tick sent_at = 0;
};

// ---------------------------------------------------------------------------

struct AdversaryKind {
  enum class Tag { LyingReferee, BadAsserter, TamperingForwarder };
  Tag tag = Tag::LyingReferee;
  double inflation = 0.0;  // LyingReferee only
};

inline AdversaryKind parse_adversary(const std::string& tok) {
  if (tok.rfind("lying-referee:", 0) == 0)
    return {AdversaryKind::Tag::LyingReferee, std::stod(tok.substr(14))};
  if (tok == "lying-referee") return {AdversaryKind::Tag::LyingReferee, 1.0};
  if (tok == "bad-asserter") return {AdversaryKind::Tag::BadAsserter, 0.0};
  if (tok == "tampering-forwarder")
    return {AdversaryKind::Tag::TamperingForwarder, 0.0};
  throw std::invalid_argument("unknown adversary kind: " + tok);
}

struct NetworkConfig {
  std::uint64_t seed = 0;
  double drop_probability = 0.0;
  Tick max_ticks = 1000;
  std::map<EntityId, AdversaryKind> adversaries;
};

struct EntityDecl {
  EntityId id;
  std::set<EntityRole> roles;
  std::optional<EntityId> idp;  // where this entity is registered
  std::string secret;
  AttributeMap attributes;
};

struct DuplicateEntity : std::runtime_error {
  explicit DuplicateEntity(const EntityId& id)
      : std::runtime_error("duplicate entity id: " + id) {}
};

// ---------------------------------------------------------------------------

/// Deterministic in-memory network: one global FIFO of envelopes with
/// seeded tie-shuffling at enqueue, single-threaded delivery, full ordered
/// event log. Identical (config, graph, scenario) gives identical runs.
class Network {
 public:
  using Dispatcher = std::function<void(Network&, const MessageEnvelope&)>;

  Network(NetworkConfig config, const TrustGraph& graph,
          const std::vector<EntityDecl>& decls)
      : config_(std::move(config)), rng_(config_.seed) {
    for (const auto& d : decls) {
      if (entities_.contains(d.id)) throw DuplicateEntity(d.id);
      auto e = std::make_unique<Entity>(d.id, d.roles,
                                        KeyPair::derive(config_.seed, d.id));
      keys_.register_key(d.id, e->keys().public_key);
      entities_[d.id] = std::move(e);
    }
    for (const auto& d : decls) {
      if (!d.idp) continue;
      Entity* idp = find(*d.idp);
      if (!idp) throw ParseError(0, "entity " + d.id + " registered at unknown idp " + *d.idp);
      idp->register_identity({d.id, d.attributes, {Credential::Kind::SharedSecret, d.secret}});
      entity(d.id).hold_credential(*d.idp, {Credential::Kind::SharedSecret, d.secret});
    }
    for (const TrustArc& arc : graph.arcs()) {
      if (!find(arc.trustor))
        throw ParseError(0, "graph references unknown entity: " + arc.trustor);
      if (!find(arc.trustee))
        throw ParseError(0, "graph references unknown entity: " + arc.trustee);
      entity(arc.trustor).store().record_arc(arc, 0);
    }
    for (const auto& [id, adv] : config_.adversaries)
      if (!find(id))
        throw ParseError(0, "adversary declared on unknown entity: " + id);
  }

  const NetworkConfig& config() const { return config_; }
  const KeyRegistry& keys() const { return keys_; }
  Tick now() const { return tick_; }

  Entity& entity(const EntityId& id) {
    auto it = entities_.find(id);
    if (it == entities_.end())
      throw std::invalid_argument("unknown entity: " + id);
    return *it->second;
  }
  Entity* find(const EntityId& id) {
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : it->second.get();
  }
  const std::map<EntityId, std::unique_ptr<Entity>>& entities() const {
    return entities_;
  }

  std::optional<AdversaryKind> adversary(const EntityId& id) const {
    auto it = config_.adversaries.find(id);
    if (it == config_.adversaries.end()) return std::nullopt;
    return it->second;
  }

  void set_dispatcher(Dispatcher d) { dispatcher_ = std::move(d); }

  /// Queue an envelope. The sender's adversary hook runs here, on the way
  /// out. Messages sent while one event is being handled form a batch that
  /// is tie-shuffled with the seeded generator before joining the FIFO.
  void send(MessageEnvelope env) {
    env.sent_at = tick_;
    env = apply_adversary(env);
    pending_.push_back(std::move(env));
    if (!handling_) flush_pending();
  }

  /// Deliver queued envelopes in order until nothing is queued or the tick
  /// budget for this run is exhausted. Drops are silent losses surfaced in
  /// the log.
  std::vector<std::string>& run_until_quiet() {
    Tick budget_end = tick_ + config_.max_ticks;
    while (!queue_.empty() && tick_ < budget_end) {
      MessageEnvelope env = std::move(queue_.front());
      queue_.pop_front();
      ++tick_;
      if (config_.drop_probability > 0.0 &&
          uniform() < config_.drop_probability) {
        log_.push_back(log_line("drop", env));
        continue;
      }
      log_.push_back(log_line("deliver", env));
      if (dispatcher_) {
        handling_ = true;
        dispatcher_(*this, env);
        handling_ = false;
        flush_pending();
      }
    }
    if (!queue_.empty())
      log_.push_back("exhausted tick=" + std::to_string(tick_) +
                     " undelivered=" + std::to_string(queue_.size()));
    return log_;
  }

  const std::vector<std::string>& log() const { return log_; }
  std::string log_text() const {
    std::string out;
    for (const auto& l : log_) out += l + "\n";
    return out;
  }

  /// Deterministic per-network counter for nonces and instance ids.
  std::uint64_t next_serial() { return serial_++; }

  double uniform() { return (rng_() >> 11) * 0x1.0p-53; }

 private:
  void flush_pending() {
    if (pending_.size() > 1) {
      // Seeded tie-shuffle of the same-tick batch (Fisher-Yates).
      for (std::size_t i = pending_.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng_() % (i + 1));
        std::swap(pending_[i], pending_[j]);
      }
    }
    for (auto& e : pending_) queue_.push_back(std::move(e));
    pending_.clear();
  }

  MessageEnvelope apply_adversary(MessageEnvelope env) {
    auto adv = adversary(env.from);
    if (!adv) return env;
    switch (adv->tag) {
      case AdversaryKind::Tag::LyingReferee:
        if (auto* resp = std::get_if<ReferralResponse>(&env.payload)) {
          Entity& liar = entity(env.from);
          for (Referral& r : resp->referrals) {
            if (r.referee != env.from) continue;  // lies only about own statements
            TrustArc st = parse_statement(r);
            st.value = TrustValue::clamped(st.value.get() * (1.0 + adv->inflation));
            r = Referral::make(env.from, st, liar.keys().secret_key);
          }
        }
        break;
      case AdversaryKind::Tag::BadAsserter:
        if (auto* resp = std::get_if<AssertionResponse>(&env.payload)) {
          Entity& issuer = entity(env.from);
          IdentityAssertion a = resp->assertion;
          for (auto& [k, v] : a.attributes) v = "fabricated";
          a.attributes["forged-claim"] = "true";
          a.signature = sign(issuer.keys().secret_key, a.canonical_payload());
          resp->assertion = std::move(a);
        }
        break;
      case AdversaryKind::Tag::TamperingForwarder:
        if (auto* resp = std::get_if<ReferralResponse>(&env.payload)) {
          for (Referral& r : resp->referrals) {
            if (r.referee == env.from) continue;  // only forwarded referrals
            if (!r.statement_line.empty()) r.statement_line.back() ^= 0x01;
          }
        }
        break;
    }
    return env;
  }

  std::string log_line(const std::string& verb, const MessageEnvelope& env) {
    std::string line = verb + " tick=" + std::to_string(tick_) + " from=" +
                       env.from + " to=" + env.to +
                       " kind=" + payload_kind_token(payload_kind(env.payload));
    if (env.instance_id) line += " instance=" + *env.instance_id;
    return line;
  }

  NetworkConfig config_;
  KeyRegistry keys_;
  std::map<EntityId, std::unique_ptr<Entity>> entities_;
  std::mt19937_64 rng_;
  std::deque<MessageEnvelope> queue_;
  std::vector<MessageEnvelope> pending_;
  std::vector<std::string> log_;
  Dispatcher dispatcher_;
  Tick tick_ = 0;
  std::uint64_t serial_ = 0;
  bool handling_ = false;
};

}  // namespace trustweave
