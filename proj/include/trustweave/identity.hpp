#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "trustweave/crypto.hpp"
#include "trustweave/trust_manager.hpp"
#include "trustweave/trust_store.hpp"

namespace trustweave {

using AttributeMap = std::map<std::string, std::string>;

/// Shared-secret credential. The secret must never reach a serialized
/// message, log line or DOT export; only authenticate_local touches it.
struct Credential {
  enum class Kind { SharedSecret };
  Kind kind = Kind::SharedSecret;
  std::string secret;
};

struct PartialIdentity {
  EntityId owner;
  AttributeMap attributes;
  Credential credential;
};

struct IdentityAssertion {
  EntityId issuer;
  EntityId subject;
  EntityId audience;
  AttributeMap attributes;
  std::string nonce;  // hex, unique per operation instance
  Tick issued_at = 0;
  Bytes signature;

  /// Byte string the signature covers; attribute order is canonical.
  std::string canonical_payload() const {
    std::string s = "assertion issuer=" + issuer + " subject=" + subject +
                    " audience=" + audience + " attrs=";
    bool first = true;
    for (const auto& [k, v] : attributes) {
      if (!first) s += ",";
      s += k + ":" + v;
      first = false;
    }
    s += " nonce=" + nonce + " issued-at=" + std::to_string(issued_at);
    return s;
  }
};

enum class EntityRole { User, IdP, SP };

inline EntityRole parse_entity_role(const std::string& tok) {
  if (tok == "user") return EntityRole::User;
  if (tok == "idp") return EntityRole::IdP;
  if (tok == "sp") return EntityRole::SP;
  throw std::invalid_argument("unknown role (expected user|idp|sp): " + tok);
}

struct UnknownSubject : std::runtime_error {
  explicit UnknownSubject(const EntityId& s)
      : std::runtime_error("no partial identity registered for " + s) {}
};
struct NotAnIdP : std::runtime_error {
  explicit NotAnIdP(const EntityId& e)
      : std::runtime_error(e + " does not hold the IdP role") {}
};

enum class AssertStatus { Verified, BadSignature, AudienceMismatch, ReplayDetected };

inline std::string assert_status_token(AssertStatus s) {
  switch (s) {
    case AssertStatus::Verified: return "verified";
    case AssertStatus::BadSignature: return "bad-signature";
    case AssertStatus::AudienceMismatch: return "audience-mismatch";
    case AssertStatus::ReplayDetected: return "replay-detected";
  }
  return "?";
}

/// An actor on the network. Single-writer: only its own message handlers,
/// driven by the one event loop, mutate it.
class Entity {
 public:
  Entity(EntityId id, std::set<EntityRole> roles, KeyPair keys)
      : id_(std::move(id)),
        roles_(std::move(roles)),
        keys_(keys),
        store_(id_),
        manager_(&store_) {}

  Entity(const Entity&) = delete;
  Entity& operator=(const Entity&) = delete;

  const EntityId& id() const { return id_; }
  const std::set<EntityRole>& roles() const { return roles_; }
  bool has_role(EntityRole r) const { return roles_.contains(r); }
  const KeyPair& keys() const { return keys_; }
  TrustStore& store() { return store_; }
  const TrustStore& store() const { return store_; }
  TrustManager& manager() { return manager_; }
  const TrustManager& manager() const { return manager_; }

  void register_identity(PartialIdentity pid) {
    registered_[pid.owner] = std::move(pid);
  }
  bool knows_subject(const EntityId& subject) const {
    return registered_.contains(subject);
  }
  const AttributeMap* registered_attributes(const EntityId& subject) const {
    auto it = registered_.find(subject);
    return it == registered_.end() ? nullptr : &it->second.attributes;
  }

  /// The secret this entity presents when authenticating at an IdP.
  void hold_credential(const EntityId& idp, Credential c) {
    held_credentials_[idp] = std::move(c);
  }
  const Credential* credential_for(const EntityId& idp) const {
    auto it = held_credentials_.find(idp);
    return it == held_credentials_.end() ? nullptr : &it->second;
  }

  /// True iff the subject is registered and the presented secret matches,
  /// compared in constant time.
  bool authenticate_local(const EntityId& subject,
                          const Credential& presented) const {
    auto it = registered_.find(subject);
    if (it == registered_.end()) return false;
    const std::string& stored = it->second.credential.secret;
    if (stored.size() != presented.secret.size()) return false;
    crypto_init();
    return sodium_memcmp(stored.data(), presented.secret.data(),
                         stored.size()) == 0;
  }

  IdentityAssertion create_assertion(const EntityId& subject,
                                     const EntityId& audience,
                                     const AttributeMap& requested,
                                     const std::string& nonce, Tick now) const {
    if (!has_role(EntityRole::IdP)) throw NotAnIdP(id_);
    IdentityAssertion a;
    a.issuer = id_;
    a.subject = subject;
    a.audience = audience;
    a.nonce = nonce;
    a.issued_at = now;
    if (const AttributeMap* reg = registered_attributes(subject)) {
      // Minimal disclosure: requested ∩ registered, registered values win.
      for (const auto& [k, v] : requested)
        if (auto it = reg->find(k); it != reg->end()) a.attributes[k] = it->second;
    } else if (subject == id_) {
      a.attributes = requested;  // self-assertion
    } else {
      throw UnknownSubject(subject);
    }
    a.signature = sign(keys_.secret_key, a.canonical_payload());
    return a;
  }

  /// Relying-party check: signature, audience binding, then replay. The
  /// nonce is recorded only on success.
  AssertStatus verify_assertion(const IdentityAssertion& a,
                                const EntityId& expected_audience,
                                const KeyRegistry& keys) {
    auto pk = keys.lookup(a.issuer);
    if (!pk || !verify(*pk, a.canonical_payload(), a.signature))
      return AssertStatus::BadSignature;
    if (a.audience != expected_audience) return AssertStatus::AudienceMismatch;
    if (replay_cache_.contains(a.nonce)) return AssertStatus::ReplayDetected;
    replay_cache_.insert(a.nonce);
    return AssertStatus::Verified;
  }

 private:
  EntityId id_;
  std::set<EntityRole> roles_;
  KeyPair keys_;
  TrustStore store_;
  TrustManager manager_;
  std::map<EntityId, PartialIdentity> registered_;   // IdP duty
  std::map<EntityId, Credential> held_credentials_;  // user duty
  std::set<std::string> replay_cache_;               // per-verifier, unbounded
};

}  // namespace trustweave
