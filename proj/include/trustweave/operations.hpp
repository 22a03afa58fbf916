#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "trustweave/context.hpp"
#include "trustweave/identity.hpp"
#include "trustweave/simnet.hpp"

namespace trustweave {

enum class Role { User, UserIdP, SP, SPIdP };

inline std::string role_token(Role r) {
  switch (r) {
    case Role::User: return "user";
    case Role::UserIdP: return "user-idp";
    case Role::SP: return "sp";
    case Role::SPIdP: return "sp-idp";
  }
  return "?";
}

/// The labelled trust relationships among User, User-IdP, SP and SP-IdP.
/// C and D are the federation-critical pair; G and H behave like A and B
/// when SP and SP-IdP are separate entities.
enum class RelationshipId { A, B, C, D, E, F, G, H };

inline std::string relationship_token(RelationshipId r) {
  return std::string(1, static_cast<char>('A' + static_cast<int>(r)));
}

struct RelationshipSpec {
  Role trustor;
  Role trustee;
  TrustContext context;
};

/// Fixed (trustor role, trustee role, context) mapping per relationship.
inline RelationshipSpec relationship_spec(RelationshipId r) {
  switch (r) {
    case RelationshipId::A:
      return {Role::User, Role::UserIdP, TrustContext::identity_provision()};
    case RelationshipId::B:
      return {Role::UserIdP, Role::User,
              TrustContext::self_assertion_responsibility()};
    case RelationshipId::C:
      return {Role::SPIdP, Role::UserIdP, TrustContext::make_good_assertions()};
    case RelationshipId::D:
      return {Role::UserIdP, Role::SPIdP, TrustContext::maintain_privacy()};
    case RelationshipId::E:
      return {Role::User, Role::SP, TrustContext::maintain_privacy()};
    case RelationshipId::F:
      return {Role::SP, Role::User, TrustContext::good_intentions()};
    case RelationshipId::G:
      return {Role::SP, Role::SPIdP, TrustContext::identity_provision()};
    case RelationshipId::H:
      return {Role::SPIdP, Role::SP,
              TrustContext::self_assertion_responsibility()};
  }
  throw std::logic_error("bad relationship id");
}

// ---------------------------------------------------------------------------
// Declarative protocol steps.

struct MessageStep {
  Role from;
  Role to;
  PayloadKind payload = PayloadKind::ServiceRequest;
};

struct TrustCheckStep {
  Role checker;
  Role subject;
  RelationshipId relationship = RelationshipId::C;
  TrustValue threshold;
};

enum class ActionKind { Authenticate, IssueAssertion, VerifyAssertion };

struct LocalActionStep {
  Role role;
  ActionKind action = ActionKind::Authenticate;
};

using Step = std::variant<MessageStep, TrustCheckStep, LocalActionStep>;

/// A declarative identity operation: the bindings, the trust requirements
/// of each actor, and the step logic that conducts the identity task.
struct OperationSpec {
  std::string name;
  std::set<Role> roles;
  std::vector<Step> steps;
  // Assertion plumbing shared by the local actions.
  Role subject_role = Role::User;
  Role issuer_role = Role::UserIdP;
  Role audience_role = Role::SPIdP;
  std::vector<std::string> attributes_requested;
};

enum class SpecErrorKind {
  EmptySpec,
  UnboundRole,
  RelationshipRoleMismatch,
  DisconnectedSender,
};

struct SpecError {
  SpecErrorKind kind;
  std::string detail;
};

/// All OperationSpec invariant violations, as values.
inline std::vector<SpecError> validate_spec(const OperationSpec& spec) {
  std::vector<SpecError> errors;
  if (spec.steps.empty())
    errors.push_back({SpecErrorKind::EmptySpec, "spec has no steps"});

  auto declared = [&](Role r) { return spec.roles.contains(r); };
  auto require_declared = [&](Role r) {
    if (!declared(r))
      errors.push_back({SpecErrorKind::UnboundRole,
                        "role " + role_token(r) + " used but not declared"});
  };

  std::set<Role> involved;  // roles that have initiated or received
  bool first_message = true;
  for (const Step& step : spec.steps) {
    if (const auto* m = std::get_if<MessageStep>(&step)) {
      require_declared(m->from);
      require_declared(m->to);
      if (!first_message && !involved.contains(m->from))
        errors.push_back({SpecErrorKind::DisconnectedSender,
                          "role " + role_token(m->from) +
                              " sends before entering the conversation"});
      involved.insert(m->from);
      involved.insert(m->to);
      first_message = false;
    } else if (const auto* c = std::get_if<TrustCheckStep>(&step)) {
      require_declared(c->checker);
      require_declared(c->subject);
      RelationshipSpec rel = relationship_spec(c->relationship);
      if (rel.trustor != c->checker || rel.trustee != c->subject)
        errors.push_back(
            {SpecErrorKind::RelationshipRoleMismatch,
             "relationship " + relationship_token(c->relationship) +
                 " belongs to " + role_token(rel.trustor) + "->" +
                 role_token(rel.trustee) + ", not " + role_token(c->checker) +
                 "->" + role_token(c->subject)});
    } else if (const auto* a = std::get_if<LocalActionStep>(&step)) {
      require_declared(a->role);
    }
  }
  return errors;
}

// ---------------------------------------------------------------------------

enum class FailReason {
  ProtocolViolation,
  Timeout,
  AuthenticationFailed,
  AssertionRejected,
};

inline std::string fail_reason_token(FailReason r) {
  switch (r) {
    case FailReason::ProtocolViolation: return "protocol-violation";
    case FailReason::Timeout: return "timeout";
    case FailReason::AuthenticationFailed: return "authentication-failed";
    case FailReason::AssertionRejected: return "assertion-rejected";
  }
  return "?";
}

enum class OpStatus { Running, Succeeded, TerminatedAtTrustCheck, Failed };

inline std::string status_token(OpStatus s) {
  switch (s) {
    case OpStatus::Running: return "running";
    case OpStatus::Succeeded: return "succeeded";
    case OpStatus::TerminatedAtTrustCheck: return "terminated-at-trust-check";
    case OpStatus::Failed: return "failed";
  }
  return "?";
}

struct UnboundRole : std::runtime_error {
  explicit UnboundRole(Role r)
      : std::runtime_error("no entity bound to role " + role_token(r)) {}
};
struct InvalidSpec : std::runtime_error {
  explicit InvalidSpec(const std::string& what)
      : std::runtime_error("invalid operation spec: " + what) {}
};

/// One execution of an OperationSpec. The cursor only advances; terminal
/// statuses are absorbing.
struct OperationInstance {
  std::string id;
  OperationSpec spec;
  std::map<Role, EntityId> bindings;
  std::size_t cursor = 0;
  OpStatus status = OpStatus::Running;
  std::optional<RelationshipId> terminated_at;
  std::optional<FailReason> fail_reason;
  std::string nonce;
  std::vector<std::string> transcript;

  // In-flight state picked up from delivered payloads.
  std::optional<IdentityAssertion> assertion;
  bool assertion_verified = false;
  std::optional<CredentialPresentation> presented;
  std::vector<EntityId> conversation;     // entities in first-appearance order
  std::vector<EntityId> failure_route;    // remaining reverse hops

  const EntityId& binding(Role r) const {
    auto it = bindings.find(r);
    if (it == bindings.end()) throw UnboundRole(r);
    return it->second;
  }

  bool terminal() const { return status != OpStatus::Running; }
};

/// Terminal result plus the local transcript of messages and check results.
struct OperationOutcome {
  OpStatus status = OpStatus::Failed;
  std::optional<RelationshipId> terminated_at;
  std::optional<FailReason> fail_reason;
  std::optional<IdentityAssertion> assertion;
  std::vector<std::string> transcript;
};

inline OperationInstance instantiate(const OperationSpec& spec,
                                     std::map<Role, EntityId> bindings,
                                     std::string instance_id,
                                     std::string nonce) {
  auto errors = validate_spec(spec);
  if (!errors.empty()) throw InvalidSpec(errors.front().detail);
  for (Role r : spec.roles)
    if (!bindings.contains(r)) throw UnboundRole(r);
  OperationInstance inst;
  inst.id = std::move(instance_id);
  inst.spec = spec;
  inst.bindings = std::move(bindings);
  inst.nonce = std::move(nonce);
  return inst;
}

}  // namespace trustweave
