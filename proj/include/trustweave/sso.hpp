#pragma once

#include <string>
#include <vector>

#include "trustweave/runtime.hpp"

namespace trustweave {

struct SsoParams {
  TrustValue threshold_c{0.5};
  TrustValue threshold_d{0.5};
  std::vector<std::string> attributes_requested;
};

/// The generalized single sign-on operation: eight connections among User,
/// SP, SP-IdP and User-IdP, gated by trust checks C (before the
/// authentication request reaches the user's IdP) and D (before the user
/// is prompted to authenticate).
///
/// Connections 2 and 7 are the SP<->SP-IdP forwards and disappear when the
/// two roles are co-located. The numbering of connections 1, 4-6 and 8 is
/// this module's assumption; it lives only here.
inline OperationSpec build_sso_spec(const SsoParams& params) {
  OperationSpec spec;
  spec.name = "sso";
  spec.roles = {Role::User, Role::UserIdP, Role::SP, Role::SPIdP};
  spec.subject_role = Role::User;
  spec.issuer_role = Role::UserIdP;
  spec.audience_role = Role::SPIdP;
  spec.attributes_requested = params.attributes_requested;
  spec.steps = {
      // 1: service / authentication request
      MessageStep{Role::User, Role::SP, PayloadKind::ServiceRequest},
      // 2: pass the authentication request to the SP's IdP
      MessageStep{Role::SP, Role::SPIdP, PayloadKind::ForwardedAuthnRequest},
      // no point in connection 3 without sufficient trust in the user's IdP
      TrustCheckStep{Role::SPIdP, Role::UserIdP, RelationshipId::C,
                     params.threshold_c},
      // 3: authentication request to the user's IdP
      MessageStep{Role::SPIdP, Role::UserIdP, PayloadKind::AuthnRequest},
      // no prompting the user unless the SP's IdP maintains privacy
      TrustCheckStep{Role::UserIdP, Role::SPIdP, RelationshipId::D,
                     params.threshold_d},
      // 4: authentication challenge to the user
      MessageStep{Role::UserIdP, Role::User, PayloadKind::AuthnChallenge},
      // 5: credential presentation and local authentication
      MessageStep{Role::User, Role::UserIdP, PayloadKind::CredentialPresentation},
      LocalActionStep{Role::UserIdP, ActionKind::Authenticate},
      LocalActionStep{Role::UserIdP, ActionKind::IssueAssertion},
      // 6: authentication response with the identity assertion
      MessageStep{Role::UserIdP, Role::SPIdP, PayloadKind::AssertionResponse},
      LocalActionStep{Role::SPIdP, ActionKind::VerifyAssertion},
      // 7: verified result back to the SP
      MessageStep{Role::SPIdP, Role::SP, PayloadKind::VerifiedResult},
      // 8: service granted
      MessageStep{Role::SP, Role::User, PayloadKind::ServiceGrant},
  };
  return spec;
}

/// End-to-end SSO run: gather referral evidence for the C and D checks,
/// then execute the operation to its terminal status.
inline OperationOutcome run_sso(Runtime& runtime, const EntityId& user,
                                const EntityId& sp, const EntityId& user_idp,
                                const EntityId& sp_idp,
                                const SsoParams& params) {
  int depth = runtime.network().entity(sp_idp).manager().max_depth();
  if (sp_idp != user_idp)
    runtime.gather_referrals(sp_idp, user_idp,
                             TrustContext::make_good_assertions(), depth);
  if (user_idp != sp_idp)
    runtime.gather_referrals(user_idp, sp_idp,
                             TrustContext::maintain_privacy(), depth);
  OperationSpec spec = build_sso_spec(params);
  OperationInstance& inst = runtime.start(spec, {{Role::User, user},
                                                 {Role::SP, sp},
                                                 {Role::UserIdP, user_idp},
                                                 {Role::SPIdP, sp_idp}});
  return runtime.run_to_completion(inst.id);
}

}  // namespace trustweave
