#pragma once

#include <algorithm>
#include <vector>

#include "trustweave/trust_manager.hpp"

namespace trustweave {

struct FederationPolicy {
  TrustContext context;
  TrustValue threshold{0.5};
  Tick refresh_every = 10;
};

struct FederationMember {
  EntityId peer;
  TrustValue value;
  RatingBasis basis = RatingBasis::None;
};

/// An entity's current list of trusted identity domains for one context:
/// the peers whose evaluated rating clears the policy threshold.
struct FederationList {
  EntityId owner;
  TrustContext context;
  TrustValue threshold;
  std::vector<FederationMember> members;  // sorted by peer id
  Tick as_of = 0;
};

/// Recompute the list from the manager's current snapshot. Unilateral:
/// A federating B says nothing about B federating A. Entities with no
/// evidence (basis None) never appear, whatever the threshold.
inline FederationList refresh_federations(const TrustManager& manager,
                                          const FederationPolicy& policy,
                                          const std::vector<EntityId>& peers,
                                          Tick now = 0) {
  FederationList list{manager.store().owner(), policy.context, policy.threshold,
                      {}, now};
  std::vector<EntityId> sorted = peers;
  std::sort(sorted.begin(), sorted.end());
  for (const EntityId& peer : sorted) {
    if (peer == list.owner) continue;
    TrustRating r = manager.evaluate_trust(peer, policy.context);
    if (r.basis == RatingBasis::None) continue;
    if (r.value < policy.threshold) continue;
    list.members.push_back({peer, r.value, r.basis});
  }
  return list;
}

inline bool is_federated(const FederationList& list, const EntityId& peer) {
  return std::any_of(list.members.begin(), list.members.end(),
                     [&](const FederationMember& m) { return m.peer == peer; });
}

}  // namespace trustweave
