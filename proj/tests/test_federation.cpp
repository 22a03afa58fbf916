#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "trustweave/federation.hpp"
#include "test_support.hpp"

using namespace trustweave;
using twtest::OmniscientManager;

namespace {
const TrustContext kCtx = TrustContext::make_good_assertions();

std::vector<EntityId> entity_vec(const TrustGraph& g) {
  auto nodes = g.entities();
  return {nodes.begin(), nodes.end()};
}
}  // namespace

TEST_CASE("refresh_federations admits peers at or above the threshold") {
  TrustGraph g;
  g.add(make_performance_arc("A", "B", kCtx, 0.9));
  g.add(make_performance_arc("A", "C", kCtx, 0.5));
  g.add(make_performance_arc("A", "D", kCtx, 0.49));
  OmniscientManager m(g, "A");
  FederationList list = refresh_federations(
      *m.manager, {kCtx, TrustValue{0.5}, 10}, entity_vec(g), 7);
  REQUIRE(list.members.size() == 2);  // threshold is inclusive
  CHECK(list.members[0].peer == "B");
  CHECK(list.members[1].peer == "C");
  CHECK(list.as_of == 7);
  CHECK(is_federated(list, "B"));
  CHECK_FALSE(is_federated(list, "D"));
  CHECK_FALSE(is_federated(list, "A"));  // never its own member
}

TEST_CASE("transitive evidence can carry a peer into the federation") {
  OmniscientManager m(twtest::three_node_example(), "A");
  FederationList list = refresh_federations(
      *m.manager, {kCtx, TrustValue{0.5}, 10}, {"A", "B", "C"});
  REQUIRE(list.members.size() == 1);
  CHECK(list.members[0].peer == "C");
  CHECK(list.members[0].basis == RatingBasis::Transitive);
  CHECK(list.members[0].value.get() == 0.9 * 0.8);
  // B only referees; there is no performance evidence about B itself
  CHECK_FALSE(is_federated(list, "B"));
}

TEST_CASE("peers without evidence never federate, even at threshold zero") {
  TrustGraph g;
  g.add(make_performance_arc("A", "B", kCtx, 0.0));
  OmniscientManager m(g, "A");
  FederationList list = refresh_federations(
      *m.manager, {kCtx, TrustValue{0.0}, 10}, {"A", "B", "Z"});
  REQUIRE(list.members.size() == 1);
  CHECK(list.members[0].peer == "B");  // zero-valued evidence still counts
  CHECK_FALSE(is_federated(list, "Z"));
}

TEST_CASE("federation lists respect context boundaries") {
  TrustGraph g;
  g.add(make_performance_arc("A", "B", TrustContext::maintain_privacy(), 0.9));
  OmniscientManager m(g, "A");
  FederationList list =
      refresh_federations(*m.manager, {kCtx, TrustValue{0.1}, 10}, {"A", "B"});
  CHECK(list.members.empty());
}

TEST_CASE("refresh is idempotent for an unchanged store") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 30; ++i) {
    TrustGraph g = twtest::random_graph(rng);
    auto peers = entity_vec(g);
    if (peers.empty()) continue;
    OmniscientManager m(g, peers[0]);
    FederationPolicy policy{kCtx, TrustValue{0.4}, 10};
    FederationList a = refresh_federations(*m.manager, policy, peers);
    FederationList b = refresh_federations(*m.manager, policy, peers);
    REQUIRE(a.members.size() == b.members.size());
    for (std::size_t k = 0; k < a.members.size(); ++k) {
      CHECK(a.members[k].peer == b.members[k].peer);
      CHECK(a.members[k].value.get() == b.members[k].value.get());
    }
  }
}

TEST_CASE("bad direct experience only ever shrinks the federation") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 20; ++round) {
    TrustGraph g = twtest::random_graph(rng);
    auto peers = entity_vec(g);
    if (peers.size() < 2) continue;
    EntityId owner = peers[0];

    TrustStore store(owner);
    for (const TrustArc& a : g.arcs())
      if (a.trustor == owner) store.record_arc(a);
    TrustManager manager(&store, AggregationStrategy::MaxPath, 4);
    grant_full_visibility(manager, g);
    FederationPolicy policy{kCtx, TrustValue{0.3}, 10};

    FederationList prev = refresh_federations(manager, policy, peers);
    for (int step = 0; step < 10; ++step) {
      const EntityId& victim = peers[1 + rng() % (peers.size() - 1)];
      store.apply_experience({victim, kCtx, 0.0});
      FederationList next = refresh_federations(manager, policy, peers);
      for (const FederationMember& m : next.members)
        CHECK(is_federated(prev, m.peer));  // no new members appear
      prev = std::move(next);
    }
  }
}
