// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure. Checks lean on the brute-force oracle and on exact transcript /
// log content rather than on the implementation's own intermediate state.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "trustweave/oracle.hpp"
#include "trustweave/runner.hpp"
#include "trustweave/sso.hpp"
#include "test_support.hpp"

using namespace trustweave;
using twtest::OmniscientManager;

namespace {

const TrustContext kMga = TrustContext::make_good_assertions();

int g_failures = 0;

void report(int n, const std::string& desc, bool ok) {
  std::cout << "[criterion " << n << "] " << desc << ": "
            << (ok ? "PASS" : "FAIL") << std::endl;
  if (!ok) ++g_failures;
}

bool has_line(const std::vector<std::string>& lines, const std::string& needle) {
  return std::any_of(lines.begin(), lines.end(), [&](const std::string& l) {
    return l.find(needle) != std::string::npos;
  });
}

std::vector<EntityDecl> four_party_decls() {
  return {
      {"u", {EntityRole::User}, "uidp", "pw", {{"name", "U"}}},
      {"uidp", {EntityRole::IdP}, std::nullopt, "", {}},
      {"s", {EntityRole::SP}, std::nullopt, "", {}},
      {"sidp", {EntityRole::IdP}, std::nullopt, "", {}},
  };
}

TrustGraph direct_cd(double c, double d) {
  TrustGraph g;
  g.add(make_performance_arc("sidp", "uidp", kMga, c));
  g.add(make_performance_arc("uidp", "sidp", TrustContext::maintain_privacy(), d));
  return g;
}

// ---------------------------------------------------------------- 1 and 3

bool criterion_1_and_3(bool& paths_all_valid) {
  std::mt19937_64 rng(20240801);
  paths_all_valid = true;
  const auto contexts = twtest::context_pool();
  for (int i = 0; i < 1000; ++i) {
    TrustGraph g = twtest::random_graph(rng);
    auto nodes = g.entities();
    if (nodes.size() < 2) continue;
    std::vector<EntityId> ids(nodes.begin(), nodes.end());
    PathQuery q{ids[rng() % ids.size()], ids[rng() % ids.size()],
                contexts[rng() % contexts.size()],
                static_cast<int>(1 + rng() % 5)};
    if (q.source == q.sink) continue;
    for (auto strategy : {AggregationStrategy::MaxPath,
                          AggregationStrategy::ProbabilisticSumDisjoint}) {
      OmniscientManager m(g, q.source, strategy, q.max_depth);
      TrustRating got = m.manager->evaluate_trust(q.sink, q.context);
      TrustRating want = oracle::rating(g, q, strategy);
      if (got.basis != want.basis) return false;
      if (got.value.get() != want.value.get()) return false;  // exact, on purpose
      if (got.path_count != want.path_count) return false;

      auto paths = m.manager->discover_paths(q);
      auto oracle_paths = oracle::enumerate_paths(g, q);
      if (paths.size() != oracle_paths.size()) return false;
      for (std::size_t k = 0; k < paths.size(); ++k) {
        if (paths[k].entity_sequence() != oracle_paths[k].entity_sequence())
          return false;
        if (!validate_path(paths[k], q.context, q.max_depth))
          paths_all_valid = false;
        if (k > 0 &&
            !(paths[k - 1].entity_sequence() < paths[k].entity_sequence()))
          paths_all_valid = false;
      }
    }
  }
  return true;
}

// --------------------------------------------------------------------- 2

bool criterion_2() {
  struct Case {
    double threshold_c, threshold_d;
    OpStatus expect;
    std::optional<RelationshipId> at;
  };
  // evidence is C=0.8, D=0.9; thresholds are inclusive
  const Case cases[] = {
      {0.5, 0.5, OpStatus::Succeeded, std::nullopt},
      {0.8, 0.9, OpStatus::Succeeded, std::nullopt},  // boundary passes
      {0.81, 0.5, OpStatus::TerminatedAtTrustCheck, RelationshipId::C},
      {0.5, 0.91, OpStatus::TerminatedAtTrustCheck, RelationshipId::D},
  };
  for (const Case& c : cases) {
    Network net({1}, direct_cd(0.8, 0.9), four_party_decls());
    Runtime rt(net);
    OperationOutcome out =
        run_sso(rt, "u", "s", "uidp", "sidp",
                {TrustValue{c.threshold_c}, TrustValue{c.threshold_d}, {"name"}});
    if (out.status != c.expect) return false;
    if (out.terminated_at != c.at) return false;
    if (c.at == RelationshipId::C) {
      // no point in connection 3 (or anything after it) without trust in
      // the user's IdP
      if (has_line(net.log(), "kind=authn-request")) return false;
      if (has_line(net.log(), "kind=authn-challenge")) return false;
      if (has_line(net.log(), "kind=credential-presentation")) return false;
      if (!has_line(out.transcript, "recv failure-response at=u")) return false;
    }
    if (c.at == RelationshipId::D) {
      // the user is never prompted, so no credentials ever move
      if (!has_line(net.log(), "kind=authn-request")) return false;
      if (has_line(net.log(), "kind=authn-challenge")) return false;
      if (has_line(net.log(), "kind=credential-presentation")) return false;
      if (!has_line(out.transcript, "recv failure-response at=u")) return false;
    }
    if (out.status == OpStatus::Succeeded &&
        !has_line(net.log(), "kind=service-grant"))
      return false;
  }
  return true;
}

// --------------------------------------------------------------------- 4

bool criterion_4() {
  TrustStore store("A");  // alpha 0.3
  store.record_arc(make_performance_arc("A", "B", kMga, 0.0));
  double v = 0.0;
  for (int i = 0; i < 100; ++i) v = store.apply_experience({"B", kMga, 1.0}).get();
  double closed_form = 1.0 - std::pow(0.7, 100);
  return std::abs(v - closed_form) <= 1e-12;
}

// --------------------------------------------------------------------- 5

bool criterion_5() {
  // P relies on the lying referee L for evidence about the bad asserter BA.
  TrustGraph g;
  g.add(make_referral_arc("P", "L", kMga, 0.9));
  g.add(make_performance_arc("L", "BA", kMga, 0.4));
  g.add(make_performance_arc("BA", "P", TrustContext::maintain_privacy(), 0.9));

  NetworkConfig cfg{3};
  cfg.adversaries["BA"] = parse_adversary("bad-asserter");
  cfg.adversaries["L"] = parse_adversary("lying-referee:1.0");
  std::vector<EntityDecl> decls = {
      {"U", {EntityRole::User}, "BA", "pw", {{"name", "U"}}},
      {"S", {EntityRole::SP}, std::nullopt, "", {}},
      {"P", {EntityRole::IdP}, std::nullopt, "", {}},
      {"BA", {EntityRole::IdP}, std::nullopt, "", {}},
      {"L", {EntityRole::IdP}, std::nullopt, "", {}},
  };
  Network net(cfg, g, decls);
  Runtime rt(net);
  std::map<EntityId, AttributeMap> truth{{"U", {{"name", "U"}}}};

  double prev_referral = 0.9;
  bool strictly_dropped = false;
  int detected_at = -1;
  for (int round = 1; round <= 50; ++round) {
    OperationOutcome out =
        run_sso(rt, "U", "S", "BA", "P",
                {TrustValue{0.5}, TrustValue{0.5}, {"name"}});
    experience_feedback(rt, rt.last_instance(), truth);

    if (detected_at < 0 && out.status == OpStatus::TerminatedAtTrustCheck &&
        out.terminated_at == RelationshipId::C)
      detected_at = round;
    // once refused, the liar-backed pairing must stay refused
    if (detected_at > 0 && out.status == OpStatus::Succeeded) return false;

    auto ref = net.entity("P").store().direct_rating(
        "L", TrustContext::referral(kMga), ArcKind::Referral);
    if (!ref) return false;
    if (ref->get() > prev_referral) return false;  // never recovers
    if (ref->get() < prev_referral) strictly_dropped = true;
    prev_referral = ref->get();
  }
  // the first (fooled) round succeeds on inflated referral evidence
  return detected_at == 2 && strictly_dropped;
}

// --------------------------------------------------------------------- 6

bool criterion_6() {
  TrustGraph g;
  g.add(make_referral_arc("O", "A", kMga, 0.9));
  g.add(make_referral_arc("A", "B", kMga, 0.7));
  g.add(make_performance_arc("A", "T", kMga, 0.6));
  g.add(make_performance_arc("B", "T", kMga, 0.8));
  std::vector<EntityDecl> decls = {
      {"O", {EntityRole::IdP}, std::nullopt, "", {}},
      {"A", {EntityRole::IdP}, std::nullopt, "", {}},
      {"B", {EntityRole::IdP}, std::nullopt, "", {}},
      {"T", {EntityRole::IdP}, std::nullopt, "", {}},
  };
  Network net({5}, g, decls);
  Runtime rt(net);
  std::vector<Referral> gathered = rt.gather_referrals("O", "T", kMga, 4);
  if (gathered.size() < 3) return false;  // A's two statements plus B's

  for (const Referral& original : gathered) {
    if (!verify_referral(original, net.keys()).ok) return false;
    // every single-byte corruption of the statement or signature must be
    // caught, and a caught referral must leave no trace in the manager
    for (std::size_t i = 0; i < original.statement_line.size() +
                                    original.signature.size();
         ++i) {
      Referral tampered = original;
      if (i < tampered.statement_line.size())
        tampered.statement_line[i] ^= 0x01;
      else
        tampered.signature[i - tampered.statement_line.size()] ^= 0x01;

      if (verify_referral(tampered, net.keys()).ok) return false;

      TrustStore store("O");
      store.record_arc(make_referral_arc("O", "A", kMga, 0.9));
      TrustManager manager(&store);
      if (manager.ingest_referral(tampered, net.keys()).ok) return false;
      if (manager.statement_count() != 0) return false;
      if (!manager.discover_paths({"O", "T", kMga, 4}).empty()) return false;
    }
  }
  return true;
}

// --------------------------------------------------------------------- 7

bool criterion_7() {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    TrustGraph g = twtest::random_graph(rng, 8, 20);
    auto nodes = g.entities();
    if (nodes.size() < 2) continue;
    std::vector<EntityId> peers(nodes.begin(), nodes.end());
    EntityId owner = peers[rng() % peers.size()];

    TrustStore store(owner);
    for (const TrustArc& a : g.arcs())
      if (a.trustor == owner) store.record_arc(a);
    AggregationStrategy strategy =
        (trial % 2) ? AggregationStrategy::ProbabilisticSumDisjoint
                    : AggregationStrategy::MaxPath;
    TrustManager manager(&store, strategy, 4);
    grant_full_visibility(manager, g);
    FederationPolicy policy{kMga, TrustValue{0.35}, 10};

    for (int round = 0; round < 20; ++round) {
      // random experience traffic, including the occasional referee penalty
      const EntityId& peer = peers[rng() % peers.size()];
      if (peer != owner) {
        if (rng() % 4 == 0)
          store.penalize_referee(peer, kMga);
        else
          store.apply_experience(
              {peer, kMga, static_cast<double>(rng() % 101) / 100.0});
      }

      FederationList list = refresh_federations(manager, policy, peers);

      // independent recompute over the merged evidence graph
      TrustGraph evidence;
      for (const TrustArc& a : g.arcs())
        if (a.trustor != owner) evidence.add(a);
      for (const auto& [key, arc] : store.arcs()) evidence.add(arc);

      std::vector<FederationMember> expect;
      std::vector<EntityId> sorted = peers;
      std::sort(sorted.begin(), sorted.end());
      for (const EntityId& peer_id : sorted) {
        if (peer_id == owner) continue;
        TrustRating r =
            oracle::rating(evidence, {owner, peer_id, kMga, 4}, strategy);
        if (r.basis == RatingBasis::None) continue;
        if (r.value < policy.threshold) continue;
        expect.push_back({peer_id, r.value, r.basis});
      }
      if (list.members.size() != expect.size()) return false;
      for (std::size_t i = 0; i < expect.size(); ++i) {
        if (list.members[i].peer != expect[i].peer) return false;
        if (list.members[i].value.get() != expect[i].value.get()) return false;
        if (list.members[i].basis != expect[i].basis) return false;
      }
    }
  }
  return true;
}

// --------------------------------------------------------------------- 8

bool criterion_8() {
  const std::string scenario_text =
      "seed 77\n"
      "rounds 3\n"
      "strategy psum\n"
      "entity u roles=user idp=uidp secret=pw attr.name=U\n"
      "entity uidp roles=idp\n"
      "entity s roles=sp\n"
      "entity sidp roles=idp\n"
      "entity r1 roles=idp\n"
      "adversary r1 lying-referee:0.2\n"
      "operation sso user=u sp=s user-idp=uidp sp-idp=sidp "
      "threshold-c=0.5 threshold-d=0.5 attributes=name\n"
      "federation-policy context=make-good-assertions threshold=0.5\n";
  TrustGraph g;
  g.add(make_referral_arc("sidp", "r1", kMga, 0.9));
  g.add(make_performance_arc("r1", "uidp", kMga, 0.8));
  g.add(make_performance_arc("uidp", "sidp", TrustContext::maintain_privacy(), 0.9));

  std::string logs[2], reports[2];
  for (int i = 0; i < 2; ++i) {
    std::istringstream in(scenario_text);
    ScenarioFile sc = ScenarioFile::parse(in);
    Network net = build_network(sc, g);
    Runtime rt(net);
    ScenarioResult result = run_scenario(rt, sc);
    logs[i] = net.log_text();
    reports[i] = result.report.text();
    if (result.any_nontrust_failure) return false;
  }
  return !logs[0].empty() && logs[0] == logs[1] && reports[0] == reports[1];
}

// --------------------------------------------------------------------- 9

bool criterion_9() {
  // SP and SP-IdP are one entity; insert the G and H checks explicitly and
  // watch them pass as internal-and-absolute.
  OperationSpec spec = build_sso_spec({TrustValue{0.5}, TrustValue{0.5}, {"name"}});
  spec.steps.insert(spec.steps.begin() + 1,
                    TrustCheckStep{Role::SP, Role::SPIdP, RelationshipId::G,
                                   TrustValue{0.99}});
  spec.steps.insert(spec.steps.begin() + 3,
                    TrustCheckStep{Role::SPIdP, Role::SP, RelationshipId::H,
                                   TrustValue{0.99}});
  if (!validate_spec(spec).empty()) return false;

  std::vector<EntityDecl> decls = {
      {"u", {EntityRole::User}, "uidp", "pw", {{"name", "U"}}},
      {"uidp", {EntityRole::IdP}, std::nullopt, "", {}},
      {"sp", {EntityRole::SP, EntityRole::IdP}, std::nullopt, "", {}},
  };
  TrustGraph g;
  g.add(make_performance_arc("sp", "uidp", kMga, 0.8));
  g.add(make_performance_arc("uidp", "sp", TrustContext::maintain_privacy(), 0.9));
  Network net({9}, g, decls);
  Runtime rt(net);
  OperationInstance& inst = rt.start(spec, {{Role::User, "u"},
                                            {Role::SP, "sp"},
                                            {Role::UserIdP, "uidp"},
                                            {Role::SPIdP, "sp"}});
  OperationOutcome out = rt.run_to_completion(inst.id);
  if (out.status != OpStatus::Succeeded) return false;
  // the thresholds would fail any real evaluation; co-location passes them
  if (!has_line(out.transcript, "check G internal pass")) return false;
  if (!has_line(out.transcript, "check H internal pass")) return false;
  if (!has_line(out.transcript, "elide forwarded-authn-request at=sp")) return false;
  if (!has_line(out.transcript, "elide verified-result at=sp")) return false;
  if (has_line(net.log(), "kind=forwarded-authn-request")) return false;
  if (has_line(net.log(), "kind=verified-result")) return false;
  return out.assertion && out.assertion->audience == "sp";
}

}  // namespace

int main() {
  bool paths_all_valid = false;
  bool c1;
  try {
    c1 = criterion_1_and_3(paths_all_valid);
  } catch (const std::exception& e) {
    std::cerr << "criterion 1/3 threw: " << e.what() << "\n";
    c1 = false;
  }
  report(1, "trust evaluation matches the brute-force oracle exactly", c1);

  auto guarded = [](auto&& fn) -> bool {
    try {
      return fn();
    } catch (const std::exception& e) {
      std::cerr << "criterion threw: " << e.what() << "\n";
      return false;
    }
  };

  report(2, "trust checks C and D gate the SSO connection sequence",
         guarded(criterion_2));
  report(3, "every discovered path satisfies the chain invariants",
         c1 && paths_all_valid);
  report(4, "repeated unanimous experience follows the EMA closed form",
         guarded(criterion_4));
  report(5, "a lying referee is penalized and its pairing stays refused",
         guarded(criterion_5));
  report(6, "every single-byte tampering of a referral is caught and discarded",
         guarded(criterion_6));
  report(7, "federation membership matches an independent recompute",
         guarded(criterion_7));
  report(8, "identical seeds reproduce logs and reports byte for byte",
         guarded(criterion_8));
  report(9, "co-located SP/SP-IdP elides messages and passes G/H internally",
         guarded(criterion_9));

  return g_failures == 0 ? 0 : 1;
}
